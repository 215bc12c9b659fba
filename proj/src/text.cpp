#include "gazezsl/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace gazezsl::text {

std::vector<std::string> tokenize(std::string_view raw) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : raw) {
        const auto c = static_cast<unsigned char>(ch);
        if (c < 128 && std::isalpha(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

namespace {

// Sorted for binary search.
constexpr auto kStopWords = std::to_array<std::string_view>({
    "a",       "about",   "above",  "after",   "again",  "against", "all",    "am",     "an",      "and",
    "any",     "are",     "as",     "at",      "be",     "because", "been",   "before", "being",   "below",
    "between", "both",    "but",    "by",      "can",    "could",   "did",    "do",     "does",    "doing",
    "down",    "during",  "each",   "few",     "for",    "from",    "further", "had",   "has",     "have",
    "having",  "he",      "her",    "here",    "hers",   "herself", "him",    "himself", "his",    "how",
    "i",       "if",      "in",     "into",    "is",     "it",      "its",    "itself", "just",    "me",
    "more",    "most",    "my",     "myself",  "no",     "nor",     "not",    "now",    "of",      "off",
    "on",      "once",    "only",   "or",      "other",  "our",     "ours",   "ourselves", "out",  "over",
    "own",     "s",       "same",   "she",     "should", "so",      "some",   "such",   "t",       "than",
    "that",    "the",     "their",  "theirs",  "them",   "themselves", "then", "there", "these",  "they",
    "this",    "those",   "through", "to",     "too",    "under",   "until",  "up",     "very",    "was",
    "we",      "were",    "what",   "when",    "where",  "which",   "while",  "who",    "whom",    "why",
    "will",    "with",    "would",  "you",     "your",   "yours",   "yourself",
});
static_assert(std::is_sorted(kStopWords.begin(), kStopWords.end()));

class Stemmer {
public:
    explicit Stemmer(std::string_view w) : b_(w), k_(static_cast<int>(w.size()) - 1) {}

    std::string run() {
        if (k_ <= 1) return b_;
        step1ab();
        if (k_ > 0) {
            step1c();
            step2();
            step3();
            step4();
            step5();
        }
        return b_.substr(0, static_cast<std::size_t>(k_ + 1));
    }

private:
    std::string b_;
    int k_;
    int j_ = 0;

    bool cons(int i) const {
        switch (b_[i]) {
            case 'a': case 'e': case 'i': case 'o': case 'u': return false;
            case 'y': return i == 0 ? true : !cons(i - 1);
            default: return true;
        }
    }

    // Number of VC sequences in b[0..j].
    int m() const {
        int n = 0, i = 0;
        while (true) {
            if (i > j_) return n;
            if (!cons(i)) break;
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i > j_) return n;
                if (cons(i)) break;
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i > j_) return n;
                if (!cons(i)) break;
                ++i;
            }
            ++i;
        }
    }

    bool vowel_in_stem() const {
        for (int i = 0; i <= j_; ++i) {
            if (!cons(i)) return true;
        }
        return false;
    }

    bool doublec(int j) const { return j >= 1 && b_[j] == b_[j - 1] && cons(j); }

    // cvc where the final c is not w, x or y.
    bool cvc(int i) const {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
        const char ch = b_[i];
        return ch != 'w' && ch != 'x' && ch != 'y';
    }

    bool ends(std::string_view s) {
        const int len = static_cast<int>(s.size());
        if (len > k_ + 1) return false;
        if (std::string_view(b_).substr(static_cast<std::size_t>(k_ - len + 1), s.size()) != s) return false;
        j_ = k_ - len;
        return true;
    }

    void setto(std::string_view s) {
        b_.replace(static_cast<std::size_t>(j_ + 1), static_cast<std::size_t>(k_ - j_), s);
        k_ = j_ + static_cast<int>(s.size());
        b_.resize(static_cast<std::size_t>(k_ + 1));
    }

    void r(std::string_view s) {
        if (m() > 0) setto(s);
    }

    void step1ab() {
        if (b_[k_] == 's') {
            if (ends("sses")) {
                k_ -= 2;
            } else if (ends("ies")) {
                setto("i");
            } else if (b_[k_ - 1] != 's') {
                --k_;
            }
        }
        b_.resize(static_cast<std::size_t>(k_ + 1));
        if (ends("eed")) {
            if (m() > 0) --k_;
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            k_ = j_;
            b_.resize(static_cast<std::size_t>(k_ + 1));
            if (ends("at")) {
                setto("ate");
            } else if (ends("bl")) {
                setto("ble");
            } else if (ends("iz")) {
                setto("ize");
            } else if (doublec(k_)) {
                --k_;
                const char ch = b_[k_];
                if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
            } else {
                j_ = k_;
                if (m() == 1 && cvc(k_)) {
                    j_ = k_;
                    setto_append("e");
                }
            }
        }
        b_.resize(static_cast<std::size_t>(k_ + 1));
    }

    void setto_append(std::string_view s) {
        b_.resize(static_cast<std::size_t>(k_ + 1));
        b_ += s;
        k_ += static_cast<int>(s.size());
    }

    void step1c() {
        if (ends("y") && vowel_in_stem()) b_[k_] = 'i';
    }

    void step2() {
        if (k_ < 1) return;
        switch (b_[k_ - 1]) {
            case 'a':
                if (ends("ational")) { r("ate"); break; }
                if (ends("tional")) { r("tion"); break; }
                break;
            case 'c':
                if (ends("enci")) { r("ence"); break; }
                if (ends("anci")) { r("ance"); break; }
                break;
            case 'e':
                if (ends("izer")) { r("ize"); break; }
                break;
            case 'l':
                if (ends("bli")) { r("ble"); break; }
                if (ends("alli")) { r("al"); break; }
                if (ends("entli")) { r("ent"); break; }
                if (ends("eli")) { r("e"); break; }
                if (ends("ousli")) { r("ous"); break; }
                break;
            case 'o':
                if (ends("ization")) { r("ize"); break; }
                if (ends("ation")) { r("ate"); break; }
                if (ends("ator")) { r("ate"); break; }
                break;
            case 's':
                if (ends("alism")) { r("al"); break; }
                if (ends("iveness")) { r("ive"); break; }
                if (ends("fulness")) { r("ful"); break; }
                if (ends("ousness")) { r("ous"); break; }
                break;
            case 't':
                if (ends("aliti")) { r("al"); break; }
                if (ends("iviti")) { r("ive"); break; }
                if (ends("biliti")) { r("ble"); break; }
                break;
            case 'g':
                if (ends("logi")) { r("log"); break; }
                break;
            default: break;
        }
    }

    void step3() {
        switch (b_[k_]) {
            case 'e':
                if (ends("icate")) { r("ic"); break; }
                if (ends("ative")) { r(""); break; }
                if (ends("alize")) { r("al"); break; }
                break;
            case 'i':
                if (ends("iciti")) { r("ic"); break; }
                break;
            case 'l':
                if (ends("ical")) { r("ic"); break; }
                if (ends("ful")) { r(""); break; }
                break;
            case 's':
                if (ends("ness")) { r(""); break; }
                break;
            default: break;
        }
    }

    void step4() {
        if (k_ < 1) return;
        switch (b_[k_ - 1]) {
            case 'a':
                if (ends("al")) break;
                return;
            case 'c':
                if (ends("ance")) break;
                if (ends("ence")) break;
                return;
            case 'e':
                if (ends("er")) break;
                return;
            case 'i':
                if (ends("ic")) break;
                return;
            case 'l':
                if (ends("able")) break;
                if (ends("ible")) break;
                return;
            case 'n':
                if (ends("ant")) break;
                if (ends("ement")) break;
                if (ends("ment")) break;
                if (ends("ent")) break;
                return;
            case 'o':
                if (ends("ion") && j_ >= 0 && (b_[j_] == 's' || b_[j_] == 't')) break;
                if (ends("ou")) break;
                return;
            case 's':
                if (ends("ism")) break;
                return;
            case 't':
                if (ends("ate")) break;
                if (ends("iti")) break;
                return;
            case 'u':
                if (ends("ous")) break;
                return;
            case 'v':
                if (ends("ive")) break;
                return;
            case 'z':
                if (ends("ize")) break;
                return;
            default: return;
        }
        if (m() > 1) {
            k_ = j_;
            b_.resize(static_cast<std::size_t>(k_ + 1));
        }
    }

    void step5() {
        j_ = k_;
        if (b_[k_] == 'e') {
            const int a = m();
            if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
        }
        if (b_[k_] == 'l' && doublec(k_)) {
            j_ = k_;
            if (m() > 1) --k_;
        }
        b_.resize(static_cast<std::size_t>(k_ + 1));
    }
};

}  // namespace

bool is_stop_word(std::string_view word) {
    return std::binary_search(kStopWords.begin(), kStopWords.end(), word);
}

std::string porter_stem(std::string_view word) { return Stemmer(word).run(); }

}  // namespace gazezsl::text
