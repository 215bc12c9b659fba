#include <doctest.h>

#include "gazezsl/text.hpp"

using namespace gazezsl::text;

TEST_CASE("tokenizer keeps lowercase alphabetic runs") {
    CHECK(tokenize("The Red-headed woodpecker's 3 eggs!") ==
          std::vector<std::string>{"the", "red", "headed", "woodpecker", "s", "eggs"});
    CHECK(tokenize("123 ...").empty());
}

TEST_CASE("stop words") {
    CHECK(is_stop_word("the"));
    CHECK(is_stop_word("and"));
    CHECK(is_stop_word("is"));
    CHECK_FALSE(is_stop_word("red"));
    CHECK_FALSE(is_stop_word("woodpecker"));
}

TEST_CASE("porter stemmer reference pairs") {
    // Pairs from the published algorithm description and its test vocabulary.
    const std::vector<std::pair<const char*, const char*>> pairs{
        {"caresses", "caress"}, {"ponies", "poni"},       {"ties", "ti"},           {"caress", "caress"},
        {"cats", "cat"},        {"feed", "feed"},         {"agreed", "agre"},       {"plastered", "plaster"},
        {"bled", "bled"},       {"motoring", "motor"},    {"sing", "sing"},         {"conflated", "conflat"},
        {"troubled", "troubl"}, {"sized", "size"},        {"hopping", "hop"},       {"tanned", "tan"},
        {"falling", "fall"},    {"hissing", "hiss"},      {"fizzed", "fizz"},       {"failing", "fail"},
        {"filing", "file"},     {"happy", "happi"},       {"sky", "sky"},           {"relational", "relat"},
        {"conditional", "condit"}, {"rational", "ration"}, {"valenci", "valenc"},   {"digitizer", "digit"},
        {"conformabli", "conform"}, {"radicalli", "radic"}, {"differentli", "differ"}, {"vileli", "vile"},
        {"analogousli", "analog"}, {"vietnamization", "vietnam"}, {"predication", "predic"},
        {"operator", "oper"},   {"feudalism", "feudal"},  {"decisiveness", "decis"}, {"hopefulness", "hope"},
        {"callousness", "callous"}, {"formaliti", "formal"}, {"sensitiviti", "sensit"}, {"sensibiliti", "sensibl"},
        {"triplicate", "triplic"}, {"formative", "form"},  {"formalize", "formal"},  {"electriciti", "electr"},
        {"electrical", "electr"}, {"hopeful", "hope"},     {"goodness", "good"},     {"revival", "reviv"},
        {"allowance", "allow"}, {"inference", "infer"},   {"airliner", "airlin"},   {"gyroscopic", "gyroscop"},
        {"adjustable", "adjust"}, {"defensible", "defens"}, {"irritant", "irrit"},  {"replacement", "replac"},
        {"adjustment", "adjust"}, {"dependent", "depend"}, {"adoption", "adopt"},   {"homologou", "homolog"},
        {"communism", "commun"}, {"activate", "activ"},    {"angulariti", "angular"}, {"homologous", "homolog"},
        {"effective", "effect"}, {"bowdlerize", "bowdler"}, {"probate", "probat"},  {"rate", "rate"},
        {"cease", "ceas"},      {"controll", "control"},   {"roll", "roll"},         {"generalizations", "gener"},
        {"oscillators", "oscil"}, {"red", "red"},          {"head", "head"},         {"tail", "tail"},
        {"a", "a"},             {"is", "is"},
    };
    for (const auto& [word, stem] : pairs) {
        CAPTURE(word);
        CHECK(porter_stem(word) == stem);
    }
}

TEST_CASE("stemming is idempotent on common stems") {
    for (const char* w : {"run", "bird", "wing", "feather", "red", "tail"}) CHECK(porter_stem(porter_stem(w)) == porter_stem(w));
}
