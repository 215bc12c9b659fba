#include "gazezsl/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gazezsl/common.hpp"
#include "gazezsl/text.hpp"

namespace gazezsl {

namespace {

std::vector<std::string> participants_or_default(const std::vector<std::string>& participants) {
    if (participants.empty()) return {"all"};
    return participants;
}

}  // namespace

GazeCorpus random_points_corpus(const DatasetManifest& manifest, const std::vector<std::string>& participants,
                                std::size_t count, std::uint64_t seed) {
    GazeCorpus corpus;
    const auto names = participants_or_default(participants);
    for (std::size_t p = 0; p < names.size(); ++p) {
        Rng rng(mix_seed(seed, p));
        ParticipantScanpaths ps{names[p], {}};
        for (const auto& img : manifest.images) {
            Scanpath path{img.image_id, img.class_label, {}};
            for (std::size_t i = 0; i < count; ++i) {
                Fixation f;
                f.x = rng.uniform();
                f.y = rng.uniform();
                f.duration = 1.0;
                f.pupil = 1.0;
                f.onset = static_cast<double>(i);
                path.fixations.push_back(f);
            }
            ps.paths.push_back(std::move(path));
        }
        corpus.push_back(std::move(ps));
    }
    return corpus;
}

GazeCorpus central_point_corpus(const DatasetManifest& manifest, const std::vector<std::string>& participants) {
    GazeCorpus corpus;
    for (const auto& name : participants_or_default(participants)) {
        ParticipantScanpaths ps{name, {}};
        for (const auto& img : manifest.images) {
            ps.paths.push_back({img.image_id, img.class_label, {Fixation{0.5, 0.5, 1.0, 1.0, 0.0}}});
        }
        corpus.push_back(std::move(ps));
    }
    return corpus;
}

std::vector<EmbeddingSet> embed_random_points(const DatasetManifest& manifest,
                                              const std::vector<std::string>& participants,
                                              const GazeEncoding& encoding, FusionMode fusion, std::size_t count,
                                              std::uint64_t seed, const std::vector<std::string>& k_classes) {
    if (count == 0) throw ConfigError("baseline.random_points", "count must be >= 1");
    return build_gaze_embeddings(random_points_corpus(manifest, participants, count, seed), encoding, fusion,
                                 manifest.classes, k_classes, EmbeddingSource::random);
}

std::vector<EmbeddingSet> embed_central_point(const DatasetManifest& manifest,
                                              const std::vector<std::string>& participants,
                                              const GazeEncoding& encoding, FusionMode fusion,
                                              const std::vector<std::string>& k_classes) {
    const auto corpus = central_point_corpus(manifest, participants);
    // Central-point embeddings are identical across classes, so the usual
    // standardization would map them all to zero; they are returned raw.
    std::vector<EmbeddingSet> per_participant;
    for (const auto& p : corpus) {
        per_participant.push_back(encode_participant(p, encoding, manifest.classes, k_classes, EmbeddingSource::central));
    }
    if (fusion == FusionMode::late) return per_participant;
    return {combine_participants(per_participant, fusion)};
}

Eigen::VectorXd saliency_cells(const Eigen::MatrixXd& map, const GridSpec& grid) {
    grid.validate();
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.cells()));
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.cells()));
    const double h = static_cast<double>(map.rows()), w = static_cast<double>(map.cols());
    for (Eigen::Index r = 0; r < map.rows(); ++r) {
        for (Eigen::Index c = 0; c < map.cols(); ++c) {
            const auto cell = static_cast<Eigen::Index>(
                grid_cell((static_cast<double>(c) + 0.5) / w, (static_cast<double>(r) + 0.5) / h, grid));
            sums[cell] += map(r, c);
            counts[cell] += 1.0;
        }
    }
    for (Eigen::Index i = 0; i < sums.size(); ++i) {
        if (counts[i] > 0.0) sums[i] /= counts[i];
    }
    return sums;
}

EmbeddingSet embed_saliency_histogram(const DatasetManifest& manifest, const std::map<std::string, Eigen::MatrixXd>& maps,
                                      const GridSpec& grid) {
    std::vector<LabeledVector> vectors;
    for (const auto& img : manifest.images) {
        const auto it = maps.find(img.image_id);
        if (it == maps.end()) throw ValidationError("missing saliency map for image '" + img.image_id + "'");
        if ((it->second.array() < 0.0).any()) {
            throw ValidationError("saliency map for image '" + img.image_id + "' has negative entries");
        }
        vectors.push_back({img.class_label, saliency_cells(it->second, grid)});
    }
    auto set = aggregate_per_class(vectors, manifest.classes, EmbeddingSource::saliency);
    set.grid = grid;
    return set;
}

std::vector<BubbleTrack> parse_bubble_tracks(std::string_view text, const std::string& origin) {
    std::vector<BubbleTrack> tracks;
    std::map<std::string, std::size_t> index;
    std::size_t line_no = 0, start = 0;
    bool header = false;
    while (start < text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) pos = text.size();
        const auto line = trim(text.substr(start, pos - start));
        start = pos + 1;
        ++line_no;
        if (line.empty()) continue;
        if (!header) {
            if (line != kBubbleHeader) throw ParseError(origin, line_no, "missing or unexpected header");
            header = true;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 4) throw ParseError(origin, line_no, "expected 4 fields");
        Bubble b;
        try {
            b = {parse_double(f[1]), parse_double(f[2]), parse_double(f[3])};
        } catch (const ValidationError& e) {
            throw ParseError(origin, line_no, e.what());
        }
        for (double v : {b.x, b.y, b.radius}) {
            if (!(v >= 0.0 && v <= 1.0)) throw ParseError(origin, line_no, "bubble values must lie in [0, 1]");
        }
        auto [it, inserted] = index.emplace(f[0], tracks.size());
        if (inserted) tracks.push_back({f[0], {}});
        tracks[it->second].bubbles.push_back(b);
    }
    if (!header) throw ParseError(origin, 1, "missing header");
    return tracks;
}

std::string format_bubble_tracks(const std::vector<BubbleTrack>& tracks) {
    std::string out(kBubbleHeader);
    out += '\n';
    for (const auto& t : tracks) {
        for (const auto& b : t.bubbles) {
            out += t.image_id + ',' + format_double(b.x) + ',' + format_double(b.y) + ',' + format_double(b.radius) + '\n';
        }
    }
    return out;
}

EmbeddingSet encode_bubbles_bfs(const std::vector<BubbleTrack>& tracks, const DatasetManifest& manifest,
                                const SequenceSpec& seq) {
    std::map<std::string, std::string> label_of;
    for (const auto& img : manifest.images) label_of.emplace(img.image_id, img.class_label);

    std::size_t k = seq.k;
    if (k == 0) {
        for (const auto& t : tracks) {
            if (!t.bubbles.empty() && label_of.count(t.image_id)) k = k == 0 ? t.bubbles.size() : std::min(k, t.bubbles.size());
        }
        if (k == 0) throw ValidationError("no bubble tracks for manifest images");
    }
    std::vector<LabeledVector> vectors;
    for (const auto& t : tracks) {
        const auto it = label_of.find(t.image_id);
        if (it == label_of.end() || t.bubbles.empty()) continue;
        const auto idx = sample_indices(t.bubbles.size(), k, seq.rule);
        Eigen::VectorXd v(3 * static_cast<Eigen::Index>(k));
        for (std::size_t i = 0; i < k; ++i) {
            const auto& b = t.bubbles[idx[i]];
            v.segment<3>(3 * static_cast<Eigen::Index>(i)) << b.x, b.y, b.radius;
        }
        vectors.push_back({it->second, std::move(v)});
    }
    auto set = aggregate_per_class(vectors, manifest.classes, EmbeddingSource::bubbles);
    set.mask = "x,y,radius";
    set.k = k;
    return set;
}

EmbeddingSet parse_attributes(std::string_view text, const std::vector<std::string>& classes, const std::string& origin) {
    std::map<std::string, Eigen::VectorXd> rows;
    std::size_t line_no = 0, start = 0;
    Eigen::Index dim = -1;
    while (start < text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) pos = text.size();
        const auto line = trim(text.substr(start, pos - start));
        start = pos + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto f = split_ws(line);
        if (f.size() < 2) throw ParseError(origin, line_no, "expected label and values");
        Eigen::VectorXd v(static_cast<Eigen::Index>(f.size() - 1));
        try {
            for (std::size_t i = 1; i < f.size(); ++i) v[static_cast<Eigen::Index>(i - 1)] = parse_double(f[i]);
        } catch (const ValidationError& e) {
            throw ParseError(origin, line_no, e.what());
        }
        if (!v.allFinite()) throw ParseError(origin, line_no, "non-finite value");
        if (dim >= 0 && v.size() != dim) throw ParseError(origin, line_no, "row dimension differs");
        dim = v.size();
        if (!rows.emplace(f[0], std::move(v)).second) throw ParseError(origin, line_no, "duplicate class '" + f[0] + "'");
    }
    EmbeddingSet set;
    set.source = EmbeddingSource::attributes;
    set.labels = classes;
    set.vectors.resize(static_cast<Eigen::Index>(classes.size()), std::max<Eigen::Index>(dim, 0));
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const auto it = rows.find(classes[i]);
        if (it == rows.end()) throw ValidationError(origin + ": no attribute row for class '" + classes[i] + "'");
        set.vectors.row(static_cast<Eigen::Index>(i)) = it->second.transpose();
    }
    return set;
}

std::string format_attributes(const EmbeddingSet& set) {
    std::string out;
    for (std::size_t i = 0; i < set.size(); ++i) {
        out += set.labels[i];
        for (Eigen::Index c = 0; c < set.vectors.cols(); ++c) {
            out += ' ' + format_double(set.vectors(static_cast<Eigen::Index>(i), c));
        }
        out += '\n';
    }
    return out;
}

BowEmbedding build_bow_embeddings(const std::vector<CorpusDocument>& docs, std::size_t vocab_size) {
    if (vocab_size == 0) throw ConfigError("baseline.bow_vocab", "must be >= 1");
    BowEmbedding result;
    std::vector<std::map<std::string, double>> counts(docs.size());
    std::map<std::string, double> totals;
    std::set<std::string> seen_labels;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        if (!seen_labels.insert(docs[d].class_label).second) {
            throw ValidationError("two documents for class '" + docs[d].class_label + "'");
        }
        for (const auto& tok : text::tokenize(docs[d].text)) {
            if (text::is_stop_word(tok)) continue;
            const auto stem = text::porter_stem(tok);
            counts[d][stem] += 1.0;
            totals[stem] += 1.0;
        }
        if (counts[d].empty()) {
            result.warnings.push_back("document for class '" + docs[d].class_label + "' has no content words");
        }
    }
    if (totals.empty()) throw ValidationError("bag-of-words vocabulary is empty after stop-word removal");

    std::vector<std::pair<std::string, double>> ranked(totals.begin(), totals.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    ranked.resize(std::min(ranked.size(), vocab_size));
    for (const auto& [stem, _] : ranked) result.vocabulary.push_back(stem);

    auto& set = result.set;
    set.source = EmbeddingSource::bow;
    set.vectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(ranked.size()));
    for (std::size_t d = 0; d < docs.size(); ++d) {
        set.labels.push_back(docs[d].class_label);
        for (std::size_t v = 0; v < result.vocabulary.size(); ++v) {
            const auto it = counts[d].find(result.vocabulary[v]);
            if (it != counts[d].end()) set.vectors(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(v)) = it->second;
        }
    }
    return result;
}

EmbeddingSet fuse_embeddings(const EmbeddingSet& a, const EmbeddingSet& b) {
    const std::set<std::string> la(a.labels.begin(), a.labels.end()), lb(b.labels.begin(), b.labels.end());
    if (la != lb || a.labels.size() != b.labels.size()) throw ValidationError("fused sources cover different classes");
    const auto sa = standardize(a);
    const auto sb = standardize(b.subset(a.labels));
    EmbeddingSet out = sa;
    out.source = EmbeddingSource::fused;
    out.vectors.resize(sa.vectors.rows(), sa.vectors.cols() + sb.vectors.cols());
    out.vectors << sa.vectors, sb.vectors;
    out.mask = to_string(a.source) + "+" + to_string(b.source);
    return out;
}

}  // namespace gazezsl
