#include "gazezsl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gazezsl/common.hpp"

namespace gazezsl {

void SplitSpec::validate(const std::vector<std::string>& classes) const {
    if (train.empty() || val.empty() || test.empty()) throw ValidationError("split has an empty partition");
    const std::set<std::string> all(classes.begin(), classes.end());
    std::set<std::string> seen;
    for (const auto* part : {&train, &val, &test}) {
        for (const auto& c : *part) {
            if (!all.count(c)) throw ValidationError("split references unknown class '" + c + "'");
            if (!seen.insert(c).second) throw ValidationError("class '" + c + "' appears in two partitions");
        }
    }
}

std::vector<SplitSpec> make_splits(const std::vector<std::string>& classes, std::size_t n_splits, std::uint64_t seed) {
    const std::size_t c = classes.size();
    if (c < 4) throw ValidationError("zero-shot splits need at least 4 classes, got " + std::to_string(c));
    const std::size_t quarter = c / 4;

    std::vector<SplitSpec> splits;
    std::set<std::vector<std::size_t>> seen;
    for (std::size_t s = 0; s < n_splits; ++s) {
        const std::uint64_t split_seed = mix_seed(seed, s);
        Rng rng(split_seed);
        std::vector<std::size_t> order(c);
        std::vector<std::size_t> key;
        // Redraw duplicates; a bounded number of attempts keeps tiny class
        // sets (few distinct partitions) from looping forever.
        for (int attempt = 0; attempt < 1000; ++attempt) {
            for (std::size_t i = 0; i < c; ++i) order[i] = i;
            rng.shuffle(order);
            std::vector<std::size_t> test(order.begin(), order.begin() + quarter);
            std::vector<std::size_t> val(order.begin() + quarter, order.begin() + 2 * quarter);
            std::sort(test.begin(), test.end());
            std::sort(val.begin(), val.end());
            key = test;
            key.push_back(c);  // separator
            key.insert(key.end(), val.begin(), val.end());
            if (!seen.count(key)) break;
        }
        seen.insert(key);

        std::vector<int> role(c, 0);  // 0 train, 1 val, 2 test
        for (std::size_t i = 0; i < quarter; ++i) role[order[i]] = 2;
        for (std::size_t i = quarter; i < 2 * quarter; ++i) role[order[i]] = 1;
        SplitSpec split;
        split.seed = split_seed;
        for (std::size_t i = 0; i < c; ++i) {
            (role[i] == 0 ? split.train : role[i] == 1 ? split.val : split.test).push_back(classes[i]);
        }
        splits.push_back(std::move(split));
    }
    return splits;
}

double per_class_accuracy(const std::vector<std::size_t>& predictions, const std::vector<std::size_t>& truths,
                          std::size_t n_classes) {
    if (predictions.empty() || predictions.size() != truths.size()) {
        throw ValidationError("per-class accuracy needs aligned, non-empty predictions and truths");
    }
    std::vector<double> hits(n_classes, 0.0), totals(n_classes, 0.0);
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (truths[i] >= n_classes) throw ValidationError("truth label outside class list");
        totals[truths[i]] += 1.0;
        if (predictions[i] == truths[i]) hits[truths[i]] += 1.0;
    }
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (totals[c] == 0.0) continue;
        sum += hits[c] / totals[c];
        ++present;
    }
    return sum / static_cast<double>(present);
}

double per_class_accuracy(const std::vector<std::string>& predictions, const std::vector<std::string>& truths,
                          const std::vector<std::string>& classes) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < classes.size(); ++i) index.emplace(classes[i], i);
    auto lookup = [&](const std::string& label, bool is_truth) {
        const auto it = index.find(label);
        if (it != index.end()) return it->second;
        if (is_truth) throw ValidationError("truth label '" + label + "' not in class list");
        return classes.size();  // a prediction outside the list never matches
    };
    std::vector<std::size_t> p, t;
    for (const auto& s : predictions) p.push_back(lookup(s, false));
    for (const auto& s : truths) t.push_back(lookup(s, true));
    return per_class_accuracy(p, t, classes.size());
}

CvOutcome cross_validate(const std::vector<GridPoint>& grid, const std::function<double(const GridPoint&)>& validate,
                         const std::function<double(const GridPoint&)>& test) {
    if (grid.empty()) throw ConfigError("cv.grid", "cross-validation grid is empty");
    CvOutcome out;
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out.val_by_point.push_back(validate(grid[i]));
        if (i == 0) continue;
        const double a = out.val_by_point[i], b = out.val_by_point[best];
        const auto& g = grid[i];
        const auto& h = grid[best];
        if (a > b || (a == b && (g.learning_rate < h.learning_rate ||
                                 (g.learning_rate == h.learning_rate && g.epochs < h.epochs)))) {
            best = i;
        }
    }
    out.best = grid[best];
    out.val_accuracy = out.val_by_point[best];
    out.test_accuracy = test(out.best);
    return out;
}

nlohmann::ordered_json ResultRecord::to_json() const {
    nlohmann::ordered_json j;
    j["name"] = name;
    j["config"] = config;
    auto& arr = j["splits"] = nlohmann::ordered_json::array();
    for (const auto& s : splits) {
        arr.push_back({{"split", s.split},
                       {"learning_rate", s.chosen.learning_rate},
                       {"epochs", s.chosen.epochs},
                       {"val_accuracy", s.val_accuracy},
                       {"test_accuracy", s.test_accuracy}});
    }
    j["mean"] = mean;
    j["std"] = stddev;
    return j;
}

void summarize(ResultRecord& record) {
    if (record.splits.empty()) {
        record.mean = record.stddev = 0.0;
        return;
    }
    double sum = 0.0;
    for (const auto& s : record.splits) sum += s.test_accuracy;
    const double n = static_cast<double>(record.splits.size());
    record.mean = sum / n;
    double sq = 0.0;
    for (const auto& s : record.splits) sq += (s.test_accuracy - record.mean) * (s.test_accuracy - record.mean);
    record.stddev = std::sqrt(sq / n);
}

namespace {

struct Partition {
    std::vector<Example> examples;  // label = row in the partition's class list
};

Partition examples_for(const DatasetManifest& manifest, const FeatureMatrix& features,
                       const std::vector<std::string>& classes) {
    std::map<std::string, std::size_t> row;
    for (std::size_t i = 0; i < classes.size(); ++i) row.emplace(classes[i], i);
    Partition p;
    for (const auto& img : manifest.images) {
        const auto it = row.find(img.class_label);
        if (it == row.end()) continue;
        p.examples.push_back({features.rows.row(static_cast<Eigen::Index>(img.feature_row)).transpose(), it->second});
    }
    return p;
}

std::vector<EmbeddingSet> subsets(const std::vector<EmbeddingSet>& sets, const std::vector<std::string>& labels) {
    std::vector<EmbeddingSet> out;
    out.reserve(sets.size());
    for (const auto& s : sets) out.push_back(s.subset(labels));
    return out;
}

double evaluate(const std::vector<CompatibilityModel>& models, const std::vector<EmbeddingSet>& classes,
                const Partition& part) {
    std::vector<std::size_t> predicted, truth;
    predicted.reserve(part.examples.size());
    for (const auto& ex : part.examples) {
        predicted.push_back(models.size() == 1 ? predict_index(models[0], ex.image, classes[0])
                                               : predict_late_index(models, ex.image, classes));
        truth.push_back(ex.label);
    }
    return per_class_accuracy(predicted, truth, classes.front().size());
}

SplitResult run_split(const DatasetManifest& manifest, const FeatureMatrix& features, const SideInfoProvider& side_info,
                      const SplitSpec& split, std::size_t index, const ExperimentConfig& config) {
    split.validate(manifest.classes);
    const auto side = side_info(split);
    if (side.empty()) throw ValidationError("side-information provider returned no embeddings");
    const auto train_sets = subsets(side, split.train);
    const auto val_sets = subsets(side, split.val);
    const auto test_sets = subsets(side, split.test);
    const auto train = examples_for(manifest, features, split.train);
    const auto val = examples_for(manifest, features, split.val);
    const auto test = examples_for(manifest, features, split.test);
    if (train.examples.empty() || val.examples.empty() || test.examples.empty()) {
        throw ValidationError("split " + std::to_string(index) + " has a partition without images");
    }

    // One training run per learning rate; every grid epoch count is a
    // snapshot of that run (later epochs continue the same SGD sequence).
    std::map<std::pair<double, int>, std::vector<CompatibilityModel>> trained;
    auto models_for = [&](const GridPoint& g) -> const std::vector<CompatibilityModel>& {
        const auto key = std::make_pair(g.learning_rate, g.epochs);
        if (const auto it = trained.find(key); it != trained.end()) return it->second;
        std::set<int> wanted;
        for (const auto& h : config.grid) {
            if (h.learning_rate == g.learning_rate) wanted.insert(h.epochs);
        }
        TrainConfig tc;
        tc.learning_rate = g.learning_rate;
        tc.epochs = *wanted.rbegin();
        tc.seed = mix_seed(config.seed, index);
        tc.shuffle = config.shuffle;
        for (const auto& set : train_sets) {
            train_sje(train.examples, set, tc, [&](int epoch, const CompatibilityModel& m, double) {
                if (wanted.count(epoch)) {
                    auto snapshot = m;
                    snapshot.config.epochs = epoch;
                    trained[{g.learning_rate, epoch}].push_back(std::move(snapshot));
                }
            });
        }
        return trained.at(key);
    };

    const auto cv = cross_validate(
        config.grid, [&](const GridPoint& g) { return evaluate(models_for(g), val_sets, val); },
        [&](const GridPoint& g) { return evaluate(models_for(g), test_sets, test); });
    return {index, cv.best, cv.val_accuracy, cv.test_accuracy};
}

}  // namespace

std::vector<CompatibilityModel> train_on_classes(const DatasetManifest& manifest, const FeatureMatrix& features,
                                                const std::vector<EmbeddingSet>& side,
                                                const std::vector<std::string>& classes, const TrainConfig& config) {
    const auto part = examples_for(manifest, features, classes);
    if (part.examples.empty()) throw ValidationError("no images for the training classes");
    std::vector<CompatibilityModel> models;
    for (const auto& set : subsets(side, classes)) models.push_back(train_sje(part.examples, set, config));
    return models;
}

double evaluate_on_classes(const std::vector<CompatibilityModel>& models, const DatasetManifest& manifest,
                           const FeatureMatrix& features, const std::vector<EmbeddingSet>& side,
                           const std::vector<std::string>& classes) {
    const auto part = examples_for(manifest, features, classes);
    if (part.examples.empty()) throw ValidationError("no images for the evaluated classes");
    if (models.size() != side.size()) throw DimensionError("model count differs from embedding set count");
    return evaluate(models, subsets(side, classes), part);
}

ResultRecord run_experiment(const DatasetManifest& manifest, const FeatureMatrix& features,
                            const SideInfoProvider& side_info, const std::vector<SplitSpec>& splits,
                            const ExperimentConfig& config) {
    if (config.grid.empty()) throw ConfigError("cv.grid", "cross-validation grid is empty");
    if (static_cast<std::size_t>(features.rows.rows()) != manifest.images.size()) {
        throw ValidationError("feature matrix does not match manifest");
    }
    ResultRecord record;
    record.name = config.name;
    record.config = config.snapshot;
    record.splits.resize(splits.size());
    parallel_for(splits.size(), config.threads, [&](std::size_t i) {
        record.splits[i] = run_split(manifest, features, side_info, splits[i], i, config);
    });
    summarize(record);
    return record;
}

SideInfoProvider make_provider(const DatasetManifest& manifest, const SideData& data, const SourceSpec& spec) {
    const auto& classes = manifest.classes;
    auto fixed = [](std::vector<EmbeddingSet> sets) -> SideInfoProvider {
        return [sets = std::move(sets)](const SplitSpec&) { return sets; };
    };
    switch (spec.source) {
        case EmbeddingSource::gh:
        case EmbeddingSource::gfg:
        case EmbeddingSource::gfs: {
            GazeEncoding enc = spec.encoding;
            enc.encoder = spec.source;
            return [&data, enc, fusion = spec.fusion, classes](const SplitSpec& split) {
                return build_gaze_embeddings(data.gaze, enc, fusion, classes, split.train, enc.encoder);
            };
        }
        case EmbeddingSource::random:
            return [&manifest, &data, spec](const SplitSpec& split) {
                std::vector<std::string> participants;
                for (const auto& p : data.gaze) participants.push_back(p.participant);
                return embed_random_points(manifest, participants, spec.encoding, spec.fusion, spec.random_points,
                                           spec.random_seed, split.train);
            };
        case EmbeddingSource::central:
            return [&manifest, &data, spec](const SplitSpec& split) {
                std::vector<std::string> participants;
                for (const auto& p : data.gaze) participants.push_back(p.participant);
                return embed_central_point(manifest, participants, spec.encoding, spec.fusion, split.train);
            };
        case EmbeddingSource::saliency:
            if (data.saliency.empty()) throw ValidationError("saliency source needs saliency/<image_id>.txt maps");
            return fixed({standardize(embed_saliency_histogram(manifest, data.saliency, spec.encoding.grid))});
        case EmbeddingSource::bubbles:
            if (data.bubbles.empty()) throw ValidationError("bubbles source needs bubbles.csv");
            return fixed({standardize(encode_bubbles_bfs(data.bubbles, manifest, spec.bubble_sequence))});
        case EmbeddingSource::attributes:
            if (!data.attributes) throw ValidationError("attributes source needs attributes.txt");
            return fixed({standardize(data.attributes->subset(classes))});
        case EmbeddingSource::bow: {
            if (data.documents.empty()) throw ValidationError("bow source needs corpus/<class>.txt documents");
            auto bow = build_bow_embeddings(data.documents, spec.bow_vocab).set;
            return fixed({standardize(bow.subset(classes))});
        }
        case EmbeddingSource::fused: {
            if (!data.attributes) throw ValidationError("fused source needs attributes.txt");
            if (spec.fusion == FusionMode::late) throw ConfigError("embedding.fusion", "attributes+gaze needs AVG or EARLY");
            GazeEncoding enc = spec.encoding;
            return [&data, enc, fusion = spec.fusion, classes](const SplitSpec& split) {
                const auto gaze = build_gaze_embeddings(data.gaze, enc, fusion, classes, split.train, enc.encoder);
                return std::vector<EmbeddingSet>{fuse_embeddings(data.attributes->subset(classes), gaze.front())};
            };
        }
    }
    throw ConfigError("embedding.source", "unsupported source");
}

std::string to_string(AblationMode mode) {
    switch (mode) {
        case AblationMode::same_images: return "same_images";
        case AblationMode::same_locations_concat: return "same_locations_concat";
        case AblationMode::same_locations_avg: return "same_locations_avg";
        case AblationMode::same_locations_rand: return "same_locations_rand";
    }
    return "unknown";
}

AblationMode parse_ablation(std::string_view name) {
    for (auto m : {AblationMode::same_images, AblationMode::same_locations_concat, AblationMode::same_locations_avg,
                   AblationMode::same_locations_rand}) {
        if (to_string(m) == name) return m;
    }
    throw ConfigError("ablation.mode", "unknown ablation mode '" + std::string(name) + "'");
}

bool inside_any_bubble(double x, double y, const std::vector<Bubble>& bubbles) {
    return std::any_of(bubbles.begin(), bubbles.end(), [&](const Bubble& b) {
        const double dx = x - b.x, dy = y - b.y;
        return dx * dx + dy * dy <= b.radius * b.radius;
    });
}

GazeCorpus ablate_corpus(const GazeCorpus& corpus, const std::vector<BubbleTrack>& tracks, AblationMode mode,
                         std::uint64_t seed) {
    std::map<std::string, const std::vector<Bubble>*> bubbles_of;
    for (const auto& t : tracks) bubbles_of.emplace(t.image_id, &t.bubbles);

    GazeCorpus out;
    for (std::size_t p = 0; p < corpus.size(); ++p) {
        ParticipantScanpaths q{corpus[p].participant, {}};
        for (std::size_t s = 0; s < corpus[p].paths.size(); ++s) {
            const auto& path = corpus[p].paths[s];
            const auto it = bubbles_of.find(path.image_id);
            if (it == bubbles_of.end()) continue;
            if (mode == AblationMode::same_images) {
                q.paths.push_back(path);
                continue;
            }
            std::vector<Fixation> kept;
            for (const auto& f : path.fixations) {
                if (inside_any_bubble(f.x, f.y, *it->second)) kept.push_back(f);
            }
            if (!kept.empty() && mode == AblationMode::same_locations_avg) {
                Fixation mean{0.0, 0.0, 0.0, 0.0, kept.front().onset};
                for (const auto& f : kept) {
                    mean.x += f.x;
                    mean.y += f.y;
                    mean.duration += f.duration;
                    mean.pupil += f.pupil;
                }
                const double n = static_cast<double>(kept.size());
                mean.x /= n;
                mean.y /= n;
                mean.duration /= n;
                mean.pupil /= n;
                kept = {mean};
            } else if (!kept.empty() && mode == AblationMode::same_locations_rand) {
                Rng rng(mix_seed(mix_seed(seed, p), s));
                kept = {kept[rng.index(kept.size())]};
            }
            q.paths.push_back({path.image_id, path.label, std::move(kept)});
        }
        out.push_back(std::move(q));
    }
    return out;
}

ResultRecord ablate_bubbles(AblationMode mode, const DatasetManifest& manifest, const FeatureMatrix& features,
                            const GazeCorpus& corpus, const std::vector<BubbleTrack>& tracks,
                            const GazeEncoding& encoding, FusionMode fusion, const std::vector<SplitSpec>& splits,
                            const ExperimentConfig& config) {
    if (tracks.empty()) throw ValidationError("ablation needs bubble tracks");
    const auto reduced = ablate_corpus(corpus, tracks, mode, config.seed);
    GazeEncoding enc = encoding;
    enc.encoder = EmbeddingSource::gfs;
    const auto& classes = manifest.classes;
    // Fail early with the mode in the message rather than inside a split.
    for (const auto& p : reduced) {
        for (const auto& c : classes) {
            const bool any = std::any_of(p.paths.begin(), p.paths.end(),
                                         [&](const Scanpath& s) { return s.label == c && !s.fixations.empty(); });
            if (!any) {
                throw ValidationError("ablation mode " + to_string(mode) + " leaves class '" + c +
                                      "' without gaze for participant '" + p.participant + "'");
            }
        }
    }
    SideInfoProvider provider = [&reduced, enc, fusion, &classes](const SplitSpec& split) {
        return build_gaze_embeddings(reduced, enc, fusion, classes, split.train, EmbeddingSource::gfs);
    };
    ExperimentConfig cfg = config;
    cfg.name = config.name + ":" + to_string(mode);
    return run_experiment(manifest, features, provider, splits, cfg);
}

}  // namespace gazezsl
