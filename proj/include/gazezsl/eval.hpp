#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gazezsl/baselines.hpp"
#include "gazezsl/corpus.hpp"
#include "gazezsl/ingest.hpp"
#include "gazezsl/model.hpp"

namespace gazezsl {

// Disjoint train/validation/test class lists.
struct SplitSpec {
    std::vector<std::string> train, val, test;
    std::uint64_t seed = 0;

    // Throws ValidationError unless the three lists are non-empty, pairwise
    // disjoint and drawn from `classes`.
    void validate(const std::vector<std::string>& classes) const;
};

// test = val = floor(C/4) classes, train = the rest. Classes within each
// list keep manifest order. Splits are distinct whenever enough distinct
// partitions exist.
std::vector<SplitSpec> make_splits(const std::vector<std::string>& classes, std::size_t n_splits, std::uint64_t seed);

// Mean over classes present in `truths` of the within-class hit rate.
double per_class_accuracy(const std::vector<std::string>& predictions, const std::vector<std::string>& truths,
                          const std::vector<std::string>& classes);
double per_class_accuracy(const std::vector<std::size_t>& predictions, const std::vector<std::size_t>& truths,
                          std::size_t n_classes);

struct GridPoint {
    double learning_rate = 0.1;
    int epochs = 10;

    bool operator==(const GridPoint&) const = default;
};

struct CvOutcome {
    GridPoint best;
    double val_accuracy = 0.0;
    double test_accuracy = 0.0;
    std::vector<double> val_by_point;  // aligned with the grid
};

// Picks the grid point with the highest validation accuracy (ties: smaller
// learning rate, then fewer epochs, then earlier in the grid) and evaluates
// only that point on the test classes.
CvOutcome cross_validate(const std::vector<GridPoint>& grid, const std::function<double(const GridPoint&)>& validate,
                         const std::function<double(const GridPoint&)>& test);

// Class side information for one split: a single set, or one set per
// participant when the fusion is LATE. Every set covers all manifest classes.
using SideInfoProvider = std::function<std::vector<EmbeddingSet>(const SplitSpec&)>;

struct ExperimentConfig {
    std::string name = "experiment";
    std::vector<GridPoint> grid{{0.1, 10}};
    std::uint64_t seed = 0;
    bool shuffle = true;
    unsigned threads = 1;
    nlohmann::ordered_json snapshot;  // echoed into the record
};

struct SplitResult {
    std::size_t split = 0;
    GridPoint chosen;
    double val_accuracy = 0.0;
    double test_accuracy = 0.0;
};

struct ResultRecord {
    std::string name;
    nlohmann::ordered_json config;
    std::vector<SplitResult> splits;
    double mean = 0.0;
    double stddev = 0.0;  // population (divisor n)

    nlohmann::ordered_json to_json() const;
};

void summarize(ResultRecord& record);

ResultRecord run_experiment(const DatasetManifest& manifest, const FeatureMatrix& features,
                            const SideInfoProvider& side_info, const std::vector<SplitSpec>& splits,
                            const ExperimentConfig& config);

// One model per embedding set, trained on the images of `classes`.
std::vector<CompatibilityModel> train_on_classes(const DatasetManifest& manifest, const FeatureMatrix& features,
                                                const std::vector<EmbeddingSet>& side,
                                                const std::vector<std::string>& classes, const TrainConfig& config);

// Per-class accuracy over the images of `classes`, choosing among `classes`
// only (late fusion when there are several models).
double evaluate_on_classes(const std::vector<CompatibilityModel>& models, const DatasetManifest& manifest,
                           const FeatureMatrix& features, const std::vector<EmbeddingSet>& side,
                           const std::vector<std::string>& classes);

// Everything a provider may draw side information from.
struct SideData {
    GazeCorpus gaze;
    std::vector<BubbleTrack> bubbles;
    std::optional<EmbeddingSet> attributes;
    std::vector<CorpusDocument> documents;
    std::map<std::string, Eigen::MatrixXd> saliency;
};

struct SourceSpec {
    EmbeddingSource source = EmbeddingSource::gfs;
    GazeEncoding encoding;  // gaze encoders, random and central points
    FusionMode fusion = FusionMode::early;
    std::size_t random_points = 10;
    std::uint64_t random_seed = 0;
    std::size_t bow_vocab = 1000;
    SequenceSpec bubble_sequence;
};

// Builds the provider for one side-information source. Gaze-derived sets
// derive k from the split's training classes; fixed sources are computed once.
SideInfoProvider make_provider(const DatasetManifest& manifest, const SideData& data, const SourceSpec& spec);

enum class AblationMode { same_images, same_locations_concat, same_locations_avg, same_locations_rand };

std::string to_string(AblationMode mode);
AblationMode parse_ablation(std::string_view name);

// True when (x, y) lies in the closed disc of any bubble.
bool inside_any_bubble(double x, double y, const std::vector<Bubble>& bubbles);

// Gaze corpus reduced per ablation mode. Scanpaths of images without bubble
// tracks are dropped; location modes keep fixations inside a bubble, then
// keep all (concat), their mean (avg) or one seeded pick (rand).
GazeCorpus ablate_corpus(const GazeCorpus& corpus, const std::vector<BubbleTrack>& tracks, AblationMode mode,
                         std::uint64_t seed);

// GFS side information from the ablated corpus, run through run_experiment.
ResultRecord ablate_bubbles(AblationMode mode, const DatasetManifest& manifest, const FeatureMatrix& features,
                            const GazeCorpus& corpus, const std::vector<BubbleTrack>& tracks,
                            const GazeEncoding& encoding, FusionMode fusion, const std::vector<SplitSpec>& splits,
                            const ExperimentConfig& config);

}  // namespace gazezsl
