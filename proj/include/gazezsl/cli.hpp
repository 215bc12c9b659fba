#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gazezsl/corpus.hpp"
#include "gazezsl/eval.hpp"
#include "gazezsl/fixation.hpp"
#include "gazezsl/model.hpp"
#include "gazezsl/synth.hpp"

namespace gazezsl::cli {

// Inclusive numeric range "a..b[:step]". Without a step the range holds ten
// evenly spaced values; a single number is a one-value range.
struct Range {
    double lo = 0.0, hi = 0.0, step = 0.0;  // step 0 = ten values

    std::vector<double> values() const;
    std::string to_string() const;
};

Range parse_range(std::string_view text, const std::string& field);

struct SweepSpec {
    Range ws{5.0, 50.0, 5.0};
    Range ts{1.0, 100.0, 11.0};
    std::size_t splits = 10;
    double train_fraction = 0.5;
    std::uint64_t seed = 0;
    SvmConfig svm;
};

struct RunConfig {
    std::string data = "data";
    std::string run_name;  // empty: the command name
    std::string label;     // dataset column in reports; empty: data dir name
    FilterParams filter;
    GazeEncoding encoding;
    FusionMode fusion = FusionMode::early;
    std::vector<EmbeddingSource> sources{EmbeddingSource::gfs};
    std::vector<double> learning_rates{0.001, 0.01, 0.1};
    std::vector<int> epochs{5, 10, 20};
    std::size_t split_count = 10;
    std::uint64_t split_seed = 0;
    std::size_t train_split = 0;
    std::uint64_t seed = 0;
    bool shuffle = true;
    unsigned threads = 0;  // 0: all cores; never affects results
    std::size_t random_points = 10;
    std::uint64_t random_seed = 0;
    std::size_t bow_vocab = 1000;
    std::vector<AblationMode> ablation{AblationMode::same_images, AblationMode::same_locations_concat,
                                       AblationMode::same_locations_avg, AblationMode::same_locations_rand};
    SweepSpec sweep;
    synth::SynthSpec synth;
    std::string layout = "baselines";  // report: baselines | ablation | datasets | sweep
    std::vector<std::string> inputs;   // report: run directories

    std::vector<GridPoint> grid() const;
    unsigned thread_count() const;
};

// Rejects unknown keys and wrong types; ConfigError::field() is the dotted
// path of the offending key. Missing keys keep their defaults.
RunConfig parse_run_config(const nlohmann::json& doc);

// Complete, resolved configuration in canonical form. Round-trips through
// parse_run_config. The thread count is left out so snapshots do not depend
// on the machine.
nlohmann::ordered_json to_json(const RunConfig& config);

// A failure inside one pipeline stage.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what);
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

// Directory for a run: $GAZEZSL_RUN_ROOT (default "runs") / run name.
std::string run_directory(const RunConfig& config, const std::string& command);

// Executes one subcommand, writing artifacts into its run directory and a
// short summary to `out`. Throws ConfigError or StageError.
void run_command(const std::string& command, const RunConfig& config, std::ostream& out);

// Per-image probe features for the sweep: GFS [x, y, d, a1, a2, R] per
// participant, concatenated over participants (zeros where a participant has
// no fixations on the image).
struct ProbeData {
    std::vector<Eigen::VectorXd> samples;
    std::vector<std::string> labels;
};
ProbeData probe_features(const GazeCorpus& corpus, const DatasetManifest& manifest);

// Mean and population std of the OvR probe's per-class accuracy over random
// image splits.
std::pair<double, double> probe_accuracy(const ProbeData& data, const SweepSpec& spec, const std::vector<std::string>& classes);

// Table renderers over result records (one JSON object per line).
std::string render_report(const std::string& layout, const std::vector<std::pair<std::string, std::vector<nlohmann::json>>>& runs);

}  // namespace gazezsl::cli
