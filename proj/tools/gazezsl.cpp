#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gazezsl/cli.hpp"
#include "gazezsl/common.hpp"

using nlohmann::json;

namespace {

// Flags that were given on the command line, as a JSON merge patch over the
// config file.
struct Overrides {
    std::string data, run_name, label, features, encoder, fusion, sources, grid, sampling, layout;
    std::string ws, ts;  // numbers, or ranges for sweep
    std::vector<std::string> inputs;
    std::vector<double> learning_rates;
    std::vector<int> epochs;
    long long k = -1, splits = -1, split_seed = -1, train_split = -1, seed = -1, threads = -1;
    long long classes = -1, images = -1, participants = -1, samples = -1, random_points = -1, vocab = -1;
    double sigma = -1.0;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--data", o.data, "dataset directory");
    cmd->add_option("--run-name", o.run_name, "run directory name under $GAZEZSL_RUN_ROOT");
    cmd->add_option("--label", o.label, "dataset label used in reports");
    cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
}

void add_pipeline(CLI::App* cmd, Overrides& o, bool sweep) {
    cmd->add_option("--ws", o.ws, sweep ? "dispersion range a..b[:step]" : "dispersion threshold (pixels)");
    cmd->add_option("--ts", o.ts, sweep ? "duration range a..b[:step]" : "minimum fixation duration (ms)");
    if (sweep) return;
    cmd->add_option("--features", o.features, "feature mask xy[,d][,ang][,pupil]");
    cmd->add_option("--encoder", o.encoder, "GH, GFG or GFS");
    cmd->add_option("--grid", o.grid, "grid as RxC");
    cmd->add_option("--k", o.k, "GFS sequence length (0 = from data)");
    cmd->add_option("--sampling", o.sampling, "even or first");
    cmd->add_option("--fusion", o.fusion, "AVG, EARLY or LATE");
    cmd->add_option("--source", o.sources, "comma-separated side-information sources");
    cmd->add_option("--lr", o.learning_rates, "learning-rate grid")->delimiter(',');
    cmd->add_option("--epochs", o.epochs, "epoch grid")->delimiter(',');
    cmd->add_option("--splits", o.splits, "number of zero-shot splits");
    cmd->add_option("--split-seed", o.split_seed, "split seed");
    cmd->add_option("--seed", o.seed, "training seed");
    cmd->add_option("--random-points", o.random_points, "points per image for the random baseline");
    cmd->add_option("--vocab", o.vocab, "bag-of-words vocabulary size");
}

json patch_from(const Overrides& o, const std::string& command) {
    json p = json::object();
    if (!o.data.empty()) p["data"] = o.data;
    if (!o.run_name.empty()) p["run_name"] = o.run_name;
    if (!o.label.empty()) p["label"] = o.label;
    if (o.threads >= 0) p["threads"] = o.threads;
    if (command == "sweep") {
        if (!o.ws.empty()) p["sweep"]["ws"] = o.ws;
        if (!o.ts.empty()) p["sweep"]["ts"] = o.ts;
        if (o.splits >= 0) p["sweep"]["splits"] = o.splits;
        if (o.seed >= 0) p["sweep"]["seed"] = o.seed;
    } else {
        auto number = [](const std::string& s, const char* field) {
            try {
                return gazezsl::parse_double(s);
            } catch (const gazezsl::Error&) {
                throw gazezsl::ConfigError(field, "expected a number, got '" + s + "'");
            }
        };
        if (!o.ws.empty()) p["filter"]["ws"] = number(o.ws, "filter.ws");
        if (!o.ts.empty()) p["filter"]["ts"] = number(o.ts, "filter.ts");
        if (o.splits >= 0) p["splits"]["count"] = o.splits;
        if (o.seed >= 0) p["training"]["seed"] = o.seed;
    }
    if (!o.features.empty()) p["encoding"]["features"] = o.features;
    if (!o.encoder.empty()) p["encoding"]["encoder"] = o.encoder;
    if (!o.sampling.empty()) p["encoding"]["sampling"] = o.sampling;
    if (o.k >= 0) p["encoding"]["k"] = o.k;
    if (!o.grid.empty()) {
        const auto x = o.grid.find('x');
        try {
            if (x == std::string::npos) throw std::invalid_argument("");
            p["encoding"]["grid"] = {{"rows", std::stoi(o.grid.substr(0, x))}, {"cols", std::stoi(o.grid.substr(x + 1))}};
        } catch (const std::exception&) {
            throw gazezsl::ConfigError("encoding.grid", "expected RxC, got '" + o.grid + "'");
        }
    }
    if (!o.fusion.empty()) p["fusion"] = o.fusion;
    if (!o.sources.empty()) {
        p["sources"] = json::array();
        for (const auto& s : gazezsl::split(o.sources, ',')) p["sources"].push_back(std::string(gazezsl::trim(s)));
    }
    if (!o.learning_rates.empty()) p["cv"]["learning_rates"] = o.learning_rates;
    if (!o.epochs.empty()) p["cv"]["epochs"] = o.epochs;
    if (o.split_seed >= 0) p["splits"]["seed"] = o.split_seed;
    if (o.train_split >= 0) p["splits"]["train_split"] = o.train_split;
    if (o.random_points >= 0) p["baselines"]["random_points"] = o.random_points;
    if (o.vocab >= 0) p["baselines"]["bow_vocab"] = o.vocab;
    if (o.classes >= 0) p["synth"]["classes"] = o.classes;
    if (o.images >= 0) p["synth"]["images_per_class"] = o.images;
    if (o.participants >= 0) p["synth"]["participants"] = o.participants;
    if (o.samples >= 0) p["synth"]["samples"] = o.samples;
    if (o.sigma >= 0.0) p["synth"]["sigma"] = o.sigma;
    if (command == "synth" && o.seed >= 0) p["synth"]["seed"] = o.seed;
    if (!o.layout.empty()) p["report"]["layout"] = o.layout;
    if (!o.inputs.empty()) p["report"]["inputs"] = o.inputs;
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zero-shot learning with gaze embeddings"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON run configuration (flags override it)");

    Overrides o;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"synth", "generate a synthetic dataset"},
        {"preprocess", "detect fixations and write them to the run directory"},
        {"embed", "build class embeddings for every source"},
        {"train", "cross-validate and train on one split, saving the model"},
        {"eval", "zero-shot evaluation over all splits"},
        {"ablate", "gaze-to-bubbles ablation ladder"},
        {"sweep", "fixation parameter sweep with the one-vs-rest probe"},
        {"report", "render tables from finished runs"},
    };
    for (const auto& [name, help] : commands) {
        auto* cmd = app.add_subcommand(name, help);
        cmd->add_option("--config", config_path, "JSON run configuration (flags override it)");
        add_common(cmd, o);
        if (name == "synth") {
            cmd->add_option("--classes", o.classes, "number of classes");
            cmd->add_option("--images", o.images, "images per class");
            cmd->add_option("--participants", o.participants, "participants");
            cmd->add_option("--samples", o.samples, "samples per gaze stream");
            cmd->add_option("--sigma", o.sigma, "class signal strength in [0, 1]");
            cmd->add_option("--seed", o.seed, "generator seed");
        } else if (name == "report") {
            cmd->add_option("--layout", o.layout, "baselines, ablation, datasets or sweep");
            cmd->add_option("inputs", o.inputs, "run directories");
        } else if (name == "sweep") {
            add_pipeline(cmd, o, true);
            cmd->add_option("--splits", o.splits, "random image splits per grid point");
            cmd->add_option("--seed", o.seed, "split seed");
        } else {
            add_pipeline(cmd, o, false);
            if (name == "train") cmd->add_option("--split", o.train_split, "split index to train on");
        }
    }
    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        json doc = json::object();
        if (!config_path.empty()) {
            try {
                doc = json::parse(gazezsl::read_file(config_path));
            } catch (const json::exception& e) {
                throw gazezsl::ConfigError("<file>", config_path + ": " + e.what());
            }
            // A run directory's snapshot can be fed back in directly.
            if (doc.is_object() && doc.contains("format") && doc.contains("config")) doc = doc["config"];
        }
        doc.merge_patch(patch_from(o, command));
        const auto config = gazezsl::cli::parse_run_config(doc);
        gazezsl::cli::run_command(command, config, std::cout);
    } catch (const gazezsl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const gazezsl::cli::StageError& e) {
        std::cerr << "error [" << e.stage() << "]: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
