#include "gazezsl/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "gazezsl/common.hpp"
#include "gazezsl/dataset.hpp"

namespace gazezsl::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------- ranges

std::vector<double> Range::values() const {
    std::vector<double> out;
    if (lo == hi) return {lo};
    if (step == 0.0) {
        for (int i = 0; i < 10; ++i) out.push_back(lo + (hi - lo) * i / 9.0);
        return out;
    }
    // Index-based so accumulated rounding never drops the endpoint.
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

std::string Range::to_string() const {
    if (lo == hi) return format_double(lo);
    std::string s = format_double(lo) + ".." + format_double(hi);
    if (step != 0.0) s += ":" + format_double(step);
    return s;
}

Range parse_range(std::string_view text, const std::string& field) {
    const auto bad = [&](const std::string& why) { return ConfigError(field, "bad range '" + std::string(text) + "': " + why); };
    Range r;
    try {
        const auto dots = text.find("..");
        if (dots == std::string_view::npos) {
            r.lo = r.hi = parse_double(trim(text));
            return r;
        }
        r.lo = parse_double(trim(text.substr(0, dots)));
        auto rest = text.substr(dots + 2);
        if (const auto colon = rest.find(':'); colon != std::string_view::npos) {
            r.step = parse_double(trim(rest.substr(colon + 1)));
            if (!(r.step > 0.0)) throw bad("step must be > 0");
            rest = rest.substr(0, colon);
        }
        r.hi = parse_double(trim(rest));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw bad(e.what());
    }
    if (r.hi < r.lo) throw bad("upper bound below lower bound");
    return r;
}

// ---------------------------------------------------------------- config

std::vector<GridPoint> RunConfig::grid() const {
    std::vector<GridPoint> g;
    for (double lr : learning_rates) {
        for (int e : epochs) g.push_back({lr, e});
    }
    return g;
}

unsigned RunConfig::thread_count() const { return threads ? threads : default_threads(); }

namespace {

std::string join_path(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

// Walks one JSON object, remembering which keys were consumed.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    const json* find(const std::string& key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    std::string path(const std::string& key) const { return join_path(path_, key); }

    void string(const std::string& key, std::string& out) {
        if (const auto* v = find(key)) {
            if (!v->is_string()) throw ConfigError(path(key), "expected a string");
            out = v->get<std::string>();
        }
    }
    void number(const std::string& key, double& out) {
        if (const auto* v = find(key)) {
            if (!v->is_number()) throw ConfigError(path(key), "expected a number");
            out = v->get<double>();
        }
    }
    template <class T>
    void count(const std::string& key, T& out) {
        if (const auto* v = find(key)) out = as_count<T>(*v, path(key));
    }
    void boolean(const std::string& key, bool& out) {
        if (const auto* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError(path(key), "expected true or false");
            out = v->get<bool>();
        }
    }
    const json* array(const std::string& key) {
        const auto* v = find(key);
        if (v && !v->is_array()) throw ConfigError(path(key), "expected an array");
        return v;
    }
    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError(path(key), "unknown key");
        }
    }

    template <class T>
    static T as_count(const json& v, const std::string& where) {
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
            throw ConfigError(where, "expected a non-negative integer");
        }
        return static_cast<T>(v.get<std::uint64_t>());
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

// Re-labels parse errors from enum parsers with the config path.
template <class F>
auto at_path(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        std::string what = e.what();
        const auto colon = what.find(": ");
        throw ConfigError(path, colon == std::string::npos ? what : what.substr(colon + 2));
    }
}

// Maps a library field path such as "probe.epochs" onto its config location.
template <class F>
void rebased(const std::string& from, const std::string& to, F&& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        std::string what = e.what();
        const auto colon = what.find(": ");
        const auto msg = colon == std::string::npos ? what : what.substr(colon + 2);
        const auto& field = e.field();
        if (field.rfind(from, 0) == 0) throw ConfigError(to + field.substr(from.size()), msg);
        throw;
    }
}

std::string sampling_name(SamplingRule r) { return r == SamplingRule::even ? "even" : "first"; }

}  // namespace

RunConfig parse_run_config(const json& doc) {
    RunConfig c;
    Fields root(doc, "");
    root.string("data", c.data);
    root.string("run_name", c.run_name);
    root.string("label", c.label);
    if (const auto* f = root.find("filter")) {
        Fields o(*f, "filter");
        o.number("ws", c.filter.dispersion);
        o.number("ts", c.filter.duration_ms);
        o.finish();
    }
    c.filter.validate();
    if (const auto* e = root.find("encoding")) {
        Fields o(*e, "encoding");
        if (const auto* v = o.find("encoder")) {
            if (!v->is_string()) throw ConfigError(o.path("encoder"), "expected a string");
            c.encoding.encoder = at_path(o.path("encoder"), [&] { return parse_source(v->get<std::string>()); });
        }
        if (const auto* g = o.find("grid")) {
            Fields go(*g, o.path("grid"));
            go.count("rows", c.encoding.grid.rows);
            go.count("cols", c.encoding.grid.cols);
            go.finish();
        }
        o.count("k", c.encoding.sequence.k);
        std::string sampling = sampling_name(c.encoding.sequence.rule);
        o.string("sampling", sampling);
        if (sampling == "even") {
            c.encoding.sequence.rule = SamplingRule::even;
        } else if (sampling == "first") {
            c.encoding.sequence.rule = SamplingRule::first;
        } else {
            throw ConfigError(o.path("sampling"), "expected 'even' or 'first'");
        }
        std::string mask = c.encoding.mask.to_string();
        o.string("features", mask);
        c.encoding.mask = at_path(o.path("features"), [&] { return FeatureMask::parse(mask); });
        o.finish();
    }
    rebased("grid", "encoding.grid", [&] { c.encoding.grid.validate(); });
    rebased("embedding.encoder", "encoding.encoder", [&] { c.encoding.validate(); });
    if (const auto* v = root.find("fusion")) {
        if (!v->is_string()) throw ConfigError("fusion", "expected a string");
        c.fusion = at_path("fusion", [&] { return parse_fusion(v->get<std::string>()); });
    }
    if (const auto* a = root.array("sources")) {
        c.sources.clear();
        for (std::size_t i = 0; i < a->size(); ++i) {
            const auto where = "sources[" + std::to_string(i) + "]";
            if (!(*a)[i].is_string()) throw ConfigError(where, "expected a string");
            c.sources.push_back(at_path(where, [&] { return parse_source((*a)[i].get<std::string>()); }));
        }
        if (c.sources.empty()) throw ConfigError("sources", "must not be empty");
    }
    if (const auto* cv = root.find("cv")) {
        Fields o(*cv, "cv");
        if (const auto* a = o.array("learning_rates")) {
            c.learning_rates.clear();
            for (std::size_t i = 0; i < a->size(); ++i) {
                const auto where = "cv.learning_rates[" + std::to_string(i) + "]";
                if (!(*a)[i].is_number() || (*a)[i].get<double>() < 0.0) throw ConfigError(where, "expected a number >= 0");
                c.learning_rates.push_back((*a)[i].get<double>());
            }
        }
        if (const auto* a = o.array("epochs")) {
            c.epochs.clear();
            for (std::size_t i = 0; i < a->size(); ++i) {
                const auto where = "cv.epochs[" + std::to_string(i) + "]";
                const int e = Fields::as_count<int>((*a)[i], where);
                if (e < 1) throw ConfigError(where, "must be >= 1");
                c.epochs.push_back(e);
            }
        }
        o.finish();
        if (c.learning_rates.empty() || c.epochs.empty()) throw ConfigError("cv", "grid must not be empty");
    }
    if (const auto* s = root.find("splits")) {
        Fields o(*s, "splits");
        o.count("count", c.split_count);
        o.count("seed", c.split_seed);
        o.count("train_split", c.train_split);
        o.finish();
        if (c.split_count < 1) throw ConfigError("splits.count", "must be >= 1");
        if (c.train_split >= c.split_count) throw ConfigError("splits.train_split", "must be below splits.count");
    }
    if (const auto* t = root.find("training")) {
        Fields o(*t, "training");
        o.count("seed", c.seed);
        o.boolean("shuffle", c.shuffle);
        o.finish();
    }
    root.count("threads", c.threads);
    if (const auto* b = root.find("baselines")) {
        Fields o(*b, "baselines");
        o.count("random_points", c.random_points);
        o.count("random_seed", c.random_seed);
        o.count("bow_vocab", c.bow_vocab);
        o.finish();
        if (c.random_points < 1) throw ConfigError("baselines.random_points", "must be >= 1");
        if (c.bow_vocab < 1) throw ConfigError("baselines.bow_vocab", "must be >= 1");
    }
    if (const auto* ab = root.find("ablation")) {
        Fields o(*ab, "ablation");
        if (const auto* a = o.array("modes")) {
            c.ablation.clear();
            for (std::size_t i = 0; i < a->size(); ++i) {
                const auto where = "ablation.modes[" + std::to_string(i) + "]";
                if (!(*a)[i].is_string()) throw ConfigError(where, "expected a string");
                c.ablation.push_back(at_path(where, [&] { return parse_ablation((*a)[i].get<std::string>()); }));
            }
        }
        o.finish();
    }
    if (const auto* sw = root.find("sweep")) {
        Fields o(*sw, "sweep");
        std::string ws = c.sweep.ws.to_string(), ts = c.sweep.ts.to_string();
        o.string("ws", ws);
        o.string("ts", ts);
        c.sweep.ws = parse_range(ws, "sweep.ws");
        c.sweep.ts = parse_range(ts, "sweep.ts");
        o.count("splits", c.sweep.splits);
        o.number("train_fraction", c.sweep.train_fraction);
        o.count("seed", c.sweep.seed);
        if (const auto* svm = o.find("svm")) {
            Fields so(*svm, "sweep.svm");
            so.number("learning_rate", c.sweep.svm.learning_rate);
            so.count("epochs", c.sweep.svm.epochs);
            so.number("regularization", c.sweep.svm.regularization);
            so.finish();
        }
        o.finish();
        if (!(c.sweep.ws.lo > 0.0)) throw ConfigError("sweep.ws", "values must be > 0");
        if (!(c.sweep.ts.lo >= 0.0)) throw ConfigError("sweep.ts", "values must be >= 0");
        if (c.sweep.splits < 1) throw ConfigError("sweep.splits", "must be >= 1");
        if (!(c.sweep.train_fraction > 0.0 && c.sweep.train_fraction < 1.0)) {
            throw ConfigError("sweep.train_fraction", "must lie in (0, 1)");
        }
        rebased("probe", "sweep.svm", [&] { c.sweep.svm.validate(); });
    }
    if (const auto* sy = root.find("synth")) {
        Fields o(*sy, "synth");
        o.count("classes", c.synth.n_classes);
        o.count("images_per_class", c.synth.images_per_class);
        o.count("participants", c.synth.participants);
        o.count("samples", c.synth.samples_per_stream);
        o.number("sigma", c.synth.signal);
        o.count("seed", c.synth.seed);
        o.count("feature_dim", c.synth.feature_dim);
        o.count("attribute_dim", c.synth.attribute_dim);
        o.finish();
    }
    c.synth.validate();
    if (const auto* r = root.find("report")) {
        Fields o(*r, "report");
        o.string("layout", c.layout);
        if (const auto* a = o.array("inputs")) {
            c.inputs.clear();
            for (std::size_t i = 0; i < a->size(); ++i) {
                if (!(*a)[i].is_string()) throw ConfigError("report.inputs[" + std::to_string(i) + "]", "expected a string");
                c.inputs.push_back((*a)[i].get<std::string>());
            }
        }
        o.finish();
        static const std::set<std::string> layouts{"baselines", "ablation", "datasets", "sweep"};
        if (!layouts.count(c.layout)) throw ConfigError("report.layout", "expected baselines, ablation, datasets or sweep");
    }
    root.finish();
    return c;
}

ordered_json to_json(const RunConfig& c) {
    ordered_json j;
    j["data"] = c.data;
    j["run_name"] = c.run_name;
    j["label"] = c.label;
    j["filter"] = {{"ws", c.filter.dispersion}, {"ts", c.filter.duration_ms}};
    j["encoding"] = {{"encoder", to_string(c.encoding.encoder)},
                     {"grid", {{"rows", c.encoding.grid.rows}, {"cols", c.encoding.grid.cols}}},
                     {"k", c.encoding.sequence.k},
                     {"sampling", sampling_name(c.encoding.sequence.rule)},
                     {"features", c.encoding.mask.to_string()}};
    j["fusion"] = to_string(c.fusion);
    auto& sources = j["sources"] = ordered_json::array();
    for (auto s : c.sources) sources.push_back(to_string(s));
    j["cv"] = {{"learning_rates", c.learning_rates}, {"epochs", c.epochs}};
    j["splits"] = {{"count", c.split_count}, {"seed", c.split_seed}, {"train_split", c.train_split}};
    j["training"] = {{"seed", c.seed}, {"shuffle", c.shuffle}};
    j["baselines"] = {{"random_points", c.random_points}, {"random_seed", c.random_seed}, {"bow_vocab", c.bow_vocab}};
    auto modes = ordered_json::array();
    for (auto m : c.ablation) modes.push_back(to_string(m));
    j["ablation"] = {{"modes", modes}};
    j["sweep"] = {{"ws", c.sweep.ws.to_string()},
                  {"ts", c.sweep.ts.to_string()},
                  {"splits", c.sweep.splits},
                  {"train_fraction", c.sweep.train_fraction},
                  {"seed", c.sweep.seed},
                  {"svm",
                   {{"learning_rate", c.sweep.svm.learning_rate},
                    {"epochs", c.sweep.svm.epochs},
                    {"regularization", c.sweep.svm.regularization}}}};
    j["synth"] = {{"classes", c.synth.n_classes},       {"images_per_class", c.synth.images_per_class},
                  {"participants", c.synth.participants}, {"samples", c.synth.samples_per_stream},
                  {"sigma", c.synth.signal},             {"seed", c.synth.seed},
                  {"feature_dim", c.synth.feature_dim},  {"attribute_dim", c.synth.attribute_dim}};
    j["report"] = {{"layout", c.layout}, {"inputs", c.inputs}};
    return j;
}

StageError::StageError(std::string stage, const std::string& what) : Error(what), stage_(std::move(stage)) {}

std::string run_directory(const RunConfig& config, const std::string& command) {
    const char* root = std::getenv("GAZEZSL_RUN_ROOT");
    const fs::path base = root && *root ? fs::path(root) : fs::path("runs");
    return (base / (config.run_name.empty() ? command : config.run_name)).string();
}

// ---------------------------------------------------------------- sweep probe

ProbeData probe_features(const GazeCorpus& corpus, const DatasetManifest& manifest) {
    const FeatureMask full;
    std::vector<std::map<std::string, const Scanpath*>> by_image(corpus.size());
    std::vector<std::size_t> k(corpus.size(), 0);
    for (std::size_t p = 0; p < corpus.size(); ++p) {
        for (const auto& path : corpus[p].paths) {
            if (path.fixations.empty()) continue;
            by_image[p][path.image_id] = &path;
            k[p] = k[p] ? std::min(k[p], path.fixations.size()) : path.fixations.size();
        }
    }
    ProbeData out;
    for (const auto& img : manifest.images) {
        std::vector<Eigen::VectorXd> blocks;
        Eigen::Index dim = 0;
        bool any = false;
        for (std::size_t p = 0; p < corpus.size(); ++p) {
            if (!k[p]) continue;
            const auto width = static_cast<Eigen::Index>(6 * k[p]);
            const auto it = by_image[p].find(img.image_id);
            if (it == by_image[p].end()) {
                blocks.push_back(Eigen::VectorXd::Zero(width));
            } else {
                blocks.push_back(encode_gfs(fixation_features(it->second->fixations), {k[p], SamplingRule::even}, full));
                any = true;
            }
            dim += width;
        }
        if (!any) continue;
        Eigen::VectorXd v(dim);
        Eigen::Index at = 0;
        for (const auto& b : blocks) {
            v.segment(at, b.size()) = b;
            at += b.size();
        }
        out.samples.push_back(std::move(v));
        out.labels.push_back(img.class_label);
    }
    return out;
}

std::pair<double, double> probe_accuracy(const ProbeData& data, const SweepSpec& spec,
                                         const std::vector<std::string>& classes) {
    if (data.samples.empty()) throw ValidationError("no images with fixations for the probe");
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < data.labels.size(); ++i) members[data.labels[i]].push_back(i);
    std::vector<double> accs;
    for (std::size_t s = 0; s < spec.splits; ++s) {
        Rng rng(mix_seed(spec.seed, s));
        std::vector<std::size_t> train, test;
        // Stratified: each class contributes the same fraction to training.
        for (const auto& label : classes) {
            const auto it = members.find(label);
            if (it == members.end()) continue;
            auto idx = it->second;
            rng.shuffle(idx);
            std::size_t n_train = static_cast<std::size_t>(std::lround(spec.train_fraction * static_cast<double>(idx.size())));
            if (idx.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
            for (std::size_t i = 0; i < idx.size(); ++i) (i < n_train ? train : test).push_back(idx[i]);
        }
        if (train.empty() || test.empty()) throw ValidationError("probe split has an empty partition");
        std::sort(train.begin(), train.end());
        std::sort(test.begin(), test.end());

        // z-score with training statistics
        const auto dim = data.samples.front().size();
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim), sd = Eigen::VectorXd::Zero(dim);
        for (auto i : train) mean += data.samples[i];
        mean /= static_cast<double>(train.size());
        for (auto i : train) sd += (data.samples[i] - mean).cwiseAbs2();
        sd = (sd / static_cast<double>(train.size())).cwiseSqrt();
        auto scale = [&](const Eigen::VectorXd& x) {
            Eigen::VectorXd z = x - mean;
            for (Eigen::Index d = 0; d < dim; ++d) z[d] = sd[d] > 0.0 ? z[d] / sd[d] : 0.0;
            return z;
        };
        std::vector<Eigen::VectorXd> xs;
        std::vector<std::string> ys;
        for (auto i : train) {
            xs.push_back(scale(data.samples[i]));
            ys.push_back(data.labels[i]);
        }
        SvmConfig svm = spec.svm;
        svm.seed = mix_seed(spec.svm.seed, s);
        const auto model = train_ovr_svm(xs, ys, svm);
        std::vector<std::string> predicted, truth;
        for (auto i : test) {
            predicted.push_back(model.classes[model.predict_index(scale(data.samples[i]))]);
            truth.push_back(data.labels[i]);
        }
        accs.push_back(per_class_accuracy(predicted, truth, classes));
    }
    double mean = 0.0;
    for (double a : accs) mean += a;
    mean /= static_cast<double>(accs.size());
    double var = 0.0;
    for (double a : accs) var += (a - mean) * (a - mean);
    return {mean, std::sqrt(var / static_cast<double>(accs.size()))};
}

// ---------------------------------------------------------------- report

namespace {

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
    return buf;
}

std::string cell(const json* rec) {
    if (!rec) return "--";
    return pct(rec->at("mean").get<double>()) + " +- " + pct(rec->at("std").get<double>());
}

bool is_gaze(const std::string& source) { return source == "GFS" || source == "GFG" || source == "GH"; }

const json* find_record(const std::vector<json>& records, const std::string& kind,
                        const std::function<bool(const json&)>& pred) {
    for (const auto& r : records) {
        if (r.value("kind", "") == kind && pred(r)) return &r;
    }
    return nullptr;
}

const json* by_source(const std::vector<json>& records, const std::string& source) {
    return find_record(records, "eval", [&](const json& r) {
        const auto s = r.value("source", "");
        return source == "gaze" ? is_gaze(s) : s == source;
    });
}

std::string table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size(), 0);
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    auto line = [&](const std::vector<std::string>& r) {
        std::string s;
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (c) s += "  ";
            s += r[c] + std::string(width[c] - r[c].size(), ' ');
        }
        while (!s.empty() && s.back() == ' ') s.pop_back();
        return s + '\n';
    };
    std::string out = line(header);
    std::size_t total = 0;
    for (auto w : width) total += w;
    out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
    for (const auto& r : rows) out += line(r);
    return out;
}

}  // namespace

std::string render_report(const std::string& layout, const std::vector<std::pair<std::string, std::vector<json>>>& runs) {
    if (runs.empty()) throw ConfigError("report.inputs", "no runs to report");
    const auto& records = runs.front().second;
    if (layout == "baselines") {
        const json* gaze = by_source(records, "gaze");
        std::string gaze_name = "Gaze embeddings";
        if (gaze) gaze_name += " (" + gaze->value("source", "") + " " + gaze->value("fusion", "") + ")";
        const std::vector<std::tuple<std::string, std::string, const json*>> rows{
            {"Baselines", "Saliency histogram", by_source(records, "saliency")},
            {"", "Random points in the image", by_source(records, "random")},
            {"", "Central gaze point", by_source(records, "central")},
            {"", "Bubbles", by_source(records, "bubbles")},
            {"", "Bag-of-Words", by_source(records, "bow")},
            {"SoA", "Human annotated attributes", by_source(records, "attributes")},
            {"Ours", gaze_name, gaze},
            {"", "Attributes + Gaze", by_source(records, "fused")},
        };
        std::vector<std::vector<std::string>> body;
        for (const auto& [group, name, rec] : rows) body.push_back({group, name, cell(rec)});
        return table({"Method", "", "Accuracy"}, body);
    }
    if (layout == "ablation") {
        auto mode = [&](const std::string& m) {
            return find_record(records, "ablation", [&](const json& r) { return r.value("mode", "") == m; });
        };
        const std::vector<std::pair<std::string, const json*>> rows{
            {"Gaze", mode("full")},
            {"Gaze: same images as bubbles", mode("same_images")},
            {"Gaze: same location as bubbles", mode("same_locations_concat")},
            {"Gaze: same number as bubbles (avg)", mode("same_locations_avg")},
            {"Gaze: same number as bubbles (rnd)", mode("same_locations_rand")},
            {"Bubbles (mouse-clicks)", mode("bubbles")},
        };
        std::vector<std::vector<std::string>> body;
        for (const auto& [name, rec] : rows) body.push_back({name, cell(rec)});
        return table({"Method", "Accuracy"}, body);
    }
    if (layout == "datasets") {
        const std::vector<std::tuple<std::string, std::string, std::string>> rows{
            {"Random points", "Image", "random"},      {"Bubbles", "Novice", "bubbles"},
            {"Bag of Words", "Wikipedia", "bow"},      {"Human Gaze", "Novice", "gaze"},
            {"Attributes", "Expert", "attributes"},
        };
        std::vector<std::string> header{"Method", "Side-Info"};
        for (const auto& run : runs) header.push_back(run.first);
        std::vector<std::vector<std::string>> body;
        for (const auto& [name, info, source] : rows) {
            std::vector<std::string> r{name, info};
            for (const auto& run : runs) {
                const auto* rec = by_source(run.second, source);
                r.push_back(rec ? pct(rec->at("mean").get<double>()) : "N/A");
            }
            body.push_back(std::move(r));
        }
        return table(header, body);
    }
    if (layout == "sweep") {
        std::vector<double> ws, ts;
        std::map<std::pair<double, double>, double> acc;
        for (const auto& r : records) {
            if (r.value("kind", "") != "sweep") continue;
            const double w = r.at("ws").get<double>(), t = r.at("ts").get<double>();
            if (std::find(ws.begin(), ws.end(), w) == ws.end()) ws.push_back(w);
            if (std::find(ts.begin(), ts.end(), t) == ts.end()) ts.push_back(t);
            acc[{w, t}] = r.at("mean").get<double>();
        }
        std::vector<std::string> header{"ts \\ ws"};
        for (double w : ws) header.push_back(format_double(w));
        std::vector<std::vector<std::string>> body;
        for (double t : ts) {
            std::vector<std::string> r{format_double(t)};
            for (double w : ws) {
                const auto it = acc.find({w, t});
                r.push_back(it == acc.end() ? "--" : pct(it->second));
            }
            body.push_back(std::move(r));
        }
        return table(header, body);
    }
    throw ConfigError("report.layout", "unknown layout '" + layout + "'");
}

// ---------------------------------------------------------------- commands

namespace {

constexpr const char* kRunFormat = "gazezsl run v1";
constexpr const char* kResultsFormat = "gazezsl results v1";

class RunDir {
public:
    RunDir(const RunConfig& config, const std::string& command) : path_(run_directory(config, command)) {
        fs::create_directories(path_);
        ordered_json snapshot;
        snapshot["format"] = kRunFormat;
        snapshot["command"] = command;
        snapshot["config"] = to_json(config);
        write("config.json", snapshot.dump(2) + '\n');
        results_ = ordered_json{{"format", kResultsFormat}}.dump() + '\n';
    }

    std::string file(const std::string& name) const { return (fs::path(path_) / name).string(); }
    void write(const std::string& name, std::string_view text) const {
        const auto target = fs::path(path_) / name;
        fs::create_directories(target.parent_path());
        write_file(target.string(), text);
    }
    void record(const ordered_json& j) { results_ += j.dump() + '\n'; }
    void digests(const std::string& dir) const {
        std::string text;
        for (const auto& [rel, digest] : digest_tree(dir)) text += digest + "  " + rel + '\n';
        write("inputs.txt", text);
    }
    void finish(const std::string& summary) const {
        write("results.jsonl", results_);
        write("summary.txt", summary);
    }

private:
    std::string path_;
    std::string results_;
};

template <class F>
auto stage(const std::string& name, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

Dataset load(const RunConfig& c) {
    return stage("load", [&] { return load_dataset(c.data, c.thread_count()); });
}

SideData side_data(const Dataset& d, const RunConfig& c) {
    SideData side;
    side.gaze = stage("preprocess", [&] { return detect_corpus(d.streams, c.filter, c.thread_count()); });
    side.bubbles = d.bubbles;
    side.attributes = d.attributes;
    side.documents = d.documents;
    side.saliency = d.saliency;
    return side;
}

SourceSpec source_spec(const RunConfig& c, EmbeddingSource source) {
    SourceSpec s;
    s.source = source;
    s.encoding = c.encoding;
    s.fusion = c.fusion;
    s.random_points = c.random_points;
    s.random_seed = c.random_seed;
    s.bow_vocab = c.bow_vocab;
    s.bubble_sequence = c.encoding.sequence;
    return s;
}

ExperimentConfig experiment(const RunConfig& c, const std::string& name) {
    ExperimentConfig e;
    e.name = name;
    e.grid = c.grid();
    e.seed = c.seed;
    e.shuffle = c.shuffle;
    e.threads = c.thread_count();
    return e;
}

ordered_json record_json(const ResultRecord& r, const std::string& kind, const std::string& source, const RunConfig& c) {
    ordered_json j{{"kind", kind}, {"source", source}, {"fusion", to_string(c.fusion)}};
    const auto full = r.to_json();
    for (const auto& [k, v] : full.items()) {
        if (k != "config") j[k] = v;
    }
    return j;
}

std::string dataset_label(const RunConfig& c) {
    if (!c.label.empty()) return c.label;
    const auto name = fs::path(c.data).lexically_normal().filename().string();
    return name.empty() ? c.data : name;
}

std::string embed_file_name(const EmbeddingSet& set, std::size_t i, std::size_t n) {
    std::string name = to_string(set.source);
    if (n > 1) name += "." + (set.participants.empty() ? std::to_string(i) : set.participants.front());
    return "embeddings/" + name + ".txt";
}

void cmd_synth(const RunConfig& c, std::ostream& out) {
    RunDir run(c, "synth");
    const auto data = stage("synth", [&] { return synth::generate(c.synth); });
    stage("synth", [&] { synth::write_dataset(data, c.data); return 0; });
    run.digests(c.data);
    std::ostringstream s;
    s << "dataset " << c.data << ": " << data.manifest.classes.size() << " classes, " << data.manifest.images.size()
      << " images, " << data.manifest.participants.size() << " participants, sigma " << format_double(c.synth.signal)
      << '\n';
    run.finish(s.str());
    out << s.str();
}

void cmd_preprocess(const RunConfig& c, std::ostream& out) {
    RunDir run(c, "preprocess");
    const auto d = load(c);
    run.digests(c.data);
    const auto corpus = stage("preprocess", [&] { return detect_corpus(d.streams, c.filter, c.thread_count()); });
    std::string csv = "participant,image_id,class,x,y,duration_ms,pupil,onset_ms\n";
    std::ostringstream s;
    s << "participant  scanpaths  fixations  mean/scanpath\n";
    for (const auto& p : corpus) {
        std::size_t total = 0;
        for (const auto& path : p.paths) {
            total += path.fixations.size();
            for (const auto& f : path.fixations) {
                csv += p.participant + ',' + path.image_id + ',' + path.label + ',' + format_double(f.x) + ',' +
                       format_double(f.y) + ',' + format_double(f.duration) + ',' + format_double(f.pupil) + ',' +
                       format_double(f.onset) + '\n';
            }
        }
        const double mean = p.paths.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(p.paths.size());
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-11s  %9zu  %9zu  %13.2f\n", p.participant.c_str(), p.paths.size(), total, mean);
        s << buf;
        run.record({{"kind", "preprocess"}, {"participant", p.participant}, {"scanpaths", p.paths.size()}, {"fixations", total}});
    }
    run.write("fixations.csv", csv);
    run.finish(s.str());
    out << s.str();
}

void cmd_embed(const RunConfig& c, std::ostream& out) {
    RunDir run(c, "embed");
    const auto d = load(c);
    run.digests(c.data);
    const auto side = side_data(d, c);
    SplitSpec all;
    all.train = d.manifest.classes;
    std::ostringstream s;
    for (auto source : c.sources) {
        const auto sets = stage("embed", [&] { return make_provider(d.manifest, side, source_spec(c, source))(all); });
        for (std::size_t i = 0; i < sets.size(); ++i) {
            const auto name = embed_file_name(sets[i], i, sets.size());
            run.write(name, format_embedding_set(sets[i]));
            run.record({{"kind", "embed"}, {"source", to_string(source)}, {"file", name}, {"classes", sets[i].size()},
                        {"dim", sets[i].dim()}});
            s << name << ": " << sets[i].size() << " classes x " << sets[i].dim() << '\n';
        }
    }
    run.finish(s.str());
    out << s.str();
}

void cmd_train(const RunConfig& c, std::ostream& out) {
    RunDir run(c, "train");
    const auto d = load(c);
    run.digests(c.data);
    const auto side = side_data(d, c);
    const auto source = c.sources.front();
    const auto splits = stage("train", [&] { return make_splits(d.manifest.classes, c.split_count, c.split_seed); });
    const auto& split = splits.at(c.train_split);
    const auto sets = stage("embed", [&] { return make_provider(d.manifest, side, source_spec(c, source))(split); });
    std::ostringstream s;
    stage("train", [&] {
        std::map<std::pair<double, int>, std::vector<CompatibilityModel>> trained;
        auto models = [&](const GridPoint& g) -> const std::vector<CompatibilityModel>& {
            auto& slot = trained[{g.learning_rate, g.epochs}];
            if (slot.empty()) {
                TrainConfig tc;
                tc.learning_rate = g.learning_rate;
                tc.epochs = g.epochs;
                tc.seed = mix_seed(c.seed, c.train_split);
                tc.shuffle = c.shuffle;
                slot = train_on_classes(d.manifest, d.features, sets, split.train, tc);
            }
            return slot;
        };
        const auto cv = cross_validate(
            c.grid(), [&](const GridPoint& g) { return evaluate_on_classes(models(g), d.manifest, d.features, sets, split.val); },
            [&](const GridPoint& g) { return evaluate_on_classes(models(g), d.manifest, d.features, sets, split.test); });
        const auto& best = models(cv.best);
        for (std::size_t i = 0; i < best.size(); ++i) {
            const std::string name =
                best.size() == 1 ? "model.txt" : "model." + (sets[i].participants.empty() ? std::to_string(i) : sets[i].participants.front()) + ".txt";
            run.write(name, format_model(best[i]));
        }
        run.record({{"kind", "train"},
                    {"source", to_string(source)},
                    {"fusion", to_string(c.fusion)},
                    {"split", c.train_split},
                    {"learning_rate", cv.best.learning_rate},
                    {"epochs", cv.best.epochs},
                    {"val_accuracy", cv.val_accuracy},
                    {"test_accuracy", cv.test_accuracy}});
        s << to_string(source) << " " << to_string(c.fusion) << " split " << c.train_split << ": eta "
          << format_double(cv.best.learning_rate) << ", " << cv.best.epochs << " epochs, val " << pct(cv.val_accuracy)
          << ", test " << pct(cv.test_accuracy) << '\n';
        return 0;
    });
    run.finish(s.str());
    out << s.str();
}

void cmd_eval(const RunConfig& c, std::ostream& out) {
    RunDir run(c, "eval");
    const auto d = load(c);
    run.digests(c.data);
    const auto side = side_data(d, c);
    const auto splits = stage("eval", [&] { return make_splits(d.manifest.classes, c.split_count, c.split_seed); });
    std::vector<json> records;
    std::ostringstream detail;
    for (auto source : c.sources) {
        const auto provider = stage("embed", [&] { return make_provider(d.manifest, side, source_spec(c, source)); });
        const auto name = to_string(source);
        const auto rec = stage("eval", [&] { return run_experiment(d.manifest, d.features, provider, splits, experiment(c, name)); });
        const auto j = record_json(rec, "eval", name, c);
        run.record(j);
        records.push_back(json::parse(j.dump()));
        detail << name << ": " << pct(rec.mean) << " +- " << pct(rec.stddev) << " over " << rec.splits.size() << " splits\n";
    }
    const auto summary = detail.str() + '\n' + render_report("baselines", {{dataset_label(c), records}});
    run.finish(summary);
    out << summary;
}

void cmd_ablate(const RunConfig& c, std::ostream& out) {
    RunDir run(c, "ablate");
    const auto d = load(c);
    run.digests(c.data);
    const auto side = side_data(d, c);
    const auto splits = stage("ablate", [&] { return make_splits(d.manifest.classes, c.split_count, c.split_seed); });
    GazeEncoding enc = c.encoding;
    enc.encoder = EmbeddingSource::gfs;
    std::vector<json> records;
    auto add = [&](const ResultRecord& rec, const std::string& mode, const std::string& source) {
        auto j = record_json(rec, "ablation", source, c);
        j["mode"] = mode;
        run.record(j);
        records.push_back(json::parse(j.dump()));
    };
    stage("ablate", [&] {
        const auto full = make_provider(d.manifest, side, source_spec(c, EmbeddingSource::gfs));
        add(run_experiment(d.manifest, d.features, full, splits, experiment(c, "full")), "full", "GFS");
        for (auto mode : c.ablation) {
            add(ablate_bubbles(mode, d.manifest, d.features, side.gaze, d.bubbles, enc, c.fusion, splits, experiment(c, "gaze")),
                to_string(mode), "GFS");
        }
        const auto bubbles = make_provider(d.manifest, side, source_spec(c, EmbeddingSource::bubbles));
        add(run_experiment(d.manifest, d.features, bubbles, splits, experiment(c, "bubbles")), "bubbles", "bubbles");
        return 0;
    });
    const auto summary = render_report("ablation", {{dataset_label(c), records}});
    run.finish(summary);
    out << summary;
}

void cmd_sweep(const RunConfig& c, std::ostream& out) {
    RunDir run(c, "sweep");
    const auto d = load(c);
    run.digests(c.data);
    const auto ws = c.sweep.ws.values(), ts = c.sweep.ts.values();
    std::vector<std::pair<double, double>> results(ws.size() * ts.size());
    stage("sweep", [&] {
        parallel_for(results.size(), c.thread_count(), [&](std::size_t i) {
            FilterParams fp;
            fp.dispersion = ws[i / ts.size()];
            fp.duration_ms = ts[i % ts.size()];
            const auto corpus = detect_corpus(d.streams, fp, 1);
            results[i] = probe_accuracy(probe_features(corpus, d.manifest), c.sweep, d.manifest.classes);
        });
        return 0;
    });
    std::vector<json> records;
    std::string tsv = "ts\\ws";
    for (double w : ws) tsv += '\t' + format_double(w);
    tsv += '\n';
    for (std::size_t t = 0; t < ts.size(); ++t) {
        tsv += format_double(ts[t]);
        for (std::size_t w = 0; w < ws.size(); ++w) tsv += '\t' + format_double(results[w * ts.size() + t].first);
        tsv += '\n';
    }
    std::size_t best = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        ordered_json j{{"kind", "sweep"}, {"ws", ws[i / ts.size()]}, {"ts", ts[i % ts.size()]},
                       {"mean", results[i].first}, {"std", results[i].second}};
        run.record(j);
        records.push_back(json::parse(j.dump()));
        if (results[i].first > results[best].first) best = i;
    }
    run.write("sweep.tsv", tsv);
    const auto summary = render_report("sweep", {{dataset_label(c), records}}) + "\nbest: ws " +
                         format_double(ws[best / ts.size()]) + ", ts " + format_double(ts[best % ts.size()]) + " (" +
                         pct(results[best].first) + ")\n";
    run.finish(summary);
    out << summary;
}

std::vector<json> read_records(const std::string& dir) {
    const auto text = read_file((fs::path(dir) / "results.jsonl").string());
    std::vector<json> out;
    std::size_t line_no = 0;
    for (const auto& line : split(text, '\n')) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            auto j = json::parse(line);
            if (j.contains("format")) {
                if (j["format"] != kResultsFormat) throw ParseError(dir + "/results.jsonl", line_no, "unsupported format");
                continue;
            }
            out.push_back(std::move(j));
        } catch (const json::exception& e) {
            throw ParseError(dir + "/results.jsonl", line_no, e.what());
        }
    }
    return out;
}

void cmd_report(const RunConfig& c, std::ostream& out) {
    if (c.inputs.empty()) throw ConfigError("report.inputs", "no run directories given");
    RunDir run(c, "report");
    std::vector<std::pair<std::string, std::vector<json>>> runs;
    std::string digests;
    stage("report", [&] {
        for (const auto& dir : c.inputs) {
            std::string label = fs::path(dir).lexically_normal().filename().string();
            const auto cfg = fs::path(dir) / "config.json";
            if (fs::exists(cfg)) {
                const auto j = json::parse(read_file(cfg.string()));
                if (j.contains("config")) {
                    const auto& inner = j["config"];
                    if (!inner.value("label", "").empty()) {
                        label = inner["label"].get<std::string>();
                    } else if (inner.contains("data")) {
                        label = fs::path(inner["data"].get<std::string>()).lexically_normal().filename().string();
                    }
                }
            }
            runs.emplace_back(label, read_records(dir));
            digests += hex_digest(fnv1a(read_file((fs::path(dir) / "results.jsonl").string()))) + "  " + dir + "/results.jsonl\n";
        }
        return 0;
    });
    run.write("inputs.txt", digests);
    const auto summary = stage("report", [&] { return render_report(c.layout, runs); });
    run.finish(summary);
    out << summary;
}

}  // namespace

void run_command(const std::string& command, const RunConfig& config, std::ostream& out) {
    if (command == "synth") return cmd_synth(config, out);
    if (command == "preprocess") return cmd_preprocess(config, out);
    if (command == "embed") return cmd_embed(config, out);
    if (command == "train") return cmd_train(config, out);
    if (command == "eval") return cmd_eval(config, out);
    if (command == "ablate") return cmd_ablate(config, out);
    if (command == "sweep") return cmd_sweep(config, out);
    if (command == "report") return cmd_report(config, out);
    throw ConfigError("command", "unknown command '" + command + "'");
}

}  // namespace gazezsl::cli
