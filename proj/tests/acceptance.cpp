// Desk-scale acceptance checks. One PASS/FAIL line per criterion; exit status
// is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

#include "gazezsl/cli.hpp"
#include "gazezsl/common.hpp"
#include "gazezsl/dataset.hpp"
#include "gazezsl/embed.hpp"
#include "gazezsl/eval.hpp"
#include "gazezsl/fixation.hpp"
#include "gazezsl/model.hpp"
#include "gazezsl/synth.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"

using namespace gazezsl;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass;
    std::string detail;
};

Eigen::VectorXd randvec(Rng& r, Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = r.normal();
    return v;
}

Eigen::MatrixXd randmat(Rng& r, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.normal();
    return m;
}

EmbeddingSet make_set(const Eigen::MatrixXd& rows) {
    EmbeddingSet s;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) s.labels.push_back("k" + std::to_string(i));
    s.vectors = rows;
    return s;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

Outcome fixation_oracle() {
    Rng r(20240101);
    std::size_t worst_count = 0;
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const auto s = synth::random_stream(r, 50 + r.index(600));
        const FilterParams fp{r.uniform(2, 60), r.uniform(1, 150)};
        const auto got = detect_fixations(s, fp);
        const auto want = oracle::idt(s, fp.dispersion, fp.duration_ms);
        if (got.size() != want.size()) {
            ++worst_count;
            continue;
        }
        for (std::size_t k = 0; k < got.size(); ++k) {
            worst = std::max({worst, std::abs(got[k].x - want[k].x), std::abs(got[k].y - want[k].y)});
        }
    }
    return {worst_count == 0 && worst <= 1e-9,
            "200 streams, count mismatches " + std::to_string(worst_count) + ", max centroid diff " + fmt(worst)};
}

Outcome gradient_check() {
    const auto start = Clock::now();
    Rng r(7);
    int checked = 0;
    double worst = 0.0;
    while (checked < 100) {
        CompatibilityModel m;
        m.weights = randmat(r, 4, 5);
        const auto phi = make_set(randmat(r, 5, 5));
        const auto x = randvec(r, 4);
        const std::size_t truth = r.index(5);
        Eigen::VectorXd aug = score(m, x, phi);
        for (Eigen::Index y = 0; y < aug.size(); ++y) aug[y] += static_cast<std::size_t>(y) == truth ? 0.0 : 1.0;
        Eigen::VectorXd sorted = aug;
        std::sort(sorted.data(), sorted.data() + sorted.size());
        if (sorted[sorted.size() - 1] - sorted[sorted.size() - 2] < 1e-2) continue;  // kink of the max
        ++checked;
        const auto g = loss_subgradient(m, x, truth, phi);
        Eigen::MatrixXd fd(g.rows(), g.cols());
        const double h = 1e-6;
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
            for (Eigen::Index j = 0; j < g.cols(); ++j) {
                auto plus = m, minus = m;
                plus.weights(i, j) += h;
                minus.weights(i, j) -= h;
                fd(i, j) = (structured_loss(plus, x, truth, phi) - structured_loss(minus, x, truth, phi)) / (2 * h);
            }
        }
        worst = std::max(worst, (fd - g).norm() / std::max(g.norm(), 1.0));
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    return {worst <= 1e-4 && secs < 10.0, "100 points, max relative error " + fmt(worst) + ", " + fmt(secs) + " s"};
}

Outcome separable_sje() {
    const auto inst = synth::separable_instance();
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.epochs = 20;
    int reached = 0;
    train_sje(inst.examples, inst.classes, cfg, [&](int epoch, const CompatibilityModel& m, double) {
        if (reached) return;
        std::size_t hit = 0;
        for (const auto& e : inst.examples) hit += predict_index(m, e.image, inst.classes) == e.label;
        if (hit == inst.examples.size()) reached = epoch;
    });
    return {reached > 0, reached ? "100% training accuracy at epoch " + std::to_string(reached) : "not separated in 20 epochs"};
}

Outcome zero_shot_sanity() {
    double high = 0.0, low = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        high += testing_pipeline::synthetic_accuracy(testing_pipeline::default_spec(1.0, seed), EmbeddingSource::gfs, seed);
        low += testing_pipeline::synthetic_accuracy(testing_pipeline::default_spec(0.0, seed), EmbeddingSource::gfs, seed);
    }
    high /= 10.0;
    low /= 10.0;
    return {high >= 0.90 && std::abs(low - 0.5) <= 0.10,
            "sigma=1 mean " + fmt(high) + " (>= 0.90), sigma=0 mean " + fmt(low) + " (0.5 +- 0.10)"};
}

Outcome embedding_invariants() {
    Rng r(5);
    int bad = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<GazeFeature> f;
        const std::size_t n = 1 + r.index(40);
        for (std::size_t i = 0; i < n; ++i) f.push_back({r.uniform(), r.uniform(), r.uniform(50, 400), r.normal(), r.normal(), r.uniform(2, 5)});
        const GridSpec g{static_cast<int>(1 + r.index(6)), static_cast<int>(1 + r.index(6))};
        if (encode_gh(f, g).sum() != static_cast<double>(n)) ++bad;

        const auto mask = FeatureMask::parse(trial % 3 == 0 ? "xy" : trial % 3 == 1 ? "xy,d,ang" : "xy,d,ang,pupil");
        const std::size_t k = 1 + r.index(12);
        if (encode_gfs(f, {k, SamplingRule::even}, mask).size() != static_cast<Eigen::Index>(mask.size() * k)) ++bad;

        const std::size_t p = 1 + r.index(6), d = 1 + r.index(20);
        std::vector<EmbeddingSet> parts;
        for (std::size_t i = 0; i < p; ++i) parts.push_back(standardize(make_set(randmat(r, 6, static_cast<Eigen::Index>(d)))));
        const auto early = combine_participants(parts, FusionMode::early);
        if (early.dim() != p * d) ++bad;
        for (std::size_t i = 0; i < p; ++i) {
            if (early.vectors.middleCols(static_cast<Eigen::Index>(i * d), static_cast<Eigen::Index>(d)) != parts[i].vectors) ++bad;
        }
    }
    return {bad == 0, "200 random cases, violations " + std::to_string(bad)};
}

Outcome fusion_equivalences() {
    Rng r(6);
    int late_bad = 0, scale_bad = 0;
    for (int i = 0; i < 1000; ++i) {
        CompatibilityModel m;
        m.weights = randmat(r, 6, 4);
        auto phi = make_set(randmat(r, 1 + static_cast<Eigen::Index>(r.index(8)), 4));
        const auto x = randvec(r, 6);
        const auto base = predict_index(m, x, phi);
        if (predict_late_index({m}, x, {phi}) != base) ++late_bad;
        phi.vectors *= r.uniform(1e-3, 1e3);
        if (predict_index(m, x, phi) != base) ++scale_bad;
    }
    return {late_bad == 0 && scale_bad == 0,
            "1000 cases each, late P=1 mismatches " + std::to_string(late_bad) + ", scaling mismatches " + std::to_string(scale_bad)};
}

Outcome metric_oracle() {
    Rng r(8);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t k = 1 + r.index(10), n = 1 + r.index(100);
        std::vector<std::size_t> pred(n), truth(n);
        for (std::size_t j = 0; j < n; ++j) {
            truth[j] = r.index(k);
            pred[j] = r.uniform() < 0.4 ? truth[j] : r.index(k);
        }
        worst = std::max(worst, std::abs(per_class_accuracy(pred, truth, k) - oracle::per_class_accuracy(pred, truth)));
    }
    return {worst <= 1e-12, "1000 configurations, max difference " + fmt(worst)};
}

Outcome determinism() {
    const auto root = fs::temp_directory_path() / "gazezsl_acceptance";
    fs::remove_all(root);
    setenv("GAZEZSL_RUN_ROOT", (root / "runs").c_str(), 1);
    auto c = gazezsl::cli::parse_run_config(nlohmann::json::object());
    c.data = (root / "data").string();
    c.synth.images_per_class = 8;
    c.synth.participants = 3;
    c.split_count = 3;
    c.sources = {EmbeddingSource::gfs, EmbeddingSource::bubbles, EmbeddingSource::bow};
    c.run_name = "determinism";

    std::vector<std::vector<std::pair<std::string, std::string>>> digests;
    std::ostringstream sink;
    for (unsigned threads : {1U, 4U}) {
        fs::remove_all(root);
        c.threads = threads;
        cli::run_command("synth", c, sink);
        cli::run_command("eval", c, sink);
        auto d = digest_tree(root.string());
        digests.push_back(std::move(d));
    }
    fs::remove_all(root);
    const bool same = digests[0] == digests[1] && !digests[0].empty();
    return {same, std::to_string(digests[0].size()) + " artifacts (dataset + run), " + (same ? "hash-identical" : "differ")};
}

Outcome baseline_ordering() {
    double gaze = 0.0, random = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto spec = testing_pipeline::default_spec(0.9, seed);
        gaze += testing_pipeline::synthetic_accuracy(spec, EmbeddingSource::gfs, seed);
        random += testing_pipeline::synthetic_accuracy(spec, EmbeddingSource::random, seed);
    }
    gaze /= 10.0;
    random /= 10.0;
    return {gaze - random >= 0.15, "sigma=0.9 GFS " + fmt(gaze) + " vs random points " + fmt(random) + ", gap " + fmt(gaze - random)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"fixation oracle", fixation_oracle},
        {"gradient check", gradient_check},
        {"separable SJE", separable_sje},
        {"zero-shot sanity", zero_shot_sanity},
        {"embedding invariants", embedding_invariants},
        {"fusion equivalences", fusion_equivalences},
        {"metric oracle", metric_oracle},
        {"determinism", determinism},
        {"baseline ordering", baseline_ordering},
    };
    const auto start = Clock::now();
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_time = secs < 300.0;
    std::printf("%s total runtime %.1f s (limit 300 s)\n", in_time ? "PASS" : "FAIL", secs);
    return failed || !in_time ? 1 : 0;
}
