#include <doctest.h>

#include <filesystem>

#include "gazezsl/common.hpp"
#include "gazezsl/dataset.hpp"
#include "gazezsl/synth.hpp"
#include "pipeline.hpp"

using namespace gazezsl;
namespace fs = std::filesystem;

namespace {

synth::SynthSpec tiny(double sigma, std::uint64_t seed) {
    synth::SynthSpec spec;
    spec.n_classes = 4;
    spec.images_per_class = 3;
    spec.participants = 2;
    spec.samples_per_stream = 120;
    spec.signal = sigma;
    spec.seed = seed;
    return spec;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("gazezsl_synth_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("spec validation") {
    auto spec = tiny(1.0, 0);
    CHECK_NOTHROW(spec.validate());
    spec.signal = 1.5;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = tiny(1.0, 0);
    spec.n_classes = 0;
    CHECK_THROWS_AS(synth::generate(spec), ConfigError);
}

TEST_CASE("full signal puts every fixation on the class anchor") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto data = synth::generate(tiny(1.0, seed));
        const auto corpus = detect_corpus(synth::streams_of(data), FilterParams{});
        for (const auto& p : corpus) {
            for (const auto& path : p.paths) {
                REQUIRE_FALSE(path.fixations.empty());
                const auto& anchor = data.anchors[data.manifest.class_index(path.label)];
                double cx = 0, cy = 0;
                for (const auto& f : path.fixations) {
                    CHECK(std::abs(f.x - anchor[0]) <= 1e-6);
                    CHECK(std::abs(f.y - anchor[1]) <= 1e-6);
                    cx += f.x / static_cast<double>(path.fixations.size());
                    cy += f.y / static_cast<double>(path.fixations.size());
                }
                CHECK(std::abs(cx - anchor[0]) <= 1e-6);
                CHECK(std::abs(cy - anchor[1]) <= 1e-6);
            }
        }
    }
}

TEST_CASE("anchors are distinct and inside the image") {
    const auto data = synth::generate(synth::SynthSpec{});
    for (std::size_t a = 0; a < data.anchors.size(); ++a) {
        CHECK(data.anchors[a][0] > 0.0);
        CHECK(data.anchors[a][0] < 1.0);
        CHECK(data.anchors[a][1] > 0.0);
        CHECK(data.anchors[a][1] < 1.0);
        for (std::size_t b = 0; b < a; ++b) {
            CHECK(std::hypot(data.anchors[a][0] - data.anchors[b][0], data.anchors[a][1] - data.anchors[b][1]) > 0.05);
        }
    }
}

TEST_CASE("same seed writes byte-identical files") {
    const auto a = scratch("a"), b = scratch("b"), c = scratch("c");
    synth::write_dataset(synth::generate(tiny(0.7, 5)), a.string());
    synth::write_dataset(synth::generate(tiny(0.7, 5)), b.string());
    synth::write_dataset(synth::generate(tiny(0.7, 6)), c.string());
    const auto da = digest_tree(a.string());
    CHECK(da.size() > 5);
    CHECK(da == digest_tree(b.string()));
    CHECK(da != digest_tree(c.string()));
    fs::remove_all(a);
    fs::remove_all(b);
    fs::remove_all(c);
}

TEST_CASE("written datasets parse back cleanly") {
    const auto dir = scratch("parse");
    const auto data = synth::generate(tiny(0.5, 9));
    synth::write_dataset(data, dir.string());
    const auto loaded = load_dataset(dir.string(), 1);
    CHECK(format_manifest(loaded.manifest) == format_manifest(data.manifest));
    CHECK(loaded.features.rows == data.features.rows);
    REQUIRE(loaded.attributes.has_value());
    CHECK(loaded.attributes->vectors == data.attributes.vectors);
    CHECK(loaded.bubbles.size() == data.bubbles.size());
    CHECK(loaded.documents.size() == data.documents.size());
    CHECK(loaded.saliency.size() == data.saliency.size());

    const auto direct = synth::streams_of(data);
    REQUIRE(loaded.streams.size() == direct.size());
    for (std::size_t p = 0; p < direct.size(); ++p) {
        REQUIRE(loaded.streams[p].streams.size() == direct[p].streams.size());
        for (std::size_t s = 0; s < direct[p].streams.size(); ++s) {
            const auto& x = loaded.streams[p].streams[s].second.samples;
            const auto& y = direct[p].streams[s].second.samples;
            REQUIRE(x.size() == y.size());
            for (std::size_t i = 0; i < x.size(); ++i) {
                CHECK(x[i].x == y[i].x);
                CHECK(x[i].timestamp == y[i].timestamp);
            }
        }
    }
    const auto bow = build_bow_embeddings(loaded.documents, 1000);
    CHECK(bow.warnings.empty());
    fs::remove_all(dir);
}

TEST_CASE("random streams are ordered and inside the image") {
    Rng r(3);
    for (int i = 0; i < 20; ++i) {
        const auto s = synth::random_stream(r, 200);
        REQUIRE(s.samples.size() == 200);
        for (std::size_t k = 0; k < s.samples.size(); ++k) {
            if (k) CHECK(s.samples[k].timestamp > s.samples[k - 1].timestamp);
            CHECK(s.samples[k].x >= 0.0);
            CHECK(s.samples[k].x <= s.dims.width);
        }
    }
}

TEST_CASE("property: accuracy does not drop as the class signal grows") {
    double prev = -1.0;
    for (double sigma : {0.0, 0.5, 1.0}) {
        double total = 0.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            total += testing_pipeline::synthetic_accuracy(testing_pipeline::default_spec(sigma, seed), EmbeddingSource::gfs, seed);
        }
        const double mean = total / 10.0;
        MESSAGE("sigma " << sigma << " mean accuracy " << mean);
        CHECK(mean >= prev);
        prev = mean;
    }
}
