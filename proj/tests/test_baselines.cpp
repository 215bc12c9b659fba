#include <doctest.h>

#include <map>

#include "gazezsl/baselines.hpp"
#include "gazezsl/common.hpp"
#include "gazezsl/features.hpp"
#include "gazezsl/text.hpp"

using namespace gazezsl;

namespace {

DatasetManifest small_manifest(std::size_t classes = 3, std::size_t per_class = 2) {
    DatasetManifest m;
    for (std::size_t c = 0; c < classes; ++c) {
        m.classes.push_back("c" + std::to_string(c));
        for (std::size_t i = 0; i < per_class; ++i) {
            const std::size_t row = m.images.size();
            m.images.push_back({"img" + std::to_string(row), m.classes.back(), row, {100.0, 80.0}});
        }
    }
    m.participants = {"p1", "p2"};
    return m;
}

GazeEncoding gh_encoding() {
    GazeEncoding e;
    e.encoder = EmbeddingSource::gh;
    e.grid = {3, 3};
    return e;
}

}  // namespace

TEST_CASE("random points are seeded") {
    const auto m = small_manifest();
    auto enc = gh_encoding();
    const auto a = embed_random_points(m, m.participants, enc, FusionMode::early, 10, 42);
    const auto b = embed_random_points(m, m.participants, enc, FusionMode::early, 10, 42);
    const auto c = embed_random_points(m, m.participants, enc, FusionMode::early, 10, 43);
    REQUIRE(a.size() == 1);
    CHECK(a[0].vectors == b[0].vectors);
    CHECK(a[0].vectors != c[0].vectors);
    CHECK(a[0].source == EmbeddingSource::random);
    CHECK(embed_random_points(m, m.participants, enc, FusionMode::late, 10, 42).size() == 2);
}

TEST_CASE("random points fill GH cells uniformly") {
    const auto m = small_manifest(1, 1);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(9);
    const int seeds = 25;
    for (int seed = 0; seed < seeds; ++seed) {
        const auto corpus = random_points_corpus(m, {}, 9000, static_cast<std::uint64_t>(seed));
        REQUIRE(corpus.size() == 1);
        const auto& fix = corpus[0].paths[0].fixations;
        REQUIRE(fix.size() == 9000);
        for (const auto& f : fix) {
            REQUIRE(f.x >= 0.0);
            REQUIRE(f.x <= 1.0);
            REQUIRE(f.y >= 0.0);
            REQUIRE(f.y <= 1.0);
        }
        const auto gh = encode_gh(fixation_features(fix), {3, 3});
        CHECK(gh.sum() == 9000);
        mean += gh / seeds;
    }
    // expected mass per cell, estimated over seeds
    for (Eigen::Index i = 0; i < 9; ++i) {
        CHECK(mean[i] >= 950);
        CHECK(mean[i] <= 1050);
    }
}

TEST_CASE("central point") {
    const auto m = small_manifest();
    const auto gh = embed_central_point(m, m.participants, gh_encoding(), FusionMode::avg);
    REQUIRE(gh.size() == 1);
    for (Eigen::Index c = 0; c < 3; ++c) {
        Eigen::VectorXd want = Eigen::VectorXd::Zero(9);
        want[4] = 1;
        CHECK(gh[0].vectors.row(c).transpose() == want);
    }
    GazeEncoding gfs;
    gfs.encoder = EmbeddingSource::gfs;
    gfs.sequence = {1, SamplingRule::even};
    gfs.mask = FeatureMask::location_only();
    const auto s = embed_central_point(m, m.participants, gfs, FusionMode::avg);
    for (Eigen::Index c = 0; c < 3; ++c) CHECK(s[0].vectors.row(c) == Eigen::RowVector2d(0.5, 0.5));
}

TEST_CASE("saliency histogram") {
    const GridSpec g{3, 3};
    const auto uniform = saliency_cells(Eigen::MatrixXd::Constant(12, 12, 0.25), g);
    for (Eigen::Index i = 0; i < 9; ++i) CHECK(uniform[i] == 0.25);

    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(9, 9);
    delta(4, 4) = 1.0;
    const auto d = saliency_cells(delta, g);
    CHECK(d.maxCoeff() == d[4]);
    CHECK(d[4] > 0.0);
    CHECK(d.sum() == d[4]);

    const auto m = small_manifest(2, 1);
    std::map<std::string, Eigen::MatrixXd> maps{{"img0", Eigen::MatrixXd::Constant(6, 6, 1.0)}, {"img1", delta}};
    const auto set = embed_saliency_histogram(m, maps, g);
    CHECK(set.dim() == 9);
    CHECK(set.source == EmbeddingSource::saliency);
    maps.erase("img1");
    CHECK_THROWS_AS(embed_saliency_histogram(m, maps, g), ValidationError);
    maps["img1"] = -delta;
    CHECK_THROWS_AS(embed_saliency_histogram(m, maps, g), ValidationError);
}

TEST_CASE("BFS examples") {
    auto m = small_manifest(1, 1);
    const auto one = encode_bubbles_bfs({{"img0", {{0.3, 0.4, 0.05}}}}, m, {1, SamplingRule::even});
    CHECK(one.vectors.row(0) == Eigen::RowVector3d(0.3, 0.4, 0.05));

    const auto two = encode_bubbles_bfs({{"img0", {{0.1, 0.2, 0.03}, {0.7, 0.8, 0.09}}}}, m, {2, SamplingRule::even});
    REQUIRE(two.dim() == 6);
    Eigen::RowVectorXd want(6);
    want << 0.1, 0.2, 0.03, 0.7, 0.8, 0.09;
    CHECK(two.vectors.row(0) == want);

    auto m2 = small_manifest(2, 1);
    CHECK_THROWS_AS(encode_bubbles_bfs({{"img0", {{0.3, 0.4, 0.05}}}}, m2, {1, SamplingRule::even}), Error);
}

TEST_CASE("bubble tracks round-trip") {
    const std::vector<BubbleTrack> tracks{{"a", {{0.1, 0.2, 0.3}, {0.4, 0.5, 0.06}}}, {"b", {{0.9, 0.9, 0.01}}}};
    const auto back = parse_bubble_tracks(format_bubble_tracks(tracks));
    REQUIRE(back.size() == 2);
    CHECK(back[0].image_id == "a");
    CHECK(back[0].bubbles.size() == 2);
    CHECK(back[0].bubbles[1].radius == 0.06);
    CHECK(back[1].bubbles[0].x == 0.9);
    CHECK_THROWS_AS(parse_bubble_tracks("image_id,x,y,radius\na,0.1,0.2,1.5\n"), ParseError);
    CHECK_THROWS_AS(parse_bubble_tracks("wrong header\n"), ParseError);
}

TEST_CASE("attributes") {
    const auto set = parse_attributes("b 1 2\na 3 4\n", {"a", "b"});
    CHECK(set.labels == std::vector<std::string>{"a", "b"});
    CHECK(set.vectors.row(0) == Eigen::RowVector2d(3, 4));
    CHECK(parse_attributes(format_attributes(set), {"a", "b"}).vectors == set.vectors);
    CHECK_THROWS_AS(parse_attributes("a 1 2\n", {"a", "b"}), ValidationError);
    CHECK_THROWS_AS(parse_attributes("a 1 2\nb 1\n", {"a", "b"}), Error);
}

TEST_CASE("bag of words") {
    const auto bow = build_bow_embeddings({{"x", "red head"}, {"y", "red tail"}}, 3);
    CHECK(bow.vocabulary == std::vector<std::string>{"red", "head", "tail"});
    CHECK(bow.set.vectors.row(0) == Eigen::RowVector3d(1, 1, 0));
    CHECK(bow.set.vectors.row(1) == Eigen::RowVector3d(1, 0, 1));
    CHECK(bow.set.source == EmbeddingSource::bow);

    const auto stop = build_bow_embeddings({{"x", "the and of"}, {"y", "wing"}}, 5);
    CHECK(stop.set.vectors.row(0).isZero());
    REQUIRE(stop.warnings.size() == 1);
    CHECK(stop.warnings[0].find("'x'") != std::string::npos);

    CHECK_THROWS_AS(build_bow_embeddings({{"x", "the"}, {"y", "and"}}, 5), ValidationError);

    const auto capped = build_bow_embeddings({{"x", "beak beak wing wing tail"}, {"y", "crest"}}, 2);
    CHECK(capped.vocabulary == std::vector<std::string>{"beak", "wing"});
}

TEST_CASE("property: BoW column sums are stem frequencies") {
    const std::vector<std::string> words{"red", "wings", "feathers", "the", "long", "beak", "running", "and", "crested", "tail"};
    Rng r(12);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<CorpusDocument> docs;
        std::map<std::string, double> freq;
        for (int c = 0; c < 4; ++c) {
            std::string text;
            for (std::size_t w = 0, n = 1 + r.index(30); w < n; ++w) {
                const auto& word = words[r.index(words.size())];
                text += word + " ";
                if (!text::is_stop_word(word)) freq[text::porter_stem(word)] += 1;
            }
            docs.push_back({"c" + std::to_string(c), text});
        }
        if (freq.empty()) continue;
        const auto bow = build_bow_embeddings(docs, 1 + r.index(8));
        for (std::size_t j = 0; j < bow.vocabulary.size(); ++j) {
            const auto col = bow.set.vectors.col(static_cast<Eigen::Index>(j));
            CHECK(col.sum() == freq[bow.vocabulary[j]]);
            CHECK((col.array() >= 0).all());
            CHECK((col.array() == col.array().round()).all());
            if (j) {
                const double prev = freq[bow.vocabulary[j - 1]], cur = freq[bow.vocabulary[j]];
                CHECK((prev > cur || (prev == cur && bow.vocabulary[j - 1] < bow.vocabulary[j])));
            }
        }
    }
}

TEST_CASE("fusing two sources") {
    Rng r(13);
    EmbeddingSet a;
    a.labels = {"a", "b", "c"};
    a.vectors.resize(3, 312);
    for (Eigen::Index i = 0; i < a.vectors.size(); ++i) a.vectors.data()[i] = r.normal();
    EmbeddingSet g = a;
    g.vectors.resize(3, 150);
    for (Eigen::Index i = 0; i < g.vectors.size(); ++i) g.vectors.data()[i] = r.normal();

    const auto fused = fuse_embeddings(a, g);
    CHECK(fused.dim() == 462);
    CHECK(fused.source == EmbeddingSource::fused);

    const auto self = fuse_embeddings(a, a);
    CHECK(self.vectors.leftCols(312) == self.vectors.rightCols(312));
    CHECK(self.vectors.leftCols(312) == standardize(a).vectors);

    auto other = g;
    other.labels = {"a", "b", "z"};
    CHECK_THROWS_AS(fuse_embeddings(a, other), Error);
}
