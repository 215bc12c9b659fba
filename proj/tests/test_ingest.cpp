#include <doctest.h>

#include <filesystem>

#include "gazezsl/common.hpp"
#include "gazezsl/ingest.hpp"
#include "gazezsl/synth.hpp"

using namespace gazezsl;

namespace {

std::string log_of(const std::vector<std::string>& rows) {
    std::string s(kGazeLogHeader);
    s += '\n';
    for (const auto& r : rows) s += r + '\n';
    return s;
}

RawGazeSample random_sample(Rng& r, double t) {
    RawGazeSample s;
    s.timestamp = t;
    s.left_x = r.uniform(-20, 520);
    s.left_y = r.uniform(-20, 420);
    s.right_x = r.uniform(-20, 520);
    s.right_y = r.uniform(-20, 420);
    s.left_pupil = r.uniform(2, 5);
    s.right_pupil = r.uniform(2, 5);
    s.left_valid = r.uniform() < 0.2 ? static_cast<int>(1 + r.index(4)) : 0;
    s.right_valid = r.uniform() < 0.2 ? static_cast<int>(1 + r.index(4)) : 0;
    return s;
}

}  // namespace

TEST_CASE("invalid eye drops the sample") {
    const auto text = log_of({"0,10,10,12,10,3,3,0,0", "3,11,10,12,10,3,3,0,4", "6,12,10,12,10,3,3,0,0"});
    const auto s = parse_gaze_text(text, {100, 100});
    REQUIRE(s.samples.size() == 2);
    CHECK(s.samples[0].timestamp == 0);
    CHECK(s.samples[1].timestamp == 6);
}

TEST_CASE("both eyes are averaged") {
    const auto s = parse_gaze_text(log_of({"0,10,20,30,40,3,4,0,0"}), {100, 100});
    REQUIRE(s.samples.size() == 1);
    CHECK(s.samples[0].x == 20);
    CHECK(s.samples[0].y == 30);
    CHECK(s.samples[0].pupil == 3.5);
}

TEST_CASE("points outside the image are clamped") {
    const auto s = parse_gaze_text(log_of({"0,-10,-10,-30,-40,3,3,0,0", "1,900,90,910,95,3,3,0,0"}), {640, 80});
    CHECK(s.samples[0].x == 0);
    CHECK(s.samples[0].y == 0);
    CHECK(s.samples[1].x == 640);
    CHECK(s.samples[1].y == 80);
}

TEST_CASE("malformed logs report the line") {
    auto line_of = [](const std::string& text) -> std::size_t {
        try {
            read_raw_gaze_log(text, "log.csv");
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of(log_of({"0,1,1,1,1,3,3,0,0", "1,1,1,1,3,3,0,0"})) == 3);
    CHECK(line_of(log_of({"0,1,1,1,1,3,3,0,0", "1,1,x,1,1,3,3,0,0"})) == 3);
    CHECK(line_of(log_of({"0,1,1,1,1,3,3,0,0", "1,1,nan,1,1,3,3,0,0"})) == 3);
    CHECK(line_of(log_of({"5,1,1,1,1,3,3,0,0", "4,1,1,1,1,3,3,0,0"})) == 3);
    CHECK(line_of(log_of({"0,1,1,1,1,0,3,0,0"})) == 2);
    CHECK(line_of("time,x,y\n0,1,1\n") == 1);
    // Non-positive pupil is fine for an invalid eye.
    CHECK_NOTHROW(read_raw_gaze_log(log_of({"0,1,1,1,1,0,3,4,0"})));
}

TEST_CASE("no valid samples is an error") {
    CHECK_THROWS_AS(parse_gaze_text(log_of({"0,1,1,1,1,3,3,1,0"}), {10, 10}), ValidationError);
}

TEST_CASE("synthetic 300 Hz half-second log has 150 increasing samples") {
    synth::SynthSpec spec;
    spec.n_classes = 1;
    spec.images_per_class = 1;
    spec.participants = 1;
    spec.samples_per_stream = 150;
    const auto data = synth::generate(spec);
    const auto& log = data.logs.begin()->second;
    const auto& img = data.manifest.images.front();
    const auto s = parse_gaze_text(format_raw_gaze_log(log), img.dims);
    REQUIRE(s.samples.size() == 150);
    for (std::size_t i = 1; i < s.samples.size(); ++i) CHECK(s.samples[i].timestamp > s.samples[i - 1].timestamp);
    CHECK(s.samples.back().timestamp < 500.0);
}

TEST_CASE("property: raw logs round-trip through the text format") {
    Rng r(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<RawGazeSample> samples;
        double t = 0;
        for (int i = 0; i < 40; ++i) {
            t += r.uniform(0, 5);
            samples.push_back(random_sample(r, t));
            if (samples.back().left_valid == 0 && samples.back().left_pupil <= 0) samples.back().left_pupil = 1;
        }
        CHECK(read_raw_gaze_log(format_raw_gaze_log(samples)) == samples);
    }
}

TEST_CASE("property: streams round-trip and filtering is idempotent") {
    Rng r(6);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<RawGazeSample> samples;
        for (int i = 0; i < 30; ++i) samples.push_back(random_sample(r, i * 3.0));
        samples[0].left_valid = samples[0].right_valid = 0;
        const ImageDims dims{500, 400};
        const auto once = binocular_filter(samples, dims);
        const auto twice = binocular_filter(to_raw(once), dims);
        CHECK(once == twice);
        const auto stream = parse_gaze_text(format_raw_gaze_log(to_raw(once)), dims);
        CHECK(stream.samples == once);
    }
}

TEST_CASE("property: binocular averaging commutes with normalization") {
    Rng r(8);
    for (int trial = 0; trial < 200; ++trial) {
        auto s = random_sample(r, 0);
        s.left_valid = s.right_valid = 0;
        const ImageDims dims{r.uniform(100, 900), r.uniform(100, 900)};
        const auto p = binocular_filter({s}, dims).front();
        // Average after normalizing each eye (clamping happens on the average).
        const double nx = (s.left_x / dims.width + s.right_x / dims.width) / 2;
        const double ny = (s.left_y / dims.height + s.right_y / dims.height) / 2;
        CHECK(p.x / dims.width == doctest::Approx(std::clamp(nx, 0.0, 1.0)).epsilon(1e-12));
        CHECK(p.y / dims.height == doctest::Approx(std::clamp(ny, 0.0, 1.0)).epsilon(1e-12));
    }
}

namespace {

std::string manifest_text(std::size_t classes, std::size_t per_class, std::size_t participants) {
    std::string s = "# gazezsl manifest v1\n";
    for (std::size_t c = 0; c < classes; ++c) s += "class c" + std::to_string(c) + "\n";
    for (std::size_t p = 0; p < participants; ++p) s += "participant p" + std::to_string(p) + "\n";
    std::size_t row = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t i = 0; i < per_class; ++i, ++row) {
            s += "image i" + std::to_string(row) + " c" + std::to_string(c) + " " + std::to_string(row) + " 500 375\n";
        }
    }
    return s;
}

}  // namespace

TEST_CASE("manifest at CUB-VW scale is accepted") {
    // 464 images over 14 classes: 2 classes get 34, the rest 33
    std::string s = "# gazezsl manifest v1\n";
    for (int c = 0; c < 14; ++c) s += "class c" + std::to_string(c) + "\n";
    for (int p = 0; p < 5; ++p) s += "participant p" + std::to_string(p) + "\n";
    for (int i = 0; i < 464; ++i) s += "image i" + std::to_string(i) + " c" + std::to_string(i % 14) + " " + std::to_string(i) + " 500 375\n";
    const auto m = parse_manifest(s);
    CHECK(m.images.size() == 464);
    CHECK(m.classes.size() == 14);
    CHECK(m.participants.size() == 5);
    CHECK(m.classes[3] == "c3");
    CHECK(parse_manifest(format_manifest(m)).images.size() == 464);
}

TEST_CASE("manifest errors") {
    auto base = manifest_text(2, 2, 1);
    CHECK_THROWS_AS(parse_manifest(base + "image i0 c0 9 500 375\n"), Error);              // duplicate image
    CHECK_THROWS_AS(parse_manifest("# gazezsl manifest v1\nparticipant p\n"), Error);       // no classes
    CHECK_THROWS_AS(parse_manifest(manifest_text(2, 2, 1) + "image x c9 4 500 375\n"), Error);  // unknown class
    CHECK_THROWS_AS(parse_manifest(manifest_text(2, 2, 1) + "image x c0 1 500 375\n"), Error);  // reused row
    CHECK_THROWS_AS(parse_manifest(manifest_text(2, 2, 1) + "image x c0 7 500 375\n"), Error);  // row out of range
    CHECK_THROWS_AS(parse_manifest(manifest_text(2, 2, 1) + "class c0\n"), Error);           // duplicate class
    CHECK_THROWS_AS(parse_manifest(manifest_text(2, 2, 1) + "image x c0 4 0 375\n"), Error);    // bad dims
    CHECK_THROWS_AS(parse_manifest(manifest_text(2, 2, 1) + "bogus line\n"), ParseError);
}

TEST_CASE("class order follows the file") {
    const auto m = parse_manifest("# gazezsl manifest v1\nclass zeta\nclass alpha\nclass mid\nimage a alpha 0 5 5\n"
                                  "image b zeta 1 5 5\nimage c mid 2 5 5\n");
    CHECK(m.classes == std::vector<std::string>{"zeta", "alpha", "mid"});
}

TEST_CASE("feature matrix ingestion") {
    const auto m = parse_manifest(manifest_text(2, 5, 1));
    std::string text;
    for (int i = 0; i < 10; ++i) text += "1 2 3 " + std::to_string(i) + "\n";
    const auto f = parse_feature_matrix(text, m);
    CHECK(f.dim() == 4);
    CHECK(f.rows(9, 3) == 9);
    CHECK(parse_feature_matrix(format_feature_matrix(f), m).rows == f.rows);

    const auto m9 = parse_manifest(manifest_text(3, 3, 1));
    CHECK_THROWS_AS(parse_feature_matrix(text, m9), Error);
    auto with_nan = text;
    with_nan.replace(with_nan.find('2'), 1, "nan");
    CHECK_THROWS_AS(parse_feature_matrix(with_nan, m), ParseError);
    auto with_inf = text;
    with_inf.replace(with_inf.find('2'), 1, "inf");
    CHECK_THROWS_AS(parse_feature_matrix(with_inf, m), ParseError);
    auto with_word = text;
    with_word.replace(with_word.find('2'), 1, "two");
    CHECK_THROWS_AS(parse_feature_matrix(with_word, m), ParseError);
}

TEST_CASE("1024-dimensional features are accepted") {
    const auto m = parse_manifest(manifest_text(14, 1, 5));
    Rng r(2);
    std::string text;
    for (int i = 0; i < 14; ++i) {
        for (int d = 0; d < 1024; ++d) text += (d ? " " : "") + format_double(r.normal());
        text += '\n';
    }
    CHECK(parse_feature_matrix(text, m).dim() == 1024);
}
