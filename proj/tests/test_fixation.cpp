#include <doctest.h>

#include <cmath>

#include "gazezsl/common.hpp"
#include "gazezsl/fixation.hpp"
#include "gazezsl/synth.hpp"
#include "oracles.hpp"

using namespace gazezsl;

namespace {

GazeStream stream_of(const std::vector<std::array<double, 3>>& pts, ImageDims dims = {500, 500}) {
    GazeStream s;
    s.dims = dims;
    for (const auto& p : pts) s.samples.push_back({p[0], p[1], p[2], 3.0});
    return s;
}

void check_against_oracle(const GazeStream& s, const FilterParams& fp) {
    const auto got = detect_fixations(s, fp);
    const auto want = oracle::idt(s, fp.dispersion, fp.duration_ms);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(std::abs(got[i].x - want[i].x) <= 1e-9);
        CHECK(std::abs(got[i].y - want[i].y) <= 1e-9);
        CHECK(got[i].duration == want[i].duration);
        CHECK(got[i].onset == want[i].onset);
        CHECK(std::abs(got[i].pupil - want[i].pupil) <= 1e-9);
    }
}

}  // namespace

TEST_CASE("stationary gaze is one fixation") {
    std::vector<std::array<double, 3>> pts;
    for (int t = 0; t <= 200; t += 10) pts.push_back({double(t), 120.0, 80.0});
    const auto f = detect_fixations(stream_of(pts, {240, 160}), {});
    REQUIRE(f.size() == 1);
    CHECK(f[0].duration == 200.0);
    CHECK(f[0].x == 0.5);
    CHECK(f[0].y == 0.5);
    CHECK(f[0].onset == 0.0);
    CHECK(f[0].pupil == 3.0);
}

TEST_CASE("two distant clusters are two fixations") {
    std::vector<std::array<double, 3>> pts;
    for (int t = 0; t < 100; t += 5) pts.push_back({double(t), 10.0, 10.0});
    for (int t = 100; t < 200; t += 5) pts.push_back({double(t), 510.0, 10.0});
    const auto f = detect_fixations(stream_of(pts, {600, 600}), {});
    REQUIRE(f.size() == 2);
    CHECK(f[0].x == doctest::Approx(10.0 / 600));
    CHECK(f[1].x == doctest::Approx(510.0 / 600));
}

TEST_CASE("stream shorter than the window yields nothing") {
    const auto f = detect_fixations(stream_of({{0, 1, 1}, {3, 1, 1}, {6, 1, 1}}), {25, 10});
    CHECK(f.empty());
}

TEST_CASE("trailing short window is dropped") {
    // Fixation over [0, 20], a saccade, then only 5 ms at the new spot.
    const auto f = detect_fixations(stream_of({{0, 1, 1}, {10, 1, 1}, {20, 1, 1}, {25, 400, 400}, {30, 400, 400}}), {25, 10});
    REQUIRE(f.size() == 1);
    CHECK(f[0].duration == 20);
}

TEST_CASE("dispersion at the threshold is accepted") {
    // (dx + dy) == ws exactly
    const auto f = detect_fixations(stream_of({{0, 0, 0}, {10, 15, 10}}), {25, 10});
    CHECK(f.size() == 1);
    const auto g = detect_fixations(stream_of({{0, 0, 0}, {10, 15, 10.5}}), {25, 10});
    CHECK(g.empty());
}

TEST_CASE("filter parameters are validated") {
    CHECK_THROWS_AS(FilterParams({0, 10}).validate(), ConfigError);
    CHECK_THROWS_AS(FilterParams({25, 0}).validate(), ConfigError);
    CHECK_THROWS_AS(detect_fixations(stream_of({{0, 1, 1}}), {-1, 10}), ConfigError);
}

TEST_CASE("degrees to pixels") {
    // 15 cm rendered at 500 px; 1 degree at 67 cm is 2*67*tan(0.5 deg) cm
    const double cm = 2 * 67 * std::tan(0.5 * M_PI / 180);
    CHECK(degrees_to_pixels(1.0) == doctest::Approx(cm / 15 * 500));
    CHECK(degrees_to_pixels(0.0) == 0.0);
}

TEST_CASE("property: detector matches the brute-force oracle") {
    Rng r(21);
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = synth::random_stream(r, 50 + r.index(400));
        FilterParams fp;
        fp.dispersion = r.uniform(2, 60);
        fp.duration_ms = r.uniform(1, 120);
        check_against_oracle(s, fp);
    }
}

TEST_CASE("property: counts and durations are bounded") {
    Rng r(22);
    for (int trial = 0; trial < 100; ++trial) {
        const auto s = synth::random_stream(r, 20 + r.index(300));
        FilterParams fp{r.uniform(2, 60), r.uniform(1, 80)};
        const auto f = detect_fixations(s, fp);
        CHECK(f.size() <= s.samples.size());
        double total = 0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            total += f[i].duration;
            CHECK(f[i].duration > 0);
            CHECK(f[i].pupil > 0);
            CHECK(f[i].x >= 0);
            CHECK(f[i].x <= 1);
            CHECK(f[i].y >= 0);
            CHECK(f[i].y <= 1);
            if (i) CHECK(f[i].onset > f[i - 1].onset);
        }
        CHECK(total <= s.samples.back().timestamp - s.samples.front().timestamp);
        CHECK(detect_fixations(s, fp) == f);
    }
}

TEST_CASE("property: raising the dispersion threshold never adds fixations") {
    Rng r(23);
    int violations = 0, cases = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto s = synth::random_stream(r, 50 + r.index(300));
        const double ts = r.uniform(1, 80);
        double prev_ws = r.uniform(1, 10);
        auto prev = detect_fixations(s, {prev_ws, ts}).size();
        for (int step = 0; step < 8; ++step) {
            const double ws = prev_ws + r.uniform(0.5, 15);
            const auto n = detect_fixations(s, {ws, ts}).size();
            ++cases;
            if (n > prev) ++violations;
            prev = n;
            prev_ws = ws;
        }
    }
    CHECK_MESSAGE(violations == 0, violations, " of ", cases, " threshold increases added fixations");
}
