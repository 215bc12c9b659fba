#include "gazezsl/fixation.hpp"

#include <algorithm>
#include <cmath>

#include "gazezsl/common.hpp"

namespace gazezsl {

void FilterParams::validate() const {
    if (!(dispersion > 0.0) || !std::isfinite(dispersion)) throw ConfigError("filter.ws", "must be > 0");
    if (!(duration_ms > 0.0) || !std::isfinite(duration_ms)) throw ConfigError("filter.ts", "must be > 0");
}

double degrees_to_pixels(double degrees, double distance_cm, double stimulus_cm, double stimulus_px) {
    const double extent_cm = 2.0 * distance_cm * std::tan(0.5 * degrees * M_PI / 180.0);
    return extent_cm * stimulus_px / stimulus_cm;
}

namespace {

struct Bounds {
    double min_x, max_x, min_y, max_y;

    explicit Bounds(const GazePoint& p) : min_x(p.x), max_x(p.x), min_y(p.y), max_y(p.y) {}
    void add(const GazePoint& p) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    Bounds with(const GazePoint& p) const {
        Bounds b = *this;
        b.add(p);
        return b;
    }
    double dispersion() const { return (max_x - min_x) + (max_y - min_y); }
};

}  // namespace

std::vector<Fixation> detect_fixations(const GazeStream& stream, const FilterParams& params) {
    params.validate();
    const auto& s = stream.samples;
    std::vector<Fixation> out;
    const std::size_t n = s.size();
    std::size_t start = 0;
    // `end` is one past the last window sample; it never moves backwards
    // because the window's first sample only advances.
    std::size_t end = 0;
    while (start < n) {
        end = std::max(end, start + 1);
        while (end < n && s[end - 1].timestamp - s[start].timestamp < params.duration_ms) ++end;
        if (s[end - 1].timestamp - s[start].timestamp < params.duration_ms) break;

        Bounds bounds(s[start]);
        for (std::size_t i = start + 1; i < end; ++i) bounds.add(s[i]);
        if (bounds.dispersion() > params.dispersion) {
            ++start;
            continue;
        }
        while (end < n) {
            const Bounds grown = bounds.with(s[end]);
            if (grown.dispersion() > params.dispersion) break;
            bounds = grown;
            ++end;
        }

        double sx = 0.0, sy = 0.0, sp = 0.0;
        for (std::size_t i = start; i < end; ++i) {
            sx += s[i].x;
            sy += s[i].y;
            sp += s[i].pupil;
        }
        const double count = static_cast<double>(end - start);
        Fixation f;
        f.x = std::clamp(sx / count / stream.dims.width, 0.0, 1.0);
        f.y = std::clamp(sy / count / stream.dims.height, 0.0, 1.0);
        f.pupil = sp / count;
        f.onset = s[start].timestamp;
        f.duration = s[end - 1].timestamp - s[start].timestamp;
        out.push_back(f);
        start = end;
    }
    return out;
}

}  // namespace gazezsl
