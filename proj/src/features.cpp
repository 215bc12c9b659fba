#include "gazezsl/features.hpp"

#include <cmath>

#include "gazezsl/common.hpp"

namespace gazezsl {

FeatureMask::FeatureMask(bool duration, bool angle_prev, bool angle_next, bool pupil)
    : enabled_{true, true, duration, angle_prev, angle_next, pupil} {}

FeatureMask FeatureMask::parse(std::string_view spec) {
    bool xy = false, d = false, a1 = false, a2 = false, r = false;
    for (const auto& token : split(spec, ',')) {
        if (token == "xy") {
            xy = true;
        } else if (token == "d") {
            d = true;
        } else if (token == "ang") {
            a1 = a2 = true;
        } else if (token == "a1") {
            a1 = true;
        } else if (token == "a2") {
            a2 = true;
        } else if (token == "pupil" || token == "R") {
            r = true;
        } else {
            throw ConfigError("features", "unknown feature '" + token + "'");
        }
    }
    if (!xy) throw ConfigError("features", "mask must include xy");
    return {d, a1, a2, r};
}

std::size_t FeatureMask::size() const {
    std::size_t n = 0;
    for (bool e : enabled_) n += e;
    return n;
}

std::string FeatureMask::to_string() const {
    std::string s = "xy";
    if (has(FeatureComponent::duration)) s += ",d";
    if (has(FeatureComponent::angle_prev) && has(FeatureComponent::angle_next)) {
        s += ",ang";
    } else if (has(FeatureComponent::angle_prev)) {
        s += ",a1";
    } else if (has(FeatureComponent::angle_next)) {
        s += ",a2";
    }
    if (has(FeatureComponent::pupil)) s += ",pupil";
    return s;
}

std::vector<GazeFeature> fixation_features(const std::vector<Fixation>& fixations) {
    std::vector<GazeFeature> out(fixations.size());
    for (std::size_t i = 0; i < fixations.size(); ++i) {
        const auto& f = fixations[i];
        auto& g = out[i];
        g.x = f.x;
        g.y = f.y;
        g.duration = f.duration;
        g.pupil = f.pupil;
        if (i > 0) g.angle_prev = std::atan2(f.y - fixations[i - 1].y, f.x - fixations[i - 1].x);
        if (i + 1 < fixations.size()) g.angle_next = std::atan2(fixations[i + 1].y - f.y, fixations[i + 1].x - f.x);
    }
    return out;
}

Eigen::VectorXd project_feature(const GazeFeature& feature, const FeatureMask& mask) {
    const auto all = feature.values();
    Eigen::VectorXd v(mask.size());
    Eigen::Index k = 0;
    for (int c = 0; c < 6; ++c) {
        if (mask.has(static_cast<FeatureComponent>(c))) v[k++] = all[c];
    }
    return v;
}

std::vector<Eigen::VectorXd> project_features(const std::vector<GazeFeature>& features, const FeatureMask& mask) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(features.size());
    for (const auto& f : features) out.push_back(project_feature(f, mask));
    return out;
}

}  // namespace gazezsl
