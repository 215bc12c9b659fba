#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gazezsl/fixation.hpp"

namespace gazezsl {

// Per-fixation gaze descriptor [x, y, d, a1, a2, R]. Angles are measured in
// normalized image coordinates with y pointing down; a1 of the first fixation
// and a2 of the last are zero.
struct GazeFeature {
    double x = 0.0, y = 0.0;
    double duration = 0.0;
    double angle_prev = 0.0;
    double angle_next = 0.0;
    double pupil = 0.0;

    std::array<double, 6> values() const { return {x, y, duration, angle_prev, angle_next, pupil}; }
};

enum class FeatureComponent { x = 0, y, duration, angle_prev, angle_next, pupil };

// Subset of the six components, always emitted in canonical order.
class FeatureMask {
public:
    FeatureMask() = default;  // full mask
    FeatureMask(bool duration, bool angle_prev, bool angle_next, bool pupil);

    static FeatureMask location_only() { return {false, false, false, false}; }
    static FeatureMask full() { return {}; }
    // Parses "xy[,d][,ang][,pupil]"; "ang" selects both angles, "a1"/"a2"
    // select one. Throws ConfigError when xy is missing.
    static FeatureMask parse(std::string_view spec);

    bool has(FeatureComponent c) const { return enabled_[static_cast<int>(c)]; }
    std::size_t size() const;
    std::string to_string() const;

    bool operator==(const FeatureMask&) const = default;

private:
    std::array<bool, 6> enabled_{true, true, true, true, true, true};
};

std::vector<GazeFeature> fixation_features(const std::vector<Fixation>& fixations);

Eigen::VectorXd project_feature(const GazeFeature& feature, const FeatureMask& mask);
std::vector<Eigen::VectorXd> project_features(const std::vector<GazeFeature>& features, const FeatureMask& mask);

}  // namespace gazezsl
