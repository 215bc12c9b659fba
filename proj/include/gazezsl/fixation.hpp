#pragma once

#include <vector>

#include "gazezsl/ingest.hpp"

namespace gazezsl {

// Dispersion-threshold (I-DT) parameters. `dispersion` is in the input
// coordinate unit (pixels); `duration_ms` is the minimum window length.
struct FilterParams {
    double dispersion = 25.0;
    double duration_ms = 10.0;

    void validate() const;
};

// Converts a visual angle to pixels for a stimulus of `stimulus_cm` physical
// width rendered at `stimulus_px` pixels, viewed from `distance_cm`.
double degrees_to_pixels(double degrees, double distance_cm = 67.0, double stimulus_cm = 15.0,
                         double stimulus_px = 500.0);

struct Fixation {
    double x = 0.0, y = 0.0;    // centroid, normalized to [0, 1]
    double duration = 0.0;      // ms
    double pupil = 0.0;         // mm, mean over member samples
    double onset = 0.0;         // ms

    bool operator==(const Fixation&) const = default;
};

// Classic I-DT. A window starts as the shortest run of samples spanning at
// least `duration_ms`; if its dispersion (max_x - min_x) + (max_y - min_y)
// stays within `dispersion` the window grows sample by sample until the next
// sample would exceed it, the window becomes a fixation and scanning resumes
// after it. Otherwise the window start slides by one sample. A trailing run
// shorter than `duration_ms` is dropped.
std::vector<Fixation> detect_fixations(const GazeStream& stream, const FilterParams& params);

}  // namespace gazezsl
