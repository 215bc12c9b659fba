#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace gazezsl {

// One binocular tracker record. Validity code 0 means best confidence.
struct RawGazeSample {
    double timestamp = 0.0;  // ms since stream start
    double left_x = 0.0, left_y = 0.0;
    double right_x = 0.0, right_y = 0.0;
    double left_pupil = 0.0, right_pupil = 0.0;  // mm
    int left_valid = 0, right_valid = 0;

    bool operator==(const RawGazeSample&) const = default;
};

// A binocularly averaged sample: both eyes valid, point and pupil are the
// left/right means, point clamped to the image.
struct GazePoint {
    double timestamp = 0.0;
    double x = 0.0, y = 0.0;  // image pixels
    double pupil = 0.0;       // mm

    bool operator==(const GazePoint&) const = default;
};

struct ImageDims {
    double width = 0.0;
    double height = 0.0;
};

struct GazeStream {
    std::string image_id;
    std::string participant_id;
    ImageDims dims;
    std::vector<GazePoint> samples;
};

// Column order of the gaze log. The header line must match exactly.
inline constexpr std::string_view kGazeLogHeader =
    "timestamp_ms,left_x,left_y,right_x,right_y,left_pupil,right_pupil,left_valid,right_valid";

std::vector<RawGazeSample> read_raw_gaze_log(std::string_view text, const std::string& origin = "<memory>");
std::string format_raw_gaze_log(const std::vector<RawGazeSample>& samples);

// Drops samples not valid in both eyes, averages the eyes and clamps to the
// image. Throws ValidationError when nothing survives.
std::vector<GazePoint> binocular_filter(const std::vector<RawGazeSample>& samples, ImageDims dims);

// Rewrites filtered points back as raw records (both eyes at the point, valid).
std::vector<RawGazeSample> to_raw(const std::vector<GazePoint>& points);

GazeStream parse_gaze_log(const std::string& path, ImageDims dims);
GazeStream parse_gaze_text(std::string_view text, ImageDims dims, const std::string& origin = "<memory>");

struct ImageRecord {
    std::string image_id;
    std::string class_label;
    std::size_t feature_row = 0;
    ImageDims dims;
};

struct DatasetManifest {
    std::vector<ImageRecord> images;
    std::vector<std::string> classes;
    std::vector<std::string> participants;

    // Index into `classes`, or throws ValidationError.
    std::size_t class_index(const std::string& label) const;
    // Checks every invariant; throws ValidationError.
    void validate() const;
};

DatasetManifest parse_manifest(std::string_view text, const std::string& origin = "<memory>");
DatasetManifest load_manifest(const std::string& path);
std::string format_manifest(const DatasetManifest& manifest);

// Image embeddings, one row per manifest feature row.
struct FeatureMatrix {
    Eigen::MatrixXd rows;
    std::size_t dim() const { return static_cast<std::size_t>(rows.cols()); }
};

FeatureMatrix parse_feature_matrix(std::string_view text, const DatasetManifest& manifest,
                                   const std::string& origin = "<memory>");
FeatureMatrix load_feature_matrix(const std::string& path, const DatasetManifest& manifest);
std::string format_feature_matrix(const FeatureMatrix& features);

// Plain numeric grid: whitespace/comma separated rows of equal length.
Eigen::MatrixXd parse_numeric_grid(std::string_view text, const std::string& origin);

}  // namespace gazezsl
