#include "gazezsl/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "gazezsl/common.hpp"

namespace gazezsl {

namespace {

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) pos = text.size();
        auto line = text.substr(start, pos - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.push_back(line);
        start = pos + 1;
    }
    return out;
}

int parse_int(std::string_view s) {
    s = trim(s);
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
        throw ValidationError("not an integer: '" + std::string(s) + "'");
    }
    return v;
}

// Splits on commas when present, else whitespace.
std::vector<std::string> number_fields(std::string_view line) {
    if (line.find(',') != std::string_view::npos) return split(line, ',');
    return split_ws(line);
}

}  // namespace

std::vector<RawGazeSample> read_raw_gaze_log(std::string_view text, const std::string& origin) {
    const auto lines = lines_of(text);
    if (lines.empty() || trim(lines[0]) != kGazeLogHeader) {
        throw ParseError(origin, 1, "missing or unexpected header");
    }
    std::vector<RawGazeSample> samples;
    samples.reserve(lines.size());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto f = split(lines[i], ',');
        if (f.size() != 9) {
            throw ParseError(origin, i + 1, "expected 9 fields, got " + std::to_string(f.size()));
        }
        RawGazeSample s;
        try {
            s.timestamp = parse_double(f[0]);
            s.left_x = parse_double(f[1]);
            s.left_y = parse_double(f[2]);
            s.right_x = parse_double(f[3]);
            s.right_y = parse_double(f[4]);
            s.left_pupil = parse_double(f[5]);
            s.right_pupil = parse_double(f[6]);
            s.left_valid = parse_int(f[7]);
            s.right_valid = parse_int(f[8]);
        } catch (const ValidationError& e) {
            throw ParseError(origin, i + 1, e.what());
        }
        const double vals[] = {s.timestamp, s.left_x, s.left_y, s.right_x, s.right_y, s.left_pupil, s.right_pupil};
        if (!std::all_of(std::begin(vals), std::end(vals), [](double v) { return std::isfinite(v); })) {
            throw ParseError(origin, i + 1, "non-finite value");
        }
        if (!samples.empty() && s.timestamp < samples.back().timestamp) {
            throw ParseError(origin, i + 1, "timestamp decreases");
        }
        if ((s.left_valid == 0 && s.left_pupil <= 0.0) || (s.right_valid == 0 && s.right_pupil <= 0.0)) {
            throw ParseError(origin, i + 1, "valid eye with non-positive pupil diameter");
        }
        samples.push_back(s);
    }
    return samples;
}

std::string format_raw_gaze_log(const std::vector<RawGazeSample>& samples) {
    std::string out(kGazeLogHeader);
    out += '\n';
    for (const auto& s : samples) {
        out += format_double(s.timestamp) + ',' + format_double(s.left_x) + ',' + format_double(s.left_y) + ',' +
               format_double(s.right_x) + ',' + format_double(s.right_y) + ',' + format_double(s.left_pupil) + ',' +
               format_double(s.right_pupil) + ',' + std::to_string(s.left_valid) + ',' +
               std::to_string(s.right_valid) + '\n';
    }
    return out;
}

std::vector<GazePoint> binocular_filter(const std::vector<RawGazeSample>& samples, ImageDims dims) {
    if (!(dims.width > 0.0) || !(dims.height > 0.0)) throw ValidationError("image dimensions must be positive");
    std::vector<GazePoint> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        if (s.left_valid != 0 || s.right_valid != 0) continue;
        GazePoint p;
        p.timestamp = s.timestamp;
        p.x = std::clamp(0.5 * (s.left_x + s.right_x), 0.0, dims.width);
        p.y = std::clamp(0.5 * (s.left_y + s.right_y), 0.0, dims.height);
        p.pupil = 0.5 * (s.left_pupil + s.right_pupil);
        out.push_back(p);
    }
    if (out.empty()) throw ValidationError("no sample valid in both eyes (empty stream)");
    return out;
}

std::vector<RawGazeSample> to_raw(const std::vector<GazePoint>& points) {
    std::vector<RawGazeSample> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        out.push_back({p.timestamp, p.x, p.y, p.x, p.y, p.pupil, p.pupil, 0, 0});
    }
    return out;
}

GazeStream parse_gaze_text(std::string_view text, ImageDims dims, const std::string& origin) {
    GazeStream stream;
    stream.dims = dims;
    try {
        stream.samples = binocular_filter(read_raw_gaze_log(text, origin), dims);
    } catch (const ValidationError& e) {
        throw ValidationError(origin + ": " + e.what());
    }
    return stream;
}

GazeStream parse_gaze_log(const std::string& path, ImageDims dims) {
    return parse_gaze_text(read_file(path), dims, path);
}

std::size_t DatasetManifest::class_index(const std::string& label) const {
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) throw ValidationError("unknown class '" + label + "'");
    return static_cast<std::size_t>(it - classes.begin());
}

void DatasetManifest::validate() const {
    if (classes.empty()) throw ValidationError("manifest has no classes");
    if (images.empty()) throw ValidationError("manifest has no images");
    std::set<std::string> seen_classes;
    for (const auto& c : classes) {
        if (!seen_classes.insert(c).second) throw ValidationError("duplicate class '" + c + "'");
    }
    std::set<std::string> seen_participants;
    for (const auto& p : participants) {
        if (!seen_participants.insert(p).second) throw ValidationError("duplicate participant '" + p + "'");
    }
    std::set<std::string> seen_images;
    std::vector<bool> used_rows(images.size(), false);
    for (const auto& img : images) {
        if (!seen_images.insert(img.image_id).second) {
            throw ValidationError("duplicate image_id '" + img.image_id + "'");
        }
        if (!seen_classes.count(img.class_label)) {
            throw ValidationError("image '" + img.image_id + "' references unknown class '" + img.class_label + "'");
        }
        if (img.feature_row >= images.size()) {
            throw ValidationError("image '" + img.image_id + "' feature row " + std::to_string(img.feature_row) +
                                  " out of range");
        }
        if (used_rows[img.feature_row]) {
            throw ValidationError("feature row " + std::to_string(img.feature_row) + " used twice");
        }
        used_rows[img.feature_row] = true;
        if (!(img.dims.width > 0.0) || !(img.dims.height > 0.0)) {
            throw ValidationError("image '" + img.image_id + "' has non-positive dimensions");
        }
    }
}

DatasetManifest parse_manifest(std::string_view text, const std::string& origin) {
    DatasetManifest m;
    const auto lines = lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto f = split_ws(line);
        if (f[0] == "class" && f.size() == 2) {
            m.classes.push_back(f[1]);
        } else if (f[0] == "participant" && f.size() == 2) {
            m.participants.push_back(f[1]);
        } else if (f[0] == "image" && f.size() == 6) {
            ImageRecord r;
            r.image_id = f[1];
            r.class_label = f[2];
            try {
                const int row = parse_int(f[3]);
                if (row < 0) throw ValidationError("negative feature row");
                r.feature_row = static_cast<std::size_t>(row);
                r.dims = {parse_double(f[4]), parse_double(f[5])};
            } catch (const ValidationError& e) {
                throw ParseError(origin, i + 1, e.what());
            }
            m.images.push_back(std::move(r));
        } else {
            throw ParseError(origin, i + 1, "unrecognized record '" + std::string(line) + "'");
        }
    }
    try {
        m.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(origin + ": " + e.what());
    }
    return m;
}

DatasetManifest load_manifest(const std::string& path) { return parse_manifest(read_file(path), path); }

std::string format_manifest(const DatasetManifest& m) {
    std::string out = "# gazezsl manifest v1\n";
    for (const auto& c : m.classes) out += "class " + c + '\n';
    for (const auto& p : m.participants) out += "participant " + p + '\n';
    for (const auto& img : m.images) {
        out += "image " + img.image_id + ' ' + img.class_label + ' ' + std::to_string(img.feature_row) + ' ' +
               format_double(img.dims.width) + ' ' + format_double(img.dims.height) + '\n';
    }
    return out;
}

Eigen::MatrixXd parse_numeric_grid(std::string_view text, const std::string& origin) {
    std::vector<std::vector<double>> rows;
    const auto lines = lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        std::vector<double> row;
        for (const auto& field : number_fields(line)) {
            double v;
            try {
                v = parse_double(field);
            } catch (const ValidationError& e) {
                throw ParseError(origin, i + 1, e.what());
            }
            if (!std::isfinite(v)) throw ParseError(origin, i + 1, "non-finite entry");
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ParseError(origin, i + 1, "row length " + std::to_string(row.size()) + " differs from " +
                                                std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) return {};
    Eigen::MatrixXd out(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) out(r, c) = rows[r][c];
    }
    return out;
}

FeatureMatrix parse_feature_matrix(std::string_view text, const DatasetManifest& manifest, const std::string& origin) {
    FeatureMatrix fm{parse_numeric_grid(text, origin)};
    if (static_cast<std::size_t>(fm.rows.rows()) != manifest.images.size()) {
        throw ValidationError(origin + ": feature matrix has " + std::to_string(fm.rows.rows()) +
                              " rows, manifest lists " + std::to_string(manifest.images.size()) + " images");
    }
    if (fm.rows.cols() == 0) throw ValidationError(origin + ": feature matrix has no columns");
    return fm;
}

FeatureMatrix load_feature_matrix(const std::string& path, const DatasetManifest& manifest) {
    return parse_feature_matrix(read_file(path), manifest, path);
}

std::string format_feature_matrix(const FeatureMatrix& features) {
    std::string out;
    for (Eigen::Index r = 0; r < features.rows.rows(); ++r) {
        for (Eigen::Index c = 0; c < features.rows.cols(); ++c) {
            if (c) out += ' ';
            out += format_double(features.rows(r, c));
        }
        out += '\n';
    }
    return out;
}

}  // namespace gazezsl
