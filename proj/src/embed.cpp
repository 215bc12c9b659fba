#include "gazezsl/embed.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gazezsl/common.hpp"

namespace gazezsl {

void GridSpec::validate() const {
    if (rows < 1) throw ConfigError("grid.rows", "must be >= 1");
    if (cols < 1) throw ConfigError("grid.cols", "must be >= 1");
}

namespace {

constexpr std::pair<EmbeddingSource, std::string_view> kSourceNames[] = {
    {EmbeddingSource::gh, "GH"},           {EmbeddingSource::gfg, "GFG"},
    {EmbeddingSource::gfs, "GFS"},         {EmbeddingSource::bubbles, "bubbles"},
    {EmbeddingSource::attributes, "attributes"}, {EmbeddingSource::bow, "bow"},
    {EmbeddingSource::random, "random"},   {EmbeddingSource::central, "central"},
    {EmbeddingSource::saliency, "saliency"}, {EmbeddingSource::fused, "fused"},
};

}  // namespace

std::string to_string(EmbeddingSource source) {
    for (const auto& [s, name] : kSourceNames) {
        if (s == source) return std::string(name);
    }
    return "unknown";
}

EmbeddingSource parse_source(std::string_view name) {
    for (const auto& [s, n] : kSourceNames) {
        if (n == name) return s;
    }
    throw ConfigError("embedding.source", "unknown source '" + std::string(name) + "'");
}

std::string to_string(FusionMode mode) {
    switch (mode) {
        case FusionMode::avg: return "AVG";
        case FusionMode::early: return "EARLY";
        case FusionMode::late: return "LATE";
    }
    return "unknown";
}

FusionMode parse_fusion(std::string_view name) {
    if (name == "AVG" || name == "avg") return FusionMode::avg;
    if (name == "EARLY" || name == "early") return FusionMode::early;
    if (name == "LATE" || name == "late") return FusionMode::late;
    throw ConfigError("embedding.fusion", "unknown fusion mode '" + std::string(name) + "'");
}

std::size_t EmbeddingSet::index_of(const std::string& label) const {
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw ValidationError("class '" + label + "' missing from embedding set");
    return static_cast<std::size_t>(it - labels.begin());
}

EmbeddingSet EmbeddingSet::subset(const std::vector<std::string>& wanted) const {
    EmbeddingSet out = *this;
    out.labels = wanted;
    out.vectors.resize(static_cast<Eigen::Index>(wanted.size()), vectors.cols());
    for (std::size_t i = 0; i < wanted.size(); ++i) {
        out.vectors.row(static_cast<Eigen::Index>(i)) = vectors.row(static_cast<Eigen::Index>(index_of(wanted[i])));
    }
    return out;
}

std::size_t grid_axis_cell(double v, int count) {
    const double scaled = std::ceil(v * count) - 1.0;
    return static_cast<std::size_t>(std::clamp(scaled, 0.0, static_cast<double>(count - 1)));
}

std::size_t grid_cell(double x, double y, const GridSpec& grid) {
    return grid_axis_cell(y, grid.rows) * static_cast<std::size_t>(grid.cols) + grid_axis_cell(x, grid.cols);
}

Eigen::VectorXd encode_gh(const std::vector<GazeFeature>& features, const GridSpec& grid) {
    grid.validate();
    Eigen::VectorXd hist = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.cells()));
    for (const auto& f : features) hist[static_cast<Eigen::Index>(grid_cell(f.x, f.y, grid))] += 1.0;
    return hist;
}

Eigen::VectorXd encode_gfg(const std::vector<GazeFeature>& features, const GridSpec& grid, const FeatureMask& mask) {
    grid.validate();
    const auto block = static_cast<Eigen::Index>(mask.size());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(block * static_cast<Eigen::Index>(grid.cells()));
    std::vector<int> counts(grid.cells(), 0);
    for (const auto& f : features) {
        const auto cell = grid_cell(f.x, f.y, grid);
        out.segment(static_cast<Eigen::Index>(cell) * block, block) += project_feature(f, mask);
        ++counts[cell];
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] > 1) out.segment(static_cast<Eigen::Index>(c) * block, block) /= counts[c];
    }
    return out;
}

std::vector<std::size_t> sample_indices(std::size_t len, std::size_t k, SamplingRule rule) {
    if (len == 0) throw ValidationError("cannot sample from an empty sequence");
    if (k == 0) throw ConfigError("sequence.k", "must be >= 1");
    std::vector<std::size_t> idx(k);
    if (rule == SamplingRule::first) {
        for (std::size_t i = 0; i < k; ++i) idx[i] = std::min(i, len - 1);
        return idx;
    }
    if (k == 1) {
        idx[0] = len / 2;  // round((len - 1) / 2), halves rounded up
        return idx;
    }
    // round(i * (len - 1) / (k - 1)) in exact integer arithmetic, halves up
    const std::size_t span = len - 1, steps = k - 1;
    for (std::size_t i = 0; i < k; ++i) idx[i] = (2 * i * span + steps) / (2 * steps);
    return idx;
}

Eigen::VectorXd encode_gfs(const std::vector<GazeFeature>& features, const SequenceSpec& seq, const FeatureMask& mask) {
    if (features.empty()) throw ValidationError("GFS is undefined for an empty sequence");
    const auto idx = sample_indices(features.size(), seq.k, seq.rule);
    const auto block = static_cast<Eigen::Index>(mask.size());
    Eigen::VectorXd out(block * static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.segment(static_cast<Eigen::Index>(i) * block, block) = project_feature(features[idx[i]], mask);
    }
    return out;
}

EmbeddingSet aggregate_per_class(const std::vector<LabeledVector>& sequences, const std::vector<std::string>& classes,
                                 EmbeddingSource source) {
    if (classes.empty()) throw ValidationError("no classes to aggregate");
    if (sequences.empty()) throw ValidationError("class '" + classes.front() + "' has no sequences");
    const auto dim = sequences.front().vector.size();
    std::map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < classes.size(); ++i) row_of.emplace(classes[i], i);

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(classes.size()), dim);
    std::vector<std::size_t> counts(classes.size(), 0);
    for (const auto& s : sequences) {
        if (s.vector.size() != dim) {
            throw DimensionError("sequence vector of dimension " + std::to_string(s.vector.size()) + ", expected " +
                                 std::to_string(dim));
        }
        const auto it = row_of.find(s.label);
        if (it == row_of.end()) continue;
        sums.row(static_cast<Eigen::Index>(it->second)) += s.vector.transpose();
        ++counts[it->second];
    }
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (counts[i] == 0) throw ValidationError("class '" + classes[i] + "' has no sequences");
        sums.row(static_cast<Eigen::Index>(i)) /= static_cast<double>(counts[i]);
    }
    EmbeddingSet out;
    out.source = source;
    out.labels = classes;
    out.vectors = std::move(sums);
    return out;
}

EmbeddingSet combine_participants(const std::vector<EmbeddingSet>& sets, FusionMode mode) {
    if (sets.empty()) throw ValidationError("no participant embeddings to combine");
    if (mode == FusionMode::late) throw ConfigError("embedding.fusion", "LATE fuses scores, not embeddings");
    const auto& first = sets.front();
    for (const auto& s : sets) {
        if (s.labels != first.labels) throw ValidationError("participants cover different class sets");
        if (mode == FusionMode::avg && s.dim() != first.dim()) {
            throw DimensionError("AVG fusion needs equal dimensions (" + std::to_string(s.dim()) + " vs " +
                                 std::to_string(first.dim()) + ")");
        }
    }
    EmbeddingSet out = first;
    out.participants.clear();
    for (const auto& s : sets) {
        out.participants.insert(out.participants.end(), s.participants.begin(), s.participants.end());
    }
    if (mode == FusionMode::avg) {
        for (std::size_t p = 1; p < sets.size(); ++p) out.vectors += sets[p].vectors;
        out.vectors /= static_cast<double>(sets.size());
        return out;
    }
    Eigen::Index total = 0;
    for (const auto& s : sets) total += s.vectors.cols();
    out.vectors.resize(first.vectors.rows(), total);
    Eigen::Index col = 0;
    for (const auto& s : sets) {
        out.vectors.middleCols(col, s.vectors.cols()) = s.vectors;
        col += s.vectors.cols();
    }
    return out;
}

EmbeddingSet standardize(const EmbeddingSet& set) {
    if (set.size() < 2) throw ValidationError("standardization needs at least 2 classes");
    EmbeddingSet out = set;
    auto& v = out.vectors;
    const double n = static_cast<double>(v.rows());
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        const double mean = v.col(c).sum() / n;
        v.col(c).array() -= mean;
        const double var = v.col(c).squaredNorm() / n;
        if (var > 0.0) {
            v.col(c) /= std::sqrt(var);
        } else {
            v.col(c).setZero();
        }
    }
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
        const double norm = v.row(r).norm();
        if (norm > 0.0) v.row(r) /= norm;
    }
    return out;
}

std::string format_embedding_set(const EmbeddingSet& set) {
    std::string out = "# gazezsl embeddings v1\n";
    out += "source " + to_string(set.source) + '\n';
    out += "mask " + (set.mask.empty() ? std::string("-") : set.mask) + '\n';
    out += "grid " + std::to_string(set.grid.rows) + ' ' + std::to_string(set.grid.cols) + '\n';
    out += "k " + std::to_string(set.k) + '\n';
    out += "participants";
    for (const auto& p : set.participants) out += ' ' + p;
    out += '\n';
    out += "dim " + std::to_string(set.dim()) + '\n';
    for (std::size_t i = 0; i < set.size(); ++i) {
        out += set.labels[i];
        for (Eigen::Index c = 0; c < set.vectors.cols(); ++c) {
            out += ' ' + format_double(set.vectors(static_cast<Eigen::Index>(i), c));
        }
        out += '\n';
    }
    return out;
}

EmbeddingSet parse_embedding_set(std::string_view text, const std::string& origin) {
    EmbeddingSet set;
    std::size_t dim = 0;
    bool have_dim = false;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) pos = text.size();
        const auto line = trim(text.substr(start, pos - start));
        start = pos + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto f = split_ws(line);
        try {
            if (!have_dim) {
                if (f[0] == "source" && f.size() == 2) {
                    set.source = parse_source(f[1]);
                } else if (f[0] == "mask" && f.size() == 2) {
                    set.mask = f[1] == "-" ? "" : f[1];
                } else if (f[0] == "grid" && f.size() == 3) {
                    set.grid = {std::stoi(f[1]), std::stoi(f[2])};
                } else if (f[0] == "k" && f.size() == 2) {
                    set.k = std::stoul(f[1]);
                } else if (f[0] == "participants") {
                    set.participants.assign(f.begin() + 1, f.end());
                } else if (f[0] == "dim" && f.size() == 2) {
                    dim = std::stoul(f[1]);
                    have_dim = true;
                } else {
                    throw ParseError(origin, line_no, "unknown header field '" + f[0] + "'");
                }
                continue;
            }
            if (f.size() != dim + 1) throw ParseError(origin, line_no, "expected label and " + std::to_string(dim) + " values");
            set.labels.push_back(f[0]);
            std::vector<double> row;
            for (std::size_t i = 1; i < f.size(); ++i) row.push_back(parse_double(f[i]));
            if (!std::all_of(row.begin(), row.end(), [](double x) { return std::isfinite(x); })) {
                throw ParseError(origin, line_no, "non-finite value");
            }
            rows.push_back(std::move(row));
        } catch (const std::logic_error& e) {
            throw ParseError(origin, line_no, e.what());
        }
    }
    if (!have_dim) throw ParseError(origin, 0, "missing 'dim' header");
    set.vectors.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < dim; ++c) set.vectors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return set;
}

}  // namespace gazezsl
