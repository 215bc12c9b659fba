#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gazezsl/features.hpp"

namespace gazezsl {

struct GridSpec {
    int rows = 3;
    int cols = 3;

    void validate() const;
    std::size_t cells() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
    bool operator==(const GridSpec&) const = default;
};

// How GFS picks k points from a longer (or shorter) scanpath.
enum class SamplingRule {
    even,   // round(i * (len - 1) / (k - 1)); k == 1 picks the middle
    first,  // first k, repeating the last index when len < k
};

struct SequenceSpec {
    std::size_t k = 0;  // 0 = derive from data (minimum sequence length)
    SamplingRule rule = SamplingRule::even;
};

enum class EmbeddingSource { gh, gfg, gfs, bubbles, attributes, bow, random, central, saliency, fused };

std::string to_string(EmbeddingSource source);
EmbeddingSource parse_source(std::string_view name);

struct ClassEmbedding {
    std::string label;
    Eigen::VectorXd vector;
    EmbeddingSource source = EmbeddingSource::gh;
};

// A set of class embeddings sharing one dimension; row i of `vectors` belongs
// to labels[i]. The remaining fields describe how the set was built and go
// into the serialized header.
struct EmbeddingSet {
    EmbeddingSource source = EmbeddingSource::gh;
    std::vector<std::string> labels;
    Eigen::MatrixXd vectors;

    std::string mask;
    GridSpec grid;
    std::size_t k = 0;
    std::vector<std::string> participants;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }
    ClassEmbedding at(std::size_t i) const { return {labels[i], vectors.row(static_cast<Eigen::Index>(i)), source}; }
    std::size_t index_of(const std::string& label) const;
    // Rows for `labels`, in that order.
    EmbeddingSet subset(const std::vector<std::string>& labels) const;
};

// Cell index along one axis: the upper boundary of a cell belongs to that
// cell, so 1/3 falls in cell 0 of 3 and 1.0 in the last cell.
std::size_t grid_axis_cell(double v, int count);
std::size_t grid_cell(double x, double y, const GridSpec& grid);

Eigen::VectorXd encode_gh(const std::vector<GazeFeature>& features, const GridSpec& grid);
Eigen::VectorXd encode_gfg(const std::vector<GazeFeature>& features, const GridSpec& grid, const FeatureMask& mask);

std::vector<std::size_t> sample_indices(std::size_t len, std::size_t k, SamplingRule rule);
Eigen::VectorXd encode_gfs(const std::vector<GazeFeature>& features, const SequenceSpec& seq,
                           const FeatureMask& mask);

// One encoded sequence for one image.
struct LabeledVector {
    std::string label;
    Eigen::VectorXd vector;
};

// Mean of the sequence vectors of each class, in `classes` order. Sums run in
// input order.
EmbeddingSet aggregate_per_class(const std::vector<LabeledVector>& sequences, const std::vector<std::string>& classes,
                                 EmbeddingSource source);

enum class FusionMode { avg, early, late };

std::string to_string(FusionMode mode);
FusionMode parse_fusion(std::string_view name);

// AVG: elementwise mean; EARLY: concatenation in participant order. LATE is a
// score-level fusion and is rejected here.
EmbeddingSet combine_participants(const std::vector<EmbeddingSet>& per_participant, FusionMode mode);

// Per-dimension z-score across classes (zero-variance dimensions become 0),
// then each row scaled to unit Euclidean norm.
EmbeddingSet standardize(const EmbeddingSet& set);

std::string format_embedding_set(const EmbeddingSet& set);
EmbeddingSet parse_embedding_set(std::string_view text, const std::string& origin = "<memory>");

}  // namespace gazezsl
