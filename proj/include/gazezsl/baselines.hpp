#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gazezsl/corpus.hpp"
#include "gazezsl/embed.hpp"
#include "gazezsl/ingest.hpp"

namespace gazezsl {

// --- point baselines: synthetic scanpaths run through the gaze encoders ---

// `count` uniform points per (participant, image), each a fixation with unit
// duration and unit pupil. One pseudo-participant when `participants` is empty.
GazeCorpus random_points_corpus(const DatasetManifest& manifest, const std::vector<std::string>& participants,
                                std::size_t count, std::uint64_t seed);

// Every scanpath replaced by a single fixation at the image center.
GazeCorpus central_point_corpus(const DatasetManifest& manifest, const std::vector<std::string>& participants);

std::vector<EmbeddingSet> embed_random_points(const DatasetManifest& manifest,
                                              const std::vector<std::string>& participants,
                                              const GazeEncoding& encoding, FusionMode fusion, std::size_t count,
                                              std::uint64_t seed, const std::vector<std::string>& k_classes = {});
std::vector<EmbeddingSet> embed_central_point(const DatasetManifest& manifest,
                                              const std::vector<std::string>& participants,
                                              const GazeEncoding& encoding, FusionMode fusion,
                                              const std::vector<std::string>& k_classes = {});

// --- saliency ---

// Mean saliency per grid cell; a map pixel belongs to the cell containing its
// center. Cells without pixels are 0.
Eigen::VectorXd saliency_cells(const Eigen::MatrixXd& map, const GridSpec& grid);

// Per-class mean of the per-image cell vectors. `maps` is keyed by image id
// and must cover every manifest image.
EmbeddingSet embed_saliency_histogram(const DatasetManifest& manifest, const std::map<std::string, Eigen::MatrixXd>& maps,
                                      const GridSpec& grid);

// --- bubbles ---

struct Bubble {
    double x = 0.0, y = 0.0, radius = 0.0;  // normalized
};

struct BubbleTrack {
    std::string image_id;
    std::vector<Bubble> bubbles;  // recorded order
};

inline constexpr std::string_view kBubbleHeader = "image_id,x,y,radius";

// Rows grouped into tracks by image id, first-seen order.
std::vector<BubbleTrack> parse_bubble_tracks(std::string_view text, const std::string& origin = "<memory>");
std::string format_bubble_tracks(const std::vector<BubbleTrack>& tracks);

// BFS: each track sampled to k bubbles of (x, y, radius), concatenated, then
// averaged per class. k == 0 means the shortest track length.
EmbeddingSet encode_bubbles_bfs(const std::vector<BubbleTrack>& tracks, const DatasetManifest& manifest,
                                const SequenceSpec& seq);

// --- attributes ---

// One class per row: `<label> v1 v2 ...`. Rows are reordered to `classes`.
EmbeddingSet parse_attributes(std::string_view text, const std::vector<std::string>& classes,
                              const std::string& origin = "<memory>");
std::string format_attributes(const EmbeddingSet& set);

// --- bag of words ---

struct CorpusDocument {
    std::string class_label;
    std::string text;
};

struct BowEmbedding {
    EmbeddingSet set;
    std::vector<std::string> vocabulary;  // top-N stems, rank order
    std::vector<std::string> warnings;
};

// Lowercase alphabetic tokens, stop words removed, Porter-stemmed. The
// vocabulary is the N most frequent stems over all documents, ties broken
// lexicographically; vectors hold raw per-class counts.
BowEmbedding build_bow_embeddings(const std::vector<CorpusDocument>& docs, std::size_t vocab_size);

// --- fusion of two sources ---

// Standardizes each source, then concatenates per class (rows follow `a`).
EmbeddingSet fuse_embeddings(const EmbeddingSet& a, const EmbeddingSet& b);

}  // namespace gazezsl
