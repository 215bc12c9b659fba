#pragma once

#include <string>
#include <vector>

#include "gazezsl/embed.hpp"
#include "gazezsl/fixation.hpp"
#include "gazezsl/ingest.hpp"

namespace gazezsl {

// Fixation-level scanpath of one participant on one image.
struct Scanpath {
    std::string image_id;
    std::string label;
    std::vector<Fixation> fixations;
};

struct ParticipantScanpaths {
    std::string participant;
    std::vector<Scanpath> paths;  // manifest image order
};

using GazeCorpus = std::vector<ParticipantScanpaths>;

// Raw binocular streams for every (participant, image) pair that has a log
// file at <data_dir>/gaze/<participant>/<image_id>.csv. Missing files are
// skipped; malformed ones throw.
struct StreamSet {
    std::string participant;
    std::vector<std::pair<std::string, GazeStream>> streams;  // (label, stream)
};

std::vector<StreamSet> load_gaze_streams(const std::string& data_dir, const DatasetManifest& manifest,
                                         unsigned threads = 1);

GazeCorpus detect_corpus(const std::vector<StreamSet>& streams, const FilterParams& params, unsigned threads = 1);

// How scanpaths become one vector per sequence.
struct GazeEncoding {
    EmbeddingSource encoder = EmbeddingSource::gfs;  // gh, gfg or gfs
    GridSpec grid;
    SequenceSpec sequence;
    FeatureMask mask;

    void validate() const;
};

// Per-class embedding of one participant, unstandardized. When
// `encoding.sequence.k` is 0, k is the minimum fixation count over that
// participant's sequences whose label is in `k_classes` (all classes when
// empty). Empty scanpaths are skipped.
EmbeddingSet encode_participant(const ParticipantScanpaths& participant, const GazeEncoding& encoding,
                                const std::vector<std::string>& classes, const std::vector<std::string>& k_classes,
                                EmbeddingSource tag);

// Class side information ready for training: one standardized set for AVG and
// EARLY, one standardized set per participant for LATE.
std::vector<EmbeddingSet> build_gaze_embeddings(const GazeCorpus& corpus, const GazeEncoding& encoding,
                                                FusionMode fusion, const std::vector<std::string>& classes,
                                                const std::vector<std::string>& k_classes,
                                                EmbeddingSource tag);

// Keeps only scanpaths of the listed images.
GazeCorpus restrict_images(const GazeCorpus& corpus, const std::vector<std::string>& image_ids);

}  // namespace gazezsl
