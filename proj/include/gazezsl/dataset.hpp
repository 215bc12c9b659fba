#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gazezsl/corpus.hpp"
#include "gazezsl/eval.hpp"
#include "gazezsl/ingest.hpp"

namespace gazezsl {

// A dataset directory as written by the synth module (or prepared by hand):
// manifest.txt and features.txt are required; gaze/, attributes.txt,
// bubbles.csv, corpus/ and saliency/ are loaded when present.
struct Dataset {
    std::string dir;
    DatasetManifest manifest;
    FeatureMatrix features;
    std::vector<StreamSet> streams;
    std::optional<EmbeddingSet> attributes;
    std::vector<BubbleTrack> bubbles;
    std::vector<CorpusDocument> documents;
    std::map<std::string, Eigen::MatrixXd> saliency;
};

Dataset load_dataset(const std::string& dir, unsigned threads = 1);

// Relative path and FNV-1a digest of every regular file under `dir`, sorted
// by path.
std::vector<std::pair<std::string, std::string>> digest_tree(const std::string& dir);

}  // namespace gazezsl
