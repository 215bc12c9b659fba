#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gazezsl/baselines.hpp"
#include "gazezsl/common.hpp"
#include "gazezsl/corpus.hpp"
#include "gazezsl/ingest.hpp"
#include "gazezsl/model.hpp"

namespace gazezsl::synth {

struct SynthSpec {
    std::size_t n_classes = 8;
    std::size_t images_per_class = 20;
    std::size_t participants = 5;
    std::size_t samples_per_stream = 300;
    double signal = 1.0;  // class signal strength in [0, 1]
    std::uint64_t seed = 0;
    std::size_t feature_dim = 32;
    std::size_t attribute_dim = 16;
    double sample_rate_hz = 300.0;

    void validate() const;
};

// Every class owns a 2-D attention anchor; image features are a fixed linear
// map of the anchor, so side information built from gaze transfers to unseen
// classes. `signal` blends every per-stream and per-image quantity between its
// class-determined value (1) and an exchangeable random draw (0).
struct SynthDataset {
    SynthSpec spec;
    DatasetManifest manifest;
    FeatureMatrix features;
    // Raw logs keyed by (participant, image_id).
    std::map<std::pair<std::string, std::string>, std::vector<RawGazeSample>> logs;
    EmbeddingSet attributes;
    std::vector<BubbleTrack> bubbles;
    std::vector<CorpusDocument> documents;
    std::map<std::string, Eigen::MatrixXd> saliency;
    std::vector<std::array<double, 2>> anchors;  // normalized, class order
};

SynthDataset generate(const SynthSpec& spec);

// Binocular-filtered streams, equivalent to writing and re-reading the logs.
std::vector<StreamSet> streams_of(const SynthDataset& data);

// Writes manifest.txt, features.txt, gaze/<participant>/<image>.csv,
// attributes.txt, bubbles.csv, corpus/<label>.txt, saliency/<image>.txt.
void write_dataset(const SynthDataset& data, const std::string& dir);

// A single random stream (for fixation property tests): piecewise-stationary
// dwell segments with jitter, saccades between them, at `sample_rate_hz`.
GazeStream random_stream(Rng& rng, std::size_t samples, double sample_rate_hz = 300.0, ImageDims dims = {500.0, 400.0});

// Three linearly separable classes with one-hot class embeddings.
struct SeparableInstance {
    std::vector<Example> examples;
    EmbeddingSet classes;
};
SeparableInstance separable_instance(std::uint64_t seed = 7);

}  // namespace gazezsl::synth
