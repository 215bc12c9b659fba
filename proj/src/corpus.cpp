#include "gazezsl/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <limits>
#include <optional>
#include <set>

#include "gazezsl/common.hpp"

namespace gazezsl {

namespace fs = std::filesystem;

std::vector<StreamSet> load_gaze_streams(const std::string& data_dir, const DatasetManifest& manifest,
                                         unsigned threads) {
    std::vector<StreamSet> out(manifest.participants.size());
    for (std::size_t p = 0; p < manifest.participants.size(); ++p) out[p].participant = manifest.participants[p];

    const std::size_t n_img = manifest.images.size();
    std::vector<std::optional<GazeStream>> slots(out.size() * n_img);
    parallel_for(slots.size(), threads, [&](std::size_t i) {
        const auto& participant = manifest.participants[i / n_img];
        const auto& img = manifest.images[i % n_img];
        const fs::path path = fs::path(data_dir) / "gaze" / participant / (img.image_id + ".csv");
        if (!fs::exists(path)) return;
        GazeStream s = parse_gaze_log(path.string(), img.dims);
        s.image_id = img.image_id;
        s.participant_id = participant;
        slots[i] = std::move(s);
    });
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i]) out[i / n_img].streams.emplace_back(manifest.images[i % n_img].class_label, std::move(*slots[i]));
    }
    return out;
}

GazeCorpus detect_corpus(const std::vector<StreamSet>& streams, const FilterParams& params, unsigned threads) {
    params.validate();
    GazeCorpus corpus(streams.size());
    for (std::size_t p = 0; p < streams.size(); ++p) {
        corpus[p].participant = streams[p].participant;
        corpus[p].paths.resize(streams[p].streams.size());
    }
    std::vector<std::pair<std::size_t, std::size_t>> jobs;
    for (std::size_t p = 0; p < streams.size(); ++p) {
        for (std::size_t s = 0; s < streams[p].streams.size(); ++s) jobs.emplace_back(p, s);
    }
    parallel_for(jobs.size(), threads, [&](std::size_t j) {
        const auto [p, s] = jobs[j];
        const auto& [label, stream] = streams[p].streams[s];
        corpus[p].paths[s] = {stream.image_id, label, detect_fixations(stream, params)};
    });
    return corpus;
}

void GazeEncoding::validate() const {
    if (encoder != EmbeddingSource::gh && encoder != EmbeddingSource::gfg && encoder != EmbeddingSource::gfs) {
        throw ConfigError("embedding.encoder", "gaze encoder must be GH, GFG or GFS");
    }
    grid.validate();
}

EmbeddingSet encode_participant(const ParticipantScanpaths& participant, const GazeEncoding& encoding,
                                const std::vector<std::string>& classes, const std::vector<std::string>& k_classes,
                                EmbeddingSource tag) {
    encoding.validate();
    SequenceSpec seq = encoding.sequence;
    if (encoding.encoder == EmbeddingSource::gfs && seq.k == 0) {
        const std::set<std::string> pool(k_classes.empty() ? classes.begin() : k_classes.begin(),
                                         k_classes.empty() ? classes.end() : k_classes.end());
        std::size_t k = std::numeric_limits<std::size_t>::max();
        for (const auto& path : participant.paths) {
            if (!path.fixations.empty() && pool.count(path.label)) k = std::min(k, path.fixations.size());
        }
        if (k == std::numeric_limits<std::size_t>::max()) {
            throw ValidationError("participant '" + participant.participant + "' has no non-empty scanpath");
        }
        seq.k = k;
    }

    std::vector<LabeledVector> vectors;
    vectors.reserve(participant.paths.size());
    for (const auto& path : participant.paths) {
        if (path.fixations.empty()) continue;
        const auto features = fixation_features(path.fixations);
        switch (encoding.encoder) {
            case EmbeddingSource::gh: vectors.push_back({path.label, encode_gh(features, encoding.grid)}); break;
            case EmbeddingSource::gfg:
                vectors.push_back({path.label, encode_gfg(features, encoding.grid, encoding.mask)});
                break;
            default: vectors.push_back({path.label, encode_gfs(features, seq, encoding.mask)}); break;
        }
    }
    EmbeddingSet set;
    try {
        set = aggregate_per_class(vectors, classes, tag);
    } catch (const ValidationError& e) {
        throw ValidationError("participant '" + participant.participant + "': " + e.what());
    }
    set.mask = encoding.encoder == EmbeddingSource::gh ? "" : encoding.mask.to_string();
    set.grid = encoding.grid;
    set.k = seq.k;
    set.participants = {participant.participant};
    return set;
}

std::vector<EmbeddingSet> build_gaze_embeddings(const GazeCorpus& corpus, const GazeEncoding& encoding,
                                                FusionMode fusion, const std::vector<std::string>& classes,
                                                const std::vector<std::string>& k_classes, EmbeddingSource tag) {
    if (corpus.empty()) throw ValidationError("gaze corpus has no participants");
    std::vector<EmbeddingSet> per_participant;
    per_participant.reserve(corpus.size());
    for (const auto& p : corpus) per_participant.push_back(encode_participant(p, encoding, classes, k_classes, tag));
    if (fusion == FusionMode::late) {
        for (auto& s : per_participant) s = standardize(s);
        return per_participant;
    }
    return {standardize(combine_participants(per_participant, fusion))};
}

GazeCorpus restrict_images(const GazeCorpus& corpus, const std::vector<std::string>& image_ids) {
    const std::set<std::string> keep(image_ids.begin(), image_ids.end());
    GazeCorpus out;
    for (const auto& p : corpus) {
        ParticipantScanpaths q{p.participant, {}};
        for (const auto& path : p.paths) {
            if (keep.count(path.image_id)) q.paths.push_back(path);
        }
        out.push_back(std::move(q));
    }
    return out;
}

}  // namespace gazezsl
