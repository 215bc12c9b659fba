#include "gazezsl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "gazezsl/common.hpp"

namespace gazezsl::synth {

namespace fs = std::filesystem;

void SynthSpec::validate() const {
    if (n_classes < 1) throw ConfigError("synth.classes", "must be >= 1");
    if (images_per_class < 1) throw ConfigError("synth.images_per_class", "must be >= 1");
    if (participants < 1) throw ConfigError("synth.participants", "must be >= 1");
    if (samples_per_stream < 1) throw ConfigError("synth.samples", "must be >= 1");
    if (!(signal >= 0.0 && signal <= 1.0)) throw ConfigError("synth.sigma", "must lie in [0, 1]");
    if (feature_dim < 1) throw ConfigError("synth.feature_dim", "must be >= 1");
    if (attribute_dim < 1) throw ConfigError("synth.attribute_dim", "must be >= 1");
    if (!(sample_rate_hz > 0.0)) throw ConfigError("synth.sample_rate", "must be > 0");
}

namespace {

// Nearest double to v rounded to `digits` decimals; dividing by an exact
// power of ten keeps the written values short.
double round_to(double v, int digits) {
    const double scale = std::pow(10.0, digits);
    return std::round(v * scale) / scale;
}

// Base-2 radical inverse.
double van_der_corput(std::size_t n) {
    double v = 0.0, denom = 1.0;
    while (n) {
        denom *= 2.0;
        v += static_cast<double>(n & 1U) / denom;
        n >>= 1U;
    }
    return v;
}

std::string pad(std::size_t i, int width) {
    std::string s = std::to_string(i);
    return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

// Pronounceable alphabetic token for word id `i`.
std::string word(std::size_t i) {
    static const char* syllables[] = {"ka", "lo", "mi", "nu", "re", "sa", "ti", "vo", "ze", "pa", "du", "fe"};
    std::string w;
    std::size_t n = i + 12;
    while (n) {
        w += syllables[n % 12];
        n /= 12;
    }
    return w + "x";
}

constexpr std::size_t kAngleBins = 8;
constexpr std::size_t kWordsPerBin = 6;

}  // namespace

SynthDataset generate(const SynthSpec& spec) {
    spec.validate();
    SynthDataset out;
    out.spec = spec;
    const double s = spec.signal;
    const double noise = 1.0 - s;
    Rng rng(spec.seed);

    // Anchors: golden-angle directions with radical-inverse radii, so classes
    // are spread around the image center.
    const double phase = rng.uniform();
    for (std::size_t c = 0; c < spec.n_classes; ++c) {
        const double angle = 2.0 * M_PI * std::fmod(phase + 0.6180339887498949 * static_cast<double>(c), 1.0);
        const double radius = 0.2 + 0.14 * van_der_corput(c + 1);
        out.anchors.push_back({0.5 + radius * std::cos(angle), 0.5 + radius * std::sin(angle)});
    }

    auto& m = out.manifest;
    for (std::size_t c = 0; c < spec.n_classes; ++c) m.classes.push_back("class" + pad(c, 2));
    for (std::size_t p = 0; p < spec.participants; ++p) m.participants.push_back("p" + pad(p + 1, 2));

    // Image features: linear map of the anchor offset plus noise.
    Eigen::MatrixXd projection(static_cast<Eigen::Index>(spec.feature_dim), 2);
    for (Eigen::Index r = 0; r < projection.rows(); ++r) {
        projection(r, 0) = rng.normal();
        projection(r, 1) = rng.normal();
    }
    const std::size_t n_images = spec.n_classes * spec.images_per_class;
    out.features.rows.resize(static_cast<Eigen::Index>(n_images), static_cast<Eigen::Index>(spec.feature_dim));
    for (std::size_t c = 0; c < spec.n_classes; ++c) {
        const Eigen::Vector2d offset(out.anchors[c][0] - 0.5, out.anchors[c][1] - 0.5);
        const Eigen::VectorXd direction = projection * offset / 0.3;
        for (std::size_t i = 0; i < spec.images_per_class; ++i) {
            const std::size_t row = c * spec.images_per_class + i;
            ImageRecord img;
            img.image_id = "img" + pad(row, 4);
            img.class_label = m.classes[c];
            img.feature_row = row;
            img.dims = {rng.uniform() < 0.5 ? 400.0 : 500.0, rng.uniform() < 0.5 ? 300.0 : 375.0};
            m.images.push_back(img);
            for (Eigen::Index d = 0; d < direction.size(); ++d) {
                out.features.rows(static_cast<Eigen::Index>(row), d) =
                    round_to(s * direction[d] + noise * rng.normal(), 6);
            }
        }
    }

    // Gaze streams.
    const double dt = 1000.0 / spec.sample_rate_hz;
    for (std::size_t p = 0; p < spec.participants; ++p) {
        Rng prng(mix_seed(spec.seed, 1000 + p));
        const double bias_x = noise * 0.03 * prng.normal(), bias_y = noise * 0.03 * prng.normal();
        const double pupil_base = 3.0 + 0.3 * prng.normal();
        for (const auto& img : m.images) {
            const auto c = m.class_index(img.class_label);
            Rng srng(mix_seed(mix_seed(spec.seed, 2000 + p), img.feature_row));
            const double cx = s * out.anchors[c][0] + noise * srng.uniform(0.15, 0.85) + bias_x;
            const double cy = s * out.anchors[c][1] + noise * srng.uniform(0.15, 0.85) + bias_y;
            std::vector<RawGazeSample> log;
            log.reserve(spec.samples_per_stream);
            double seg_end = -1.0, tx = cx, ty = cy;
            for (std::size_t i = 0; i < spec.samples_per_stream; ++i) {
                const double t = round_to(static_cast<double>(i) * dt, 3);
                if (t > seg_end) {
                    seg_end = t + srng.uniform(80.0, 300.0);
                    tx = cx + noise * 0.12 * srng.normal();
                    ty = cy + noise * 0.12 * srng.normal();
                }
                const double x = (tx + noise * 0.003 * srng.normal()) * img.dims.width;
                const double y = (ty + noise * 0.003 * srng.normal()) * img.dims.height;
                const double pupil = pupil_base + noise * 0.2 * srng.normal();
                RawGazeSample r;
                r.timestamp = t;
                r.left_x = round_to(x - 1.5, 4);
                r.right_x = round_to(x + 1.5, 4);
                r.left_y = r.right_y = round_to(y, 4);
                r.left_pupil = round_to(std::max(pupil, 1.0), 4);
                r.right_pupil = r.left_pupil;
                if (noise > 0.0 && srng.uniform() < 0.02 * noise) r.right_valid = 4;
                log.push_back(r);
            }
            out.logs[{m.participants[p], img.image_id}] = std::move(log);
        }
    }

    // Attributes: another linear view of the anchor.
    out.attributes.source = EmbeddingSource::attributes;
    out.attributes.labels = m.classes;
    out.attributes.vectors.resize(static_cast<Eigen::Index>(spec.n_classes), static_cast<Eigen::Index>(spec.attribute_dim));
    {
        Rng arng(mix_seed(spec.seed, 3));
        Eigen::MatrixXd attr_map(static_cast<Eigen::Index>(spec.attribute_dim), 2);
        for (Eigen::Index r = 0; r < attr_map.rows(); ++r) attr_map.row(r) << arng.normal(), arng.normal();
        for (std::size_t c = 0; c < spec.n_classes; ++c) {
            const Eigen::Vector2d offset(out.anchors[c][0] - 0.5, out.anchors[c][1] - 0.5);
            const Eigen::VectorXd a = attr_map * offset / 0.3;
            for (Eigen::Index d = 0; d < a.size(); ++d) {
                out.attributes.vectors(static_cast<Eigen::Index>(c), d) = round_to(s * a[d] + noise * arng.normal(), 6);
            }
        }
    }

    // Bubbles near the gaze center of each image.
    {
        Rng brng(mix_seed(spec.seed, 4));
        for (const auto& img : m.images) {
            const auto c = m.class_index(img.class_label);
            BubbleTrack track{img.image_id, {}};
            const std::size_t count = 3 + brng.index(3);
            for (std::size_t b = 0; b < count; ++b) {
                const double bx = s * out.anchors[c][0] + noise * brng.uniform(0.15, 0.85) + 0.03 * brng.normal();
                const double by = s * out.anchors[c][1] + noise * brng.uniform(0.15, 0.85) + 0.03 * brng.normal();
                track.bubbles.push_back({round_to(std::clamp(bx, 0.0, 1.0), 4), round_to(std::clamp(by, 0.0, 1.0), 4),
                                         round_to(brng.uniform(0.04, 0.1), 4)});
            }
            out.bubbles.push_back(std::move(track));
        }
    }

    // Text: words tied to angular bins around the image center.
    {
        Rng trng(mix_seed(spec.seed, 5));
        static const char* fillers[] = {"the", "a", "of", "and", "is", "with", "its", "in", "on", "this"};
        for (std::size_t c = 0; c < spec.n_classes; ++c) {
            const double angle = std::atan2(out.anchors[c][1] - 0.5, out.anchors[c][0] - 0.5);
            const double pos = (angle + M_PI) / (2.0 * M_PI) * kAngleBins;
            std::string doc;
            for (int t = 0; t < 120; ++t) {
                if (!doc.empty()) doc += ' ';
                if (trng.uniform() < 0.3) {
                    doc += fillers[trng.index(10)];
                    continue;
                }
                std::size_t bin;
                if (trng.uniform() < s) {
                    const double jitter = pos + 0.7 * trng.normal();
                    bin = static_cast<std::size_t>(std::fmod(std::floor(jitter) + 8.0 * kAngleBins, kAngleBins));
                } else {
                    bin = trng.index(kAngleBins);
                }
                doc += word(bin * kWordsPerBin + trng.index(kWordsPerBin));
            }
            out.documents.push_back({m.classes[c], doc + '\n'});
        }
    }

    // Saliency: blob at the gaze center plus a center bias.
    {
        Rng grng(mix_seed(spec.seed, 6));
        for (const auto& img : m.images) {
            const auto c = m.class_index(img.class_label);
            const double gx = s * out.anchors[c][0] + noise * grng.uniform(0.15, 0.85);
            const double gy = s * out.anchors[c][1] + noise * grng.uniform(0.15, 0.85);
            Eigen::MatrixXd map(12, 16);
            for (Eigen::Index r = 0; r < map.rows(); ++r) {
                for (Eigen::Index col = 0; col < map.cols(); ++col) {
                    const double x = (static_cast<double>(col) + 0.5) / 16.0, y = (static_cast<double>(r) + 0.5) / 12.0;
                    const double blob = std::exp(-((x - gx) * (x - gx) + (y - gy) * (y - gy)) / (2 * 0.1 * 0.1));
                    const double bias = 0.3 * std::exp(-((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5)) / (2 * 0.2 * 0.2));
                    map(r, col) = round_to(blob + bias + noise * 0.3 * grng.uniform(), 4);
                }
            }
            out.saliency[img.image_id] = std::move(map);
        }
    }
    return out;
}

std::vector<StreamSet> streams_of(const SynthDataset& data) {
    std::vector<StreamSet> out;
    for (const auto& participant : data.manifest.participants) {
        StreamSet set{participant, {}};
        for (const auto& img : data.manifest.images) {
            const auto it = data.logs.find({participant, img.image_id});
            if (it == data.logs.end()) continue;
            GazeStream stream;
            stream.image_id = img.image_id;
            stream.participant_id = participant;
            stream.dims = img.dims;
            stream.samples = binocular_filter(it->second, img.dims);
            set.streams.emplace_back(img.class_label, std::move(stream));
        }
        out.push_back(std::move(set));
    }
    return out;
}

void write_dataset(const SynthDataset& data, const std::string& dir) {
    const fs::path root(dir);
    fs::create_directories(root);
    write_file((root / "manifest.txt").string(), format_manifest(data.manifest));
    write_file((root / "features.txt").string(), format_feature_matrix(data.features));
    for (const auto& [key, log] : data.logs) {
        const auto gaze_dir = root / "gaze" / key.first;
        fs::create_directories(gaze_dir);
        write_file((gaze_dir / (key.second + ".csv")).string(), format_raw_gaze_log(log));
    }
    write_file((root / "attributes.txt").string(), format_attributes(data.attributes));
    write_file((root / "bubbles.csv").string(), format_bubble_tracks(data.bubbles));
    fs::create_directories(root / "corpus");
    for (const auto& doc : data.documents) write_file((root / "corpus" / (doc.class_label + ".txt")).string(), doc.text);
    fs::create_directories(root / "saliency");
    for (const auto& [image, map] : data.saliency) {
        std::string text;
        for (Eigen::Index r = 0; r < map.rows(); ++r) {
            for (Eigen::Index c = 0; c < map.cols(); ++c) {
                if (c) text += ' ';
                text += format_double(map(r, c));
            }
            text += '\n';
        }
        write_file((root / "saliency" / (image + ".txt")).string(), text);
    }
}

GazeStream random_stream(Rng& rng, std::size_t samples, double sample_rate_hz, ImageDims dims) {
    GazeStream stream;
    stream.image_id = "random";
    stream.participant_id = "random";
    stream.dims = dims;
    const double dt = 1000.0 / sample_rate_hz;
    double seg_end = -1.0, tx = 0.0, ty = 0.0, jitter = 1.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) * dt;
        if (t > seg_end) {
            seg_end = t + rng.uniform(20.0, 250.0);
            tx = rng.uniform(0.0, dims.width);
            ty = rng.uniform(0.0, dims.height);
            jitter = rng.uniform(0.5, 12.0);
        }
        GazePoint p;
        p.timestamp = t;
        p.x = std::clamp(tx + jitter * rng.normal(), 0.0, dims.width);
        p.y = std::clamp(ty + jitter * rng.normal(), 0.0, dims.height);
        p.pupil = 3.0 + 0.2 * rng.uniform();
        stream.samples.push_back(p);
    }
    return stream;
}

SeparableInstance separable_instance(std::uint64_t seed) {
    SeparableInstance inst;
    inst.classes.source = EmbeddingSource::attributes;
    inst.classes.labels = {"a", "b", "c"};
    inst.classes.vectors = Eigen::MatrixXd::Identity(3, 3);
    Rng rng(seed);
    for (std::size_t c = 0; c < 3; ++c) {
        for (int i = 0; i < 10; ++i) {
            Eigen::VectorXd x(3);
            for (Eigen::Index d = 0; d < 3; ++d) x[d] = 0.2 * rng.normal();
            x[static_cast<Eigen::Index>(c)] += 2.0;
            inst.examples.push_back({x, c});
        }
    }
    return inst;
}

}  // namespace gazezsl::synth
