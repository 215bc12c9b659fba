#include "gazezsl/model.hpp"

#include <cmath>
#include <map>
#include <limits>
#include <numeric>
#include <optional>

#include "gazezsl/common.hpp"

namespace gazezsl {

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("train.learning_rate", "must be a finite value >= 0");
    }
    if (epochs < 1) throw ConfigError("train.epochs", "must be >= 1");
    if (!(init_scale >= 0.0)) throw ConfigError("train.init_scale", "must be >= 0");
}

void SvmConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("probe.learning_rate", "must be > 0");
    if (epochs < 1) throw ConfigError("probe.epochs", "must be >= 1");
    if (!(regularization >= 0.0)) throw ConfigError("probe.regularization", "must be >= 0");
}

namespace {

void check_dims(const CompatibilityModel& model, const Eigen::VectorXd& image, const EmbeddingSet& classes) {
    if (static_cast<std::size_t>(image.size()) != model.feature_dim()) {
        throw DimensionError("image feature dimension " + std::to_string(image.size()) + " does not match model D=" +
                             std::to_string(model.feature_dim()));
    }
    if (classes.dim() != model.embedding_dim()) {
        throw DimensionError("class embedding dimension " + std::to_string(classes.dim()) +
                             " does not match model E=" + std::to_string(model.embedding_dim()));
    }
    if (classes.size() == 0) throw ValidationError("no candidate classes");
}

// Delta + F maximizer given precomputed scores.
std::size_t violator(const Eigen::VectorXd& scores, std::size_t truth) {
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (Eigen::Index y = 0; y < scores.size(); ++y) {
        const double v = scores[y] + (static_cast<std::size_t>(y) == truth ? 0.0 : 1.0);
        if (v > best_value) {
            best_value = v;
            best = static_cast<std::size_t>(y);
        }
    }
    return best;
}

void check_truth(std::size_t truth, const EmbeddingSet& classes) {
    if (truth >= classes.size()) throw ValidationError("label index " + std::to_string(truth) + " not in class set");
}

}  // namespace

Eigen::VectorXd score(const CompatibilityModel& model, const Eigen::VectorXd& image, const EmbeddingSet& classes) {
    check_dims(model, image, classes);
    const Eigen::VectorXd projected = model.weights.transpose() * image;
    return classes.vectors * projected;
}

std::size_t argmax(const Eigen::VectorXd& scores) {
    if (scores.size() == 0) throw ValidationError("argmax of empty score vector");
    std::size_t best = 0;
    for (Eigen::Index i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
    }
    return best;
}

std::size_t predict_index(const CompatibilityModel& model, const Eigen::VectorXd& image, const EmbeddingSet& classes) {
    return argmax(score(model, image, classes));
}

std::string predict(const CompatibilityModel& model, const Eigen::VectorXd& image, const EmbeddingSet& classes) {
    return classes.labels[predict_index(model, image, classes)];
}

double structured_loss(const CompatibilityModel& model, const Eigen::VectorXd& image, std::size_t truth,
                       const EmbeddingSet& classes) {
    check_truth(truth, classes);
    const auto s = score(model, image, classes);
    const auto y = violator(s, truth);
    const auto t = static_cast<Eigen::Index>(truth);
    return s[static_cast<Eigen::Index>(y)] + (y == truth ? 0.0 : 1.0) - s[t];
}

std::size_t most_violating(const CompatibilityModel& model, const Eigen::VectorXd& image, std::size_t truth,
                           const EmbeddingSet& classes) {
    check_truth(truth, classes);
    return violator(score(model, image, classes), truth);
}

Eigen::MatrixXd loss_subgradient(const CompatibilityModel& model, const Eigen::VectorXd& image, std::size_t truth,
                                 const EmbeddingSet& classes) {
    const auto y = most_violating(model, image, truth, classes);
    if (y == truth) return Eigen::MatrixXd::Zero(model.weights.rows(), model.weights.cols());
    const Eigen::VectorXd diff = classes.vectors.row(static_cast<Eigen::Index>(y)).transpose() -
                                 classes.vectors.row(static_cast<Eigen::Index>(truth)).transpose();
    return image * diff.transpose();
}

bool hinge_step(CompatibilityModel& model, const Eigen::VectorXd& image, std::size_t truth, const EmbeddingSet& classes,
                double learning_rate) {
    check_truth(truth, classes);
    const auto s = score(model, image, classes);
    const auto y = violator(s, truth);
    if (y == truth) return false;
    const double violation = 1.0 + s[static_cast<Eigen::Index>(y)] - s[static_cast<Eigen::Index>(truth)];
    if (!(violation > 0.0)) return false;
    const Eigen::VectorXd diff = classes.vectors.row(static_cast<Eigen::Index>(truth)).transpose() -
                                 classes.vectors.row(static_cast<Eigen::Index>(y)).transpose();
    model.weights.noalias() += learning_rate * image * diff.transpose();
    return true;
}

CompatibilityModel train_sje(const std::vector<Example>& data, const EmbeddingSet& classes, const TrainConfig& config,
                             const EpochCallback& on_epoch) {
    config.validate();
    if (data.empty()) throw ValidationError("no training examples");
    const auto d = data.front().image.size();
    CompatibilityModel model;
    model.classes = classes.labels;
    model.config = config;
    model.weights = Eigen::MatrixXd::Zero(d, static_cast<Eigen::Index>(classes.dim()));

    Rng rng(config.seed);
    if (config.init_scale > 0.0) {
        for (Eigen::Index c = 0; c < model.weights.cols(); ++c) {
            for (Eigen::Index r = 0; r < model.weights.rows(); ++r) model.weights(r, c) = config.init_scale * rng.normal();
        }
    }
    for (const auto& ex : data) check_truth(ex.label, classes);

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        if (config.shuffle) rng.shuffle(order);
        double loss = 0.0;
        for (const auto i : order) {
            const auto& ex = data[i];
            const auto s = score(model, ex.image, classes);
            const auto y = violator(s, ex.label);
            const double violation = s[static_cast<Eigen::Index>(y)] + (y == ex.label ? 0.0 : 1.0) -
                                     s[static_cast<Eigen::Index>(ex.label)];
            loss += violation;
            if (y != ex.label && violation > 0.0) {
                const Eigen::VectorXd diff = classes.vectors.row(static_cast<Eigen::Index>(ex.label)).transpose() -
                                             classes.vectors.row(static_cast<Eigen::Index>(y)).transpose();
                model.weights.noalias() += config.learning_rate * ex.image * diff.transpose();
            }
        }
        if (on_epoch) on_epoch(epoch, model, loss / static_cast<double>(data.size()));
    }
    return model;
}

std::size_t predict_late_index(const std::vector<CompatibilityModel>& models, const Eigen::VectorXd& image,
                               const std::vector<EmbeddingSet>& classes) {
    if (models.empty() || models.size() != classes.size()) {
        throw ValidationError("late fusion needs one class set per model");
    }
    Eigen::VectorXd total = score(models[0], image, classes[0]);
    for (std::size_t p = 1; p < models.size(); ++p) {
        if (classes[p].labels != classes[0].labels) throw ValidationError("late fusion: class order differs between participants");
        total += score(models[p], image, classes[p]);
    }
    total /= static_cast<double>(models.size());
    return argmax(total);
}

std::string predict_late(const std::vector<CompatibilityModel>& models, const Eigen::VectorXd& image,
                         const std::vector<EmbeddingSet>& classes) {
    return classes.at(0).labels[predict_late_index(models, image, classes)];
}

std::string format_model(const CompatibilityModel& model) {
    std::string out(kModelFormatHeader);
    out += '\n';
    out += "D " + std::to_string(model.weights.rows()) + '\n';
    out += "E " + std::to_string(model.weights.cols()) + '\n';
    out += "classes";
    for (const auto& c : model.classes) out += ' ' + c;
    out += '\n';
    out += "learning_rate " + format_double(model.config.learning_rate) + '\n';
    out += "epochs " + std::to_string(model.config.epochs) + '\n';
    out += "seed " + std::to_string(model.config.seed) + '\n';
    out += "shuffle " + std::string(model.config.shuffle ? "1" : "0") + '\n';
    out += "init_scale " + format_double(model.config.init_scale) + '\n';
    out += "W\n";
    for (Eigen::Index r = 0; r < model.weights.rows(); ++r) {
        for (Eigen::Index c = 0; c < model.weights.cols(); ++c) {
            if (c) out += ' ';
            out += format_double(model.weights(r, c));
        }
        out += '\n';
    }
    return out;
}

CompatibilityModel parse_model(std::string_view text, const std::string& origin) {
    CompatibilityModel model;
    std::map<std::string, std::vector<std::string>> header;
    std::size_t start = 0, line_no = 0;
    auto next_line = [&]() -> std::optional<std::string_view> {
        if (start >= text.size()) return std::nullopt;
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) pos = text.size();
        const auto line = text.substr(start, pos - start);
        start = pos + 1;
        ++line_no;
        return trim(line);
    };
    auto first = next_line();
    if (!first || *first != kModelFormatHeader) throw ParseError(origin, 1, "not a gazezsl model file");
    while (auto line = next_line()) {
        if (line->empty()) continue;
        if (*line == "W") break;
        auto f = split_ws(*line);
        const auto key = f.front();
        f.erase(f.begin());
        header[key] = std::move(f);
    }
    auto scalar = [&](const std::string& key) -> std::string {
        const auto it = header.find(key);
        if (it == header.end() || it->second.size() != 1) throw ParseError(origin, 0, "missing header field '" + key + "'");
        return it->second.front();
    };
    Eigen::Index d = 0, e = 0;
    try {
        d = std::stol(scalar("D"));
        e = std::stol(scalar("E"));
        model.config.learning_rate = parse_double(scalar("learning_rate"));
        model.config.epochs = std::stoi(scalar("epochs"));
        model.config.seed = std::stoull(scalar("seed"));
        model.config.shuffle = scalar("shuffle") == "1";
        model.config.init_scale = parse_double(scalar("init_scale"));
    } catch (const std::logic_error& ex) {
        throw ParseError(origin, 0, std::string("bad header value: ") + ex.what());
    }
    if (header.count("classes")) model.classes = header["classes"];
    model.weights.resize(d, e);
    for (Eigen::Index r = 0; r < d; ++r) {
        const auto line = next_line();
        if (!line) throw ParseError(origin, line_no, "expected " + std::to_string(d) + " weight rows");
        const auto f = split_ws(*line);
        if (static_cast<Eigen::Index>(f.size()) != e) throw ParseError(origin, line_no, "weight row has wrong length");
        for (Eigen::Index c = 0; c < e; ++c) {
            try {
                model.weights(r, c) = parse_double(f[static_cast<std::size_t>(c)]);
            } catch (const ValidationError& ex) {
                throw ParseError(origin, line_no, ex.what());
            }
        }
    }
    if (!model.weights.allFinite()) throw ParseError(origin, 0, "non-finite weight");
    return model;
}

std::size_t OvrSvm::predict_index(const Eigen::VectorXd& x) const { return argmax(scores(x)); }

OvrSvm train_ovr_svm(const std::vector<Eigen::VectorXd>& samples, const std::vector<std::string>& labels,
                     const SvmConfig& config) {
    config.validate();
    if (samples.empty() || samples.size() != labels.size()) throw ValidationError("probe needs one label per sample");
    OvrSvm svm;
    std::map<std::string, std::size_t> class_of;
    std::vector<std::size_t> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = class_of.emplace(labels[i], svm.classes.size());
        if (inserted) svm.classes.push_back(labels[i]);
        y[i] = it->second;
    }
    if (svm.classes.size() < 2) throw ValidationError("probe needs at least 2 classes");
    const auto dim = samples.front().size();
    for (const auto& s : samples) {
        if (s.size() != dim) throw DimensionError("probe samples differ in dimension");
    }
    const auto n_classes = static_cast<Eigen::Index>(svm.classes.size());
    svm.weights = Eigen::MatrixXd::Zero(n_classes, dim);
    svm.bias = Eigen::VectorXd::Zero(n_classes);

    for (Eigen::Index c = 0; c < n_classes; ++c) {
        Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(c)));
        std::vector<std::size_t> order(samples.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
        double b = 0.0;
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            rng.shuffle(order);
            for (const auto i : order) {
                const double target = y[i] == static_cast<std::size_t>(c) ? 1.0 : -1.0;
                const double margin = target * (w.dot(samples[i]) + b);
                w *= 1.0 - config.learning_rate * config.regularization;
                if (margin < 1.0) {
                    w += config.learning_rate * target * samples[i];
                    b += config.learning_rate * target;
                }
            }
        }
        svm.weights.row(c) = w.transpose();
        svm.bias[c] = b;
    }
    return svm;
}

}  // namespace gazezsl
