#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gazezsl/embed.hpp"

namespace gazezsl {

struct TrainConfig {
    double learning_rate = 0.1;
    int epochs = 10;
    std::uint64_t seed = 0;
    bool shuffle = true;
    // Zero initialization unless > 0, in which case W ~ N(0, init_scale^2).
    double init_scale = 0.0;

    void validate() const;
};

// Bilinear compatibility F(x, y) = theta(x)^T W phi(y). W is D x E.
struct CompatibilityModel {
    Eigen::MatrixXd weights;
    std::vector<std::string> classes;  // training class order, informational
    TrainConfig config;

    std::size_t feature_dim() const { return static_cast<std::size_t>(weights.rows()); }
    std::size_t embedding_dim() const { return static_cast<std::size_t>(weights.cols()); }
};

// One score per row of `classes.vectors`.
Eigen::VectorXd score(const CompatibilityModel& model, const Eigen::VectorXd& image, const EmbeddingSet& classes);

// Index of the maximum; ties go to the lowest index.
std::size_t argmax(const Eigen::VectorXd& scores);

std::size_t predict_index(const CompatibilityModel& model, const Eigen::VectorXd& image, const EmbeddingSet& classes);
std::string predict(const CompatibilityModel& model, const Eigen::VectorXd& image, const EmbeddingSet& classes);

// max_y (Delta(y_n, y) + F(x, y)) - F(x, y_n) with 0/1 Delta.
double structured_loss(const CompatibilityModel& model, const Eigen::VectorXd& image, std::size_t truth,
                       const EmbeddingSet& classes);

// The maximizing label y* of Delta + F (lowest index on ties).
std::size_t most_violating(const CompatibilityModel& model, const Eigen::VectorXd& image, std::size_t truth,
                           const EmbeddingSet& classes);

// Subgradient of structured_loss with respect to W:
// theta (phi(y*) - phi(y_n))^T, or zero when y* == y_n.
Eigen::MatrixXd loss_subgradient(const CompatibilityModel& model, const Eigen::VectorXd& image, std::size_t truth,
                                 const EmbeddingSet& classes);

// One SGD step on a single example. Returns true when W changed.
bool hinge_step(CompatibilityModel& model, const Eigen::VectorXd& image, std::size_t truth, const EmbeddingSet& classes,
                double learning_rate);

struct Example {
    Eigen::VectorXd image;
    std::size_t label = 0;  // row in the training EmbeddingSet
};

// Called after each epoch with (1-based epoch, model, mean loss over that epoch
// measured before each update).
using EpochCallback = std::function<void(int, const CompatibilityModel&, double)>;

CompatibilityModel train_sje(const std::vector<Example>& data, const EmbeddingSet& classes, const TrainConfig& config,
                             const EpochCallback& on_epoch = {});

// Mean of the per-participant score vectors; argmax with the lowest-index
// tie rule. All sets must list the same classes in the same order.
std::size_t predict_late_index(const std::vector<CompatibilityModel>& models, const Eigen::VectorXd& image,
                               const std::vector<EmbeddingSet>& classes);
std::string predict_late(const std::vector<CompatibilityModel>& models, const Eigen::VectorXd& image,
                         const std::vector<EmbeddingSet>& classes);

inline constexpr std::string_view kModelFormatHeader = "# gazezsl model v1";

std::string format_model(const CompatibilityModel& model);
CompatibilityModel parse_model(std::string_view text, const std::string& origin = "<memory>");

// --- one-vs-rest linear SVM probe ---

struct SvmConfig {
    double learning_rate = 0.01;
    int epochs = 20;
    double regularization = 1e-4;
    std::uint64_t seed = 0;

    void validate() const;
};

struct OvrSvm {
    Eigen::MatrixXd weights;  // classes x dim
    Eigen::VectorXd bias;
    std::vector<std::string> classes;

    Eigen::VectorXd scores(const Eigen::VectorXd& x) const { return weights * x + bias; }
    std::size_t predict_index(const Eigen::VectorXd& x) const;
};

// Per class, SGD on lambda/2 |w|^2 + mean hinge(1 - y (w.x + b)), y in {-1, +1}.
OvrSvm train_ovr_svm(const std::vector<Eigen::VectorXd>& samples, const std::vector<std::string>& labels,
                     const SvmConfig& config);

}  // namespace gazezsl
