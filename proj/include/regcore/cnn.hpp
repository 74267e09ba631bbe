#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "regcore/embeddings.hpp"
#include "regcore/labels.hpp"
#include "regcore/rng.hpp"

namespace regcore {

class CnnError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when training produces a non-finite loss.
class TrainingError : public CnnError {
public:
    using CnnError::CnnError;
};

struct CnnConfig {
    std::size_t kernel = 1;
    std::size_t filters = 100;
    std::size_t embedding_dim = kDefaultEmbeddingDim;
    std::size_t labels = kNumRegisters;
    double learning_rate = 1e-3;
    double threshold = 0.5;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 30;
    std::size_t patience = 5;
    std::uint64_t seed = 1;
    std::size_t max_len = kDefaultMaxLen;

    /// kernel, filters, dim, labels, batch size and epochs >= 1;
    /// 0 < threshold < 1; learning_rate >= 0.
    void validate() const;
    bool operator==(const CnnConfig&) const = default;
};

/// Trainable tensors, row-major:
///   conv_w [filters][kernel][dim], conv_b [filters],
///   out_w [labels][filters],       out_b [labels].
/// The same layout doubles as the gradient container.
struct CnnParams {
    std::size_t filters = 0;
    std::size_t kernel = 0;
    std::size_t dim = 0;
    std::size_t labels = 0;
    std::vector<double> conv_w;
    std::vector<double> conv_b;
    std::vector<double> out_w;
    std::vector<double> out_b;

    static CnnParams zeros(std::size_t filters, std::size_t kernel, std::size_t dim, std::size_t labels);
    static CnnParams zeros(const CnnConfig& config);
    /// Every tensor drawn from uniform(-scale, scale).
    static CnnParams uniform(const CnnConfig& config, Rng& rng, double scale = 0.05);

    double& w(std::size_t f, std::size_t j, std::size_t e) { return conv_w[(f * kernel + j) * dim + e]; }
    double w(std::size_t f, std::size_t j, std::size_t e) const { return conv_w[(f * kernel + j) * dim + e]; }
    double& u(std::size_t l, std::size_t f) { return out_w[l * filters + f]; }
    double u(std::size_t l, std::size_t f) const { return out_w[l * filters + f]; }

    /// The four tensors in declaration order, for generic iteration.
    std::array<std::vector<double>*, 4> tensors() { return {&conv_w, &conv_b, &out_w, &out_b}; }
    std::array<const std::vector<double>*, 4> tensors() const { return {&conv_w, &conv_b, &out_w, &out_b}; }

    bool all_finite() const;
    bool operator==(const CnnParams&) const = default;
};

inline constexpr std::array<const char*, 4> kTensorNames = {"conv_w", "conv_b", "out_w", "out_b"};

/// Batch-major matrices: one row per document, one column per label.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Label sets as 0/1 target rows in canonical register order.
Matrix targets_from(const std::vector<LabelSet>& labels);

/// Max-pooled ReLU features of one document (length = filters) and the
/// window each came from.
struct PooledFeatures {
    std::vector<double> value;
    std::vector<std::size_t> argmax;
    std::vector<double> preactivation;  // at argmax, before ReLU
};

/// Length without trailing PAD indices. Only windows inside this length are
/// pooled; a document shorter than the kernel gets one zero-padded window.
std::size_t effective_length(const EncodedDoc& doc);

PooledFeatures pooled_features(const CnnParams& params, const EncodedDoc& doc, const EmbeddingTable& table);

/// conv -> ReLU -> global max -> affine -> sigmoid, per document.
/// Throws CnnError on a dimension mismatch or an out-of-table index.
Matrix forward(const CnnParams& params, std::span<const EncodedDoc> batch, const EmbeddingTable& table);

inline constexpr double kBceEpsilon = 1e-7;

/// Mean binary cross-entropy over all B x L entries; probabilities are
/// clamped to [1e-7, 1 - 1e-7].
double bce_loss(const Matrix& probabilities, const Matrix& targets);

struct GradientResult {
    CnnParams grad;
    double loss = 0.0;
    Matrix probabilities;
};

/// Exact gradient of bce_loss(forward(...), targets) w.r.t. every tensor.
/// Max-pooling routes to the first argmax; ReLU'(0) = 0; a clamped
/// probability contributes no gradient.
GradientResult gradients(const CnnParams& params, std::span<const EncodedDoc> batch, const Matrix& targets,
                         const EmbeddingTable& table);

/// Label j is included iff probability_j >= threshold.
std::vector<LabelSet> threshold_predictions(const Matrix& probabilities, double threshold);

std::vector<LabelSet> predict(const CnnParams& params, std::span<const EncodedDoc> docs,
                              const EmbeddingTable& table, double threshold, std::size_t batch_size = 64);

/// Encoded documents and their gold labels.
struct LabeledData {
    std::vector<EncodedDoc> docs;
    std::vector<LabelSet> labels;

    std::size_t size() const { return docs.size(); }
};

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> dev_f1;
    /// 1-based epoch whose parameters were kept (first maximum of dev_f1).
    std::size_t chosen_epoch = 0;
    double wall_seconds = 0.0;

    double best_dev_f1() const { return chosen_epoch ? dev_f1[chosen_epoch - 1] : 0.0; }
};

struct TrainResult {
    CnnParams params;
    TrainHistory history;
};

/**
 * @brief Mini-batch Adam training with early stopping on dev micro-F1.
 *
 * Parameters start from uniform(-0.05, 0.05) drawn from a generator seeded
 * with `config.seed`; the same generator shuffles the training set each
 * epoch. Training stops after `config.patience` epochs without a strict dev
 * improvement and returns the best epoch's parameters.
 */
TrainResult train(const CnnConfig& config, const LabeledData& train_set, const LabeledData& dev_set,
                  const EmbeddingTable& table);

/// Adam with beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
class AdamOptimizer {
public:
    AdamOptimizer(const CnnParams& shape, double learning_rate);
    void step(CnnParams& params, const CnnParams& grad);
    std::size_t steps() const { return t_; }

private:
    double lr_;
    std::size_t t_ = 0;
    CnnParams m_;
    CnnParams v_;
};

struct Checkpoint {
    static constexpr int kVersion = 1;
    CnnConfig config;
    CnnParams params;
    std::vector<std::string> label_order;
};

/// Self-describing text container; doubles are written in shortest
/// round-trip form so a reload is bit-exact.
void save_checkpoint(std::ostream& out, const CnnConfig& config, const CnnParams& params);
Checkpoint load_checkpoint(std::istream& in);
void save_checkpoint_file(const std::string& path, const CnnConfig& config, const CnnParams& params);
Checkpoint load_checkpoint_file(const std::string& path);

}  // namespace regcore
