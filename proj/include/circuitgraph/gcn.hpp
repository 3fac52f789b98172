#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "circuitgraph/datagen.hpp"
#include "circuitgraph/linalg.hpp"

namespace circuitgraph {

// ============================================================================
// Graph convolutional classifier
//
// Propagation rule per layer (S is the symmetrically normalized adjacency
// with self-loops):
//
//     H_0 = X,   H_{l+1} = tanh(S * H_l * Theta_l)
//
// followed by a global mean over nodes, one fully connected layer with bias,
// and a softmax. Training is full analytic backpropagation with Adam on the
// mean cross-entropy of shuffled mini-batches.
//
// Determinism: model init, shuffling and batch order depend only on seeds;
// batch gradients are accumulated in sample-index order regardless of how
// many threads computed them, so training is bit-reproducible at any thread
// count.
// ============================================================================

struct GcnModel {
    std::vector<Matrix> layer_weights; // Theta_0 .. Theta_{L-1}
    Matrix fc_weights;                 // hidden x classes
    std::vector<double> fc_bias;       // classes

    int input_dim() const { return layer_weights.empty() ? 0 : layer_weights.front().rows(); }
    int hidden_dim() const { return layer_weights.empty() ? 0 : layer_weights.front().cols(); }
    int layer_count() const { return static_cast<int>(layer_weights.size()); }
    int class_count() const { return fc_weights.cols(); }

    friend bool operator==(const GcnModel&, const GcnModel&) = default;
};

/// Gradients (or any other per-parameter tensor set) shaped like a model.
struct Gradients {
    std::vector<Matrix> layer_weights;
    Matrix fc_weights;
    std::vector<double> fc_bias;
};

struct AdamState {
    Gradients m;
    Gradients v;
    long step = 0;
};

struct TrainConfig {
    double learning_rate = 0.02;
    int epochs = 1;
    int batch_size = 32;
    std::uint64_t seed = 0; // epoch shuffles
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8; // added outside the square root
    int hidden_dim = 32;
    int layers = 3;
    int threads = 0; // 0 = library default
};

struct EpochStats {
    double train_loss = 0.0;     // mean pre-update batch loss
    double train_accuracy = 0.0; // pre-update batch accuracy
    double test_accuracy = 0.0;

    friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

using TrainHistory = std::vector<EpochStats>;

/// S = D^{-1/2} (A + I) D^{-1/2} with D the degree matrix of A + I.
Matrix normalize_adjacency(const Matrix& adjacency);

/// Numerically stable softmax (max-subtracted).
std::vector<double> softmax(const std::vector<double>& logits);

/// Cross-entropy -log(probs[label]); the probability is floored at 1e-12.
double loss(const std::vector<double>& probs, int label);

/// Everything forward() computes, cached for backpropagation.
struct Forward {
    std::vector<Matrix> activations; // H_0 .. H_L
    std::vector<Matrix> propagated;  // S * H_l per layer
    std::vector<double> readout;     // mean over nodes of H_L
    std::vector<double> logits;
    std::vector<double> probs;
};

Forward forward(const GcnModel& model, const GraphSample& sample);

/// Analytic gradients of loss(forward(sample), label) for every parameter.
Gradients backward(const GcnModel& model, const GraphSample& sample, int label);

/// Glorot-uniform initialization; weights are filled in row-major order from
/// a single stream seeded with `seed`, biases start at zero.
GcnModel init_model(int input_dim, int hidden_dim, int layers, int classes,
                    std::uint64_t seed);

Gradients zeros_like(const GcnModel& model);

/// One Adam update with bias correction; epsilon sits outside the root.
void adam_step(GcnModel& model, const Gradients& gradients, AdamState& state,
               const TrainConfig& config);

/// Trains a fresh model (init_model(..., model_seed)) on the train set,
/// recording per-epoch mean train loss/accuracy and test accuracy. Both sets
/// must share one feature dimension and class count. Throws
/// Error("EmptyDataset") / Error("DimensionMismatch") on bad input.
std::pair<GcnModel, TrainHistory> train(const Dataset& train_set, const Dataset& test_set,
                                        std::uint64_t model_seed, const TrainConfig& config);

/// Checkpoint I/O; stores the weights, the model seed and the feature-config
/// fingerprint of the data the model was trained on, plus the split metadata
/// needed to reproduce its test partition. Errors: "IoError",
/// "SchemaVersionMismatch".
struct Checkpoint {
    GcnModel model;
    std::uint64_t model_seed = 0;
    std::uint64_t feature_fingerprint = 0;
    double train_fraction = 0.0; // 0 = trained on the whole file
    std::uint64_t split_seed = 0;
};

void save_model(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_model(const std::string& path);

/// Reference implementation: straight-line textbook loops, no propagation
/// cache, no zero skipping, natural dot-product order. Kept as an oracle for
/// the optimized path and as the baseline of the kernel benchmark.
namespace reference {
Forward forward(const GcnModel& model, const GraphSample& sample);
Gradients backward(const GcnModel& model, const GraphSample& sample, int label);
} // namespace reference

} // namespace circuitgraph
