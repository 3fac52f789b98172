#include "circuitgraph/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "circuitgraph/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace circuitgraph {

namespace {

inline int hw_max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline int hw_thread_id() {
#ifdef _OPENMP
    return omp_get_thread_num();
#else
    return 0;
#endif
}

inline int argmax(const std::vector<double>& v) {
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

void check_sample(const GcnModel& model, const GraphSample& sample) {
    if (sample.feature_dim() != model.input_dim())
        throw Error("DimensionMismatch", "sample feature dimension does not match the model");
    if (sample.adjacency.rows() != sample.node_count() ||
        sample.adjacency.cols() != sample.node_count())
        throw Error("DimensionMismatch", "adjacency must be square with one row per node");
}

// ---------------------------------------------------------------------------
// Forward / backward kernels. The public functions wrap these; train() calls
// them directly with reusable buffers so steady-state training does not
// allocate.
// ---------------------------------------------------------------------------

void forward_into(const GcnModel& model, const Matrix& x, const Matrix& s, Forward& f) {
    const int layers = model.layer_count();
    const int n = x.rows();
    f.activations.resize(layers + 1);
    f.propagated.resize(layers);
    f.activations[0] = x;

    for (int l = 0; l < layers; ++l) {
        matmul(s, f.activations[l], f.propagated[l]);
        matmul(f.propagated[l], model.layer_weights[l], f.activations[l + 1]);
        auto& data = f.activations[l + 1].data();
        for (double& v : data) v = std::tanh(v);
    }

    const Matrix& top = f.activations[layers];
    const int hidden = top.cols();
    f.readout.assign(hidden, 0.0);
    for (int i = 0; i < n; ++i) {
        const double* row = top.row(i);
        for (int j = 0; j < hidden; ++j) f.readout[j] += row[j];
    }
    const double inv_n = 1.0 / n;
    for (double& v : f.readout) v *= inv_n;

    const int classes = model.class_count();
    f.logits.assign(classes, 0.0);
    for (int j = 0; j < hidden; ++j) {
        const double r = f.readout[j];
        if (r == 0.0) continue;
        const double* w = model.fc_weights.row(j);
        for (int c = 0; c < classes; ++c) f.logits[c] += r * w[c];
    }
    for (int c = 0; c < classes; ++c) f.logits[c] += model.fc_bias[c];
    f.probs = softmax(f.logits);
}

struct Workspace {
    Forward fwd;
    Matrix dz;  // gradient before tanh, layer by layer
    Matrix dh;  // gradient w.r.t. an activation
    Matrix tmp;
    Gradients grad;
    double sample_loss = 0.0;
    bool correct = false;
};

void ensure_grad_shape(const GcnModel& model, Gradients& g) {
    if (g.layer_weights.size() != model.layer_weights.size()) {
        g.layer_weights.assign(model.layer_weights.size(), Matrix());
        for (std::size_t l = 0; l < model.layer_weights.size(); ++l)
            g.layer_weights[l].resize(model.layer_weights[l].rows(),
                                      model.layer_weights[l].cols());
        g.fc_weights.resize(model.fc_weights.rows(), model.fc_weights.cols());
        g.fc_bias.assign(model.fc_bias.size(), 0.0);
    }
}

/// Backpropagation through softmax + cross-entropy, the mean readout, and
/// every tanh propagation layer. Assumes w.fwd holds a fresh forward pass.
void backward_into(const GcnModel& model, const Matrix& s, int label, Workspace& w) {
    const int layers = model.layer_count();
    const int n = s.rows();
    const int hidden = model.hidden_dim();
    const int classes = model.class_count();
    ensure_grad_shape(model, w.grad);
    Forward& f = w.fwd;

    // Softmax with cross-entropy: dlogits = probs - onehot(label).
    std::vector<double>& dlogits = w.grad.fc_bias;
    for (int c = 0; c < classes; ++c) dlogits[c] = f.probs[c] - (c == label ? 1.0 : 0.0);

    for (int j = 0; j < hidden; ++j) {
        double* grow = w.grad.fc_weights.row(j);
        const double r = f.readout[j];
        for (int c = 0; c < classes; ++c) grow[c] = r * dlogits[c];
    }

    // Mean readout broadcasts its gradient to every node row.
    w.dh.resize(n, hidden);
    const double inv_n = 1.0 / n;
    {
        double* first = w.dh.row(0);
        for (int j = 0; j < hidden; ++j) {
            const double* wrow = model.fc_weights.row(j);
            double acc = 0.0;
            for (int c = 0; c < classes; ++c) acc += wrow[c] * dlogits[c];
            first[j] = acc * inv_n;
        }
        for (int i = 1; i < n; ++i)
            std::copy(first, first + hidden, w.dh.row(i));
    }

    for (int l = layers - 1; l >= 0; --l) {
        // dz = dh ⊙ tanh'(z) = dh ⊙ (1 - H_{l+1}^2)
        const Matrix& h = f.activations[l + 1];
        w.dz.resize(h.rows(), h.cols());
        const auto& hv = h.data();
        const auto& dhv = w.dh.data();
        auto& dzv = w.dz.data();
        for (std::size_t k = 0; k < hv.size(); ++k)
            dzv[k] = dhv[k] * (1.0 - hv[k] * hv[k]);

        matmul_at_b(f.propagated[l], w.dz, w.grad.layer_weights[l]);
        if (l > 0) {
            // dH_l = S^T (dz Theta_l^T); S is symmetric.
            matmul_a_bt(w.dz, model.layer_weights[l], w.tmp);
            matmul(s, w.tmp, w.dh);
        }
    }
}

void zero_gradients(Gradients& g) {
    for (auto& m : g.layer_weights) m.fill(0.0);
    g.fc_weights.fill(0.0);
    std::fill(g.fc_bias.begin(), g.fc_bias.end(), 0.0);
}

void add_gradients(Gradients& acc, const Gradients& g) {
    for (std::size_t l = 0; l < acc.layer_weights.size(); ++l) {
        auto& a = acc.layer_weights[l].data();
        const auto& b = g.layer_weights[l].data();
        for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
    }
    auto& aw = acc.fc_weights.data();
    const auto& bw = g.fc_weights.data();
    for (std::size_t k = 0; k < aw.size(); ++k) aw[k] += bw[k];
    for (std::size_t k = 0; k < acc.fc_bias.size(); ++k) acc.fc_bias[k] += g.fc_bias[k];
}

void scale_gradients(Gradients& g, double factor) {
    for (auto& m : g.layer_weights)
        for (double& v : m.data()) v *= factor;
    for (double& v : g.fc_weights.data()) v *= factor;
    for (double& v : g.fc_bias) v *= factor;
}

/// Precomputes normalized adjacencies for a whole dataset.
std::vector<Matrix> prepare_adjacencies(const Dataset& ds, int threads) {
    std::vector<Matrix> out(ds.samples.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(static) num_threads(threads)
    for (int i = 0; i < static_cast<int>(ds.samples.size()); ++i) {
        try {
            out[i] = normalize_adjacency(ds.samples[i].adjacency);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

} // namespace

Matrix normalize_adjacency(const Matrix& adjacency) {
    const int n = adjacency.rows();
    if (adjacency.cols() != n) throw Error("DimensionMismatch", "adjacency must be square");

    std::vector<double> inv_sqrt(n);
    for (int i = 0; i < n; ++i) {
        double deg = 1.0; // self-loop
        const double* row = adjacency.row(i);
        for (int j = 0; j < n; ++j) deg += row[j];
        if (!(deg > 0.0))
            throw Error("InvalidAdjacency", "node degree must stay positive");
        inv_sqrt[i] = 1.0 / std::sqrt(deg);
    }

    Matrix s(n, n);
    for (int i = 0; i < n; ++i) {
        const double* arow = adjacency.row(i);
        double* srow = s.row(i);
        for (int j = 0; j < n; ++j) {
            const double a = arow[j] + (i == j ? 1.0 : 0.0);
            srow[j] = a == 0.0 ? 0.0 : a * inv_sqrt[i] * inv_sqrt[j];
        }
    }
    return s;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    std::vector<double> out(logits.size());
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

double loss(const std::vector<double>& probs, int label) {
    if (label < 0 || label >= static_cast<int>(probs.size()))
        throw Error("DimensionMismatch", "label outside the class range");
    return -std::log(std::max(probs[label], 1e-12));
}

Forward forward(const GcnModel& model, const GraphSample& sample) {
    check_sample(model, sample);
    Forward f;
    forward_into(model, sample.x, normalize_adjacency(sample.adjacency), f);
    return f;
}

Gradients backward(const GcnModel& model, const GraphSample& sample, int label) {
    check_sample(model, sample);
    if (label < 0 || label >= model.class_count())
        throw Error("DimensionMismatch", "label outside the class range");
    Workspace w;
    const Matrix s = normalize_adjacency(sample.adjacency);
    forward_into(model, sample.x, s, w.fwd);
    backward_into(model, s, label, w);
    return std::move(w.grad);
}

GcnModel init_model(int input_dim, int hidden_dim, int layers, int classes,
                    std::uint64_t seed) {
    if (input_dim < 1 || hidden_dim < 1 || layers < 1 || classes < 2)
        throw Error("DimensionMismatch", "model dimensions must be positive (classes >= 2)");

    Rng rng(seed);
    auto glorot = [&rng](Matrix& w) {
        const double limit = std::sqrt(6.0 / (w.rows() + w.cols()));
        for (double& v : w.data()) v = rng.uniform(-limit, limit);
    };

    GcnModel model;
    model.layer_weights.resize(layers);
    for (int l = 0; l < layers; ++l) {
        model.layer_weights[l].resize(l == 0 ? input_dim : hidden_dim, hidden_dim);
        glorot(model.layer_weights[l]);
    }
    model.fc_weights.resize(hidden_dim, classes);
    glorot(model.fc_weights);
    model.fc_bias.assign(classes, 0.0);
    return model;
}

Gradients zeros_like(const GcnModel& model) {
    Gradients g;
    g.layer_weights.reserve(model.layer_weights.size());
    for (const auto& w : model.layer_weights)
        g.layer_weights.emplace_back(w.rows(), w.cols());
    g.fc_weights.resize(model.fc_weights.rows(), model.fc_weights.cols());
    g.fc_weights.fill(0.0);
    g.fc_bias.assign(model.fc_bias.size(), 0.0);
    return g;
}

void adam_step(GcnModel& model, const Gradients& gradients, AdamState& state,
               const TrainConfig& config) {
    if (state.m.layer_weights.empty()) {
        state.m = zeros_like(model);
        state.v = zeros_like(model);
        state.step = 0;
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));

    auto update = [&](double* p, const double* g, double* m, double* v, std::size_t count) {
        for (std::size_t k = 0; k < count; ++k) {
            m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
            v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            p[k] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
        }
    };

    for (std::size_t l = 0; l < model.layer_weights.size(); ++l)
        update(model.layer_weights[l].data().data(), gradients.layer_weights[l].data().data(),
               state.m.layer_weights[l].data().data(), state.v.layer_weights[l].data().data(),
               model.layer_weights[l].data().size());
    update(model.fc_weights.data().data(), gradients.fc_weights.data().data(),
           state.m.fc_weights.data().data(), state.v.fc_weights.data().data(),
           model.fc_weights.data().size());
    update(model.fc_bias.data(), gradients.fc_bias.data(), state.m.fc_bias.data(),
           state.v.fc_bias.data(), model.fc_bias.size());
}

std::pair<GcnModel, TrainHistory> train(const Dataset& train_set, const Dataset& test_set,
                                        std::uint64_t model_seed, const TrainConfig& config) {
    if (train_set.samples.empty() || test_set.samples.empty())
        throw Error("EmptyDataset", "training needs non-empty train and test sets");
    if (train_set.class_count() != test_set.class_count())
        throw Error("DimensionMismatch", "train and test sets disagree on classes");
    if (config.epochs < 0 || config.batch_size < 1 || config.hidden_dim < 1 ||
        config.layers < 1)
        throw Error("DimensionMismatch", "bad training configuration");

    const int input_dim = train_set.samples.front().feature_dim();
    const int classes = train_set.class_count();
    for (const auto* ds : {&train_set, &test_set})
        for (const auto& s : ds->samples) {
            if (s.feature_dim() != input_dim)
                throw Error("DimensionMismatch", "inconsistent feature dimensions");
            if (s.label < 0 || s.label >= classes)
                throw Error("DimensionMismatch", "sample label outside the class range");
            if (s.adjacency.rows() != s.node_count() || s.adjacency.cols() != s.node_count())
                throw Error("DimensionMismatch", "adjacency must be square");
        }

    const int threads = config.threads > 0 ? config.threads : hw_max_threads();
    GcnModel model = init_model(input_dim, config.hidden_dim, config.layers, classes,
                                model_seed);
    const auto s_train = prepare_adjacencies(train_set, threads);
    const auto s_test = prepare_adjacencies(test_set, threads);

    const int n = static_cast<int>(train_set.samples.size());
    const int n_test = static_cast<int>(test_set.samples.size());
    const int batch = std::min(config.batch_size, n);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(config.seed);

    std::vector<Workspace> slots(batch);
    std::vector<Forward> eval_slots(threads);
    std::vector<unsigned char> test_ok(n_test);
    Gradients batch_grad = zeros_like(model);
    AdamState state;
    TrainHistory history;
    history.reserve(config.epochs);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        long epoch_correct = 0;

        for (int start = 0; start < n; start += batch) {
            const int bn = std::min(batch, n - start);
#pragma omp parallel for schedule(static) num_threads(threads)
            for (int k = 0; k < bn; ++k) {
                const int idx = order[start + k];
                const GraphSample& sample = train_set.samples[idx];
                Workspace& w = slots[k];
                forward_into(model, sample.x, s_train[idx], w.fwd);
                w.sample_loss = loss(w.fwd.probs, sample.label);
                w.correct = argmax(w.fwd.probs) == sample.label;
                backward_into(model, s_train[idx], sample.label, w);
            }
            // Accumulate in slot order: identical totals at any thread count.
            zero_gradients(batch_grad);
            for (int k = 0; k < bn; ++k) {
                add_gradients(batch_grad, slots[k].grad);
                epoch_loss += slots[k].sample_loss;
                epoch_correct += slots[k].correct ? 1 : 0;
            }
            scale_gradients(batch_grad, 1.0 / bn);
            adam_step(model, batch_grad, state, config);
        }

#pragma omp parallel for schedule(static) num_threads(threads)
        for (int i = 0; i < n_test; ++i) {
            Forward& f = eval_slots[hw_thread_id()];
            forward_into(model, test_set.samples[i].x, s_test[i], f);
            test_ok[i] = argmax(f.probs) == test_set.samples[i].label ? 1 : 0;
        }
        long test_correct = 0;
        for (int i = 0; i < n_test; ++i) test_correct += test_ok[i];

        history.push_back({epoch_loss / n, static_cast<double>(epoch_correct) / n,
                           static_cast<double>(test_correct) / n_test});
    }
    return {std::move(model), std::move(history)};
}

// ---------------------------------------------------------------------------
// Checkpoint I/O
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) { return m.data(); } // row-major flat

Matrix matrix_from_json(const json& j, int rows, int cols) {
    const auto flat = j.get<std::vector<double>>();
    if (static_cast<int>(flat.size()) != rows * cols)
        throw Error("SchemaVersionMismatch", "weight tensor size mismatch");
    Matrix m(rows, cols);
    m.data() = flat;
    return m;
}

} // namespace

void save_model(const Checkpoint& checkpoint, const std::string& path) {
    const GcnModel& model = checkpoint.model;
    json layers = json::array();
    for (const auto& w : model.layer_weights) layers.push_back(matrix_to_json(w));

    const json j{{"schema", 1},
                 {"input_dim", model.input_dim()},
                 {"hidden_dim", model.hidden_dim()},
                 {"layers", model.layer_count()},
                 {"classes", model.class_count()},
                 {"layer_weights", std::move(layers)},
                 {"fc_weights", matrix_to_json(model.fc_weights)},
                 {"fc_bias", model.fc_bias},
                 {"model_seed", checkpoint.model_seed},
                 {"feature_fingerprint", checkpoint.feature_fingerprint},
                 {"train_fraction", checkpoint.train_fraction},
                 {"split_seed", checkpoint.split_seed}};

    std::ofstream out(path);
    if (!out) throw Error("IoError", "cannot open '" + path + "' for writing");
    out << j.dump() << '\n';
    if (!out) throw Error("IoError", "short write to '" + path + "'");
}

Checkpoint load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("IoError", "cannot open '" + path + "' for reading");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error("IoError", "bad checkpoint: " + std::string(e.what()));
    }
    if (!j.contains("schema") || !j["schema"].is_number_integer() ||
        j["schema"].get<int>() != 1)
        throw Error("SchemaVersionMismatch", "expected checkpoint schema 1");

    try {
        Checkpoint c;
        const int input_dim = j.at("input_dim").get<int>();
        const int hidden = j.at("hidden_dim").get<int>();
        const int layers = j.at("layers").get<int>();
        const int classes = j.at("classes").get<int>();
        if (input_dim < 1 || hidden < 1 || layers < 1 || classes < 2 ||
            static_cast<int>(j.at("layer_weights").size()) != layers)
            throw Error("SchemaVersionMismatch", "inconsistent checkpoint dimensions");
        c.model.layer_weights.reserve(layers);
        for (int l = 0; l < layers; ++l)
            c.model.layer_weights.push_back(matrix_from_json(
                j.at("layer_weights").at(l), l == 0 ? input_dim : hidden, hidden));
        c.model.fc_weights = matrix_from_json(j.at("fc_weights"), hidden, classes);
        c.model.fc_bias = j.at("fc_bias").get<std::vector<double>>();
        if (static_cast<int>(c.model.fc_bias.size()) != classes)
            throw Error("SchemaVersionMismatch", "bias size mismatch");
        c.model_seed = j.at("model_seed").get<std::uint64_t>();
        c.feature_fingerprint = j.at("feature_fingerprint").get<std::uint64_t>();
        c.train_fraction = j.at("train_fraction").get<double>();
        c.split_seed = j.at("split_seed").get<std::uint64_t>();
        return c;
    } catch (const json::exception& e) {
        throw Error("IoError", "bad checkpoint: " + std::string(e.what()));
    }
}

} // namespace circuitgraph
