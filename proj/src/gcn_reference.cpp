#include "circuitgraph/gcn.hpp"

#include <cmath>
#include <vector>

// Serial reference implementation of the classifier kernels. Written as
// straight textbook formulas on nested vectors - independent of the
// optimized path so either one can catch the other's mistakes. Used by the
// test suite as a numeric oracle and by the kernel benchmark as baseline.

namespace circuitgraph::reference {

namespace {

using Grid = std::vector<std::vector<double>>;

Grid to_grid(const Matrix& m) {
    Grid g(m.rows(), std::vector<double>(m.cols()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) g[i][j] = m(i, j);
    return g;
}

Matrix to_matrix(const Grid& g) {
    Matrix m(static_cast<int>(g.size()), g.empty() ? 0 : static_cast<int>(g[0].size()));
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g[i].size(); ++j)
            m(static_cast<int>(i), static_cast<int>(j)) = g[i][j];
    return m;
}

Grid multiply(const Grid& a, const Grid& b) {
    const std::size_t m = a.size(), k = b.size(), n = b[0].size();
    Grid out(m, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += a[i][p] * b[p][j];
            out[i][j] = acc;
        }
    return out;
}

Grid transpose(const Grid& a) {
    Grid out(a[0].size(), std::vector<double>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) out[j][i] = a[i][j];
    return out;
}

/// S = D^{-1/2} (A + I) D^{-1/2}, all dense.
Grid normalized_adjacency(const Matrix& adjacency) {
    const int n = adjacency.rows();
    Grid a(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[i][j] = adjacency(i, j) + (i == j ? 1.0 : 0.0);

    std::vector<double> deg(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) deg[i] += a[i][j];

    Grid s(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            s[i][j] = a[i][j] / (std::sqrt(deg[i]) * std::sqrt(deg[j]));
    return s;
}

struct Pass {
    Grid s;
    std::vector<Grid> h; // h[0] .. h[L]
    std::vector<double> readout;
    std::vector<double> logits;
    std::vector<double> probs;
};

Pass run_forward(const GcnModel& model, const GraphSample& sample) {
    Pass p;
    p.s = normalized_adjacency(sample.adjacency);
    p.h.push_back(to_grid(sample.x));

    for (const auto& theta : model.layer_weights) {
        Grid z = multiply(multiply(p.s, p.h.back()), to_grid(theta));
        for (auto& row : z)
            for (double& v : row) v = std::tanh(v);
        p.h.push_back(std::move(z));
    }

    const Grid& top = p.h.back();
    const std::size_t n = top.size(), hidden = top[0].size();
    p.readout.assign(hidden, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < hidden; ++j) p.readout[j] += top[i][j] / double(n);

    const int classes = model.class_count();
    p.logits.assign(classes, 0.0);
    for (int c = 0; c < classes; ++c) {
        for (std::size_t j = 0; j < hidden; ++j)
            p.logits[c] += p.readout[j] * model.fc_weights(static_cast<int>(j), c);
        p.logits[c] += model.fc_bias[c];
    }

    double peak = p.logits[0];
    for (double v : p.logits) peak = std::max(peak, v);
    double sum = 0.0;
    p.probs.assign(classes, 0.0);
    for (int c = 0; c < classes; ++c) {
        p.probs[c] = std::exp(p.logits[c] - peak);
        sum += p.probs[c];
    }
    for (double& v : p.probs) v /= sum;
    return p;
}

} // namespace

Forward forward(const GcnModel& model, const GraphSample& sample) {
    Pass p = run_forward(model, sample);
    Forward f;
    for (std::size_t l = 0; l + 1 < p.h.size(); ++l)
        f.propagated.push_back(to_matrix(multiply(p.s, p.h[l])));
    for (const auto& h : p.h) f.activations.push_back(to_matrix(h));
    f.readout = p.readout;
    f.logits = p.logits;
    f.probs = p.probs;
    return f;
}

Gradients backward(const GcnModel& model, const GraphSample& sample, int label) {
    const Pass p = run_forward(model, sample);
    const int layers = model.layer_count();
    const std::size_t n = p.h[0].size();
    const std::size_t hidden = model.hidden_dim();
    const int classes = model.class_count();

    Gradients g;

    std::vector<double> dlogits(classes);
    for (int c = 0; c < classes; ++c) dlogits[c] = p.probs[c] - (c == label ? 1.0 : 0.0);
    g.fc_bias = dlogits;

    g.fc_weights.resize(static_cast<int>(hidden), classes);
    for (std::size_t j = 0; j < hidden; ++j)
        for (int c = 0; c < classes; ++c)
            g.fc_weights(static_cast<int>(j), c) = p.readout[j] * dlogits[c];

    Grid dh(n, std::vector<double>(hidden, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < hidden; ++j) {
            double acc = 0.0;
            for (int c = 0; c < classes; ++c)
                acc += model.fc_weights(static_cast<int>(j), c) * dlogits[c];
            dh[i][j] = acc / double(n);
        }

    g.layer_weights.resize(layers);
    for (int l = layers - 1; l >= 0; --l) {
        const Grid& h_out = p.h[l + 1];
        Grid dz(n, std::vector<double>(h_out[0].size()));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < h_out[i].size(); ++j)
                dz[i][j] = dh[i][j] * (1.0 - h_out[i][j] * h_out[i][j]);

        const Grid propagated = multiply(p.s, p.h[l]);
        g.layer_weights[l] = to_matrix(multiply(transpose(propagated), dz));

        if (l > 0)
            dh = multiply(transpose(p.s), multiply(dz, transpose(to_grid(model.layer_weights[l]))));
    }
    return g;
}

} // namespace circuitgraph::reference
