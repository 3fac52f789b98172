// Kernel benchmark: the optimized forward/backward path (zero-skipping
// products, cached propagation, reused buffers) against the straight-line
// reference implementation, plus end-to-end training throughput at different
// thread counts. Usage:
//
//     bench_kernels [reps]
//
// where reps scales every measurement loop (default 1).

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "circuitgraph/datagen.hpp"
#include "circuitgraph/gcn.hpp"
#include "circuitgraph/rng.hpp"

using namespace circuitgraph;

namespace {

double now_seconds() {
#ifdef _OPENMP
    return omp_get_wtime();
#else
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
#endif
}

/// Path graph with random features, standing in for a large sparse circuit.
GraphSample synthetic_sample(int nodes, int dim, Rng& rng) {
    GraphSample s;
    s.label = 0;
    s.x.resize(nodes, dim);
    for (double& v : s.x.data()) v = rng.uniform(-1.0, 1.0);
    s.adjacency.resize(nodes, nodes);
    s.adjacency.fill(0.0);
    for (int i = 0; i + 1 < nodes; ++i) {
        s.adjacency(i, i + 1) = 1.0;
        s.adjacency(i + 1, i) = 1.0;
    }
    return s;
}

struct Timing {
    double optimized_us = 0.0;
    double reference_us = 0.0;
};

/// Micro-benchmark of forward+backward per sample, optimized vs reference.
Timing bench_kernels(const std::vector<GraphSample>& samples, const GcnModel& model,
                     int iterations) {
    volatile double sink = 0.0; // defeat dead-code elimination

    const double t0 = now_seconds();
    for (int it = 0; it < iterations; ++it)
        for (const auto& s : samples) {
            const Forward f = forward(model, s);
            const Gradients g = backward(model, s, s.label);
            sink = sink + f.probs[0] + g.fc_bias[0];
        }
    const double t1 = now_seconds();
    for (int it = 0; it < iterations; ++it)
        for (const auto& s : samples) {
            const Forward f = reference::forward(model, s);
            const Gradients g = reference::backward(model, s, s.label);
            sink = sink + f.probs[0] + g.fc_bias[0];
        }
    const double t2 = now_seconds();

    const double per = 1e6 / (iterations * static_cast<double>(samples.size()));
    return {(t1 - t0) * per, (t2 - t1) * per};
}

void print_row(const std::string& name, const Timing& t) {
    std::printf("%-34s %12.1f %12.1f %9.2fx\n", name.c_str(), t.optimized_us,
                t.reference_us, t.reference_us / t.optimized_us);
}

} // namespace

int main(int argc, char** argv) {
    const int reps = argc > 1 ? std::max(1, std::atoi(argv[1])) : 1;
    Rng rng(1);

    std::printf("%-34s %12s %12s %10s\n", "workload (per sample)", "optimized/us",
                "reference/us", "speedup");

    // Dataset-shaped graphs: small and sparse.
    const Dataset circuits = generate(Suite::Continuous7, 40, 1, FeatureConfig::optimal());
    const GcnModel circuit_model = init_model(10, 32, 3, 7, 1);
    print_row("circuit graphs (N~11-17, d=10)",
              bench_kernels(circuits.samples, circuit_model, 20 * reps));

    // Larger synthetic graphs stress the propagation product.
    for (const int n : {64, 256}) {
        std::vector<GraphSample> batch;
        for (int i = 0; i < 8; ++i) batch.push_back(synthetic_sample(n, 16, rng));
        const GcnModel model = init_model(16, 32, 3, 4, 2);
        char name[64];
        std::snprintf(name, sizeof(name), "path graphs (N=%d, d=16)", n);
        print_row(name, bench_kernels(batch, model, (n == 64 ? 20 : 5) * reps));
    }

    // End-to-end training throughput by thread count.
    std::printf("\n%-34s %12s %14s\n", "training (3 epochs, 280 graphs)", "threads",
                "epochs/s");
    std::vector<int> thread_counts{1};
#ifdef _OPENMP
    if (omp_get_max_threads() > 1) thread_counts.push_back(omp_get_max_threads());
#endif
    for (const int threads : thread_counts) {
        TrainConfig cfg;
        cfg.epochs = 3 * reps;
        cfg.batch_size = 32;
        cfg.hidden_dim = 32;
        cfg.layers = 3;
        cfg.seed = 9;
        cfg.threads = threads;
        const double t0 = now_seconds();
        const auto trained = train(circuits, circuits, 7, cfg);
        const double dt = now_seconds() - t0;
        std::printf("%-34s %12d %14.2f\n",
                    trained.second.back().train_loss < 1e9 ? "" : "?", threads,
                    cfg.epochs / dt);
    }
    return 0;
}
