#pragma once

#include <string>
#include <vector>

#include "circuitgraph/datagen.hpp"
#include "circuitgraph/gcn.hpp"

namespace circuitgraph {

// ============================================================================
// Evaluation: confusion matrix, per-class precision/recall/F1 with supports,
// macro and support-weighted averages, overall accuracy, and a 2-D principal
// component projection of the graph readout vectors for visual inspection.
// ============================================================================

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long support = 0;
    /// False when the class was never predicted (TP + FP == 0); precision is
    /// reported as 0 in that case.
    bool precision_defined = true;
};

struct AverageMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EmbeddedPoint {
    double x = 0.0;
    double y = 0.0;
    int true_label = -1;
    int predicted_label = -1;
};

struct EvalReport {
    std::vector<std::vector<long>> confusion; // [true][predicted]
    std::vector<ClassMetrics> per_class;
    AverageMetrics macro_avg;
    AverageMetrics weighted_avg;
    double accuracy = 0.0;
    std::vector<EmbeddedPoint> embeddings;
    bool degenerate_embedding = false;
    std::vector<std::string> class_names;
};

/// Computes per-class precision/recall/F1, macro and support-weighted
/// averages and the overall accuracy from a confusion matrix (rows = true
/// class, columns = predicted class). Embedding fields stay empty. Throws
/// Error("DimensionMismatch") on a non-square or empty matrix.
EvalReport metrics_from_confusion(const std::vector<std::vector<long>>& confusion,
                                  const std::vector<std::string>& class_names = {});

/// Runs the model over every sample and fills all metrics and the 2-D
/// embedding. Throws Error("DimensionMismatch") when model and dataset
/// disagree on feature dimension or class count, Error("EmptyDataset") on an
/// empty dataset.
EvalReport evaluate(const GcnModel& model, const Dataset& dataset, int threads = 0);

/// Projects every graph's readout vector onto the first two principal
/// components (power iteration, tolerance 1e-9, at most 1000 iterations per
/// component; component signs fixed by making the first nonzero loading
/// positive). A corpus with zero total variance maps every point to the
/// origin and sets *degenerate.
std::vector<EmbeddedPoint> embed_2d(const GcnModel& model, const Dataset& dataset,
                                    bool* degenerate = nullptr, int threads = 0);

/// JSON document mirroring EvalReport (raw, unrounded values).
std::string report_to_json(const EvalReport& report);

/// Human-readable table, metrics rounded to 2 decimals.
std::string format_report(const EvalReport& report);

/// CSV with header x,y,true_label,predicted_label.
std::string embeddings_to_csv(const std::vector<EmbeddedPoint>& points);

} // namespace circuitgraph
