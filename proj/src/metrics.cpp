#include "circuitgraph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>

#include <json.hpp>

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

/// Runs the model over the dataset; fills predictions and one readout row
/// per sample (the embedding input).
void predict_all(const GcnModel& model, const Dataset& dataset, int threads,
                 std::vector<int>& predictions, Matrix& readouts) {
    const int n = static_cast<int>(dataset.samples.size());
    predictions.assign(n, -1);
    readouts.resize(n, model.hidden_dim());

    const int nthreads = threads > 0 ? threads : hw_max_threads();
    std::vector<Forward> slots(nthreads);
    std::exception_ptr failure;
#pragma omp parallel for schedule(static) num_threads(nthreads)
    for (int i = 0; i < n; ++i) {
        try {
            Forward& f = slots[hw_thread_id()];
            f = forward(model, dataset.samples[i]);
            predictions[i] = static_cast<int>(
                std::max_element(f.probs.begin(), f.probs.end()) - f.probs.begin());
            std::copy(f.readout.begin(), f.readout.end(), readouts.row(i));
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

void check_compatible(const GcnModel& model, const Dataset& dataset) {
    if (dataset.samples.empty()) throw Error("EmptyDataset", "nothing to evaluate");
    if (model.class_count() != dataset.class_count())
        throw Error("DimensionMismatch", "model and dataset disagree on class count");
    for (const auto& s : dataset.samples) {
        if (s.feature_dim() != model.input_dim())
            throw Error("DimensionMismatch", "sample feature dimension does not match");
        if (s.label < 0 || s.label >= model.class_count())
            throw Error("DimensionMismatch", "sample label outside the class range");
    }
}

// --- 2-D principal component projection ------------------------------------

/// Power iteration for the dominant eigenvector of a symmetric PSD matrix.
/// Deterministic: fixed start vector, tolerance 1e-9, at most 1000 rounds.
/// Returns the eigenvalue; the normalized eigenvector lands in v. A zero
/// matrix leaves v zeroed and returns 0.
double dominant_eigen(const Matrix& cov, std::vector<double>& v) {
    const int d = cov.rows();
    v.assign(d, 1.0 / std::sqrt(static_cast<double>(d)));
    std::vector<double> w(d);
    for (int round = 0; round < 1000; ++round) {
        for (int i = 0; i < d; ++i) {
            double acc = 0.0;
            const double* row = cov.row(i);
            for (int j = 0; j < d; ++j) acc += row[j] * v[j];
            w[i] = acc;
        }
        double norm = 0.0;
        for (double x : w) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            v.assign(d, 0.0);
            return 0.0;
        }
        double delta = 0.0;
        for (int i = 0; i < d; ++i) {
            w[i] /= norm;
            delta = std::max(delta, std::abs(w[i] - v[i]));
        }
        v.swap(w);
        if (delta < 1e-9) break;
    }
    // Rayleigh quotient of the converged direction.
    double lambda = 0.0;
    for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        const double* row = cov.row(i);
        for (int j = 0; j < d; ++j) acc += row[j] * v[j];
        lambda += v[i] * acc;
    }
    // Fix the sign: first loading of visible magnitude becomes positive.
    for (int i = 0; i < d; ++i) {
        if (std::abs(v[i]) > 1e-12) {
            if (v[i] < 0.0)
                for (double& x : v) x = -x;
            break;
        }
    }
    return lambda;
}

/// Projects rows of `readouts` onto their first two principal components.
std::vector<EmbeddedPoint> project_2d(const Matrix& readouts,
                                      const std::vector<int>& predictions,
                                      const std::vector<int>& labels, bool* degenerate) {
    const int n = readouts.rows();
    const int d = readouts.cols();
    std::vector<EmbeddedPoint> out(n);
    for (int i = 0; i < n; ++i) out[i] = {0.0, 0.0, labels[i], predictions[i]};

    // Identical rows mean zero variance by definition; detect that exactly up
    // front, because the rounded column mean may not reproduce the shared row
    // bit-for-bit and would otherwise leave ~1-ulp residue in the covariance.
    bool all_rows_equal = true;
    for (int i = 1; i < n && all_rows_equal; ++i)
        for (int j = 0; j < d; ++j)
            if (readouts(i, j) != readouts(0, j)) {
                all_rows_equal = false;
                break;
            }
    if (all_rows_equal) {
        if (degenerate) *degenerate = true;
        return out;
    }

    // Column-centered data and its covariance.
    std::vector<double> mean(d, 0.0);
    for (int i = 0; i < n; ++i) {
        const double* row = readouts.row(i);
        for (int j = 0; j < d; ++j) mean[j] += row[j];
    }
    for (double& m : mean) m /= n;

    Matrix centered(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) centered(i, j) = readouts(i, j) - mean[j];

    Matrix cov(d, d, 0.0);
    if (n > 1) {
        for (int i = 0; i < n; ++i) {
            const double* row = centered.row(i);
            for (int a = 0; a < d; ++a) {
                if (row[a] == 0.0) continue;
                double* crow = cov.row(a);
                for (int b = 0; b < d; ++b) crow[b] += row[a] * row[b];
            }
        }
        for (double& v : cov.data()) v /= (n - 1);
    }

    double trace = 0.0;
    for (int j = 0; j < d; ++j) trace += cov(j, j);
    if (!(trace > 0.0)) {
        if (degenerate) *degenerate = true;
        return out; // no variance anywhere: every point sits at the origin
    }
    if (degenerate) *degenerate = false;

    std::vector<double> v1, v2;
    const double lambda1 = dominant_eigen(cov, v1);
    for (int a = 0; a < d; ++a) {
        double* crow = cov.row(a);
        for (int b = 0; b < d; ++b) crow[b] -= lambda1 * v1[a] * v1[b];
    }
    dominant_eigen(cov, v2);

    for (int i = 0; i < n; ++i) {
        const double* row = centered.row(i);
        double x = 0.0, y = 0.0;
        for (int j = 0; j < d; ++j) {
            x += row[j] * v1[j];
            y += row[j] * v2[j];
        }
        out[i].x = x;
        out[i].y = y;
    }
    return out;
}

} // namespace

EvalReport metrics_from_confusion(const std::vector<std::vector<long>>& confusion,
                                  const std::vector<std::string>& class_names) {
    const int classes = static_cast<int>(confusion.size());
    if (classes == 0) throw Error("DimensionMismatch", "empty confusion matrix");
    for (const auto& row : confusion)
        if (static_cast<int>(row.size()) != classes)
            throw Error("DimensionMismatch", "confusion matrix must be square");

    EvalReport report;
    report.confusion = confusion;
    report.class_names = class_names;

    long correct = 0;
    long total = 0;
    report.per_class.resize(classes);
    double weighted_p = 0.0, weighted_r = 0.0, weighted_f = 0.0;
    for (int c = 0; c < classes; ++c) {
        long tp = confusion[c][c];
        long support = 0, predicted = 0;
        for (int k = 0; k < classes; ++k) {
            support += confusion[c][k];
            predicted += confusion[k][c];
        }
        correct += tp;
        total += support;

        ClassMetrics& m = report.per_class[c];
        m.support = support;
        m.precision_defined = predicted > 0;
        m.precision = predicted > 0 ? static_cast<double>(tp) / predicted : 0.0;
        m.recall = support > 0 ? static_cast<double>(tp) / support : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;

        report.macro_avg.precision += m.precision / classes;
        report.macro_avg.recall += m.recall / classes;
        report.macro_avg.f1 += m.f1 / classes;
        weighted_p += m.precision * support;
        weighted_r += m.recall * support;
        weighted_f += m.f1 * support;
    }
    if (total == 0) throw Error("DimensionMismatch", "confusion matrix has no samples");
    report.weighted_avg = {weighted_p / total, weighted_r / total, weighted_f / total};
    report.accuracy = static_cast<double>(correct) / total;
    return report;
}

EvalReport evaluate(const GcnModel& model, const Dataset& dataset, int threads) {
    check_compatible(model, dataset);

    std::vector<int> predictions;
    Matrix readouts;
    predict_all(model, dataset, threads, predictions, readouts);

    const int classes = model.class_count();
    std::vector<std::vector<long>> confusion(classes, std::vector<long>(classes, 0));
    std::vector<int> labels(dataset.samples.size());
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        labels[i] = dataset.samples[i].label;
        confusion[labels[i]][predictions[i]] += 1;
    }

    EvalReport report = metrics_from_confusion(confusion, dataset.class_names);
    report.embeddings = project_2d(readouts, predictions, labels, &report.degenerate_embedding);
    return report;
}

std::vector<EmbeddedPoint> embed_2d(const GcnModel& model, const Dataset& dataset,
                                    bool* degenerate, int threads) {
    check_compatible(model, dataset);
    std::vector<int> predictions;
    Matrix readouts;
    predict_all(model, dataset, threads, predictions, readouts);
    std::vector<int> labels(dataset.samples.size());
    for (std::size_t i = 0; i < dataset.samples.size(); ++i)
        labels[i] = dataset.samples[i].label;
    return project_2d(readouts, predictions, labels, degenerate);
}

std::string report_to_json(const EvalReport& report) {
    using nlohmann::json;
    json per_class = json::array();
    for (const auto& m : report.per_class)
        per_class.push_back({{"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1},
                             {"support", m.support},
                             {"precision_defined", m.precision_defined}});
    json embeddings = json::array();
    for (const auto& p : report.embeddings)
        embeddings.push_back(json{p.x, p.y, p.true_label, p.predicted_label});

    const json j{{"accuracy", report.accuracy},
                 {"confusion", report.confusion},
                 {"per_class", std::move(per_class)},
                 {"macro_avg",
                  {{"precision", report.macro_avg.precision},
                   {"recall", report.macro_avg.recall},
                   {"f1", report.macro_avg.f1}}},
                 {"weighted_avg",
                  {{"precision", report.weighted_avg.precision},
                   {"recall", report.weighted_avg.recall},
                   {"f1", report.weighted_avg.f1}}},
                 {"class_names", report.class_names},
                 {"degenerate_embedding", report.degenerate_embedding},
                 {"embeddings", std::move(embeddings)}};
    return j.dump();
}

std::string format_report(const EvalReport& report) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-24s %9s %9s %9s %9s\n", "class", "precision",
                  "recall", "f1", "support");
    out << buf;
    for (std::size_t c = 0; c < report.per_class.size(); ++c) {
        const auto& m = report.per_class[c];
        const std::string name =
            c < report.class_names.size()
                ? std::to_string(c) + " " + report.class_names[c]
                : std::to_string(c);
        std::snprintf(buf, sizeof(buf), "%-24s %9.2f %9.2f %9.2f %9ld\n", name.c_str(),
                      m.precision, m.recall, m.f1, m.support);
        out << buf;
    }
    long total = 0, correct = 0;
    for (std::size_t c = 0; c < report.per_class.size(); ++c) {
        total += report.per_class[c].support;
        correct += report.confusion[c][c];
    }
    std::snprintf(buf, sizeof(buf), "%-24s %9.2f %9.2f %9.2f %9ld\n", "macro avg",
                  report.macro_avg.precision, report.macro_avg.recall, report.macro_avg.f1,
                  total);
    out << buf;
    std::snprintf(buf, sizeof(buf), "%-24s %9.2f %9.2f %9.2f %9ld\n", "weighted avg",
                  report.weighted_avg.precision, report.weighted_avg.recall,
                  report.weighted_avg.f1, total);
    out << buf;
    std::snprintf(buf, sizeof(buf), "accuracy %.2f (%ld/%ld)\n", report.accuracy, correct,
                  total);
    out << buf;
    return out.str();
}

std::string embeddings_to_csv(const std::vector<EmbeddedPoint>& points) {
    std::ostringstream out;
    out << "x,y,true_label,predicted_label\n";
    char buf[96];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d,%d\n", p.x, p.y, p.true_label,
                      p.predicted_label);
        out << buf;
    }
    return out.str();
}

} // namespace circuitgraph
