#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "circuitgraph/featurize.hpp"

namespace circuitgraph {

// ============================================================================
// Dataset generation
//
// Two suites of class templates:
//
//   Continuous7  7 source-driven resonant topologies (classes 0..6), the
//                middle two of which (series RLC with and without a parallel
//                load) are deliberately close relatives,
//   Switching6   buck / boost / buck-boost converters in continuous and
//                discontinuous conduction mode (classes 0..5).
//
// Each sample is drawn independently: component values log-uniform within
// per-class ranges, duty cycles uniform, and the excitation frequency as a
// log-uniform multiple of the template's resonance frequency (continuous
// suite) or log-uniform in a switching band (switching suite). Sample (c, i)
// is seeded by derive_seed(seed, c, i), so generation order and thread count
// never change the data.
// ============================================================================

enum class Suite { Continuous7, Switching6 };

Suite suite_from_string(const std::string& s);
const char* to_string(Suite suite);

struct ParamRange {
    double lo = 0.0;
    double hi = 0.0;
    bool log_scale = true;
};

using ParamMap = std::map<std::string, double>;

/// One circuit class: a netlist skeleton with {param} placeholders plus the
/// sampling ranges that fill them. Duty-cycle parameters are sampled so that
/// complementary (and virtual) branches sum to exactly 1.
struct ClassTemplate {
    std::string name;
    int class_id = -1;
    CircuitMode mode = CircuitMode::Continuous;
    std::string skeleton;
    std::vector<std::pair<std::string, ParamRange>> params; // sampled in order
    /// Computes derived parameters (excitation frequency, complementary and
    /// second DCM duty cycles, control phases) after sampling.
    std::function<void(ParamMap&)> finalize;
    /// Resonance frequency from sampled params; null for switching classes.
    std::function<double(const ParamMap&)> resonance;
    std::string dcm_inductor; // inductor bridged by the virtual switch (DCM only)
};

const std::vector<ClassTemplate>& suite_templates(Suite suite);

/// Instantiates one sample of a template: samples parameters, renders and
/// parses the skeleton, builds the bond graph (including switch cells and,
/// for DCM, the virtual switched junction) and stamps label, frequency and
/// resonance frequency.
BondGraph instantiate(const ClassTemplate& tmpl, std::uint64_t seed_for_sample);

/// Generates per_class bond graphs for every class of a suite, ordered by
/// (class_id, sample index).
std::vector<BondGraph> generate_graphs(Suite suite, int per_class, std::uint64_t seed);

struct Dataset {
    std::vector<GraphSample> samples;
    std::vector<std::string> class_names;
    NormalizationBase normalization;
    FeatureConfig feature_config;
    std::uint64_t seed = 0;

    int class_count() const { return static_cast<int>(class_names.size()); }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Generates a full dataset: graphs, then a normalization base fitted on the
/// whole generated corpus, then features. The base is fitted once here and
/// reused verbatim by split(); it is never refitted downstream.
Dataset generate(Suite suite, int per_class, std::uint64_t seed, const FeatureConfig& config);

/// Re-featurizes previously generated graphs under a different feature
/// configuration (fits a fresh base on the given corpus).
Dataset featurize_graphs(const std::vector<BondGraph>& graphs,
                         const std::vector<std::string>& class_names,
                         const FeatureConfig& config, std::uint64_t seed);

/// Stratified split: per class, floor(fraction * n_c + 0.5) samples go to the
/// train side (clamped to keep at least one sample on each side), after a
/// seeded per-class shuffle; both sides are then shuffled as wholes. The
/// normalization base and feature config are copied, never refitted. Throws
/// Error("DegenerateSplit") when a class cannot keep a sample on both sides.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed);

/// Writes a dataset as JSON lines: one header object (schema version, class
/// names, feature config, normalization base, seed), then one object per
/// sample with label, node count, row-major feature matrix and weighted edge
/// list (i < j). Throws Error("IoError") when the file cannot be written.
void save(const Dataset& dataset, const std::string& path);

/// Reads a dataset written by save(). Throws Error("IoError") for unreadable
/// or unparseable files and Error("SchemaVersionMismatch") for wrong schema
/// versions or samples inconsistent with the header's feature dimension.
Dataset load(const std::string& path);

} // namespace circuitgraph
