#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "circuitgraph/bondgraph.hpp"
#include "circuitgraph/linalg.hpp"

namespace circuitgraph {

// ============================================================================
// Feature extraction
//
// Each bond-graph node becomes one feature row: a 9-way one-hot over the node
// kinds (order: Se, Sf, I, R, C, 1, 0, 1s, 0s) followed by one normalized
// element-value column and, optionally, a control-phase column and a
// frequency column. Values are normalized per element category by the
// maximum absolute transformed value over a reference corpus, so every
// feature lands in [-1, 1] and edge weights in [0, 1].
// ============================================================================

/// How edge weights of non-switched bonds are chosen.
enum class EdgeMode {
    Ones,                // all-ones adjacency
    Frequency,           // source frequency, normalized by the corpus maximum
    NormalizedFrequency, // frequency / resonance frequency, then corpus-max scaled
    ScalingFactor        // per-element normalized |value| on that element's bonds
};

/// Transformation applied to capacitance values before normalization.
enum class CapRepr { Raw, Inverse, NegativeInverse };

/// Transformation applied to inductance values before normalization.
enum class IndRepr { Raw, Inverse };

struct FeatureConfig {
    EdgeMode edge_mode = EdgeMode::Ones;
    CapRepr cap_repr = CapRepr::Inverse;
    IndRepr ind_repr = IndRepr::Raw;
    bool include_phase_column = false;
    bool include_frequency_column = false;

    /// The configuration that separates classes best: all-ones adjacency,
    /// inverse capacitance, raw inductance.
    static FeatureConfig optimal() { return FeatureConfig{}; }

    int feature_dim() const {
        return 10 + (include_phase_column ? 1 : 0) + (include_frequency_column ? 1 : 0);
    }

    /// Stable fingerprint; stored in model checkpoints so evaluation can
    /// reject datasets featurized under a different configuration.
    std::uint64_t fingerprint() const;

    friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

const char* to_string(EdgeMode mode);
const char* to_string(CapRepr repr);
const char* to_string(IndRepr repr);
EdgeMode edge_mode_from_string(const std::string& s);
CapRepr cap_repr_from_string(const std::string& s);
IndRepr ind_repr_from_string(const std::string& s);

/// Per-category maximum absolute transformed values used for normalization.
/// Keys: element categories "V", "I", "L", "R", "C", plus "phase", "freq" and
/// (for non-ones edge modes) "edge". A category whose maximum would be zero
/// stores 1.0 so that division is always safe.
struct NormalizationBase {
    std::map<std::string, double> max_abs;

    double get(const std::string& key) const; // throws Error("MissingCategoryInBase")

    friend bool operator==(const NormalizationBase&, const NormalizationBase&) = default;
};

/// One featurized graph: node features X (N x d), symmetric weighted
/// adjacency A (N x N, zero diagonal), and the class label.
struct GraphSample {
    Matrix x;
    Matrix adjacency;
    int label = -1;

    int node_count() const { return x.rows(); }
    int feature_dim() const { return x.cols(); }

    friend bool operator==(const GraphSample&, const GraphSample&) = default;
};

/// One-hot kind encoding; injective over the 9 node kinds.
std::array<double, 9> one_hot(BgNodeKind kind);

/// Value transformation before normalization: capacitors and inductors go
/// through their configured representation, everything else passes through.
/// Throws Error("DivisionByZero") for inverse representations of value 0.
double transform_value(BgNodeKind kind, double value, const FeatureConfig& config);

/// Scans a corpus and records per-category maxima. Throws
/// Error("EmptyDataset") on an empty corpus and
/// Error("MissingResonance") when edge_mode is NormalizedFrequency and some
/// graph has no resonance frequency.
NormalizationBase fit_normalization(const std::vector<BondGraph>& graphs,
                                    const FeatureConfig& config);

/// Builds the feature matrix and adjacency for one graph against a fitted
/// base. Bonds of switched junctions keep their duty-cycle weights in every
/// edge mode. Throws Error("MissingCategoryInBase") when the graph contains
/// an element category the base has no entry for.
GraphSample featurize(const BondGraph& graph, const NormalizationBase& base,
                      const FeatureConfig& config);

} // namespace circuitgraph
