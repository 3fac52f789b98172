#include "circuitgraph/featurize.hpp"

#include <cmath>

#include "circuitgraph/rng.hpp"

namespace circuitgraph {

namespace {

/// Normalization category of a node kind; junctions have none.
const char* category_key(BgNodeKind kind) {
    switch (kind) {
        case BgNodeKind::Se: return "V";
        case BgNodeKind::Sf: return "I";
        case BgNodeKind::Inertance: return "L";
        case BgNodeKind::Resistance: return "R";
        case BgNodeKind::Capacitance: return "C";
        default: return nullptr;
    }
}

double frequency_ratio(const BondGraph& g) {
    if (!(g.resonance_frequency > 0.0))
        throw Error("MissingResonance",
                    "normalized-frequency edges need a resonance frequency");
    return g.frequency / g.resonance_frequency;
}

/// For scaling-factor edges: element leaf node owning each edge, via the
/// element's series junction. Index: junction node id -> leaf node id.
std::vector<int> leaf_of_junction(const BondGraph& g) {
    std::vector<int> map(g.nodes.size(), -1);
    for (const auto& e : g.edges) {
        const BgNodeKind ka = g.nodes[e.a].kind;
        const BgNodeKind kb = g.nodes[e.b].kind;
        if (ka == BgNodeKind::Junction1 && !is_junction(kb)) map[e.a] = e.b;
        else if (kb == BgNodeKind::Junction1 && !is_junction(ka)) map[e.b] = e.a;
    }
    return map;
}

} // namespace

const char* to_string(EdgeMode mode) {
    switch (mode) {
        case EdgeMode::Ones: return "ones";
        case EdgeMode::Frequency: return "frequency";
        case EdgeMode::NormalizedFrequency: return "normalized-frequency";
        case EdgeMode::ScalingFactor: return "scaling-factor";
    }
    return "?";
}

const char* to_string(CapRepr repr) {
    switch (repr) {
        case CapRepr::Raw: return "raw";
        case CapRepr::Inverse: return "inverse";
        case CapRepr::NegativeInverse: return "negative-inverse";
    }
    return "?";
}

const char* to_string(IndRepr repr) {
    switch (repr) {
        case IndRepr::Raw: return "raw";
        case IndRepr::Inverse: return "inverse";
    }
    return "?";
}

EdgeMode edge_mode_from_string(const std::string& s) {
    if (s == "ones") return EdgeMode::Ones;
    if (s == "frequency") return EdgeMode::Frequency;
    if (s == "normalized-frequency") return EdgeMode::NormalizedFrequency;
    if (s == "scaling-factor") return EdgeMode::ScalingFactor;
    throw Error("UnknownEnum", "unknown edge mode '" + s + "'");
}

CapRepr cap_repr_from_string(const std::string& s) {
    if (s == "raw") return CapRepr::Raw;
    if (s == "inverse") return CapRepr::Inverse;
    if (s == "negative-inverse") return CapRepr::NegativeInverse;
    throw Error("UnknownEnum", "unknown capacitance representation '" + s + "'");
}

IndRepr ind_repr_from_string(const std::string& s) {
    if (s == "raw") return IndRepr::Raw;
    if (s == "inverse") return IndRepr::Inverse;
    throw Error("UnknownEnum", "unknown inductance representation '" + s + "'");
}

std::uint64_t FeatureConfig::fingerprint() const {
    std::uint64_t h = derive_seed(0x6663666721ULL, static_cast<std::uint64_t>(edge_mode),
                                  static_cast<std::uint64_t>(cap_repr));
    h = derive_seed(h, static_cast<std::uint64_t>(ind_repr),
                    (include_phase_column ? 2u : 0u) | (include_frequency_column ? 1u : 0u));
    return h;
}

double NormalizationBase::get(const std::string& key) const {
    const auto it = max_abs.find(key);
    if (it == max_abs.end())
        throw Error("MissingCategoryInBase", "no normalization entry for '" + key + "'");
    return it->second;
}

std::array<double, 9> one_hot(BgNodeKind kind) {
    std::array<double, 9> out{};
    out[static_cast<int>(kind)] = 1.0;
    return out;
}

double transform_value(BgNodeKind kind, double value, const FeatureConfig& config) {
    const bool inverse =
        (kind == BgNodeKind::Capacitance && config.cap_repr != CapRepr::Raw) ||
        (kind == BgNodeKind::Inertance && config.ind_repr == IndRepr::Inverse);
    if (inverse && value == 0.0)
        throw Error("DivisionByZero",
                    std::string("inverse representation of zero-valued ") + to_string(kind));
    switch (kind) {
        case BgNodeKind::Capacitance:
            switch (config.cap_repr) {
                case CapRepr::Raw: return value;
                case CapRepr::Inverse: return 1.0 / value;
                case CapRepr::NegativeInverse: return -1.0 / value;
            }
            break;
        case BgNodeKind::Inertance:
            return config.ind_repr == IndRepr::Inverse ? 1.0 / value : value;
        default:
            break;
    }
    return value;
}

NormalizationBase fit_normalization(const std::vector<BondGraph>& graphs,
                                    const FeatureConfig& config) {
    if (graphs.empty()) throw Error("EmptyDataset", "cannot fit normalization on no graphs");

    std::map<std::string, double> m;
    m["phase"] = 0.0;
    m["freq"] = 0.0;
    if (config.edge_mode != EdgeMode::Ones) m["edge"] = 0.0;

    for (const auto& g : graphs) {
        m["freq"] = std::max(m["freq"], std::abs(g.frequency));
        for (const auto& node : g.nodes) {
            m["phase"] = std::max(m["phase"], std::abs(node.phase));
            if (const char* key = category_key(node.kind)) {
                const double t = std::abs(transform_value(node.kind, node.value, config));
                auto it = m.find(key);
                if (it == m.end()) m.emplace(key, t);
                else it->second = std::max(it->second, t);
                if (config.edge_mode == EdgeMode::ScalingFactor)
                    m["edge"] = std::max(m["edge"], t);
            }
        }
        if (config.edge_mode == EdgeMode::Frequency)
            m["edge"] = std::max(m["edge"], std::abs(g.frequency));
        else if (config.edge_mode == EdgeMode::NormalizedFrequency)
            m["edge"] = std::max(m["edge"], frequency_ratio(g));
    }

    // A category whose maximum is zero normalizes by 1 so division stays safe.
    for (auto& [key, value] : m)
        if (value == 0.0) value = 1.0;
    return NormalizationBase{std::move(m)};
}

GraphSample featurize(const BondGraph& graph, const NormalizationBase& base,
                      const FeatureConfig& config) {
    const int n = static_cast<int>(graph.nodes.size());
    const int dim = config.feature_dim();
    const int value_col = 9;
    const int phase_col = config.include_phase_column ? 10 : -1;
    const int freq_col =
        config.include_frequency_column ? (config.include_phase_column ? 11 : 10) : -1;

    GraphSample sample;
    sample.label = graph.class_label;
    sample.x.resize(n, dim);
    sample.x.fill(0.0);

    for (const auto& node : graph.nodes) {
        double* row = sample.x.row(node.id);
        const auto oh = one_hot(node.kind);
        for (int k = 0; k < 9; ++k) row[k] = oh[k];
        if (const char* key = category_key(node.kind)) {
            // In scaling-factor mode element values live on the bonds instead.
            if (config.edge_mode != EdgeMode::ScalingFactor)
                row[value_col] = transform_value(node.kind, node.value, config) / base.get(key);
        }
        if (phase_col >= 0) row[phase_col] = node.phase / base.get("phase");
        if (freq_col >= 0 && (node.kind == BgNodeKind::Se || node.kind == BgNodeKind::Sf))
            row[freq_col] = graph.frequency / base.get("freq");
    }

    std::vector<int> owner;
    if (config.edge_mode == EdgeMode::ScalingFactor) owner = leaf_of_junction(graph);

    sample.adjacency.resize(n, n);
    sample.adjacency.fill(0.0);
    for (const auto& e : graph.edges) {
        double w = 1.0;
        // Bonds of switched junctions always keep their duty-cycle weight.
        if (is_switched_junction(graph.nodes[e.a].kind) ||
            is_switched_junction(graph.nodes[e.b].kind)) {
            w = e.weight;
        } else {
            switch (config.edge_mode) {
                case EdgeMode::Ones:
                    w = 1.0;
                    break;
                case EdgeMode::Frequency:
                    w = graph.frequency / base.get("edge");
                    break;
                case EdgeMode::NormalizedFrequency:
                    w = frequency_ratio(graph) / base.get("edge");
                    break;
                case EdgeMode::ScalingFactor: {
                    const int j1 = graph.nodes[e.a].kind == BgNodeKind::Junction1 ? e.a : e.b;
                    const int leaf = owner.empty() ? -1 : owner[j1];
                    if (leaf < 0)
                        throw Error("InternalError", "edge without an owning element");
                    const auto& el = graph.nodes[leaf];
                    w = std::abs(transform_value(el.kind, el.value, config)) /
                        base.get("edge");
                    break;
                }
            }
        }
        sample.adjacency(e.a, e.b) = w;
        sample.adjacency(e.b, e.a) = w;
    }
    return sample;
}

} // namespace circuitgraph
