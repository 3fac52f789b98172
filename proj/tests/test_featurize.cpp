#include <doctest.h>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "circuitgraph/bondgraph.hpp"
#include "circuitgraph/featurize.hpp"
#include "circuitgraph/netlist.hpp"
#include "circuitgraph/rng.hpp"
#include "support/random_circuits.hpp"

using namespace circuitgraph;

namespace {

const char* kSeriesRlc =
    "V1 1 0 10\nR1 1 2 50\nL1 2 3 1e-3\nC1 3 0 1e-9\n.freq 1e5\n";

const char* kBuckCcm =
    "V1 1 0 24\nS1 1 2 0.4\nS2 2 0 0.6\nL1 2 3 1e-4\nC1 3 0 1e-5\nR1 3 0 10\n"
    ".freq 1e5\n.mode CCM\n.phase S2 3.141592653589793\n";

int onehot_index(const GraphSample& s, int row) {
    for (int k = 0; k < 9; ++k)
        if (s.x(row, k) == 1.0) return k;
    return -1;
}

} // namespace

TEST_CASE("one-hot encoding is injective with the documented positions") {
    const BgNodeKind kinds[] = {BgNodeKind::Se,         BgNodeKind::Sf,
                                BgNodeKind::Inertance,  BgNodeKind::Resistance,
                                BgNodeKind::Capacitance, BgNodeKind::Junction1,
                                BgNodeKind::Junction0,  BgNodeKind::Junction1s,
                                BgNodeKind::Junction0s};
    std::set<int> positions;
    for (int i = 0; i < 9; ++i) {
        const auto v = one_hot(kinds[i]);
        int hot = -1;
        double sum = 0.0;
        for (int k = 0; k < 9; ++k) {
            sum += v[k];
            if (v[k] == 1.0) hot = k;
        }
        CHECK(sum == 1.0);
        CHECK(hot == i); // declaration order is the one-hot order
        positions.insert(hot);
    }
    CHECK(positions.size() == 9);
    // Resistance sits at index 3.
    CHECK(one_hot(BgNodeKind::Resistance)[3] == 1.0);
}

TEST_CASE("value transformations") {
    FeatureConfig cfg;
    cfg.cap_repr = CapRepr::Raw;
    cfg.ind_repr = IndRepr::Raw;
    CHECK(transform_value(BgNodeKind::Capacitance, 1e-9, cfg) == 1e-9);
    CHECK(transform_value(BgNodeKind::Inertance, 1e-3, cfg) == 1e-3);

    // Compare against the same division expression: 1e-9 is not exactly
    // representable in binary64, so 1.0 / 1e-9 differs from the literal 1e9
    // by one ulp.
    cfg.cap_repr = CapRepr::Inverse;
    CHECK(transform_value(BgNodeKind::Capacitance, 1e-9, cfg) == 1.0 / 1e-9);
    cfg.cap_repr = CapRepr::NegativeInverse;
    CHECK(transform_value(BgNodeKind::Capacitance, 1e-9, cfg) == -1.0 / 1e-9);
    cfg.ind_repr = IndRepr::Inverse;
    CHECK(transform_value(BgNodeKind::Inertance, 1e-3, cfg) == 1.0 / 1e-3);

    // Non-reactive kinds pass through untouched.
    CHECK(transform_value(BgNodeKind::Resistance, 50.0, cfg) == 50.0);
    CHECK(transform_value(BgNodeKind::Se, 10.0, cfg) == 10.0);

    try {
        transform_value(BgNodeKind::Capacitance, 0.0, cfg);
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.code() == "DivisionByZero");
    }
}

TEST_CASE("normalization base records per-category maxima of |transform|") {
    const BondGraph g1 = to_bond_graph(parse_netlist(kSeriesRlc));
    const BondGraph g2 = to_bond_graph(
        parse_netlist("V1 1 0 40\nR1 1 2 10\nL1 2 3 4e-3\nC1 3 0 1e-8\n.freq 2e5\n"));

    FeatureConfig cfg; // inverse C, raw L
    const NormalizationBase base = fit_normalization({g1, g2}, cfg);

    CHECK(base.get("V") == 40.0);
    CHECK(base.get("R") == 50.0);
    CHECK(base.get("L") == 4e-3);
    CHECK(base.get("C") == 1.0 / 1e-9); // 1 / 1e-9 dominates 1 / 1e-8
    CHECK(base.get("freq") == 2e5);
    CHECK(base.get("phase") == 1.0); // no phases seen -> safe divisor

    try {
        base.get("edge"); // ones mode records no edge category
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.code() == "MissingCategoryInBase");
    }

    try {
        fit_normalization({}, cfg);
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.code() == "EmptyDataset");
    }
}

TEST_CASE("featurize: rows, value column and all-ones adjacency") {
    const Circuit c = parse_netlist(kSeriesRlc);
    const BondGraph g = to_bond_graph(c);
    FeatureConfig cfg;
    const NormalizationBase base = fit_normalization({g}, cfg);
    const GraphSample s = featurize(g, base, cfg);

    CHECK(s.node_count() == static_cast<int>(g.nodes.size()));
    CHECK(s.feature_dim() == 10);
    CHECK(cfg.feature_dim() == 10);

    for (int i = 0; i < s.node_count(); ++i) {
        const auto& node = g.nodes[static_cast<std::size_t>(i)];
        CHECK(onehot_index(s, i) == static_cast<int>(node.kind));
        if (is_junction(node.kind)) {
            CHECK(s.x(i, 9) == 0.0); // junctions carry no value
        }
    }

    // Sole elements of their category normalize to exactly 1.
    const int res = g.find_node("R1", BgNodeKind::Resistance);
    CHECK(s.x(res, 9) == 1.0);
    const int cap = g.find_node("C1", BgNodeKind::Capacitance);
    CHECK(s.x(cap, 9) == 1.0); // inverse C then corpus max of itself

    // Adjacency is symmetric with a zero diagonal and {0,1} entries.
    for (int i = 0; i < s.node_count(); ++i) {
        CHECK(s.adjacency(i, i) == 0.0);
        for (int j = 0; j < s.node_count(); ++j) {
            CHECK(s.adjacency(i, j) == s.adjacency(j, i));
            CHECK((s.adjacency(i, j) == 0.0 || s.adjacency(i, j) == 1.0));
        }
    }

    // Eight three-bond stars -> 12 undirected edges -> 24 nonzero entries.
    int nonzero = 0;
    for (const double v : s.adjacency.data()) nonzero += v != 0.0 ? 1 : 0;
    CHECK(nonzero == 24);
}

TEST_CASE("featurize: values are scaled into [-1, 1] by the corpus maxima") {
    const BondGraph g1 = to_bond_graph(parse_netlist(kSeriesRlc));
    const BondGraph g2 = to_bond_graph(
        parse_netlist("V1 1 0 40\nR1 1 2 10\nL1 2 3 4e-3\nC1 3 0 1e-8\n.freq 2e5\n"));
    FeatureConfig cfg;
    const NormalizationBase base = fit_normalization({g1, g2}, cfg);

    const GraphSample s1 = featurize(g1, base, cfg);
    const int r1 = g1.find_node("R1", BgNodeKind::Resistance);
    CHECK(s1.x(r1, 9) == doctest::Approx(50.0 / 50.0));
    const int v1 = g1.find_node("V1", BgNodeKind::Se);
    CHECK(s1.x(v1, 9) == doctest::Approx(10.0 / 40.0));

    const GraphSample s2 = featurize(g2, base, cfg);
    const int c2 = g2.find_node("C1", BgNodeKind::Capacitance);
    CHECK(s2.x(c2, 9) == doctest::Approx(1e8 / 1e9));
}

TEST_CASE("negative inverse capacitance lands in [-1, 0)") {
    const BondGraph g1 = to_bond_graph(parse_netlist(kSeriesRlc));
    const BondGraph g2 = to_bond_graph(
        parse_netlist("V1 1 0 40\nR1 1 2 10\nL1 2 3 4e-3\nC1 3 0 1e-8\n.freq 2e5\n"));
    FeatureConfig cfg;
    cfg.cap_repr = CapRepr::NegativeInverse;
    const NormalizationBase base = fit_normalization({g1, g2}, cfg);
    for (const auto& g : {g1, g2}) {
        const GraphSample s = featurize(g, base, cfg);
        const int cap = g.find_node("C1", BgNodeKind::Capacitance);
        CHECK(s.x(cap, 9) < 0.0);
        CHECK(s.x(cap, 9) >= -1.0);
    }
}

TEST_CASE("frequency edge mode scales bonds by corpus-max frequency") {
    const BondGraph g1 = to_bond_graph(parse_netlist(kSeriesRlc));           // 1e5
    const BondGraph g2 = to_bond_graph(
        parse_netlist("V1 1 0 40\nR1 1 2 10\nL1 2 3 4e-3\nC1 3 0 1e-8\n.freq 2e5\n"));
    FeatureConfig cfg;
    cfg.edge_mode = EdgeMode::Frequency;
    const NormalizationBase base = fit_normalization({g1, g2}, cfg);
    CHECK(base.get("edge") == 2e5);

    const GraphSample s1 = featurize(g1, base, cfg);
    const GraphSample s2 = featurize(g2, base, cfg);
    auto nonzero_weights = [](const GraphSample& s) {
        std::set<double> w;
        for (const double v : s.adjacency.data())
            if (v != 0.0) w.insert(v);
        return w;
    };
    CHECK(nonzero_weights(s1) == std::set<double>{0.5});
    CHECK(nonzero_weights(s2) == std::set<double>{1.0});
}

TEST_CASE("normalized-frequency edge mode uses the resonance ratio") {
    BondGraph g1 = to_bond_graph(parse_netlist(kSeriesRlc));
    BondGraph g2 = to_bond_graph(
        parse_netlist("V1 1 0 40\nR1 1 2 10\nL1 2 3 4e-3\nC1 3 0 1e-8\n.freq 2e5\n"));
    FeatureConfig cfg;
    cfg.edge_mode = EdgeMode::NormalizedFrequency;

    try {
        fit_normalization({g1}, cfg); // no resonance recorded
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.code() == "MissingResonance");
    }

    g1.resonance_frequency = 5e4; // ratio 2
    g2.resonance_frequency = 4e5; // ratio 0.5
    const NormalizationBase base = fit_normalization({g1, g2}, cfg);
    CHECK(base.get("edge") == 2.0);
    const GraphSample s2 = featurize(g2, base, cfg);
    std::set<double> w;
    for (const double v : s2.adjacency.data())
        if (v != 0.0) w.insert(v);
    CHECK(w == std::set<double>{0.25});
}

TEST_CASE("scaling-factor edge mode moves element values onto their bonds") {
    const BondGraph g = to_bond_graph(parse_netlist(kSeriesRlc));
    FeatureConfig cfg;
    cfg.edge_mode = EdgeMode::ScalingFactor;
    const NormalizationBase base = fit_normalization({g}, cfg);
    const GraphSample s = featurize(g, base, cfg);

    // Value column is all zero in this mode.
    for (int i = 0; i < s.node_count(); ++i) CHECK(s.x(i, 9) == 0.0);

    // The element with the largest |transform| carries weight exactly 1 on
    // its three bonds; every bond weight is in (0, 1].
    // Transforms: V 10, R 50, L 1e-3, C (inverse) 1e9 -> edge base 1e9.
    const int cap_j = g.find_node("C1", BgNodeKind::Junction1);
    const int leaf = g.find_node("C1", BgNodeKind::Capacitance);
    CHECK(s.adjacency(cap_j, leaf) == 1.0);

    const int res_j = g.find_node("R1", BgNodeKind::Junction1);
    const int res = g.find_node("R1", BgNodeKind::Resistance);
    CHECK(s.adjacency(res_j, res) == doctest::Approx(50.0 / 1e9));

    for (const double v : s.adjacency.data())
        if (v != 0.0) {
            CHECK(v > 0.0);
            CHECK(v <= 1.0);
        }
}

TEST_CASE("switched-junction bonds keep duty weights in every edge mode") {
    const BondGraph g = to_bond_graph(parse_netlist(kBuckCcm));
    for (const EdgeMode mode : {EdgeMode::Ones, EdgeMode::Frequency,
                                EdgeMode::ScalingFactor}) {
        FeatureConfig cfg;
        cfg.edge_mode = mode;
        const NormalizationBase base = fit_normalization({g}, cfg);
        const GraphSample s = featurize(g, base, cfg);
        const int j1 = g.find_node("S1", BgNodeKind::Junction1s);
        const int j2 = g.find_node("S2", BgNodeKind::Junction1s);
        for (int n : g.neighbors(j1)) CHECK(s.adjacency(j1, n) == 0.4);
        for (int n : g.neighbors(j2)) CHECK(s.adjacency(j2, n) == 0.6);
    }
}

TEST_CASE("phase and frequency columns") {
    const BondGraph g = to_bond_graph(parse_netlist(kBuckCcm));
    FeatureConfig cfg;
    cfg.include_phase_column = true;
    cfg.include_frequency_column = true;
    CHECK(cfg.feature_dim() == 12);

    const NormalizationBase base = fit_normalization({g}, cfg);
    CHECK(base.get("phase") == 3.141592653589793);
    const GraphSample s = featurize(g, base, cfg);

    const int s2 = g.find_node("S2", BgNodeKind::Sf);
    CHECK(s.x(s2, 10) == 1.0); // phase pi normalized by corpus max pi
    const int s1 = g.find_node("S1", BgNodeKind::Sf);
    CHECK(s.x(s1, 10) == 0.0);

    // Frequency column marks source rows (real and control) only.
    const int v1 = g.find_node("V1", BgNodeKind::Se);
    CHECK(s.x(v1, 11) == 1.0); // 1e5 / corpus max 1e5
    CHECK(s.x(s1, 11) == 1.0);
    const int r1 = g.find_node("R1", BgNodeKind::Resistance);
    CHECK(s.x(r1, 11) == 0.0);
    const int net0 = g.find_node("0", BgNodeKind::Junction0);
    CHECK(s.x(net0, 11) == 0.0);
}

TEST_CASE("missing category in base is rejected") {
    const BondGraph with_cap = to_bond_graph(parse_netlist(kSeriesRlc));
    const BondGraph no_cap =
        to_bond_graph(parse_netlist("V1 1 0 10\nR1 1 2 50\nL1 2 0 1e-3\n"));
    FeatureConfig cfg;
    const NormalizationBase base = fit_normalization({no_cap}, cfg);
    try {
        featurize(with_cap, base, cfg);
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(e.code() == "MissingCategoryInBase");
    }
}

TEST_CASE("bounds property: random circuits and configurations") {
    Rng rng(424242);
    const EdgeMode modes[] = {EdgeMode::Ones, EdgeMode::Frequency,
                              EdgeMode::NormalizedFrequency, EdgeMode::ScalingFactor};
    const CapRepr caps[] = {CapRepr::Raw, CapRepr::Inverse, CapRepr::NegativeInverse};
    const IndRepr inds[] = {IndRepr::Raw, IndRepr::Inverse};

    for (int trial = 0; trial < 100; ++trial) {
        std::vector<BondGraph> graphs;
        for (int k = 0; k < 3; ++k) {
            BondGraph g = to_bond_graph(testsupport::random_continuous_circuit(rng));
            g.resonance_frequency = rng.log_uniform(1.0, 1e6);
            graphs.push_back(std::move(g));
        }
        FeatureConfig cfg;
        cfg.edge_mode = modes[rng.uniform_int(4)];
        cfg.cap_repr = caps[rng.uniform_int(3)];
        cfg.ind_repr = inds[rng.uniform_int(2)];
        cfg.include_phase_column = rng.uniform_int(2) == 1;
        cfg.include_frequency_column = rng.uniform_int(2) == 1;

        const NormalizationBase base = fit_normalization(graphs, cfg);
        for (const auto& g : graphs) {
            const GraphSample s = featurize(g, base, cfg);
            CHECK(s.feature_dim() == cfg.feature_dim());
            for (const double v : s.x.data()) {
                CHECK(v <= 1.0);
                CHECK(v >= -1.0);
            }
            for (int i = 0; i < s.node_count(); ++i)
                for (int j = 0; j < s.node_count(); ++j) {
                    CHECK(s.adjacency(i, j) == s.adjacency(j, i));
                    CHECK(s.adjacency(i, j) >= 0.0);
                    CHECK(s.adjacency(i, j) <= 1.0);
                }
        }
    }
}

TEST_CASE("config fingerprints separate configurations") {
    std::set<std::uint64_t> prints;
    int combos = 0;
    for (const EdgeMode m : {EdgeMode::Ones, EdgeMode::Frequency,
                             EdgeMode::NormalizedFrequency, EdgeMode::ScalingFactor})
        for (const CapRepr c : {CapRepr::Raw, CapRepr::Inverse, CapRepr::NegativeInverse})
            for (const IndRepr l : {IndRepr::Raw, IndRepr::Inverse})
                for (const bool ph : {false, true})
                    for (const bool fr : {false, true}) {
                        FeatureConfig cfg;
                        cfg.edge_mode = m;
                        cfg.cap_repr = c;
                        cfg.ind_repr = l;
                        cfg.include_phase_column = ph;
                        cfg.include_frequency_column = fr;
                        prints.insert(cfg.fingerprint());
                        ++combos;
                    }
    CHECK(combos == 96);
    CHECK(prints.size() == 96);
    CHECK(FeatureConfig{}.fingerprint() == FeatureConfig::optimal().fingerprint());
}

TEST_CASE("string round-trips for the enums") {
    for (const EdgeMode m : {EdgeMode::Ones, EdgeMode::Frequency,
                             EdgeMode::NormalizedFrequency, EdgeMode::ScalingFactor})
        CHECK(edge_mode_from_string(to_string(m)) == m);
    for (const CapRepr c : {CapRepr::Raw, CapRepr::Inverse, CapRepr::NegativeInverse})
        CHECK(cap_repr_from_string(to_string(c)) == c);
    for (const IndRepr l : {IndRepr::Raw, IndRepr::Inverse})
        CHECK(ind_repr_from_string(to_string(l)) == l);
    CHECK_THROWS_AS(edge_mode_from_string("bogus"), Error);
    CHECK_THROWS_AS(cap_repr_from_string("bogus"), Error);
    CHECK_THROWS_AS(ind_repr_from_string("bogus"), Error);
}
