#include "circuitgraph/bondgraph.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace circuitgraph {

namespace {

BgNodeKind element_node_kind(ElementKind kind) {
    switch (kind) {
        case ElementKind::VoltageSource: return BgNodeKind::Se;
        case ElementKind::CurrentSource: return BgNodeKind::Sf;
        case ElementKind::Resistor: return BgNodeKind::Resistance;
        case ElementKind::Inductor: return BgNodeKind::Inertance;
        case ElementKind::Capacitor: return BgNodeKind::Capacitance;
        case ElementKind::Switch: break; // switches become whole cells, not leaves
    }
    throw Error("InternalError", "no leaf node kind for element kind");
}

int add_node(BondGraph& g, BgNodeKind kind, const std::string& name, double value = 0.0,
             double phase = 0.0) {
    const int id = static_cast<int>(g.nodes.size());
    g.nodes.push_back({id, kind, name, value, phase});
    return id;
}

void add_edge(BondGraph& g, int a, int b, double weight) {
    if (a > b) std::swap(a, b);
    g.edges.push_back({a, b, weight});
}

} // namespace

const char* to_string(BgNodeKind kind) {
    switch (kind) {
        case BgNodeKind::Se: return "Se";
        case BgNodeKind::Sf: return "Sf";
        case BgNodeKind::Inertance: return "I";
        case BgNodeKind::Resistance: return "R";
        case BgNodeKind::Capacitance: return "C";
        case BgNodeKind::Junction1: return "1";
        case BgNodeKind::Junction0: return "0";
        case BgNodeKind::Junction1s: return "1s";
        case BgNodeKind::Junction0s: return "0s";
    }
    return "?";
}

bool is_junction(BgNodeKind kind) {
    return kind == BgNodeKind::Junction1 || kind == BgNodeKind::Junction0 ||
           kind == BgNodeKind::Junction1s || kind == BgNodeKind::Junction0s;
}

bool is_switched_junction(BgNodeKind kind) {
    return kind == BgNodeKind::Junction1s || kind == BgNodeKind::Junction0s;
}

int BondGraph::degree(int node_id) const {
    int d = 0;
    for (const auto& e : edges)
        if (e.a == node_id || e.b == node_id) ++d;
    return d;
}

std::vector<int> BondGraph::neighbors(int node_id) const {
    std::vector<int> out;
    for (const auto& e : edges) {
        if (e.a == node_id) out.push_back(e.b);
        else if (e.b == node_id) out.push_back(e.a);
    }
    return out;
}

int BondGraph::find_node(const std::string& name, BgNodeKind kind) const {
    for (const auto& n : nodes)
        if (n.kind == kind && n.name == name) return n.id;
    return -1;
}

BondGraph to_bond_graph(const Circuit& circuit) {
    auto violations = validate(circuit);
    if (!violations.empty()) throw InvalidCircuit(std::move(violations));

    BondGraph g;
    g.mode = circuit.mode;
    g.class_label = circuit.class_label;
    g.frequency = circuit.frequency;

    // One 0-junction per net, in natural net order (ids 0 .. |nets|-1).
    std::map<std::string, int> junction_of_net;
    for (const auto& net : circuit.nets)
        junction_of_net.emplace(net, add_node(g, BgNodeKind::Junction0, net));

    // Per non-switch element: a series 1-junction plus the element leaf.
    for (const auto& e : circuit.elements) {
        if (e.kind == ElementKind::Switch) continue;
        const int j1 = add_node(g, BgNodeKind::Junction1, e.name);
        const int leaf = add_node(g, element_node_kind(e.kind), e.name, e.value);
        add_edge(g, j1, leaf, 1.0);
        add_edge(g, j1, junction_of_net.at(e.net_pos), 1.0);
        add_edge(g, j1, junction_of_net.at(e.net_neg), 1.0);
    }

    if (circuit.mode != CircuitMode::Continuous) g = apply_switch_cells(circuit, std::move(g));
    return g;
}

BondGraph apply_switch_cells(const Circuit& circuit, BondGraph graph) {
    if (circuit.mode == CircuitMode::Continuous)
        throw Error("ModeRequiresSwitch", "switch cells apply to CCM/DCM circuits only");

    for (const auto& e : circuit.elements) {
        if (e.kind != ElementKind::Switch) continue;
        const int jpos = graph.find_node(e.net_pos, BgNodeKind::Junction0);
        const int jneg = graph.find_node(e.net_neg, BgNodeKind::Junction0);
        if (jpos < 0 || jneg < 0)
            throw Error("InternalError", "switch net junction missing for '" + e.name + "'");
        // The switched junction sits in the element's series position; its
        // control is a zero-valued flow source carrying the phase shift.
        // Every bond of the cell is weighted by the duty cycle.
        const int j1s = add_node(graph, BgNodeKind::Junction1s, e.name);
        const int ctrl = add_node(graph, BgNodeKind::Sf, e.name, 0.0, e.phase);
        add_edge(graph, j1s, ctrl, e.value);
        add_edge(graph, j1s, jpos, e.value);
        add_edge(graph, j1s, jneg, e.value);
    }
    return graph;
}

BondGraph apply_dcm_virtual_switch(BondGraph graph, const std::string& inductor,
                                   double d1, double d2) {
    if (!(d1 >= 0.0) || !(d2 >= 0.0) || d1 + d2 > 1.0)
        throw Error("DutyOverflow", "duty cycles d1 + d2 must stay within [0, 1]");
    const int leaf = graph.find_node(inductor, BgNodeKind::Inertance);
    if (leaf < 0) throw Error("NoSuchInductor", "no inductor named '" + inductor + "'");

    // The inductor leaf hangs off its series junction, whose two remaining
    // bonds reach the terminal net junctions the virtual switch must bridge.
    const auto leaf_nbrs = graph.neighbors(leaf);
    if (leaf_nbrs.size() != 1)
        throw Error("InternalError", "inductor leaf must have exactly one bond");
    std::vector<int> terminals;
    for (int n : graph.neighbors(leaf_nbrs.front()))
        if (n != leaf) terminals.push_back(n);
    if (terminals.size() != 2)
        throw Error("InternalError", "inductor junction must have exactly three bonds");
    std::sort(terminals.begin(), terminals.end());

    // d3 closes the switching period; summing the stored weights back up
    // yields exactly 1.0 in double precision.
    const double d3 = 1.0 - (d1 + d2);
    const std::string name = "virtual(" + inductor + ")";
    const int j1s = add_node(graph, BgNodeKind::Junction1s, name);
    const int ctrl = add_node(graph, BgNodeKind::Sf, name);
    add_edge(graph, j1s, ctrl, d3);
    add_edge(graph, j1s, terminals[0], d3);
    add_edge(graph, j1s, terminals[1], d3);
    return graph;
}

} // namespace circuitgraph
