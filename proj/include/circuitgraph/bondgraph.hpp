#pragma once

#include <string>
#include <vector>

#include "circuitgraph/errors.hpp"
#include "circuitgraph/netlist.hpp"

namespace circuitgraph {

// ============================================================================
// Bond-graph construction
//
// A circuit maps onto an undirected weighted graph of bond-graph nodes:
//
//   * one 0-junction per distinct voltage net (current sums to zero there),
//   * per element, a 1-junction in series between its two net junctions,
//     plus a leaf node for the element itself:
//       V -> Se (effort source), I -> Sf (flow source), R -> R,
//       L -> I (inertance), C -> C,
//   * per switch, a switched 1-junction (Junction1s) between its two net
//     junctions plus a zero-valued flow source modelling the control signal;
//     all three of its bonds carry the switch's duty cycle as edge weight,
//   * in discontinuous conduction mode, a third, virtual switched junction
//     bridges the inductor's two net junctions and carries the remaining
//     duty d3 = 1 - d1 - d2.
//
// Continuous-part construction gives every element node degree 1, every
// 1-junction degree 3, and |edges| = 3 * |elements|.
// ============================================================================

enum class BgNodeKind {
    Se,         // effort (voltage) source
    Sf,         // flow (current) source; value 0 marks a switch control
    Inertance,  // inductor
    Resistance, // resistor
    Capacitance,// capacitor
    Junction1,  // series junction
    Junction0,  // parallel junction
    Junction1s, // switched series junction
    Junction0s  // switched parallel junction (reserved; not produced here)
};

const char* to_string(BgNodeKind kind);

struct BgNode {
    int id = -1;
    BgNodeKind kind = BgNodeKind::Junction0;
    std::string name; // element name, net id, or "virtual(<inductor>)"
    double value = 0.0;
    double phase = 0.0; // control sources only; radians

    friend bool operator==(const BgNode&, const BgNode&) = default;
};

struct BgEdge {
    int a = -1; // a < b always
    int b = -1;
    double weight = 1.0;

    friend bool operator==(const BgEdge&, const BgEdge&) = default;
};

struct BondGraph {
    std::vector<BgNode> nodes; // node id == index
    std::vector<BgEdge> edges;
    CircuitMode mode = CircuitMode::Continuous;
    int class_label = -1;
    double frequency = 1.0;           // source / switching frequency, Hz
    double resonance_frequency = 0.0; // 0 when no resonance model applies

    int degree(int node_id) const;
    std::vector<int> neighbors(int node_id) const;
    /// First node matching (name, kind), or -1.
    int find_node(const std::string& name, BgNodeKind kind) const;

    friend bool operator==(const BondGraph&, const BondGraph&) = default;
};

bool is_junction(BgNodeKind kind);
bool is_switched_junction(BgNodeKind kind);

/// Builds the bond graph for a validated circuit. Node ids are assigned
/// deterministically: 0-junctions in natural net order, then per non-switch
/// element (netlist order) its 1-junction followed by its element node, then
/// switch cells. Throws InvalidCircuit when validate() reports violations.
BondGraph to_bond_graph(const Circuit& circuit);

/// Appends one switch cell (Junction1s + zero-valued control Sf) per switch
/// element to a continuous-part graph. Edge weights on all bonds of a cell
/// are the switch duty. Throws Error("ModeRequiresSwitch") when the circuit
/// mode is Continuous. to_bond_graph() calls this itself for CCM/DCM input.
BondGraph apply_switch_cells(const Circuit& circuit, BondGraph graph);

/// Adds the virtual switched junction for discontinuous conduction mode: a
/// Junction1s plus control Sf bridging the named inductor's two net
/// junctions, all three bonds weighted d3 = 1 - d1 - d2 (computed exactly).
/// Throws Error("NoSuchInductor") when the inductor is absent and
/// Error("DutyOverflow") when d1 + d2 > 1.
BondGraph apply_dcm_virtual_switch(BondGraph graph, const std::string& inductor,
                                   double d1, double d2);

} // namespace circuitgraph
