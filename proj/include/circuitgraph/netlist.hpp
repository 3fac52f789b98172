#pragma once

#include <string>
#include <vector>

#include "circuitgraph/errors.hpp"

namespace circuitgraph {

// ============================================================================
// Netlist model
//
// Input format is a small SPICE-like text format, one element per line:
//
//     <Name> <net+> <net-> <value>
//
// The first letter of <Name> selects the element kind: V (voltage source),
// I (current source), R (resistor), L (inductor), C (capacitor),
// S (switch; <value> is its duty cycle). Values are plain reals, optionally
// in scientific notation. Net ids are arbitrary tokens; "0" is ground.
// Lines starting with '*' are comments. Directives:
//
//     .freq  <hz>                 source / switching frequency
//     .mode  CONT | CCM | DCM     conduction mode (default CONT)
//     .duty  <switch> <d>         overrides a switch's duty cycle
//     .phase <switch> <radians>   control phase shift of a switch
// ============================================================================

enum class ElementKind { VoltageSource, CurrentSource, Resistor, Inductor, Capacitor, Switch };

enum class CircuitMode { Continuous, Ccm, Dcm };

struct Element {
    std::string name;
    ElementKind kind = ElementKind::Resistor;
    std::string net_pos;
    std::string net_neg;
    double value = 0.0;
    double phase = 0.0; // switches only; radians

    friend bool operator==(const Element&, const Element&) = default;
};

struct Circuit {
    std::vector<Element> elements; // in netlist order
    std::vector<std::string> nets; // distinct net ids, naturally sorted
    double frequency = 1.0;        // Hz
    CircuitMode mode = CircuitMode::Continuous;
    int class_label = -1; // dataset label; -1 when not part of a dataset

    friend bool operator==(const Circuit&, const Circuit&) = default;
};

const char* to_string(ElementKind kind);
const char* to_string(CircuitMode mode);

/// Orders net ids numerically when both are integers, lexicographically
/// otherwise (numeric before non-numeric). Gives "0" < "1" < ... < "10" < "in".
bool natural_net_less(const std::string& a, const std::string& b);

/// Parses netlist text. Throws NetlistError (codes "SyntaxError",
/// "UnknownKindPrefix", "DuplicateName", "UnknownDirective", "UnknownSwitch")
/// on malformed input. Grammar-valid but semantically broken circuits parse
/// fine and are reported by validate() instead.
Circuit parse_netlist(const std::string& text);

/// Returns all semantic rule violations; empty means the circuit is usable.
/// Codes: MissingGround, MissingSource, Disconnected, SelfConnectedElement,
/// NonPositiveValue, NonPositiveFrequency, DutyOutOfRange,
/// ModeRequiresSwitch, SwitchInContinuousMode.
std::vector<Violation> validate(const Circuit& circuit);

/// Renders a circuit back to canonical netlist text. Values are printed with
/// 17 significant digits so that parse(render(c)) == c exactly.
std::string render_netlist(const Circuit& circuit);

} // namespace circuitgraph
