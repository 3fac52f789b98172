#include "circuitgraph/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>
#include <unordered_map>

namespace circuitgraph {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

/// Full-token finite double parse; rejects trailing garbage, inf and nan.
bool parse_double(const std::string& tok, double& out) {
    if (tok.empty()) return false;
    errno = 0;
    char* end = nullptr;
    out = std::strtod(tok.c_str(), &end);
    return end == tok.c_str() + tok.size() && std::isfinite(out);
}

bool parse_kind(char prefix, ElementKind& kind) {
    switch (std::toupper(static_cast<unsigned char>(prefix))) {
        case 'V': kind = ElementKind::VoltageSource; return true;
        case 'I': kind = ElementKind::CurrentSource; return true;
        case 'R': kind = ElementKind::Resistor; return true;
        case 'L': kind = ElementKind::Inductor; return true;
        case 'C': kind = ElementKind::Capacitor; return true;
        case 'S': kind = ElementKind::Switch; return true;
        default: return false;
    }
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Directive {
    int line;
    std::vector<std::string> tokens;
};

} // namespace

const char* to_string(ElementKind kind) {
    switch (kind) {
        case ElementKind::VoltageSource: return "voltage-source";
        case ElementKind::CurrentSource: return "current-source";
        case ElementKind::Resistor: return "resistor";
        case ElementKind::Inductor: return "inductor";
        case ElementKind::Capacitor: return "capacitor";
        case ElementKind::Switch: return "switch";
    }
    return "?";
}

const char* to_string(CircuitMode mode) {
    switch (mode) {
        case CircuitMode::Continuous: return "CONT";
        case CircuitMode::Ccm: return "CCM";
        case CircuitMode::Dcm: return "DCM";
    }
    return "?";
}

bool natural_net_less(const std::string& a, const std::string& b) {
    auto as_number = [](const std::string& s, unsigned long long& n) {
        if (s.empty() || s.size() > 18) return false;
        for (char c : s)
            if (!std::isdigit(static_cast<unsigned char>(c))) return false;
        n = std::stoull(s);
        return true;
    };
    unsigned long long na = 0, nb = 0;
    const bool ia = as_number(a, na), ib = as_number(b, nb);
    if (ia && ib) return na != nb ? na < nb : a < b;
    if (ia != ib) return ia; // numeric ids sort before named nets
    return a < b;
}

Circuit parse_netlist(const std::string& text) {
    Circuit circuit;
    std::unordered_map<std::string, std::size_t> index_by_name;
    std::vector<Directive> directives;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = tokenize(line);
        if (tokens.empty() || tokens.front()[0] == '*') continue;
        if (tokens.front()[0] == '.') {
            directives.push_back({line_no, tokens});
            continue;
        }

        // Element line: <Name> <net+> <net-> <value>
        const std::string& name = tokens.front();
        ElementKind kind;
        if (!parse_kind(name[0], kind))
            throw NetlistError(line_no, "UnknownKindPrefix",
                               "element name '" + name + "' starts with no known kind prefix");
        if (tokens.size() != 4)
            throw NetlistError(line_no, "SyntaxError",
                               "expected '<name> <net+> <net-> <value>', got " +
                                   std::to_string(tokens.size()) + " token(s)");
        double value = 0.0;
        if (!parse_double(tokens[3], value))
            throw NetlistError(line_no, "SyntaxError", "bad value '" + tokens[3] + "'");
        if (index_by_name.count(name))
            throw NetlistError(line_no, "DuplicateName",
                               "element '" + name + "' already defined");

        index_by_name.emplace(name, circuit.elements.size());
        circuit.elements.push_back({name, kind, tokens[1], tokens[2], value, 0.0});
    }

    // Directives are applied after all elements exist, so .duty/.phase may
    // precede the switch they refer to.
    for (const auto& d : directives) {
        const std::string key = upper(d.tokens.front());
        if (key == ".FREQ") {
            if (d.tokens.size() != 2 || !parse_double(d.tokens[1], circuit.frequency))
                throw NetlistError(d.line, "SyntaxError", "expected '.freq <hz>'");
        } else if (key == ".MODE") {
            if (d.tokens.size() != 2)
                throw NetlistError(d.line, "SyntaxError", "expected '.mode CONT|CCM|DCM'");
            const std::string m = upper(d.tokens[1]);
            if (m == "CONT") circuit.mode = CircuitMode::Continuous;
            else if (m == "CCM") circuit.mode = CircuitMode::Ccm;
            else if (m == "DCM") circuit.mode = CircuitMode::Dcm;
            else
                throw NetlistError(d.line, "SyntaxError", "unknown mode '" + d.tokens[1] + "'");
        } else if (key == ".DUTY" || key == ".PHASE") {
            double value = 0.0;
            if (d.tokens.size() != 3 || !parse_double(d.tokens[2], value))
                throw NetlistError(d.line, "SyntaxError",
                                   "expected '" + key + " <switch> <value>'");
            const auto it = index_by_name.find(d.tokens[1]);
            if (it == index_by_name.end() ||
                circuit.elements[it->second].kind != ElementKind::Switch)
                throw NetlistError(d.line, "UnknownSwitch",
                                   "'" + d.tokens[1] + "' is not a switch");
            if (key == ".DUTY") circuit.elements[it->second].value = value;
            else circuit.elements[it->second].phase = value;
        } else {
            throw NetlistError(d.line, "UnknownDirective",
                               "unknown directive '" + d.tokens.front() + "'");
        }
    }

    // Distinct nets in natural order.
    std::set<std::string, bool (*)(const std::string&, const std::string&)> nets(
        &natural_net_less);
    for (const auto& e : circuit.elements) {
        nets.insert(e.net_pos);
        nets.insert(e.net_neg);
    }
    circuit.nets.assign(nets.begin(), nets.end());
    return circuit;
}

std::vector<Violation> validate(const Circuit& circuit) {
    std::vector<Violation> out;

    bool has_source = false;
    int switch_count = 0;
    for (const auto& e : circuit.elements) {
        if (e.kind == ElementKind::VoltageSource || e.kind == ElementKind::CurrentSource)
            has_source = true;
        if (e.kind == ElementKind::Switch) ++switch_count;
    }
    if (!has_source)
        out.push_back({"MissingSource", "circuit has no voltage or current source"});

    const bool has_ground =
        std::find(circuit.nets.begin(), circuit.nets.end(), "0") != circuit.nets.end();
    if (!has_ground) out.push_back({"MissingGround", "net '0' is absent"});

    for (const auto& e : circuit.elements) {
        if (e.net_pos == e.net_neg)
            out.push_back({"SelfConnectedElement",
                           "element '" + e.name + "' connects net '" + e.net_pos +
                               "' to itself"});
        if (e.kind == ElementKind::Switch) {
            if (!(e.value >= 0.0 && e.value <= 1.0))
                out.push_back({"DutyOutOfRange",
                               "switch '" + e.name + "' duty " + format_value(e.value) +
                                   " outside [0, 1]"});
        } else if (!(e.value > 0.0)) {
            out.push_back({"NonPositiveValue",
                           "element '" + e.name + "' value " + format_value(e.value) +
                               " must be positive"});
        }
    }

    if (!(circuit.frequency > 0.0))
        out.push_back({"NonPositiveFrequency",
                       "frequency " + format_value(circuit.frequency) + " must be positive"});

    if (circuit.mode != CircuitMode::Continuous && switch_count == 0)
        out.push_back({"ModeRequiresSwitch",
                       std::string(to_string(circuit.mode)) + " mode needs a switch"});
    if (circuit.mode == CircuitMode::Continuous && switch_count > 0)
        out.push_back({"SwitchInContinuousMode",
                       "continuous mode allows no switches, found " +
                           std::to_string(switch_count)});

    // Reachability from ground across element connections.
    if (has_ground && !circuit.elements.empty()) {
        std::set<std::string> reached{"0"};
        bool grew = true;
        while (grew) {
            grew = false;
            for (const auto& e : circuit.elements) {
                const bool p = reached.count(e.net_pos) > 0;
                const bool n = reached.count(e.net_neg) > 0;
                if (p != n) {
                    reached.insert(p ? e.net_neg : e.net_pos);
                    grew = true;
                }
            }
        }
        for (const auto& net : circuit.nets)
            if (!reached.count(net))
                out.push_back({"Disconnected",
                               "net '" + net + "' is not reachable from ground"});
    }
    return out;
}

std::string render_netlist(const Circuit& circuit) {
    std::ostringstream out;
    for (const auto& e : circuit.elements)
        out << e.name << ' ' << e.net_pos << ' ' << e.net_neg << ' '
            << format_value(e.value) << '\n';
    out << ".freq " << format_value(circuit.frequency) << '\n';
    out << ".mode " << to_string(circuit.mode) << '\n';
    for (const auto& e : circuit.elements)
        if (e.kind == ElementKind::Switch && e.phase != 0.0)
            out << ".phase " << e.name << ' ' << format_value(e.phase) << '\n';
    return out.str();
}

} // namespace circuitgraph
