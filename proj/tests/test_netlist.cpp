#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "circuitgraph/netlist.hpp"
#include "circuitgraph/rng.hpp"
#include "support/random_circuits.hpp"

using namespace circuitgraph;

namespace {

const char* kSeriesRlc =
    "* series resonant tank\n"
    "V1 1 0 10\n"
    "R1 1 2 50\n"
    "L1 2 3 1e-3\n"
    "C1 3 0 1e-9\n"
    ".freq 1e5\n"
    ".mode CONT\n";

bool has_code(const std::vector<Violation>& vs, const std::string& code) {
    return std::any_of(vs.begin(), vs.end(),
                       [&](const Violation& v) { return v.code == code; });
}

} // namespace

TEST_CASE("parse: element lines, kinds, values and directives") {
    const Circuit c = parse_netlist(kSeriesRlc);

    REQUIRE(c.elements.size() == 4);
    CHECK(c.elements[0].name == "V1");
    CHECK(c.elements[0].kind == ElementKind::VoltageSource);
    CHECK(c.elements[0].net_pos == "1");
    CHECK(c.elements[0].net_neg == "0");
    CHECK(c.elements[0].value == 10.0);
    CHECK(c.elements[1].kind == ElementKind::Resistor);
    CHECK(c.elements[2].kind == ElementKind::Inductor);
    CHECK(c.elements[2].value == 1e-3);
    CHECK(c.elements[3].kind == ElementKind::Capacitor);
    CHECK(c.elements[3].value == 1e-9);

    CHECK(c.nets == std::vector<std::string>{"0", "1", "2", "3"});
    CHECK(c.frequency == 1e5);
    CHECK(c.mode == CircuitMode::Continuous);
    CHECK(validate(c).empty());
}

TEST_CASE("parse: prefix is case-insensitive and comments are skipped") {
    const Circuit c = parse_netlist("v1 1 0 5\nrload 1 0 10\n* trailing comment\n");
    REQUIRE(c.elements.size() == 2);
    CHECK(c.elements[0].kind == ElementKind::VoltageSource);
    CHECK(c.elements[1].kind == ElementKind::Resistor);
    CHECK(c.elements[1].name == "rload");
}

TEST_CASE("parse: all six kind prefixes map correctly") {
    const Circuit c = parse_netlist(
        "V1 1 0 1\nI1 1 0 1\nR1 1 0 1\nL1 1 0 1\nC1 1 0 1\nS1 1 0 0.5\n");
    CHECK(c.elements[0].kind == ElementKind::VoltageSource);
    CHECK(c.elements[1].kind == ElementKind::CurrentSource);
    CHECK(c.elements[2].kind == ElementKind::Resistor);
    CHECK(c.elements[3].kind == ElementKind::Inductor);
    CHECK(c.elements[4].kind == ElementKind::Capacitor);
    CHECK(c.elements[5].kind == ElementKind::Switch);
}

TEST_CASE("parse: switching directives, in any order relative to elements") {
    const char* forward =
        "V1 1 0 24\nS1 1 2 0.4\nS2 2 0 0.6\nL1 2 3 1e-4\nC1 3 0 1e-5\nR1 3 0 10\n"
        ".freq 1e5\n.mode CCM\n.phase S2 3.14159\n";
    const char* directives_first =
        ".phase S2 3.14159\n.freq 1e5\n.mode CCM\n"
        "V1 1 0 24\nS1 1 2 0.4\nS2 2 0 0.6\nL1 2 3 1e-4\nC1 3 0 1e-5\nR1 3 0 10\n";

    const Circuit a = parse_netlist(forward);
    const Circuit b = parse_netlist(directives_first);
    CHECK(a == b);
    CHECK(a.mode == CircuitMode::Ccm);
    CHECK(a.elements[1].value == 0.4);
    CHECK(a.elements[2].phase == 3.14159);
    CHECK(a.elements[1].phase == 0.0);

    const Circuit overridden =
        parse_netlist("V1 1 0 5\nS1 1 0 0.3\n.duty S1 0.7\n.mode CCM\n");
    CHECK(overridden.elements[1].value == 0.7);
}

TEST_CASE("parse: error codes and line numbers") {
    try {
        parse_netlist("V1 1 0\n");
        FAIL("expected NetlistError");
    } catch (const NetlistError& e) {
        CHECK(e.code() == "SyntaxError");
        CHECK(e.line() == 1);
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }

    try {
        parse_netlist("V1 1 0 5\nX1 1 0 2\n");
        FAIL("expected NetlistError");
    } catch (const NetlistError& e) {
        CHECK(e.code() == "UnknownKindPrefix");
        CHECK(e.line() == 2);
    }

    try {
        parse_netlist("R1 1 0 5\nR1 1 0 6\n");
        FAIL("expected NetlistError");
    } catch (const NetlistError& e) {
        CHECK(e.code() == "DuplicateName");
        CHECK(e.line() == 2);
    }

    try {
        parse_netlist("R1 1 0 bogus\n");
        FAIL("expected NetlistError");
    } catch (const NetlistError& e) {
        CHECK(e.code() == "SyntaxError");
    }

    try {
        parse_netlist("R1 1 0 5\n.voodoo 12\n");
        FAIL("expected NetlistError");
    } catch (const NetlistError& e) {
        CHECK(e.code() == "UnknownDirective");
        CHECK(e.line() == 2);
    }

    try {
        parse_netlist("R1 1 0 5\n.duty R1 0.5\n");
        FAIL("expected NetlistError");
    } catch (const NetlistError& e) {
        CHECK(e.code() == "UnknownSwitch");
    }

    // Non-finite values are rejected at parse time.
    CHECK_THROWS_AS(parse_netlist("R1 1 0 inf\n"), NetlistError);
    CHECK_THROWS_AS(parse_netlist("R1 1 0 nan\n"), NetlistError);
    // Trailing garbage glued to a number is not a number.
    CHECK_THROWS_AS(parse_netlist("R1 1 0 5x\n"), NetlistError);
    // Too many tokens on an element line.
    CHECK_THROWS_AS(parse_netlist("R1 1 0 5 7\n"), NetlistError);
}

TEST_CASE("natural net order: numeric by value, then lexicographic") {
    const Circuit c = parse_netlist(
        "V1 srcp 0 1\nR1 srcp 2 1\nR2 2 10 1\nR3 10 1 1\nR4 1 0 1\n");
    CHECK(c.nets == std::vector<std::string>{"0", "1", "2", "10", "srcp"});

    CHECK(natural_net_less("2", "10"));
    CHECK(!natural_net_less("10", "2"));
    CHECK(natural_net_less("10", "a"));
    CHECK(natural_net_less("alpha", "beta"));
    CHECK(!natural_net_less("0", "0"));
}

TEST_CASE("validate: each violation code fires on its trigger") {
    // No ground net.
    {
        const auto vs = validate(parse_netlist("V1 1 2 5\nR1 1 2 10\n"));
        CHECK(has_code(vs, "MissingGround"));
    }
    // No source element.
    {
        const auto vs = validate(parse_netlist("R1 1 0 10\nL1 1 0 1e-3\n"));
        CHECK(has_code(vs, "MissingSource"));
    }
    // Island not reachable from ground.
    {
        const auto vs = validate(parse_netlist("V1 1 0 5\nR1 1 0 10\nR2 7 8 10\n"));
        CHECK(has_code(vs, "Disconnected"));
    }
    // Both terminals on one net.
    {
        const auto vs = validate(parse_netlist("V1 1 0 5\nR1 1 1 10\n"));
        CHECK(has_code(vs, "SelfConnectedElement"));
    }
    // Zero / negative element values.
    {
        const auto vs = validate(parse_netlist("V1 1 0 5\nR1 1 0 0\n"));
        CHECK(has_code(vs, "NonPositiveValue"));
        const auto vs2 = validate(parse_netlist("V1 1 0 5\nR1 1 0 -3\n"));
        CHECK(has_code(vs2, "NonPositiveValue"));
    }
    // Frequency must be positive.
    {
        const auto vs = validate(parse_netlist("V1 1 0 5\nR1 1 0 10\n.freq 0\n"));
        CHECK(has_code(vs, "NonPositiveFrequency"));
    }
    // Duty cycle outside [0, 1].
    {
        const auto vs = validate(
            parse_netlist("V1 1 0 5\nS1 1 2 1.5\nR1 2 0 10\n.mode CCM\n"));
        CHECK(has_code(vs, "DutyOutOfRange"));
    }
    // Switched mode without any switch.
    {
        const auto vs = validate(parse_netlist("V1 1 0 5\nR1 1 0 10\n.mode CCM\n"));
        CHECK(has_code(vs, "ModeRequiresSwitch"));
    }
    // Switch present in continuous mode.
    {
        const auto vs = validate(parse_netlist("V1 1 0 5\nS1 1 2 0.5\nR1 2 0 10\n"));
        CHECK(has_code(vs, "SwitchInContinuousMode"));
    }
    // A valid circuit yields no violations.
    CHECK(validate(parse_netlist(kSeriesRlc)).empty());
}

TEST_CASE("render/parse round-trip is exact") {
    Rng rng(20260817);
    for (int i = 0; i < 50; ++i) {
        const Circuit c = testsupport::random_continuous_circuit(rng);
        const Circuit back = parse_netlist(render_netlist(c));
        CHECK(back == c);
    }

    // Switching circuit with duty and phase survives too.
    const Circuit sw = parse_netlist(
        "V1 1 0 24\nS1 1 2 0.4\nS2 2 0 0.6000000000000001\nL1 2 3 1e-4\n"
        "C1 3 0 1e-5\nR1 3 0 10\n.freq 98765.4321\n.mode DCM\n.phase S2 3.141592653589793\n");
    CHECK(parse_netlist(render_netlist(sw)) == sw);
}

TEST_CASE("parse ignores blank lines and leading whitespace") {
    const Circuit c = parse_netlist("\n\n   V1 1 0 5\n\t\nR1 1 0 2\n");
    CHECK(c.elements.size() == 2);
}
