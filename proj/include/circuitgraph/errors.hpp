#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace circuitgraph {

/// Runtime error carrying a stable machine-readable code alongside the message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Netlist parse error with the 1-based source line it occurred on.
class NetlistError : public Error {
public:
    NetlistError(int line, std::string code, const std::string& message)
        : Error(std::move(code), "line " + std::to_string(line) + ": " + message),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

/// One semantic rule violation found by circuit validation.
struct Violation {
    std::string code;
    std::string message;
};

inline std::string join_violation_codes(const std::vector<Violation>& violations) {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += ", ";
        out += v.code;
    }
    return out;
}

/// Thrown by operations that require a circuit passing validation.
class InvalidCircuit : public Error {
public:
    explicit InvalidCircuit(std::vector<Violation> violations)
        : Error("InvalidCircuit", "invalid circuit: " + join_violation_codes(violations)),
          violations_(std::move(violations)) {}

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

} // namespace circuitgraph
