#pragma once

// Flat `key = value` run configuration: one key per line, `#` comments, no
// nesting.  Parsing reports every error with its line number instead of
// stopping at the first, and render() emits a canonical form that parses
// back to an identical config (doubles use shortest round-trip formatting).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace semiflow {

struct RunConfig {
    std::string command;                       // required
    std::string map_id = "cubic:lambda=15";    // set-valued map identifier
    std::size_t operator_size = 200;           // interior grid points
    std::string form = "chafee";               // chafee | rd
    double dt = 1e-3;
    double t_final = 50.0;
    double tol = 1e-3;
    std::size_t level = 4;                     // regularization level N
    double tail_fraction = 0.2;
    std::vector<double> bounds_lo{0.0, -0.75};
    std::vector<double> bounds_hi{1.5, 0.75};
    std::vector<std::size_t> resolution{60, 60};
    double t_flow = 0.5;
    double epsilon = 0.0;                      // 0 = one cell diameter
    std::size_t samples = 3;
    std::size_t selections = 3;
    std::vector<double> chain_from;            // state-space points
    std::vector<double> chain_to;
    std::size_t probes = 50;
    double probe_radius = 0.05;
    std::size_t runs = 50;
    std::uint64_t seed = 0;
    std::string output_dir = "out";

    bool operator==(const RunConfig&) const = default;
};

struct ConfigError {
    std::size_t line = 0; // 1-based; 0 = file-level
    std::string message;
};

struct ParseOutcome {
    std::optional<RunConfig> config; // set iff errors is empty
    std::vector<ConfigError> errors;
};

ParseOutcome parse_config(const std::string& text);

std::string render_config(const RunConfig& config);

const std::vector<std::string>& known_commands();

} // namespace semiflow
