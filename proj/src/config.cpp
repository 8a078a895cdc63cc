#include "semiflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "semiflow/util.hpp"

namespace semiflow {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) parts.push_back(trim(item));
    if (!s.empty() && s.back() == sep) parts.push_back("");
    return parts;
}

bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    const auto r = std::from_chars(first, last, out);
    return r.ec == std::errc{} && r.ptr == last && std::isfinite(out);
}

bool parse_size(const std::string& s, std::size_t& out) {
    const std::string t = trim(s);
    if (t.empty() || t[0] == '-') return false;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
    return r.ec == std::errc{} && r.ptr == t.data() + t.size();
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
    const std::string t = trim(s);
    if (t.empty() || t[0] == '-') return false;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
    return r.ec == std::errc{} && r.ptr == t.data() + t.size();
}

bool parse_double_list(const std::string& s, std::vector<double>& out) {
    out.clear();
    if (trim(s).empty()) return true; // explicit empty list
    for (const auto& part : split(s, ',')) {
        double v = 0.0;
        if (!parse_double(part, v)) return false;
        out.push_back(v);
    }
    return true;
}

bool parse_size_list(const std::string& s, std::vector<std::size_t>& out) {
    out.clear();
    if (trim(s).empty()) return true;
    for (const auto& part : split(s, ',')) {
        std::size_t v = 0;
        if (!parse_size(part, v)) return false;
        out.push_back(v);
    }
    return true;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += fmt_double(v[i]);
    }
    return s;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

using Setter = std::function<bool(const std::string&, RunConfig&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"command", [](const std::string& v, RunConfig& c) { c.command = trim(v); return true; }},
        {"map", [](const std::string& v, RunConfig& c) { c.map_id = trim(v); return true; }},
        {"operator_size",
         [](const std::string& v, RunConfig& c) { return parse_size(v, c.operator_size); }},
        {"form", [](const std::string& v, RunConfig& c) { c.form = trim(v); return true; }},
        {"dt", [](const std::string& v, RunConfig& c) { return parse_double(v, c.dt); }},
        {"t_final", [](const std::string& v, RunConfig& c) { return parse_double(v, c.t_final); }},
        {"tol", [](const std::string& v, RunConfig& c) { return parse_double(v, c.tol); }},
        {"level", [](const std::string& v, RunConfig& c) { return parse_size(v, c.level); }},
        {"tail_fraction",
         [](const std::string& v, RunConfig& c) { return parse_double(v, c.tail_fraction); }},
        {"bounds_lo",
         [](const std::string& v, RunConfig& c) { return parse_double_list(v, c.bounds_lo); }},
        {"bounds_hi",
         [](const std::string& v, RunConfig& c) { return parse_double_list(v, c.bounds_hi); }},
        {"resolution",
         [](const std::string& v, RunConfig& c) { return parse_size_list(v, c.resolution); }},
        {"t_flow", [](const std::string& v, RunConfig& c) { return parse_double(v, c.t_flow); }},
        {"epsilon", [](const std::string& v, RunConfig& c) { return parse_double(v, c.epsilon); }},
        {"samples", [](const std::string& v, RunConfig& c) { return parse_size(v, c.samples); }},
        {"selections",
         [](const std::string& v, RunConfig& c) { return parse_size(v, c.selections); }},
        {"chain_from",
         [](const std::string& v, RunConfig& c) { return parse_double_list(v, c.chain_from); }},
        {"chain_to",
         [](const std::string& v, RunConfig& c) { return parse_double_list(v, c.chain_to); }},
        {"probes", [](const std::string& v, RunConfig& c) { return parse_size(v, c.probes); }},
        {"probe_radius",
         [](const std::string& v, RunConfig& c) { return parse_double(v, c.probe_radius); }},
        {"runs", [](const std::string& v, RunConfig& c) { return parse_size(v, c.runs); }},
        {"seed", [](const std::string& v, RunConfig& c) { return parse_u64(v, c.seed); }},
        {"output_dir",
         [](const std::string& v, RunConfig& c) { c.output_dir = trim(v); return true; }},
    };
    return table;
}

} // namespace

const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> commands = {
        "simulate", "equilibria", "graph",        "chain",
        "omega",    "connections", "demo-duffing", "demo-chafee"};
    return commands;
}

ParseOutcome parse_config(const std::string& text) {
    ParseOutcome outcome;
    RunConfig config;
    auto fail = [&](std::size_t line, std::string msg) {
        outcome.errors.push_back({line, std::move(msg)});
    };

    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    std::vector<std::pair<std::string, std::size_t>> seen;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail(line_no, "expected key = value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) {
            fail(line_no, "unknown key '" + key + "'");
            continue;
        }
        const auto dup = std::find_if(seen.begin(), seen.end(),
                                      [&](const auto& p) { return p.first == key; });
        if (dup != seen.end()) {
            fail(line_no, "duplicate key '" + key + "' (first set on line " +
                              std::to_string(dup->second) + ")");
            continue;
        }
        seen.emplace_back(key, line_no);
        if (!it->second(value, config))
            fail(line_no, "cannot parse value '" + value + "' for key '" + key + "'");
    }

    auto line_of = [&](const std::string& key) -> std::size_t {
        const auto it = std::find_if(seen.begin(), seen.end(),
                                     [&](const auto& p) { return p.first == key; });
        return it == seen.end() ? 0 : it->second;
    };

    // semantic checks, all reported
    if (config.command.empty()) {
        fail(0, "missing required key 'command'");
    } else if (std::find(known_commands().begin(), known_commands().end(), config.command) ==
               known_commands().end()) {
        fail(line_of("command"), "unknown command '" + config.command + "'");
    }
    if (!(config.dt > 0.0)) fail(line_of("dt"), "dt must be positive");
    if (!(config.t_final > 0.0)) fail(line_of("t_final"), "t_final must be positive");
    if (!(config.tol > 0.0)) fail(line_of("tol"), "tol must be positive");
    if (!(config.tail_fraction > 0.0 && config.tail_fraction < 1.0))
        fail(line_of("tail_fraction"), "tail_fraction must lie in (0,1)");
    if (!(config.t_flow > 0.0)) fail(line_of("t_flow"), "t_flow must be positive");
    if (config.epsilon < 0.0) fail(line_of("epsilon"), "epsilon must be nonnegative");
    if (!(config.probe_radius > 0.0)) fail(line_of("probe_radius"), "probe_radius must be positive");
    if (config.form != "chafee" && config.form != "rd")
        fail(line_of("form"), "form must be 'chafee' or 'rd'");
    if (config.operator_size == 0) fail(line_of("operator_size"), "operator_size must be positive");
    if (config.samples == 0) fail(line_of("samples"), "samples must be positive");
    if (config.bounds_lo.size() != config.bounds_hi.size() ||
        config.bounds_lo.size() != config.resolution.size())
        fail(line_of("bounds_lo"), "bounds_lo, bounds_hi and resolution must have equal length");
    else {
        if (config.bounds_lo.empty() || config.bounds_lo.size() > 3)
            fail(line_of("bounds_lo"), "graph dimension must be 1, 2 or 3");
        for (std::size_t a = 0; a < config.bounds_lo.size(); ++a) {
            if (!(config.bounds_hi[a] > config.bounds_lo[a]))
                fail(line_of("bounds_hi"), "bounds_hi must exceed bounds_lo on axis " +
                                               std::to_string(a));
            if (a < config.resolution.size() && config.resolution[a] == 0)
                fail(line_of("resolution"), "resolution must be positive on axis " +
                                                std::to_string(a));
        }
    }
    if (config.command == "chain") {
        if (config.chain_from.empty()) fail(line_of("command"), "chain requires chain_from");
        if (config.chain_to.empty()) fail(line_of("command"), "chain requires chain_to");
    }
    if (config.output_dir.empty()) fail(line_of("output_dir"), "output_dir must not be empty");

    if (outcome.errors.empty()) outcome.config = std::move(config);
    return outcome;
}

std::string render_config(const RunConfig& config) {
    std::string s;
    auto put = [&](const std::string& key, const std::string& value) {
        s += key;
        s += " = ";
        s += value;
        s += "\n";
    };
    put("command", config.command);
    put("map", config.map_id);
    put("operator_size", std::to_string(config.operator_size));
    put("form", config.form);
    put("dt", fmt_double(config.dt));
    put("t_final", fmt_double(config.t_final));
    put("tol", fmt_double(config.tol));
    put("level", std::to_string(config.level));
    put("tail_fraction", fmt_double(config.tail_fraction));
    put("bounds_lo", join_doubles(config.bounds_lo));
    put("bounds_hi", join_doubles(config.bounds_hi));
    put("resolution", join_sizes(config.resolution));
    put("t_flow", fmt_double(config.t_flow));
    put("epsilon", fmt_double(config.epsilon));
    put("samples", std::to_string(config.samples));
    put("selections", std::to_string(config.selections));
    put("chain_from", join_doubles(config.chain_from));
    put("chain_to", join_doubles(config.chain_to));
    put("probes", std::to_string(config.probes));
    put("probe_radius", fmt_double(config.probe_radius));
    put("runs", std::to_string(config.runs));
    put("seed", std::to_string(config.seed));
    put("output_dir", config.output_dir);
    return s;
}

} // namespace semiflow
