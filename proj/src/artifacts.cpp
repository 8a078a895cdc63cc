#include "semiflow/artifacts.hpp"

#include <fstream>
#include <stdexcept>

#include "semiflow/util.hpp"

namespace semiflow {

namespace fs = std::filesystem;

ArtifactWriter::ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {
    if (!fs::exists(dir_)) {
        fs::create_directories(dir_);
        created_dir_ = true;
    } else if (!fs::is_directory(dir_)) {
        throw std::invalid_argument("artifact dir exists and is not a directory: " +
                                    dir_.string());
    }
}

void ArtifactWriter::write_text(const std::string& rel_path, const std::string& content) {
    const fs::path full = dir_ / rel_path;
    if (full.has_parent_path()) fs::create_directories(full.parent_path());
    std::ofstream out(full, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + full.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw std::runtime_error("short write: " + full.string());
    entries_.push_back({rel_path, fnv1a64_hex(content), content.size()});
}

void ArtifactWriter::finalize(const std::string& config_echo, double wall_seconds) {
    nlohmann::json manifest;
    manifest["config"] = config_echo;
    manifest["version"] = "semiflow 1.0.0";
    manifest["wall_seconds"] = wall_seconds;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& e : entries_) {
        files.push_back({{"path", e.path}, {"fnv1a64", e.hash}, {"bytes", e.bytes}});
    }
    manifest["outputs"] = files;
    const std::string text = manifest.dump(2) + "\n";
    const fs::path full = dir_ / "manifest.json";
    std::ofstream out(full, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest: " + full.string());
    out << text;
}

void ArtifactWriter::discard() {
    std::error_code ec;
    for (const auto& e : entries_) fs::remove(dir_ / e.path, ec);
    fs::remove(dir_ / "manifest.json", ec);
    entries_.clear();
    if (created_dir_) fs::remove(dir_, ec); // only succeeds when empty
}

namespace {

std::string state_header(std::size_t dim) {
    std::string h = "t";
    if (dim == 2) {
        h += ",x,y";
    } else {
        for (std::size_t a = 0; a < dim; ++a) h += ",u" + std::to_string(a);
    }
    return h + "\n";
}

} // namespace

std::string trajectory_csv(const TrajectorySample& traj) {
    if (traj.states.empty()) return "t\n";
    std::string s = state_header(traj.states.front().size());
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        s += fmt_double(traj.times[k]);
        for (double v : traj.states[k]) {
            s += ",";
            s += fmt_double(v);
        }
        s += "\n";
    }
    return s;
}

std::string duffing_csv(const DuffingTrajectory& traj) {
    std::string s = "t,x,y,V\n";
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        s += fmt_double(traj.times[k]);
        s += ",";
        s += fmt_double(traj.states[k].x);
        s += ",";
        s += fmt_double(traj.states[k].y);
        s += ",";
        s += fmt_double(duffing_energy(traj.states[k]));
        s += "\n";
    }
    return s;
}

std::string profile_csv(std::span<const double> u, double length) {
    const double dx = length / static_cast<double>(u.size() + 1);
    std::string s = "x,u\n";
    s += "0,0\n";
    for (std::size_t j = 0; j < u.size(); ++j) {
        s += fmt_double(static_cast<double>(j + 1) * dx);
        s += ",";
        s += fmt_double(u[j]);
        s += "\n";
    }
    s += fmt_double(length);
    s += ",0\n";
    return s;
}

std::string dist_history_csv(const std::vector<std::pair<double, double>>& history) {
    std::string s = "t,dist\n";
    for (const auto& [t, d] : history) {
        s += fmt_double(t);
        s += ",";
        s += fmt_double(d);
        s += "\n";
    }
    return s;
}

std::string points_csv(const std::vector<std::vector<double>>& points) {
    if (points.empty()) return "\n";
    const std::size_t dim = points.front().size();
    std::string s;
    if (dim == 2) {
        s = "x,y\n";
    } else {
        for (std::size_t a = 0; a < dim; ++a) s += (a ? ",u" : "u") + std::to_string(a);
        s += "\n";
    }
    for (const auto& p : points) {
        for (std::size_t a = 0; a < dim; ++a) {
            if (a) s += ",";
            s += fmt_double(p[a]);
        }
        s += "\n";
    }
    return s;
}

std::string transition_graph_dot(const TransitionGraph& graph,
                                 const std::vector<std::uint32_t>& recurrent) {
    std::vector<std::uint8_t> mark(graph.complex.cell_count(), 0);
    for (auto c : recurrent) mark[c] = 1;
    std::string s = "digraph transitions {\n";
    s += "  // node = cell index; doublecircle = chain-recurrent\n";
    for (std::size_t c = 0; c < graph.edges.size(); ++c) {
        if (!graph.active[c]) continue;
        s += "  c" + std::to_string(c);
        if (mark[c]) {
            s += " [shape=doublecircle]";
        } else if (graph.escaped[c]) {
            s += " [shape=octagon]";
        }
        s += ";\n";
    }
    for (std::size_t c = 0; c < graph.edges.size(); ++c) {
        for (auto to : graph.edges[c])
            s += "  c" + std::to_string(c) + " -> c" + std::to_string(to) + ";\n";
    }
    s += "}\n";
    return s;
}

std::string connection_graph_dot(const ConnectionGraph& graph) {
    std::string s = "digraph connections {\n";
    for (const auto& n : graph.nodes) s += "  \"" + n + "\";\n";
    for (const auto& e : graph.edges)
        s += "  \"" + graph.nodes[e.from] + "\" -> \"" + graph.nodes[e.to] + "\" [label=\"w" +
             std::to_string(e.witness) + "\"];\n";
    s += "}\n";
    return s;
}

nlohmann::json chain_json(const EpsChain& chain) {
    nlohmann::json j;
    j["epsilon"] = chain.epsilon;
    j["points"] = chain.points;
    j["times"] = chain.times;
    return j;
}

nlohmann::json chain_check_json(const ChainCheck& check) {
    nlohmann::json j;
    j["pass"] = check.pass;
    j["max_residual"] = check.max_residual;
    j["residuals"] = check.residuals;
    return j;
}

nlohmann::json graph_summary_json(const TransitionGraph& graph,
                                  const std::vector<std::uint32_t>& recurrent) {
    nlohmann::json j;
    j["cells"] = graph.complex.cell_count();
    std::size_t active = 0, escaped = 0;
    for (auto a : graph.active) active += a;
    for (auto e : graph.escaped) escaped += e;
    j["active_cells"] = active;
    j["escaped_cells"] = escaped;
    j["edges"] = graph.edge_count();
    j["recurrent_cells"] = recurrent.size();
    j["epsilon"] = graph.epsilon;
    j["t_flow"] = graph.t_flow;
    j["samples"] = graph.n_samples;
    j["selections"] = graph.n_selections;
    j["seed"] = graph.seed;
    std::vector<std::size_t> res(graph.complex.res.begin(),
                                 graph.complex.res.begin() +
                                     static_cast<long>(graph.complex.dim));
    j["resolution"] = res;
    return j;
}

nlohmann::json connection_graph_json(const ConnectionGraph& graph) {
    nlohmann::json j;
    j["nodes"] = graph.nodes;
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : graph.edges)
        edges.push_back({{"from", graph.nodes[e.from]},
                         {"to", graph.nodes[e.to]},
                         {"witness", e.witness}});
    j["edges"] = edges;
    j["unresolved_probes"] = graph.unresolved;
    nlohmann::json wit = nlohmann::json::array();
    for (const auto& w : graph.witnesses) {
        nlohmann::json jw;
        jw["id"] = w.id;
        jw["from_set"] = graph.nodes[w.from_set];
        jw["probe_index"] = w.probe_index;
        jw["t_final"] = w.t_final;
        jw["dt"] = w.dt;
        jw["policy"] = w.policy;
        jw["seed"] = w.seed;
        jw["left_from"] = w.left_from;
        if (w.settled) jw["settled"] = graph.nodes[*w.settled];
        if (!w.csv_path.empty()) jw["csv"] = w.csv_path;
        jw["start"] = w.start;
        wit.push_back(std::move(jw));
    }
    j["witnesses"] = wit;
    return j;
}

nlohmann::json equilibria_json(const EquilibriumSet& set, const std::vector<double>& energies,
                               const std::string& map_id) {
    nlohmann::json j;
    j["map"] = map_id;
    j["count"] = set.profiles.size();
    j["slopes"] = set.shooting_slopes;
    j["residuals"] = set.residuals;
    j["energies"] = energies;
    j["outer_sign_change"] = set.outer_sign_change;
    j["warnings"] = set.warnings;
    return j;
}

} // namespace semiflow
