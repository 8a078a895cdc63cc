#include "semiflow/run.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>

#include "semiflow/artifacts.hpp"
#include "semiflow/errors.hpp"
#include "semiflow/flow.hpp"
#include "semiflow/rng.hpp"
#include "semiflow/util.hpp"

namespace semiflow {

namespace {

namespace fs = std::filesystem;

// Distinguishes a failed check (exit 1) from bad input (exit 2).
struct verification_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

fs::path resolve_output_dir(const RunConfig& cfg) {
    fs::path dir = cfg.output_dir;
    if (const char* root = std::getenv("SEMIFLOW_OUTPUT_ROOT"); root && *root && dir.is_relative())
        dir = fs::path(root) / dir;
    return dir;
}

double parse_lambda(const std::string& map_id) {
    const std::string prefix = "cubic:lambda=";
    if (map_id.rfind(prefix, 0) != 0)
        throw std::invalid_argument("this command needs a cubic map (got '" + map_id + "')");
    return std::stod(map_id.substr(prefix.size()));
}

ReactionProfile profile_for(const RunConfig& cfg) {
    ReactionProfile p = cubic_profile(parse_lambda(cfg.map_id));
    p.form = cfg.form == "rd" ? ProblemForm::reaction_diffusion : ProblemForm::chafee_infante;
    return p;
}

std::unique_ptr<FlowSystem> flow_system_for(const RunConfig& cfg) {
    if (cfg.map_id == "duffing")
        return std::make_unique<DuffingFlowSystem>(std::min(cfg.dt, 1e-2));
    const LinearOperator op = assemble_laplacian(cfg.operator_size, 1.0);
    return std::make_unique<InclusionFlowSystem>(op, make_named_map(cfg.map_id), cfg.dt);
}

std::size_t stride_for(double t_final, double dt, std::size_t cap = 2000) {
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::round(t_final / dt)));
    return std::max<std::size_t>(1, steps / cap);
}

std::vector<double> initial_state(const RunConfig& cfg, std::size_t dim, double amplitude) {
    if (cfg.chain_from.size() == dim) return cfg.chain_from;
    std::vector<double> y0(dim);
    for (std::size_t j = 0; j < dim; ++j)
        y0[j] = keyed_uniform(cfg.seed, 0x51a7, j, 0, -amplitude, amplitude);
    return y0;
}

// ---- simulate ----

void cmd_simulate(const RunConfig& cfg, ArtifactWriter& writer) {
    nlohmann::json summary;
    summary["command"] = "simulate";
    summary["map"] = cfg.map_id;
    summary["t_final"] = cfg.t_final;
    summary["dt"] = cfg.dt;
    if (cfg.map_id == "duffing") {
        const std::vector<double> x0 = cfg.chain_from.size() == 2
                                           ? cfg.chain_from
                                           : std::vector<double>{0.5, 0.0};
        const DuffingTrajectory traj =
            duffing_integrate({x0[0], x0[1]}, cfg.t_final, cfg.dt, false,
                              stride_for(cfg.t_final, cfg.dt));
        writer.write_text("trajectory.csv", duffing_csv(traj));
        double drift = 0.0;
        const double v0 = duffing_energy(traj.states.front());
        for (const auto& s : traj.states)
            drift = std::max(drift, std::fabs(duffing_energy(s) - v0));
        summary["v_drift"] = drift;
    } else {
        const LinearOperator op = assemble_laplacian(cfg.operator_size, 1.0);
        const ScalarSetMap map = make_named_map(cfg.map_id);
        const std::vector<double> y0 = initial_state(cfg, cfg.operator_size, 2.0);
        IntegrateOptions opt;
        opt.t_final = cfg.t_final;
        opt.dt = cfg.dt;
        opt.stride = stride_for(cfg.t_final, cfg.dt);
        TrajectorySample traj;
        try {
            traj = integrate(op, map, SelectionPolicy{}, y0, opt);
        } catch (const blowup_error& e) {
            throw verification_failure(std::string("trajectory blew up: ") + e.what());
        }
        writer.write_text("trajectory.csv", trajectory_csv(traj));
        double sup = 0.0;
        for (double v : traj.states.back()) sup = std::max(sup, std::fabs(v));
        summary["final_sup_norm"] = sup;
    }
    writer.write_text("summary.json", summary.dump(2) + "\n");
}

// ---- equilibria ----

EquilibriumSet equilibria_for(const RunConfig& cfg, const ReactionProfile& profile) {
    return find_equilibria(profile, cfg.operator_size, 0.0, 400, std::min(cfg.tol, 1e-8));
}

void write_equilibria(const RunConfig& cfg, ArtifactWriter& writer,
                      const ReactionProfile& profile, const EquilibriumSet& set,
                      std::vector<double>& energies) {
    const LinearOperator op = assemble_laplacian(cfg.operator_size, 1.0);
    energies.clear();
    for (std::size_t i = 0; i < set.profiles.size(); ++i) {
        energies.push_back(energy(set.profiles[i], profile, op));
        writer.write_text("equilibrium_" + std::to_string(i) + ".csv",
                          profile_csv(set.profiles[i], 1.0));
    }
    writer.write_text("equilibria.json",
                      equilibria_json(set, energies, cfg.map_id).dump(2) + "\n");
}

void cmd_equilibria(const RunConfig& cfg, ArtifactWriter& writer) {
    const ReactionProfile profile = profile_for(cfg);
    const EquilibriumSet set = equilibria_for(cfg, profile);
    std::vector<double> energies;
    write_equilibria(cfg, writer, profile, set, energies);
}

// ---- graph / chain ----

struct GraphBundle {
    std::unique_ptr<FlowSystem> sys;
    TransitionGraph graph;
};

GraphBundle build_graph_bundle(const RunConfig& cfg, const CellFilter& filter = {}) {
    GraphBundle bundle;
    bundle.sys = flow_system_for(cfg);
    if (bundle.sys->dim() != cfg.bounds_lo.size())
        throw std::invalid_argument("graph bounds dimension " +
                                    std::to_string(cfg.bounds_lo.size()) +
                                    " does not match the system dimension " +
                                    std::to_string(bundle.sys->dim()));
    const CellComplex complex = make_complex(cfg.bounds_lo, cfg.bounds_hi, cfg.resolution);
    const double eps = cfg.epsilon > 0.0 ? cfg.epsilon : complex.cell_diameter();
    bundle.graph = build_transition_graph(*bundle.sys, complex, cfg.t_flow, eps, cfg.samples,
                                          cfg.selections, cfg.seed, ExecMode::parallel, filter);
    return bundle;
}

std::string recurrent_csv(const TransitionGraph& graph,
                          const std::vector<std::uint32_t>& recurrent) {
    std::string s = "cell";
    for (std::size_t a = 0; a < graph.complex.dim; ++a) s += ",c" + std::to_string(a);
    s += "\n";
    for (auto cell : recurrent) {
        s += std::to_string(cell);
        for (double v : graph.complex.center(cell)) {
            s += ",";
            s += fmt_double(v);
        }
        s += "\n";
    }
    return s;
}

void cmd_graph(const RunConfig& cfg, ArtifactWriter& writer) {
    const GraphBundle bundle = build_graph_bundle(cfg);
    const auto recurrent = chain_recurrent_cells(bundle.graph);
    writer.write_text("graph_summary.json",
                      graph_summary_json(bundle.graph, recurrent).dump(2) + "\n");
    writer.write_text("recurrent_cells.csv", recurrent_csv(bundle.graph, recurrent));
    if (bundle.graph.complex.cell_count() <= 20000)
        writer.write_text("graph.dot", transition_graph_dot(bundle.graph, recurrent));
}

void cmd_chain(const RunConfig& cfg, ArtifactWriter& writer) {
    const GraphBundle bundle = build_graph_bundle(cfg);
    if (cfg.chain_from.size() != bundle.graph.complex.dim ||
        cfg.chain_to.size() != bundle.graph.complex.dim)
        throw std::invalid_argument("chain_from/chain_to must match the graph dimension");
    const auto from = bundle.graph.complex.locate(cfg.chain_from);
    const auto to = bundle.graph.complex.locate(cfg.chain_to);
    if (!from || !to)
        throw std::invalid_argument("chain endpoints must lie inside the graph bounds");
    const auto chain = find_eps_chain(bundle.graph, *from, *to);
    if (!chain) throw verification_failure("no chain found between the requested cells");
    const ChainCheck check = verify_chain(*bundle.sys, *chain, cfg.selections, cfg.seed);
    writer.write_text("chain.json", chain_json(*chain).dump(2) + "\n");
    writer.write_text("chain_check.json", chain_check_json(check).dump(2) + "\n");
    if (!check.pass)
        throw verification_failure("chain verification failed: max residual " +
                                   fmt_double(check.max_residual) + " at epsilon " +
                                   fmt_double(chain->epsilon));
}

// ---- omega ----

void cmd_omega(const RunConfig& cfg, ArtifactWriter& writer) {
    OmegaEstimate est;
    if (cfg.map_id == "duffing") {
        const std::vector<double> x0 = cfg.chain_from.size() == 2
                                           ? cfg.chain_from
                                           : std::vector<double>{0.5, 0.0};
        const DuffingTrajectory traj =
            duffing_integrate({x0[0], x0[1]}, cfg.t_final, cfg.dt, false,
                              stride_for(cfg.t_final, cfg.dt, 20000));
        std::vector<std::vector<double>> states;
        states.reserve(traj.states.size());
        for (const auto& s : traj.states) states.push_back({s.x, s.y});
        est = estimate_omega(traj.times, states, cfg.tail_fraction, cfg.tol);
    } else {
        const LinearOperator op = assemble_laplacian(cfg.operator_size, 1.0);
        const ScalarSetMap map = make_named_map(cfg.map_id);
        IntegrateOptions opt;
        opt.t_final = cfg.t_final;
        opt.dt = cfg.dt;
        opt.stride = stride_for(cfg.t_final, cfg.dt, 20000);
        const TrajectorySample traj =
            integrate(op, map, SelectionPolicy{}, initial_state(cfg, cfg.operator_size, 2.0),
                      opt);
        est = estimate_omega(traj, cfg.tail_fraction, cfg.tol);
    }
    writer.write_text("omega_points.csv", points_csv(est.points));
    writer.write_text("dist_history.csv", dist_history_csv(est.dist_history));
    nlohmann::json summary;
    summary["points"] = est.points.size();
    summary["transient_cut"] = est.transient_cut;
    summary["tol"] = est.tol;
    summary["final_distance"] = est.dist_history.empty() ? 0.0 : est.dist_history.back().second;
    writer.write_text("omega.json", summary.dump(2) + "\n");
}

// ---- connections ----

std::vector<std::string> equilibrium_labels(const EquilibriumSet& set) {
    std::vector<std::string> labels;
    std::size_t pos = 0, neg = 0;
    for (const auto& u : set.profiles) {
        double extreme = 0.0;
        for (double v : u)
            if (std::fabs(v) > std::fabs(extreme)) extreme = v;
        if (std::fabs(extreme) < 1e-8) {
            labels.push_back("zero");
        } else if (extreme > 0.0) {
            labels.push_back("pos" + std::to_string(pos++));
        } else {
            labels.push_back("neg" + std::to_string(neg++));
        }
    }
    return labels;
}

void cmd_connections(const RunConfig& cfg, ArtifactWriter& writer) {
    const ReactionProfile profile = profile_for(cfg);
    const EquilibriumSet set = equilibria_for(cfg, profile);
    std::vector<double> energies;
    write_equilibria(cfg, writer, profile, set, energies);
    if (set.profiles.empty()) throw verification_failure("no equilibria found to probe");

    const auto labels = equilibrium_labels(set);
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < set.profiles.size(); ++i)
        for (std::size_t j = i + 1; j < set.profiles.size(); ++j)
            min_gap = std::min(min_gap, dist2(set.profiles[i], set.profiles[j]));
    const double delta = std::isfinite(min_gap) ? std::min(0.4, min_gap / 4.0) : 0.4;

    IsolatedSetCatalog catalog;
    catalog.isolation_radius = delta;
    for (std::size_t i = 0; i < set.profiles.size(); ++i)
        catalog.sets.push_back({labels[i], {set.profiles[i]}, delta});

    const LinearOperator op = assemble_laplacian(cfg.operator_size, 1.0);
    const InclusionFlowSystem sys(op, make_named_map(cfg.map_id), cfg.dt);
    ConnectionGraph graph = probe_connections(catalog, sys, cfg.probes, cfg.probe_radius,
                                              cfg.t_final, cfg.dt, cfg.seed);

    // store a trajectory for every edge witness and remember its path
    IntegrateOptions opt;
    opt.t_final = cfg.t_final;
    opt.dt = cfg.dt;
    opt.stride = stride_for(cfg.t_final, cfg.dt);
    const ScalarSetMap map = make_named_map(cfg.map_id);
    for (const auto& e : graph.edges) {
        auto& w = graph.witnesses[e.witness];
        const TrajectorySample traj =
            integrate(op, map, policy_for_index(w.policy, w.seed), w.start, opt);
        w.csv_path = "witness_" + std::to_string(w.id) + ".csv";
        writer.write_text(w.csv_path, trajectory_csv(traj));
    }

    const CyclicChainReport cycle = find_cyclic_chain(graph);
    nlohmann::json report = connection_graph_json(graph);
    report["delta"] = delta;
    report["cycle_found"] = cycle.found;
    report["cycle"] = cycle.cycle;
    nlohmann::json ordering = nlohmann::json::array();
    for (const auto& e : graph.edges)
        ordering.push_back({{"from", labels[e.from]},
                            {"to", labels[e.to]},
                            {"energy_from", energies[e.from]},
                            {"energy_to", energies[e.to]},
                            {"decreasing", energies[e.to] < energies[e.from]}});
    report["energy_ordering"] = ordering;
    writer.write_text("connections.json", report.dump(2) + "\n");
    writer.write_text("connections.dot", connection_graph_dot(graph));
}

// ---- demo: duffing band ----

bool cell_meets_band(const CellComplex& complex, std::size_t cell) {
    std::array<double, 3> blo{}, bhi{};
    complex.cell_bounds(cell, std::span<double>(blo.data(), complex.dim),
                        std::span<double>(bhi.data(), complex.dim));
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double x = blo[0] + 0.5 * static_cast<double>(i) * (bhi[0] - blo[0]);
            const double y = blo[1] + 0.5 * static_cast<double>(j) * (bhi[1] - blo[1]);
            if (duffing_in_band({x, y})) return true;
        }
    }
    return false;
}

void cmd_demo_duffing(const RunConfig& cfg, ArtifactWriter& writer) {
    // conservation along a sample orbit
    const DuffingTrajectory traj = duffing_integrate({0.5, 0.0}, cfg.t_final, cfg.dt, false,
                                                     stride_for(cfg.t_final, cfg.dt));
    writer.write_text("trajectory.csv", duffing_csv(traj));
    const double v0 = duffing_energy(traj.states.front());
    double drift = 0.0;
    for (const auto& s : traj.states)
        drift = std::max(drift, std::fabs(duffing_energy(s) - v0));
    nlohmann::json conservation;
    conservation["v0"] = v0;
    conservation["max_drift"] = drift;
    conservation["pass"] = drift <= 1e-6;
    writer.write_text("conservation.json", conservation.dump(2) + "\n");

    // band transition graph
    RunConfig gcfg = cfg;
    gcfg.map_id = "duffing";
    const GraphBundle bundle = build_graph_bundle(gcfg, cell_meets_band);
    const auto recurrent = chain_recurrent_cells(bundle.graph);
    writer.write_text("band_summary.json",
                      graph_summary_json(bundle.graph, recurrent).dump(2) + "\n");
    if (bundle.graph.complex.cell_count() <= 20000)
        writer.write_text("band_graph.dot", transition_graph_dot(bundle.graph, recurrent));

    // returning chain from the sample orbit's cell
    const auto start = bundle.graph.complex.locate(std::vector<double>{0.5, 0.0});
    if (!start) throw verification_failure("band complex does not contain the sample point");
    const auto chain = find_eps_chain(bundle.graph, *start, *start);
    if (!chain) throw verification_failure("no returning chain found in the band");
    const ChainCheck check = verify_chain(*bundle.sys, *chain, 1, cfg.seed);
    writer.write_text("return_chain.json", chain_json(*chain).dump(2) + "\n");
    writer.write_text("chain_check.json", chain_check_json(check).dump(2) + "\n");
    if (!conservation["pass"].get<bool>())
        throw verification_failure("energy drift " + fmt_double(drift) + " above 1e-6");
    if (!check.pass)
        throw verification_failure("returning chain failed verification: max residual " +
                                   fmt_double(check.max_residual));
}

// ---- demo: reaction-diffusion settlement ----

void cmd_demo_chafee(const RunConfig& cfg, ArtifactWriter& writer) {
    const ReactionProfile profile = profile_for(cfg);
    const EquilibriumSet set = equilibria_for(cfg, profile);
    std::vector<double> energies;
    write_equilibria(cfg, writer, profile, set, energies);
    if (set.profiles.empty()) throw verification_failure("no equilibria found");

    const LinearOperator op = assemble_laplacian(cfg.operator_size, 1.0);
    const ScalarSetMap map = make_named_map(cfg.map_id);
    IntegrateOptions opt;
    opt.t_final = cfg.t_final;
    opt.dt = cfg.dt;
    opt.stride = stride_for(cfg.t_final, cfg.dt);

    std::string table = "run,classified,final_distance,max_energy_increment,energy_pass\n";
    std::size_t unresolved = 0, energy_failures = 0;
    double worst_increment = 0.0;
    for (std::size_t r = 0; r < cfg.runs; ++r) {
        std::vector<double> y0(cfg.operator_size);
        for (std::size_t j = 0; j < y0.size(); ++j)
            y0[j] = keyed_uniform(cfg.seed, 0xc2af, r, j, -2.5, 2.5);
        const TrajectorySample traj = integrate(op, map, SelectionPolicy{}, y0, opt);
        const EnergyReport report = verify_energy_decrease(traj, profile, op, 1e-6);
        const Classification cls = classify_omega(traj, set, cfg.tol);
        if (!cls.index) ++unresolved;
        if (!report.pass) ++energy_failures;
        worst_increment = std::max(worst_increment, report.max_increment);
        table += std::to_string(r) + "," +
                 (cls.index ? std::to_string(*cls.index) : std::string("unresolved")) + "," +
                 fmt_double(cls.final_distance) + "," + fmt_double(report.max_increment) + "," +
                 (report.pass ? "1" : "0") + "\n";
    }
    writer.write_text("classification.csv", table);
    nlohmann::json summary;
    summary["runs"] = cfg.runs;
    summary["equilibria"] = set.profiles.size();
    summary["unresolved"] = unresolved;
    summary["energy_failures"] = energy_failures;
    summary["worst_energy_increment"] = worst_increment;
    summary["energies"] = energies;
    writer.write_text("demo_summary.json", summary.dump(2) + "\n");
    if (unresolved > 0)
        throw verification_failure(std::to_string(unresolved) + " runs failed to settle");
    if (energy_failures > 0)
        throw verification_failure(std::to_string(energy_failures) +
                                   " runs violated energy decrease");
}

void dispatch(const RunConfig& cfg, ArtifactWriter& writer) {
    if (cfg.command == "simulate") return cmd_simulate(cfg, writer);
    if (cfg.command == "equilibria") return cmd_equilibria(cfg, writer);
    if (cfg.command == "graph") return cmd_graph(cfg, writer);
    if (cfg.command == "chain") return cmd_chain(cfg, writer);
    if (cfg.command == "omega") return cmd_omega(cfg, writer);
    if (cfg.command == "connections") return cmd_connections(cfg, writer);
    if (cfg.command == "demo-duffing") return cmd_demo_duffing(cfg, writer);
    if (cfg.command == "demo-chafee") return cmd_demo_chafee(cfg, writer);
    throw std::invalid_argument("unknown command '" + cfg.command + "'");
}

} // namespace

RunResult run(const RunConfig& cfg) {
    RunResult result;
    const fs::path dir = resolve_output_dir(cfg);
    result.output_dir = dir.string();
    std::unique_ptr<ArtifactWriter> writer;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        writer = std::make_unique<ArtifactWriter>(dir);
        dispatch(cfg, *writer);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        writer->finalize(render_config(cfg), wall);
        result.exit_code = 0;
        result.message = "ok";
    } catch (const verification_failure& e) {
        if (writer) writer->discard();
        result.exit_code = 1;
        result.message = e.what();
    } catch (const std::exception& e) {
        if (writer) writer->discard();
        result.exit_code = 2;
        result.message = e.what();
    }
    return result;
}

namespace {

void print_usage(std::ostream& out) {
    out << "usage: semiflow <command> [--config <file>]\n"
        << "commands:";
    for (const auto& c : known_commands()) out << " " << c;
    out << "\n"
        << "config: flat key = value lines, '#' comments; see README\n"
        << "env: SEMIFLOW_OUTPUT_ROOT prefixes relative output_dir\n";
}

bool declares_command(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        const auto hash = raw.find('#');
        std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        key.erase(0, key.find_first_not_of(" \t"));
        key.erase(key.find_last_not_of(" \t") + 1);
        if (key == "command") return true;
    }
    return false;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    if (args.empty()) {
        print_usage(std::cerr);
        return 2;
    }
    if (args[0] == "--help" || args[0] == "-h") {
        print_usage(std::cout);
        return 0;
    }
    const std::string command = args[0];
    std::string config_path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[++i];
        } else {
            std::cerr << "unexpected argument '" << args[i] << "'\n";
            print_usage(std::cerr);
            return 2;
        }
    }

    std::string text;
    if (!config_path.empty()) {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) {
            std::cerr << "cannot read config file '" << config_path << "'\n";
            return 2;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    }
    if (!declares_command(text)) text = "command = " + command + "\n" + text;

    const ParseOutcome outcome = parse_config(text);
    if (!outcome.config) {
        for (const auto& e : outcome.errors) {
            if (e.line)
                std::cerr << "config line " << e.line << ": " << e.message << "\n";
            else
                std::cerr << "config: " << e.message << "\n";
        }
        return 2;
    }
    if (outcome.config->command != command) {
        std::cerr << "config command '" << outcome.config->command
                  << "' conflicts with CLI command '" << command << "'\n";
        return 2;
    }

    const RunResult result = run(*outcome.config);
    if (result.exit_code == 0)
        std::cout << "ok: artifacts in " << result.output_dir << "\n";
    else
        std::cerr << "error (exit " << result.exit_code << "): " << result.message << "\n";
    return result.exit_code;
}

} // namespace semiflow
