#include "semiflow/omega.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "semiflow/errors.hpp"
#include "semiflow/rng.hpp"
#include "semiflow/util.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace semiflow {

double dist_to_points(std::span<const double> state,
                      const std::vector<std::vector<double>>& points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : points) best = std::min(best, dist2(state, p));
    return best;
}

OmegaEstimate estimate_omega(const std::vector<double>& times,
                             const std::vector<std::vector<double>>& states,
                             double tail_fraction, double tol) {
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0))
        throw std::invalid_argument("estimate_omega: tail_fraction must lie in (0,1)");
    if (!(tol > 0.0)) throw std::invalid_argument("estimate_omega: tol must be positive");
    if (times.size() != states.size() || times.empty())
        throw std::invalid_argument("estimate_omega: empty or inconsistent trajectory");

    const double span = times.back() - times.front();
    const double cut = times.back() - tail_fraction * span;
    std::size_t first_tail = times.size();
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] >= cut) {
            first_tail = i;
            break;
        }
    }
    if (first_tail == times.size())
        throw std::invalid_argument("estimate_omega: tail selection is empty");

    OmegaEstimate est;
    est.tol = tol;
    est.transient_cut = times[first_tail];
    // greedy tol-net over the tail, in time order
    for (std::size_t i = first_tail; i < states.size(); ++i)
        if (dist_to_points(states[i], est.points) > tol) est.points.push_back(states[i]);
    est.dist_history.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        est.dist_history.emplace_back(times[i], dist_to_points(states[i], est.points));
    return est;
}

OmegaEstimate estimate_omega(const TrajectorySample& traj, double tail_fraction, double tol) {
    return estimate_omega(traj.times, traj.states, tail_fraction, tol);
}

OmegaEstimate estimate_alpha(const DuffingState& s0, double t_final, double dt,
                             double tail_fraction, double tol) {
    const DuffingTrajectory back = duffing_integrate(s0, t_final, dt, /*backward=*/true);
    std::vector<std::vector<double>> states;
    states.reserve(back.states.size());
    for (std::size_t i = 0; i < back.states.size(); ++i) {
        const auto& s = back.states[i];
        if (!std::isfinite(s.x) || !std::isfinite(s.y) ||
            std::fabs(s.x) + std::fabs(s.y) > 1e12)
            throw blowup_error("backward trajectory escaped", i);
        states.push_back({s.x, s.y});
    }
    return estimate_omega(back.times, states, tail_fraction, tol);
}

double hausdorff_distance(const OmegaEstimate& a, const OmegaEstimate& b) {
    double h = 0.0;
    for (const auto& p : a.points) h = std::max(h, dist_to_points(p, b.points));
    for (const auto& p : b.points) h = std::max(h, dist_to_points(p, a.points));
    return h;
}

double dist_to_set(std::span<const double> state, const IsolatedSet& set) {
    return dist_to_points(state, set.states);
}

void validate_catalog(const IsolatedSetCatalog& catalog) {
    for (std::size_t i = 0; i < catalog.sets.size(); ++i) {
        const auto& si = catalog.sets[i];
        if (si.states.empty())
            throw std::invalid_argument("catalog: set '" + si.label + "' has no states");
        if (!(si.radius > 0.0))
            throw std::invalid_argument("catalog: set '" + si.label + "' needs a positive radius");
        for (std::size_t j = i + 1; j < catalog.sets.size(); ++j) {
            const auto& sj = catalog.sets[j];
            double gap = std::numeric_limits<double>::infinity();
            for (const auto& p : si.states) gap = std::min(gap, dist_to_points(p, sj.states));
            if (gap <= si.radius + sj.radius)
                throw std::invalid_argument("catalog: neighborhoods of '" + si.label + "' and '" +
                                            sj.label + "' overlap (gap " + fmt_double(gap) + ")");
        }
    }
}

namespace {

// One probe trajectory summary, produced independently per (set, probe).
struct ProbeOutcome {
    WitnessRecord witness;
};

std::vector<double> probe_start(const IsolatedSetCatalog& catalog, std::size_t set_index,
                                std::size_t probe, double probe_radius, std::uint64_t seed,
                                std::size_t dim) {
    const auto& set = catalog.sets[set_index];
    const std::size_t base =
        static_cast<std::size_t>(keyed_bits(seed, 0xba5e, set_index, probe) % set.states.size());
    std::vector<double> start = set.states[base];
    std::vector<double> dir(dim);
    double n = 0.0;
    for (std::size_t a = 0; a < dim; ++a) {
        dir[a] = keyed_uniform(seed, 0xd12e + set_index, probe, a, -1.0, 1.0);
        n += dir[a] * dir[a];
    }
    n = std::sqrt(n);
    if (n < 1e-12) {
        dir.assign(dim, 0.0);
        dir[0] = 1.0;
        n = 1.0;
    }
    for (std::size_t a = 0; a < dim; ++a) start[a] += probe_radius * dir[a] / n;
    return start;
}

// Walks the probe forward in fixed observation steps, tracking exit from the
// source neighborhood and the per-set tail maxima over the settlement window.
void run_probe(const IsolatedSetCatalog& catalog, const FlowSystem& sys, WitnessRecord& w) {
    const double T = w.t_final;
    const std::size_t n_obs =
        std::max<std::size_t>(1, std::min<std::size_t>(2000, static_cast<std::size_t>(
                                                                 std::llround(T / w.dt))));
    const double dt_obs = T / static_cast<double>(n_obs);
    const double window = std::min(T, std::max(10.0, 0.2 * T));
    const double window_start = T - window;
    const std::size_t n_sets = catalog.sets.size();

    std::vector<double> tail_max(n_sets, 0.0);
    std::vector<double> state = w.start;
    const double delta_from = catalog.sets[w.from_set].radius;
    auto observe = [&](double t) {
        if (dist_to_set(state, catalog.sets[w.from_set]) > delta_from) w.left_from = true;
        if (t >= window_start)
            for (std::size_t j = 0; j < n_sets; ++j)
                tail_max[j] = std::max(tail_max[j], dist_to_set(state, catalog.sets[j]));
    };
    observe(0.0);
    for (std::size_t k = 0; k < n_obs; ++k) {
        state = sys.advance(state, dt_obs, w.policy, w.seed);
        observe(static_cast<double>(k + 1) * dt_obs);
    }
    w.settled.reset();
    for (std::size_t j = 0; j < n_sets; ++j) {
        if (tail_max[j] < 0.5 * catalog.sets[j].radius) {
            w.settled = j;
            break; // disjoint neighborhoods: at most one set can qualify
        }
    }
}

} // namespace

ConnectionGraph probe_connections(const IsolatedSetCatalog& catalog, const FlowSystem& sys,
                                  std::size_t n_probes, double probe_radius, double t_final,
                                  double dt, std::uint64_t seed, ExecMode mode) {
    validate_catalog(catalog);
    if (!(t_final > 0.0) || !(dt > 0.0))
        throw std::invalid_argument("probe_connections: t_final and dt must be positive");

    ConnectionGraph graph;
    for (const auto& s : catalog.sets) graph.nodes.push_back(s.label);
    if (catalog.sets.empty() || n_probes == 0) return graph;

    const std::size_t total = catalog.sets.size() * n_probes;
    std::vector<ProbeOutcome> outcomes(total);

    const auto run_one = [&](std::size_t idx) {
        const std::size_t set_index = idx / n_probes;
        const std::size_t probe = idx % n_probes;
        WitnessRecord w;
        w.id = idx;
        w.from_set = set_index;
        w.probe_index = probe;
        w.start = probe_start(catalog, set_index, probe, probe_radius, seed, sys.dim());
        w.t_final = t_final;
        w.dt = dt;
        w.policy = probe % std::max<std::size_t>(sys.max_selections(), 1);
        w.seed = keyed_bits(seed, 0x9b0e, set_index, probe);
        try {
            run_probe(catalog, sys, w);
        } catch (const blowup_error&) {
            w.settled.reset(); // escaped probes count as unresolved
            w.left_from = true;
        }
        outcomes[idx].witness = std::move(w);
    };

#ifdef _OPENMP
    if (mode == ExecMode::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < static_cast<long long>(total); ++i)
            run_one(static_cast<std::size_t>(i));
    } else
#else
    (void)mode;
#endif
    {
        for (std::size_t i = 0; i < total; ++i) run_one(i);
    }

    // single-threaded reduction keeps witness ids stable
    for (auto& out : outcomes) {
        auto& w = out.witness;
        const std::size_t id = graph.witnesses.size();
        w.id = id;
        if (!w.settled) {
            ++graph.unresolved;
        } else if (*w.settled != w.from_set || w.left_from) {
            // a same-set settlement only counts once the probe actually left
            graph.edges.push_back({w.from_set, *w.settled, id});
        }
        graph.witnesses.push_back(std::move(w));
    }
    // collapse parallel edges: keep the first witness per (from, to)
    std::vector<ConnectionEdge> unique_edges;
    for (const auto& e : graph.edges) {
        const bool dup = std::any_of(unique_edges.begin(), unique_edges.end(),
                                     [&](const ConnectionEdge& u) {
                                         return u.from == e.from && u.to == e.to;
                                     });
        if (!dup) unique_edges.push_back(e);
    }
    graph.edges = std::move(unique_edges);
    return graph;
}

bool replay_witness(const ConnectionGraph& graph, std::size_t witness_id,
                    const IsolatedSetCatalog& catalog, const FlowSystem& sys) {
    if (witness_id >= graph.witnesses.size())
        throw std::invalid_argument("replay_witness: bad witness id");
    WitnessRecord w = graph.witnesses[witness_id];
    const bool old_left = w.left_from;
    const auto old_settled = w.settled;
    w.left_from = false;
    run_probe(catalog, sys, w);
    return w.left_from == old_left && w.settled == old_settled;
}

CyclicChainReport find_cyclic_chain(const ConnectionGraph& graph) {
    CyclicChainReport report;
    const std::size_t n = graph.nodes.size();
    std::vector<std::vector<std::size_t>> adj(n); // edge indices per source
    for (std::size_t e = 0; e < graph.edges.size(); ++e)
        adj[graph.edges[e].from].push_back(e);

    // DFS with colors; the first back edge closes the reported cycle
    enum : std::uint8_t { kWhite, kGray, kBlack };
    std::vector<std::uint8_t> color(n, kWhite);
    std::vector<std::size_t> path_nodes, path_edges;

    struct Frame {
        std::size_t node;
        std::size_t next;
    };
    for (std::size_t root = 0; root < n && !report.found; ++root) {
        if (color[root] != kWhite) continue;
        std::vector<Frame> stack{{root, 0}};
        color[root] = kGray;
        path_nodes = {root};
        path_edges.clear();
        while (!stack.empty() && !report.found) {
            auto& fr = stack.back();
            if (fr.next < adj[fr.node].size()) {
                const std::size_t e = adj[fr.node][fr.next++];
                const std::size_t w = graph.edges[e].to;
                if (color[w] == kGray) {
                    // unwind the current path down to w
                    report.found = true;
                    auto it = std::find(path_nodes.begin(), path_nodes.end(), w);
                    const auto offset =
                        static_cast<std::size_t>(std::distance(path_nodes.begin(), it));
                    for (std::size_t i = offset; i < path_nodes.size(); ++i)
                        report.cycle.push_back(graph.nodes[path_nodes[i]]);
                    for (std::size_t i = offset; i + 1 < path_nodes.size(); ++i)
                        report.witnesses.push_back(graph.edges[path_edges[i]]);
                    report.witnesses.push_back(graph.edges[e]);
                    break;
                }
                if (color[w] == kWhite) {
                    color[w] = kGray;
                    stack.push_back({w, 0});
                    path_nodes.push_back(w);
                    path_edges.push_back(e);
                }
            } else {
                color[fr.node] = kBlack;
                stack.pop_back();
                path_nodes.pop_back();
                if (!path_edges.empty()) path_edges.pop_back();
            }
        }
    }
    return report;
}

IsolationReport isolation_check(const IsolatedSet& entry, const FlowSystem& sys,
                                std::size_t annulus_resolution, double t_flow, double epsilon,
                                ExecMode mode) {
    if (entry.states.empty())
        throw std::invalid_argument("isolation_check: set has no states");
    const std::size_t dim = sys.dim();
    if (dim > 3) throw std::invalid_argument("isolation_check: dimension above 3");
    if (annulus_resolution == 0)
        throw std::invalid_argument("isolation_check: zero resolution");

    IsolationReport report;
    report.label = entry.label;

    std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
    std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
    for (const auto& s : entry.states) {
        for (std::size_t a = 0; a < dim; ++a) {
            lo[a] = std::min(lo[a], s[a] - entry.radius);
            hi[a] = std::max(hi[a], s[a] + entry.radius);
        }
    }
    std::vector<std::size_t> res(dim, annulus_resolution);
    const CellComplex complex = make_complex(lo, hi, res);

    // annulus: within delta of the set but at least one cell diameter away,
    // so the set's own cells are excluded
    const double inner = complex.cell_diameter();
    const auto filter = [&](const CellComplex& c, std::size_t cell) {
        const double d = dist_to_points(c.center(cell), entry.states);
        return d <= entry.radius && d >= inner;
    };

    if (inner >= entry.radius) {
        report.empty_annulus = true;
        report.isolated = true; // vacuous: no cell fits between set and delta
        return report;
    }

    const TransitionGraph graph = build_transition_graph(
        sys, complex, t_flow, epsilon, /*n_samples=*/2, /*n_selections=*/1,
        /*seed=*/0x150a, mode, filter);
    for (auto a : graph.active) report.active_cells += a;
    if (report.active_cells == 0) {
        report.empty_annulus = true;
        report.isolated = true;
        return report;
    }
    report.recurrent_cells = chain_recurrent_cells(graph);
    report.isolated = report.recurrent_cells.empty();
    return report;
}

} // namespace semiflow
