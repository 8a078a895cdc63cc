#include "semiflow/cellgraph.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>

#include "semiflow/errors.hpp"
#include "semiflow/rng.hpp"
#include "semiflow/util.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace semiflow {

std::size_t CellComplex::cell_count() const {
    std::size_t n = 1;
    for (std::size_t a = 0; a < dim; ++a) n *= res[a];
    return n;
}

double CellComplex::width(std::size_t axis) const {
    return (hi[axis] - lo[axis]) / static_cast<double>(res[axis]);
}

double CellComplex::cell_diameter() const {
    double s = 0.0;
    for (std::size_t a = 0; a < dim; ++a) s += width(a) * width(a);
    return std::sqrt(s);
}

std::array<std::size_t, 3> CellComplex::multi_index(std::size_t cell) const {
    std::array<std::size_t, 3> mi{0, 0, 0};
    for (std::size_t a = 0; a < dim; ++a) {
        mi[a] = cell % res[a];
        cell /= res[a];
    }
    return mi;
}

std::size_t CellComplex::flat_index(const std::array<std::size_t, 3>& mi) const {
    std::size_t idx = 0;
    for (std::size_t a = dim; a-- > 0;) idx = idx * res[a] + mi[a];
    return idx;
}

std::vector<double> CellComplex::center(std::size_t cell) const {
    const auto mi = multi_index(cell);
    std::vector<double> c(dim);
    for (std::size_t a = 0; a < dim; ++a)
        c[a] = lo[a] + (static_cast<double>(mi[a]) + 0.5) * width(a);
    return c;
}

void CellComplex::cell_bounds(std::size_t cell, std::span<double> blo,
                              std::span<double> bhi) const {
    const auto mi = multi_index(cell);
    for (std::size_t a = 0; a < dim; ++a) {
        blo[a] = lo[a] + static_cast<double>(mi[a]) * width(a);
        bhi[a] = blo[a] + width(a);
    }
}

std::optional<std::size_t> CellComplex::locate(std::span<const double> pt) const {
    std::array<std::size_t, 3> mi{0, 0, 0};
    for (std::size_t a = 0; a < dim; ++a) {
        if (!(pt[a] >= lo[a] && pt[a] <= hi[a])) return std::nullopt;
        auto k = static_cast<long long>(std::floor((pt[a] - lo[a]) / width(a)));
        if (k < 0) k = 0;
        if (k >= static_cast<long long>(res[a])) k = static_cast<long long>(res[a]) - 1;
        mi[a] = static_cast<std::size_t>(k);
    }
    return flat_index(mi);
}

void CellComplex::cells_near(std::span<const double> pt, double radius,
                             std::vector<std::uint32_t>& out) const {
    out.clear();
    if (!(radius >= 0.0)) return;
    std::array<long long, 3> first{0, 0, 0};
    std::array<long long, 3> last{0, 0, 0};
    for (std::size_t a = 0; a < dim; ++a) {
        if (pt[a] + radius < lo[a] || pt[a] - radius > hi[a]) return;
        const double w = width(a);
        first[a] = static_cast<long long>(std::floor((pt[a] - radius - lo[a]) / w));
        last[a] = static_cast<long long>(std::floor((pt[a] + radius - lo[a]) / w));
        first[a] = std::max(first[a], 0LL);
        last[a] = std::min(last[a], static_cast<long long>(res[a]) - 1);
        if (first[a] > last[a]) return;
    }
    std::array<long long, 3> mi = first;
    while (true) {
        // distance from pt to the closed cell box; prunes the box corners
        double d2 = 0.0;
        for (std::size_t a = 0; a < dim; ++a) {
            const double blo = lo[a] + static_cast<double>(mi[a]) * width(a);
            const double bhi = blo + width(a);
            double g = 0.0;
            if (pt[a] < blo) g = blo - pt[a];
            else if (pt[a] > bhi) g = pt[a] - bhi;
            d2 += g * g;
        }
        if (d2 <= radius * radius) {
            std::array<std::size_t, 3> u{0, 0, 0};
            for (std::size_t a = 0; a < dim; ++a) u[a] = static_cast<std::size_t>(mi[a]);
            out.push_back(static_cast<std::uint32_t>(flat_index(u)));
        }
        std::size_t a = 0;
        for (; a < dim; ++a) {
            if (++mi[a] <= last[a]) break;
            mi[a] = first[a];
        }
        if (a == dim) break;
    }
    std::sort(out.begin(), out.end());
}

CellComplex make_complex(std::span<const double> lo, std::span<const double> hi,
                         std::span<const std::size_t> res) {
    if (lo.size() != hi.size() || lo.size() != res.size())
        throw std::invalid_argument("complex: bounds/resolution size mismatch");
    if (lo.empty() || lo.size() > 3)
        throw std::invalid_argument("complex: dimension must be 1, 2 or 3");
    CellComplex c;
    c.dim = lo.size();
    for (std::size_t a = 0; a < c.dim; ++a) {
        if (!(hi[a] > lo[a])) throw std::invalid_argument("complex: empty axis " + std::to_string(a));
        if (res[a] == 0) throw std::invalid_argument("complex: zero resolution on axis " + std::to_string(a));
        c.lo[a] = lo[a];
        c.hi[a] = hi[a];
        c.res[a] = res[a];
    }
    return c;
}

std::size_t TransitionGraph::edge_count() const {
    std::size_t n = 0;
    for (const auto& row : edges) n += row.size();
    return n;
}

namespace {

// Endpoint bundle of one cell: all sampled images plus summary statistics.
struct CellImage {
    std::vector<std::vector<double>> endpoints;   // every (sample, policy) image
    std::size_t center_count = 0;                 // endpoints generated from the center
    double dispersion = 0.0;
    bool escaped = false;
};

CellImage sample_cell(const FlowSystem& sys, const CellComplex& complex, std::size_t cell,
                      double t_flow, std::size_t n_samples, std::size_t n_selections,
                      std::uint64_t seed) {
    const std::size_t dim = sys.dim();
    const std::size_t n_sel = std::min<std::size_t>(n_selections, sys.max_selections());
    std::vector<double> blo(dim), bhi(dim);
    complex.cell_bounds(cell, blo, bhi);

    CellImage image;
    std::vector<double> start(dim);
    const auto c = complex.center(cell);
    for (std::size_t s = 0; s < n_samples; ++s) {
        if (s == 0) {
            std::copy(c.begin(), c.end(), start.begin());
        } else {
            for (std::size_t a = 0; a < dim; ++a)
                start[a] = keyed_uniform(seed, cell, s, a, blo[a], bhi[a]);
        }
        for (std::size_t p = 0; p < std::max<std::size_t>(n_sel, 1); ++p) {
            try {
                image.endpoints.push_back(sys.advance(start, t_flow, p, seed));
            } catch (const blowup_error&) {
                image.escaped = true;
                image.endpoints.clear();
                image.center_count = 0;
                return image;
            }
            if (s == 0) ++image.center_count;
        }
    }

    // dispersion: worst spread of same-policy endpoints across start samples
    const std::size_t per = std::max<std::size_t>(n_sel, 1);
    for (std::size_t p = 0; p < per; ++p) {
        std::vector<double> centroid(dim, 0.0);
        std::size_t count = 0;
        for (std::size_t s = 0; s < n_samples; ++s) {
            const auto& e = image.endpoints[s * per + p];
            for (std::size_t a = 0; a < dim; ++a) centroid[a] += e[a];
            ++count;
        }
        for (auto& v : centroid) v /= static_cast<double>(count);
        for (std::size_t s = 0; s < n_samples; ++s) {
            const auto& e = image.endpoints[s * per + p];
            image.dispersion = std::max(image.dispersion, dist2(e, centroid));
        }
    }
    return image;
}

void record_edges(const CellComplex& complex, const CellImage& image, double epsilon,
                  const std::vector<std::uint8_t>& active,
                  std::vector<std::uint32_t>& edges_out,
                  std::vector<std::uint32_t>& center_out) {
    std::vector<std::uint32_t> hits;
    for (std::size_t k = 0; k < image.endpoints.size(); ++k) {
        const bool from_center = k < image.center_count;
        const double radius = from_center ? epsilon : epsilon + image.dispersion;
        complex.cells_near(image.endpoints[k], radius, hits);
        for (auto h : hits) {
            if (!active[h]) continue;
            edges_out.push_back(h);
            if (from_center) center_out.push_back(h);
        }
        if (!from_center) continue;
        // non-center radius for the center endpoint as well, so center edges
        // stay a subset of the full edge set
        complex.cells_near(image.endpoints[k], epsilon + image.dispersion, hits);
        for (auto h : hits)
            if (active[h]) edges_out.push_back(h);
    }
    auto dedupe = [](std::vector<std::uint32_t>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    dedupe(edges_out);
    dedupe(center_out);
}

} // namespace

TransitionGraph build_transition_graph(const FlowSystem& sys, const CellComplex& complex,
                                       double t_flow, double epsilon, std::size_t n_samples,
                                       std::size_t n_selections, std::uint64_t seed,
                                       ExecMode mode, const CellFilter& filter) {
    if (sys.dim() != complex.dim)
        throw std::invalid_argument("transition graph: system/complex dimension mismatch");
    if (!(t_flow > 0.0)) throw std::invalid_argument("transition graph: t_flow must be positive");
    if (!(epsilon > 0.0)) throw std::invalid_argument("transition graph: epsilon must be positive");
    if (n_samples == 0) throw std::invalid_argument("transition graph: need at least one sample");

    TransitionGraph g;
    g.complex = complex;
    g.t_flow = t_flow;
    g.epsilon = epsilon;
    g.n_samples = n_samples;
    g.n_selections = std::max<std::size_t>(std::min<std::size_t>(n_selections, sys.max_selections()), 1);
    g.seed = seed;

    const std::size_t n = complex.cell_count();
    g.active.assign(n, 1);
    if (filter)
        for (std::size_t i = 0; i < n; ++i) g.active[i] = filter(complex, i) ? 1 : 0;
    g.escaped.assign(n, 0);
    g.dispersion.assign(n, 0.0);
    g.edges.assign(n, {});
    g.center_edges.assign(n, {});

    const auto process = [&](std::size_t cell) {
        if (!g.active[cell]) return;
        const CellImage image =
            sample_cell(sys, complex, cell, t_flow, n_samples, n_selections, seed);
        if (image.escaped) {
            g.escaped[cell] = 1;
            return;
        }
        g.dispersion[cell] = image.dispersion;
        record_edges(complex, image, epsilon, g.active, g.edges[cell], g.center_edges[cell]);
    };

#ifdef _OPENMP
    if (mode == ExecMode::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
        for (long long cell = 0; cell < static_cast<long long>(n); ++cell)
            process(static_cast<std::size_t>(cell));
        return g;
    }
#else
    (void)mode;
#endif
    for (std::size_t cell = 0; cell < n; ++cell) process(cell);
    return g;
}

std::vector<std::uint32_t> recurrent_nodes(const std::vector<std::vector<std::uint32_t>>& adj) {
    // iterative Tarjan; nodes in a nontrivial component or with a self-loop
    const std::size_t n = adj.size();
    constexpr std::uint32_t kUnset = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> index(n, kUnset), lowlink(n, 0), component(n, kUnset);
    std::vector<std::uint8_t> on_stack(n, 0);
    std::vector<std::uint32_t> stack;
    std::vector<std::uint32_t> comp_size;
    std::uint32_t next_index = 0;

    struct Frame {
        std::uint32_t node;
        std::size_t edge;
    };
    std::vector<Frame> call;

    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != kUnset) continue;
        call.push_back({static_cast<std::uint32_t>(root), 0});
        while (!call.empty()) {
            auto& fr = call.back();
            const std::uint32_t v = fr.node;
            if (fr.edge == 0) {
                index[v] = lowlink[v] = next_index++;
                stack.push_back(v);
                on_stack[v] = 1;
            }
            bool descended = false;
            while (fr.edge < adj[v].size()) {
                const std::uint32_t w = adj[v][fr.edge++];
                if (index[w] == kUnset) {
                    call.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) lowlink[v] = std::min(lowlink[v], index[w]);
            }
            if (descended) continue;
            if (lowlink[v] == index[v]) {
                const auto comp = static_cast<std::uint32_t>(comp_size.size());
                std::uint32_t members = 0;
                while (true) {
                    const std::uint32_t w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    component[w] = comp;
                    ++members;
                    if (w == v) break;
                }
                comp_size.push_back(members);
            }
            call.pop_back();
            if (!call.empty()) {
                const std::uint32_t parent = call.back().node;
                lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
            }
        }
    }

    std::vector<std::uint32_t> out;
    for (std::size_t v = 0; v < n; ++v) {
        if (component[v] == kUnset) continue;
        bool rec = comp_size[component[v]] > 1;
        if (!rec)
            rec = std::find(adj[v].begin(), adj[v].end(), static_cast<std::uint32_t>(v)) !=
                  adj[v].end();
        if (rec) out.push_back(static_cast<std::uint32_t>(v));
    }
    return out;
}

std::vector<std::uint32_t> chain_recurrent_cells(const TransitionGraph& graph) {
    return recurrent_nodes(graph.edges);
}

ChainCheck verify_chain(const FlowSystem& sys, const EpsChain& chain, std::size_t n_selections,
                        std::uint64_t seed) {
    ChainCheck check;
    if (chain.points.size() < 2 || chain.times.size() != chain.points.size() - 1)
        throw std::invalid_argument("verify_chain: malformed chain");
    const std::size_t n_sel =
        std::max<std::size_t>(std::min<std::size_t>(n_selections, sys.max_selections()), 1);
    for (std::size_t i = 0; i + 1 < chain.points.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < n_sel; ++p) {
            try {
                const auto state = sys.advance(chain.points[i], chain.times[i], p, seed);
                best = std::min(best, dist2(state, chain.points[i + 1]));
            } catch (const blowup_error&) {
                continue;
            }
        }
        check.residuals.push_back(best);
        check.max_residual = std::max(check.max_residual, best);
    }
    check.pass = check.max_residual < chain.epsilon;
    return check;
}

std::optional<EpsChain> find_eps_chain(const TransitionGraph& graph, std::size_t from_cell,
                                       std::size_t to_cell) {
    const std::size_t n = graph.complex.cell_count();
    if (from_cell >= n || to_cell >= n)
        throw std::invalid_argument("find_eps_chain: cell index out of range");
    if (!graph.active[from_cell] || !graph.active[to_cell]) return std::nullopt;

    // BFS over center edges; a from==to query asks for a genuine cycle, so
    // the search is seeded with the successors of the source rather than
    // accepting the trivial empty path.
    constexpr std::uint32_t kUnset = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> parent(n, kUnset);
    std::vector<std::uint8_t> seen(n, 0);
    std::deque<std::uint32_t> queue;
    const auto src = static_cast<std::uint32_t>(from_cell);
    const auto dst = static_cast<std::uint32_t>(to_cell);

    for (auto w : graph.center_edges[src]) {
        if (!graph.active[w] || seen[w]) continue;
        seen[w] = 1;
        parent[w] = src;
        queue.push_back(w);
    }
    bool found = seen[dst] != 0;
    while (!found && !queue.empty()) {
        const std::uint32_t v = queue.front();
        queue.pop_front();
        for (auto w : graph.center_edges[v]) {
            if (!graph.active[w] || seen[w]) continue;
            seen[w] = 1;
            parent[w] = v;
            if (w == dst) {
                found = true;
                break;
            }
            queue.push_back(w);
        }
    }
    if (!found) return std::nullopt;

    // walk parents back to the source; every seed's parent is src, so the
    // walk terminates there even when dst == src (cycle)
    std::vector<std::uint32_t> cells{dst};
    for (std::uint32_t v = dst;;) {
        v = parent[v];
        cells.push_back(v);
        if (v == src) break;
    }
    std::reverse(cells.begin(), cells.end());

    EpsChain chain;
    chain.epsilon = graph.epsilon + graph.complex.cell_diameter();
    for (auto cell : cells) chain.points.push_back(graph.complex.center(cell));
    chain.times.assign(cells.size() - 1, graph.t_flow);
    return chain;
}

EpsChain equilibrium_chain(const FlowSystem& sys, std::span<const double> x, double t_x,
                           double t_min, double eps) {
    if (!(t_x > 0.0) || !(t_min > 0.0))
        throw std::invalid_argument("equilibrium_chain: times must be positive");
    if (x.size() != sys.dim())
        throw std::invalid_argument("equilibrium_chain: state dimension mismatch");
    const auto probe = sys.advance(x, t_x, 0, 0);
    const double drift = dist2(probe, x);
    if (!(drift <= 0.5 * eps))
        throw std::invalid_argument("equilibrium_chain: state drifts by " + fmt_double(drift) +
                                    " over the probe time; not an equilibrium at this tolerance");
    const auto n = static_cast<std::size_t>(std::ceil(t_min / t_x)) + 1;
    EpsChain chain;
    chain.points.emplace_back(x.begin(), x.end());
    chain.points.emplace_back(x.begin(), x.end());
    chain.times.push_back(static_cast<double>(n) * t_x);
    chain.epsilon = eps;
    return chain;
}

PseudoTrajectory assemble_pseudo_trajectory(const FlowSystem& sys,
                                            std::span<const EpsChain> chains,
                                            std::size_t policy, std::uint64_t seed) {
    PseudoTrajectory traj;
    if (chains.empty()) return traj;
    for (std::size_t c = 0; c + 1 < chains.size(); ++c) {
        const auto& tail = chains[c].points.back();
        const auto& head = chains[c + 1].points.front();
        if (dist2(tail, head) > 1e-9)
            throw std::invalid_argument("pseudo trajectory: chains " + std::to_string(c) + " and " +
                                        std::to_string(c + 1) + " do not share an endpoint");
    }
    double clock = 0.0;
    for (const auto& chain : chains) {
        traj.chain_breaks.push_back(traj.durations.size());
        for (std::size_t i = 0; i + 1 < chain.points.size(); ++i) {
            traj.points.push_back(chain.points[i]);
            traj.start_times.push_back(clock);
            traj.durations.push_back(chain.times[i]);
            const auto end = sys.advance(chain.points[i], chain.times[i], policy, seed);
            traj.jumps.push_back(dist2(end, chain.points[i + 1]));
            clock += chain.times[i];
        }
    }
    traj.points.push_back(chains.back().points.back());
    traj.start_times.push_back(clock);
    return traj;
}

BridgeResult bridge_segment(const TrajectorySample& phi, std::span<const double> b,
                            double lipschitz, double op_norm) {
    if (phi.states.size() < 2) throw std::invalid_argument("bridge: trajectory too short");
    if (b.size() != phi.states.front().size())
        throw std::invalid_argument("bridge: target dimension mismatch");
    BridgeResult result;
    result.tilted = phi;
    const double total = phi.times.back() - phi.times.front();
    if (!(total > 0.0)) throw std::invalid_argument("bridge: zero-length time window");
    result.xi.resize(b.size());
    for (std::size_t a = 0; a < b.size(); ++a) result.xi[a] = b[a] - phi.states.back()[a];
    for (std::size_t k = 0; k < phi.states.size(); ++k) {
        const double w = (phi.times[k] - phi.times.front()) / total;
        for (std::size_t a = 0; a < b.size(); ++a)
            result.tilted.states[k][a] = phi.states[k][a] + w * result.xi[a];
    }
    result.inflation_radius = (lipschitz + op_norm + 1.0) * norm2(result.xi);
    return result;
}

} // namespace semiflow
