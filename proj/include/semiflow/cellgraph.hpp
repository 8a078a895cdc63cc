#pragma once

// Outer approximation of time-t dynamics on a box complex (dim <= 3): each
// cell's image is sampled from several start points and selection policies,
// inflated by epsilon plus the empirical endpoint dispersion, and turned
// into directed edges.  Cells on directed cycles are the chain-recurrent
// candidates; paths through center-generated edges convert into verifiable
// epsilon-chains.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "semiflow/flow.hpp"
#include "semiflow/inclusion.hpp"

namespace semiflow {

struct CellComplex {
    std::size_t dim = 1;
    std::array<double, 3> lo{};
    std::array<double, 3> hi{};
    std::array<std::size_t, 3> res{1, 1, 1};

    std::size_t cell_count() const;
    double width(std::size_t axis) const;
    double cell_diameter() const;
    std::array<std::size_t, 3> multi_index(std::size_t cell) const;
    std::size_t flat_index(const std::array<std::size_t, 3>& mi) const;
    std::vector<double> center(std::size_t cell) const;
    void cell_bounds(std::size_t cell, std::span<double> blo, std::span<double> bhi) const;
    // Cell containing the point, if inside the complex.
    std::optional<std::size_t> locate(std::span<const double> pt) const;
    // All cells whose closed box meets the closed ball around pt.
    void cells_near(std::span<const double> pt, double radius,
                    std::vector<std::uint32_t>& out) const;
};

CellComplex make_complex(std::span<const double> lo, std::span<const double> hi,
                         std::span<const std::size_t> res);

enum class ExecMode { serial, parallel };

using CellFilter = std::function<bool(const CellComplex&, std::size_t)>;

struct TransitionGraph {
    CellComplex complex;
    double t_flow = 0.0;
    double epsilon = 0.0;
    std::size_t n_samples = 1;
    std::size_t n_selections = 1;
    std::uint64_t seed = 0;
    std::vector<std::uint8_t> active;   // cells participating (filter mask)
    std::vector<std::uint8_t> escaped;  // blow-up while sampling the cell
    std::vector<double> dispersion;     // endpoint spread per cell
    std::vector<std::vector<std::uint32_t>> edges;        // outer-approximation edges
    std::vector<std::vector<std::uint32_t>> center_edges; // edges from the center sample only
    std::size_t edge_count() const;
};

// Samples every active cell (center plus seeded random interior starts,
// every selection policy) and records edges to all cells meeting the
// endpoint balls.  Serial and parallel modes produce identical graphs.
TransitionGraph build_transition_graph(const FlowSystem& sys, const CellComplex& complex,
                                       double t_flow, double epsilon, std::size_t n_samples,
                                       std::size_t n_selections, std::uint64_t seed,
                                       ExecMode mode = ExecMode::parallel,
                                       const CellFilter& filter = {});

// Nodes lying on a directed cycle (nontrivial strongly connected component
// or self-loop), for a generic adjacency list.
std::vector<std::uint32_t> recurrent_nodes(const std::vector<std::vector<std::uint32_t>>& adj);

// The graph's chain-recurrent cell set.
std::vector<std::uint32_t> chain_recurrent_cells(const TransitionGraph& graph);

struct EpsChain {
    std::vector<std::vector<double>> points;
    std::vector<double> times;
    double epsilon = 0.0;
};

struct ChainCheck {
    bool pass = false;
    double max_residual = 0.0;
    std::vector<double> residuals;
};

// Re-integrates every link under each selection policy and compares the best
// endpoint with the chain's next point.
ChainCheck verify_chain(const FlowSystem& sys, const EpsChain& chain, std::size_t n_selections,
                        std::uint64_t seed);

// Shortest center-edge path between two cells (a cycle when from == to),
// converted to a chain through the cell centers with chain epsilon =
// graph epsilon + cell diameter (the center-substitution cost).
std::optional<EpsChain> find_eps_chain(const TransitionGraph& graph, std::size_t from_cell,
                                       std::size_t to_cell);

// Chain {x, x} with a single link of duration n*t_x, n = ceil(t_min/t_x)+1,
// for a state that re-integration certifies as near-fixed (drift over t_x at
// most eps/2).  Throws std::invalid_argument when the drift check fails.
EpsChain equilibrium_chain(const FlowSystem& sys, std::span<const double> x, double t_x,
                           double t_min, double eps);

// Genuine trajectory segments glued along a family of chains (consecutive
// chains must share endpoints).  jumps[i] is the distance between segment
// i's endpoint and the next chain point; chain_breaks marks where each
// chain's links begin inside the flat arrays.
struct PseudoTrajectory {
    std::vector<std::vector<double>> points;
    std::vector<double> start_times;
    std::vector<double> durations;
    std::vector<double> jumps;
    std::vector<std::size_t> chain_breaks;
};

PseudoTrajectory assemble_pseudo_trajectory(const FlowSystem& sys,
                                            std::span<const EpsChain> chains,
                                            std::size_t policy = 0, std::uint64_t seed = 0);

// Straight-line tilt of a recorded trajectory onto the target b:
// y(t) = phi(t) + xi * t/T with xi = b - phi(T).  The tilted path solves the
// inclusion inflated by (lipschitz + op_norm + 1) * |xi|, which is returned
// as the inflation radius.
struct BridgeResult {
    TrajectorySample tilted;
    std::vector<double> xi;
    double inflation_radius = 0.0;
};

BridgeResult bridge_segment(const TrajectorySample& phi, std::span<const double> b,
                            double lipschitz, double op_norm);

} // namespace semiflow
