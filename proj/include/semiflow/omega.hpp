#pragma once

// Limit-set estimation and connection probing: tail clustering of long
// trajectories into omega/alpha estimates, settlement-based classification
// against a catalog of isolated sets, directed connection graphs with
// re-integrable witnesses, and cycle detection over those connections.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semiflow/cellgraph.hpp"
#include "semiflow/duffing.hpp"
#include "semiflow/flow.hpp"
#include "semiflow/inclusion.hpp"

namespace semiflow {

struct OmegaEstimate {
    std::vector<std::vector<double>> points;           // tol-net of the tail
    double transient_cut = 0.0;                        // first tail time
    std::vector<std::pair<double, double>> dist_history; // (t, dist to estimate)
    double tol = 0.0;
};

double dist_to_points(std::span<const double> state,
                      const std::vector<std::vector<double>>& points);

OmegaEstimate estimate_omega(const std::vector<double>& times,
                             const std::vector<std::vector<double>>& states,
                             double tail_fraction, double tol);
OmegaEstimate estimate_omega(const TrajectorySample& traj, double tail_fraction, double tol);

// Backward Duffing integration followed by the same tail clustering.
OmegaEstimate estimate_alpha(const DuffingState& s0, double t_final, double dt,
                             double tail_fraction, double tol);

// Largest pointwise gap between the two estimates (symmetric Hausdorff).
double hausdorff_distance(const OmegaEstimate& a, const OmegaEstimate& b);

struct IsolatedSet {
    std::string label;
    std::vector<std::vector<double>> states;
    double radius = 0.0; // delta of the isolating neighborhood
};

struct IsolatedSetCatalog {
    std::vector<IsolatedSet> sets;
    double isolation_radius = 0.0;
};

// Distance from a state to the nearest catalog-set state.
double dist_to_set(std::span<const double> state, const IsolatedSet& set);

// Checks pairwise disjointness of the delta-neighborhoods; throws
// std::invalid_argument when two sets overlap.
void validate_catalog(const IsolatedSetCatalog& catalog);

struct WitnessRecord {
    std::size_t id = 0;
    std::size_t from_set = 0;
    std::size_t probe_index = 0;
    std::vector<double> start; // perturbed initial state (re-integrable)
    double t_final = 0.0;
    double dt = 0.0;
    std::size_t policy = 0;
    std::uint64_t seed = 0;
    bool left_from = false;              // exited the from-set delta-neighborhood
    std::optional<std::size_t> settled;  // catalog index the tail settled at
    std::string csv_path;                // filled by exports; relative path
};

struct ConnectionEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    std::size_t witness = 0; // index into witnesses
};

struct ConnectionGraph {
    std::vector<std::string> nodes;
    std::vector<ConnectionEdge> edges;
    std::vector<WitnessRecord> witnesses;
    std::size_t unresolved = 0; // probes whose tail never settled
};

// Launches n_probes seeded perturbations of size probe_radius from every
// catalog set, classifies each tail by the settlement criterion (window
// max(10, 0.2*T) within radius/2 of a set), and records an edge when the
// witness also exited the source neighborhood.  Probes run concurrently in
// parallel mode with identical results.
ConnectionGraph probe_connections(const IsolatedSetCatalog& catalog, const FlowSystem& sys,
                                  std::size_t n_probes, double probe_radius, double t_final,
                                  double dt, std::uint64_t seed,
                                  ExecMode mode = ExecMode::parallel);

// Re-integrates a witness and checks that its recorded classification
// (exit flag and settlement target) is reproduced.
bool replay_witness(const ConnectionGraph& graph, std::size_t witness_id,
                    const IsolatedSetCatalog& catalog, const FlowSystem& sys);

struct CyclicChainReport {
    bool found = false;
    std::vector<std::string> cycle; // ordered labels; single label = homoclinic
    std::vector<ConnectionEdge> witnesses;
};

CyclicChainReport find_cyclic_chain(const ConnectionGraph& graph);

struct IsolationReport {
    std::string label;
    bool isolated = false;      // no recurrent cell in the annulus
    bool empty_annulus = false; // vacuous pass (delta under one cell)
    std::size_t active_cells = 0;
    std::vector<std::uint32_t> recurrent_cells;
};

// Builds a transition graph on the annulus (delta-neighborhood minus the
// set itself) and reports any chain-recurrent cell found there.
IsolationReport isolation_check(const IsolatedSet& entry, const FlowSystem& sys,
                                std::size_t annulus_resolution, double t_flow, double epsilon,
                                ExecMode mode = ExecMode::parallel);

} // namespace semiflow
