#pragma once

// Stationary analysis of the scalar reaction problem on (0,1) with Dirichlet
// boundary: shooting for equilibria of u'' = -f(u), discrete stationary
// residuals, the gradient-flow energy, energy monotonicity along runs, and
// settlement classification of trajectory tails against the equilibrium set.
//
// Two sign conventions are carried explicitly:
//   reaction_diffusion:  u_t - u_xx + f(u) = h   (residual A u + f(u) - h)
//   chafee_infante:      u_t - u_xx = f(u) + h   (residual A u - f(u) - h)
// where A is the positive discrete Dirichlet Laplacian.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semiflow/cellgraph.hpp"
#include "semiflow/inclusion.hpp"
#include "semiflow/linops.hpp"

namespace semiflow {

enum class ProblemForm { reaction_diffusion, chafee_infante };

struct ReactionProfile {
    std::function<double(double)> f;
    std::function<double(double)> antideriv; // F with F' = f, F(0) = 0
    double fprime0 = 0.0;
    ProblemForm form = ProblemForm::chafee_infante;
    std::vector<double> h; // empty = zero forcing

    double sign() const { return form == ProblemForm::reaction_diffusion ? 1.0 : -1.0; }
};

// f(u) = lambda*u - u^3 in the chafee_infante form.
ReactionProfile cubic_profile(double lambda);

// Consistency checks on a profile: F' = f within fd_tol on a sample grid,
// f(0) = 0, and a finite central-difference f'(0) matching fprime0.
void validate_profile(const ReactionProfile& profile, double fd_tol = 1e-6);

struct ShootResult {
    double u_at_1 = 0.0;
    std::vector<double> path; // u at the n_steps+1 nodes of [0,1]
};

// Fourth-order integration of u'' = -f(u), u(0) = 0, u'(0) = slope.
// Blow-up raises blowup_error carrying the escape step.
ShootResult shoot(const ReactionProfile& profile, double slope, std::size_t n_steps);

struct EquilibriumSet {
    std::vector<std::vector<double>> profiles; // interior-grid values
    std::vector<double> shooting_slopes;
    std::vector<double> residuals;
    bool outer_sign_change = false; // a root may sit beyond the scan range
    std::vector<std::string> warnings;
};

// Scans u'(0) over [-slope_max, slope_max] in n_scan cells, bisects every
// sign change of u(1), converts each root to a profile on n_grid interior
// points, and polishes it with Newton on the discrete stationary system.
// slope_max <= 0 selects the default 3*(1+sqrt(f'(0)))*amplitude.
EquilibriumSet find_equilibria(const ReactionProfile& profile, std::size_t n_grid,
                               double slope_max, std::size_t n_scan, double tol,
                               ExecMode mode = ExecMode::parallel);

double default_slope_max(const ReactionProfile& profile);

// sup-norm of A u + sign*f(u) - h.
double stationary_residual(std::span<const double> u, const ReactionProfile& profile,
                           const LinearOperator& op);

// Discrete gradient-flow energy with Dirichlet padding at both ends:
//   E(u) = sum_j dx * [ (1/2)((u_{j+1}-u_j)/dx)^2 + sign*F(u_j) - h_j u_j ].
double energy(std::span<const double> u, const ReactionProfile& profile,
              const LinearOperator& op);

struct EnergyReport {
    bool pass = false;
    double max_increment = 0.0;   // largest positive energy step
    double total_decrease = 0.0;  // E(start) - E(end)
    double initial_energy = 0.0;
    std::vector<double> energies;
};

// pass iff the largest positive increment is at most slack*(1+|E(u0)|).
EnergyReport verify_energy_decrease(const TrajectorySample& traj,
                                    const ReactionProfile& profile, const LinearOperator& op,
                                    double slack);

struct Classification {
    std::optional<std::size_t> index; // nullopt = unresolved
    double final_distance = 0.0;
};

// Settlement classification: the tail window max(10, 20% of duration) must
// stay within tol/2 of exactly one equilibrium.  Unresolved tails are
// reported, never rounded to the nearest profile.
Classification classify_omega(const TrajectorySample& traj, const EquilibriumSet& equilibria,
                              double tol);

} // namespace semiflow
