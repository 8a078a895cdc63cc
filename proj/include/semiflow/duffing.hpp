#pragma once

// Unforced, undamped Duffing oscillator
//     x' = y,   y' = x - x^3
// with conserved energy V(x,y) = y^2/2 - x^2/2 + x^4/4.  The sublevel band
// B = V^{-1}([-1/4, 0]) intersected with {x >= 0} is the compact invariant
// region used by the cell-graph demos.  Classic RK4 with a fixed step;
// backward time integrates the negated field.

#include <cstddef>
#include <vector>

namespace semiflow {

struct DuffingState {
    double x = 0.0;
    double y = 0.0;
};

struct DuffingTrajectory {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<DuffingState> states;
};

double duffing_energy(const DuffingState& s);

// Advances the state by t (t may be negative for backward time) using RK4
// substeps of size at most dt.
DuffingState duffing_flow(const DuffingState& s, double t, double dt);

// Records the trajectory on [0, t_final] at every `stride`-th step.
// `backward` integrates the negated field.
DuffingTrajectory duffing_integrate(const DuffingState& s0, double t_final, double dt,
                                    bool backward = false, std::size_t stride = 1);

// True if the point lies in the band V in [-1/4, 0] with x >= 0.
bool duffing_in_band(const DuffingState& s);

} // namespace semiflow
