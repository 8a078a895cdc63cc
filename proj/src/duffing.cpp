#include "semiflow/duffing.hpp"

#include <cmath>
#include <stdexcept>

namespace semiflow {

namespace {

struct Deriv {
    double dx, dy;
};

inline Deriv field(const DuffingState& s, double dir) {
    return {dir * s.y, dir * (s.x - s.x * s.x * s.x)};
}

inline DuffingState rk4_step(const DuffingState& s, double h, double dir) {
    const Deriv k1 = field(s, dir);
    const Deriv k2 = field({s.x + 0.5 * h * k1.dx, s.y + 0.5 * h * k1.dy}, dir);
    const Deriv k3 = field({s.x + 0.5 * h * k2.dx, s.y + 0.5 * h * k2.dy}, dir);
    const Deriv k4 = field({s.x + h * k3.dx, s.y + h * k3.dy}, dir);
    return {s.x + h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
            s.y + h / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy)};
}

} // namespace

double duffing_energy(const DuffingState& s) {
    return 0.5 * s.y * s.y - 0.5 * s.x * s.x + 0.25 * s.x * s.x * s.x * s.x;
}

DuffingState duffing_flow(const DuffingState& s, double t, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("duffing_flow: dt must be > 0");
    const double dir = t < 0.0 ? -1.0 : 1.0;
    double remaining = std::fabs(t);
    DuffingState cur = s;
    while (remaining > 1e-15) {
        const double h = std::min(dt, remaining);
        cur = rk4_step(cur, h, dir);
        remaining -= h;
    }
    return cur;
}

DuffingTrajectory duffing_integrate(const DuffingState& s0, double t_final, double dt,
                                    bool backward, std::size_t stride) {
    if (!(dt > 0.0) || !(t_final >= 0.0) || stride == 0) {
        throw std::invalid_argument("duffing_integrate: bad dt, horizon, or stride");
    }
    const auto n_steps = static_cast<std::size_t>(std::llround(t_final / dt));
    const double dir = backward ? -1.0 : 1.0;
    DuffingTrajectory traj;
    traj.dt = dt;
    traj.times.push_back(0.0);
    traj.states.push_back(s0);
    DuffingState cur = s0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        cur = rk4_step(cur, dt, dir);
        if ((k + 1) % stride == 0 || k + 1 == n_steps) {
            traj.times.push_back(static_cast<double>(k + 1) * dt);
            traj.states.push_back(cur);
        }
    }
    return traj;
}

bool duffing_in_band(const DuffingState& s) {
    const double v = duffing_energy(s);
    return s.x >= 0.0 && v >= -0.25 && v <= 0.0;
}

} // namespace semiflow
