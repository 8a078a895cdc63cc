#include "semiflow/flow.hpp"

#include <cmath>
#include <stdexcept>

#include "semiflow/errors.hpp"
#include "semiflow/rng.hpp"

namespace semiflow {

std::vector<double> CallbackFlowSystem::advance(std::span<const double> state, double t,
                                                std::size_t, std::uint64_t) const {
    if (!(dt_ > 0.0)) throw std::invalid_argument("CallbackFlowSystem: dt must be > 0");
    const double dir = t < 0.0 ? -1.0 : 1.0;
    double remaining = std::fabs(t);
    std::vector<double> y(state.begin(), state.end());
    std::vector<double> k1(n_), k2(n_), k3(n_), k4(n_), tmp(n_);
    auto eval = [&](const std::vector<double>& in, std::vector<double>& out) {
        field_(in, out);
        for (double& v : out) v *= dir;
    };
    while (remaining > 1e-15) {
        const double h = std::min(dt_, remaining);
        eval(y, k1);
        for (std::size_t i = 0; i < n_; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        eval(tmp, k2);
        for (std::size_t i = 0; i < n_; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        eval(tmp, k3);
        for (std::size_t i = 0; i < n_; ++i) tmp[i] = y[i] + h * k3[i];
        eval(tmp, k4);
        for (std::size_t i = 0; i < n_; ++i) {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        remaining -= h;
    }
    return y;
}

SelectionPolicy policy_for_index(std::size_t policy, std::uint64_t seed) {
    SelectionPolicy pol;
    switch (policy) {
        case 0: pol.kind = SelectionKind::midpoint; break;
        case 1: pol.kind = SelectionKind::lower; break;
        case 2: pol.kind = SelectionKind::upper; break;
        default:
            pol.kind = SelectionKind::random;
            pol.seed = keyed_bits(seed, 0xf10c, policy);
            break;
    }
    return pol;
}

InclusionFlowSystem::InclusionFlowSystem(LinearOperator op, ScalarSetMap map, double dt)
    : op_(std::move(op)), map_(std::move(map)), dt_(dt) {
    if (!(dt_ > 0.0)) throw std::invalid_argument("InclusionFlowSystem: dt must be > 0");
}

std::vector<double> InclusionFlowSystem::advance(std::span<const double> state, double t,
                                                 std::size_t policy, std::uint64_t seed) const {
    if (t < 0.0) throw std::invalid_argument("InclusionFlowSystem: backward time not defined");
    IntegrateOptions opt;
    opt.t_final = t;
    opt.dt = dt_;
    opt.stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(t / dt_)));
    const TrajectorySample traj =
        integrate(op_, map_, policy_for_index(policy, seed), state, opt);
    return traj.states.back();
}

} // namespace semiflow
