#include "semiflow/inclusion.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "semiflow/errors.hpp"
#include "semiflow/rng.hpp"

namespace semiflow {

SelectionPolicy parse_policy(const std::string& name, std::uint64_t seed) {
    SelectionPolicy pol;
    pol.seed = seed;
    if (name == "lower") {
        pol.kind = SelectionKind::lower;
    } else if (name == "upper") {
        pol.kind = SelectionKind::upper;
    } else if (name == "midpoint") {
        pol.kind = SelectionKind::midpoint;
    } else if (name == "random") {
        pol.kind = SelectionKind::random;
    } else if (name.rfind("scheduled:", 0) == 0) {
        pol.kind = SelectionKind::scheduled;
        std::string rest = name.substr(10);
        std::size_t pos = 0;
        while (pos < rest.size()) {
            auto comma = rest.find(',', pos);
            if (comma == std::string::npos) comma = rest.size();
            try {
                pol.schedule.push_back(std::stod(rest.substr(pos, comma - pos)));
            } catch (const std::exception&) {
                throw std::invalid_argument("bad schedule weight in policy: " + name);
            }
            pos = comma + 1;
        }
        if (pol.schedule.empty()) throw std::invalid_argument("empty schedule in policy: " + name);
        for (double w : pol.schedule) {
            if (!(w >= 0.0 && w <= 1.0)) {
                throw std::invalid_argument("schedule weights must lie in [0,1]: " + name);
            }
        }
    } else {
        throw std::invalid_argument("unknown selection policy: " + name);
    }
    return pol;
}

double select(const SelectionPolicy& pol, double lo, double hi, std::size_t step,
              std::size_t component) {
    switch (pol.kind) {
        case SelectionKind::lower: return lo;
        case SelectionKind::upper: return hi;
        case SelectionKind::midpoint: return 0.5 * (lo + hi);
        case SelectionKind::random:
            return lo + keyed_uniform(pol.seed, step, component) * (hi - lo);
        case SelectionKind::scheduled: {
            const double w = pol.schedule[step % pol.schedule.size()];
            return lo + w * (hi - lo);
        }
    }
    return 0.5 * (lo + hi);
}

void select(const SelectionPolicy& pol, const IntervalBox& box, std::size_t step,
            std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = select(pol, box.lo[i], box.hi[i], step, i);
    }
}

void step_semi_implicit(const SemiImplicitSolver& solver, std::span<const double> state,
                        std::span<const double> selection, std::span<const double> h,
                        std::span<double> next) {
    const double dt = solver.dt();
    const std::size_t n = state.size();
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        rhs[i] = state[i] + dt * (selection[i] + (h.empty() ? 0.0 : h[i]));
    }
    solver.solve(rhs, next);
}

namespace {

using BoxFn = std::function<void(std::span<const double>, IntervalBox&)>;

TrajectorySample integrate_impl(const LinearOperator& op, const BoxFn& box_of,
                                const SelectionPolicy& pol, std::span<const double> y0,
                                const IntegrateOptions& opt, std::span<const double> h,
                                const StepObserver& observer) {
    if (y0.size() != op.size()) throw std::invalid_argument("integrate: state size mismatch");
    if (!(opt.dt > 0.0) || !(opt.t_final >= 0.0) || opt.stride == 0) {
        throw std::invalid_argument("integrate: bad dt, horizon, or stride");
    }
    const auto n_steps = static_cast<std::size_t>(std::llround(opt.t_final / opt.dt));
    const SemiImplicitSolver solver(op, opt.dt);
    const std::size_t n = y0.size();

    TrajectorySample traj;
    traj.dt = opt.dt;
    traj.stride = opt.stride;
    std::vector<double> state(y0.begin(), y0.end());
    std::vector<double> sel(n), next(n);
    IntervalBox box;

    traj.times.push_back(0.0);
    traj.states.emplace_back(state);
    for (std::size_t k = 0; k < n_steps; ++k) {
        box_of(state, box);
        select(pol, box, k, sel);
        if (observer) observer(k, state, sel);
        if (k % opt.stride == 0) traj.selections.emplace_back(sel);
        step_semi_implicit(solver, state, sel, h, next);
        state.swap(next);
        for (double v : state) {
            if (!(std::fabs(v) <= opt.blowup_threshold)) {
                throw blowup_error("integrate: component exceeded blow-up threshold at step " +
                                       std::to_string(k + 1),
                                   k + 1);
            }
        }
        if ((k + 1) % opt.stride == 0 || k + 1 == n_steps) {
            traj.times.push_back(static_cast<double>(k + 1) * opt.dt);
            traj.states.emplace_back(state);
        }
    }
    // Keep the recorded-selection count one below the state count: the
    // selection stored with a record is the one applied at that record.
    while (traj.selections.size() >= traj.states.size() && !traj.selections.empty()) {
        traj.selections.pop_back();
    }
    return traj;
}

} // namespace

TrajectorySample integrate(const LinearOperator& op, const ScalarSetMap& map,
                           const SelectionPolicy& pol, std::span<const double> y0,
                           const IntegrateOptions& opt, std::span<const double> h,
                           const StepObserver& observer) {
    BoxFn fn = [&map](std::span<const double> u, IntervalBox& box) {
        box.lo.clear();
        box.hi.clear();
        for (double x : u) {
            const Interval iv = eval_interval(map, x);
            box.lo.push_back(iv.lo);
            box.hi.push_back(iv.hi);
        }
    };
    return integrate_impl(op, fn, pol, y0, opt, h, observer);
}

TrajectorySample integrate(const LinearOperator& op, const RegularizedMap& reg,
                           const SelectionPolicy& pol, std::span<const double> y0,
                           const IntegrateOptions& opt, std::span<const double> h,
                           const StepObserver& observer) {
    BoxFn fn = [&reg](std::span<const double> u, IntervalBox& box) {
        box.lo.clear();
        box.hi.clear();
        for (double x : u) {
            box.lo.push_back(reg.lower_env(x));
            box.hi.push_back(reg.upper_env(x));
        }
    };
    return integrate_impl(op, fn, pol, y0, opt, h, observer);
}

DissipativityReport verify_dissipativity(const ScalarSetMap& map, const LinearOperator& op,
                                         double delta, double c3, std::size_t n_samples,
                                         std::uint64_t seed, double amplitude) {
    const std::size_t n = op.size();
    DissipativityReport rep;
    rep.samples = n_samples;
    rep.margin = std::numeric_limits<double>::infinity();
    rep.worst_value = -std::numeric_limits<double>::infinity();
    const double coeff = op.eig_min - delta;
    for (std::size_t s = 0; s < n_samples; ++s) {
        double zu = 0.0, uu = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = keyed_uniform(seed, s, i, 0, -amplitude, amplitude);
            const Interval iv = eval_interval(map, u);
            const double z = keyed_bits(seed, s, i, 1) & 1 ? iv.hi : iv.lo;
            zu += z * u;
            uu += u * u;
        }
        const double slack = coeff * uu + c3 * static_cast<double>(n) - zu;
        rep.margin = std::min(rep.margin, slack);
        rep.worst_value = std::max(rep.worst_value, (zu - coeff * uu) / static_cast<double>(n));
    }
    rep.pass = rep.margin >= 0.0;
    return rep;
}

} // namespace semiflow
