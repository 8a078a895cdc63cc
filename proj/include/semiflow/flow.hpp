#pragma once

// Uniform "advance a state by time t" interface over the systems the
// cell-graph and limit-set tools operate on.  Implementations must be
// thread-safe: advance() is called concurrently by the parallel kernels.

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "semiflow/duffing.hpp"
#include "semiflow/inclusion.hpp"
#include "semiflow/linops.hpp"
#include "semiflow/setvalued.hpp"

namespace semiflow {

class FlowSystem {
  public:
    virtual ~FlowSystem() = default;
    virtual std::size_t dim() const = 0;
    // Number of distinct selection behaviors worth sampling; 1 for
    // single-valued dynamics, unbounded for inclusions.
    virtual std::size_t max_selections() const { return 1; }
    virtual std::vector<double> advance(std::span<const double> state, double t,
                                        std::size_t policy, std::uint64_t seed) const = 0;
};

class DuffingFlowSystem final : public FlowSystem {
  public:
    explicit DuffingFlowSystem(double dt = 1e-2) : dt_(dt) {}
    std::size_t dim() const override { return 2; }
    std::vector<double> advance(std::span<const double> state, double t, std::size_t,
                                std::uint64_t) const override {
        const DuffingState out = duffing_flow({state[0], state[1]}, t, dt_);
        return {out.x, out.y};
    }

  private:
    double dt_;
};

// Generic autonomous ODE via RK4, for analytic test fields and demos.
class CallbackFlowSystem final : public FlowSystem {
  public:
    using Field = std::function<void(std::span<const double>, std::span<double>)>;
    CallbackFlowSystem(std::size_t n, Field field, double dt)
        : n_(n), field_(std::move(field)), dt_(dt) {}
    std::size_t dim() const override { return n_; }
    std::vector<double> advance(std::span<const double> state, double t, std::size_t,
                                std::uint64_t) const override;

  private:
    std::size_t n_;
    Field field_;
    double dt_;
};

// Evolution inclusion dy/dt + A y in F(y), advanced with the semi-implicit
// stepper.  Policy indices: 0 midpoint, 1 lower, 2 upper, >= 3 independent
// random-selection streams.
class InclusionFlowSystem final : public FlowSystem {
  public:
    InclusionFlowSystem(LinearOperator op, ScalarSetMap map, double dt);
    std::size_t dim() const override { return op_.size(); }
    std::size_t max_selections() const override {
        return std::numeric_limits<std::size_t>::max();
    }
    std::vector<double> advance(std::span<const double> state, double t, std::size_t policy,
                                std::uint64_t seed) const override;

  private:
    LinearOperator op_;
    ScalarSetMap map_;
    double dt_;
};

SelectionPolicy policy_for_index(std::size_t policy, std::uint64_t seed);

} // namespace semiflow
