#pragma once

// Scalar interval-valued maps u -> [lower(u), upper(u)] and their
// regularization pipeline: Moreau-Yosida envelopes at level N, truncation to
// a globally Lipschitz function, and uniform inflation.  The regularized
// envelopes nest around the base interval and converge to it as N grows.

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace semiflow {

using RealFn = std::function<double(double)>;

// Interval-valued scalar map.  `lower` is the lsc branch, `upper` the usc
// branch; both are assumed bounded by c1 + c2*|u| on [-domain_radius,
// domain_radius], the compact region all sup/inf searches run over.
struct ScalarSetMap {
    std::string id;
    RealFn lower;
    RealFn upper;
    double growth_c1 = 0.0;
    double growth_c2 = 0.0;
    double domain_radius = 10.0;
    std::vector<double> knots; // breakpoints injected into extremum searches
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Axis-aligned box in R^n, stored as per-component intervals.
struct IntervalBox {
    std::vector<double> lo;
    std::vector<double> hi;
};

// [u - r, u + r] for every component is contained in the box.
bool box_contains(const IntervalBox& outer, const IntervalBox& inner, double slack = 0.0);

// Evaluates the interval at u; throws std::domain_error if u is not finite
// or the branches cross (lower > upper).
Interval eval_interval(const ScalarSetMap& map, double u);

// Componentwise interval evaluation of a state vector.
IntervalBox nemitski_apply(const ScalarSetMap& map, std::span<const double> state);

// Builds one of the named maps:
//   "cubic:lambda=<v>"     single-valued f(u) = lambda*u - u^3
//   "heaviside"            step with the jump filled at 0: [0,1]
//   "interval_band:w=<v>"  [u - w, u + w]
//   "custom:<csv-path>"    piecewise-linear branches from rows "u,lower,upper"
// Throws std::invalid_argument for unknown ids or malformed tables.
ScalarSetMap make_named_map(const std::string& id);

// Level-N upper Moreau-Yosida value  sup_y { fbar(y) - (N/2)(y-x)^2 }  over
// the window [x - radius, x + radius].  The search is a dense grid pass
// (step <= 1e-4 near the maximizer) with one golden-section refinement;
// `knots` adds exact candidate points (jump locations).  Throws window_error
// when the supremum is attained at a window edge.
double moreau_yosida_upper(const RealFn& fbar, int level, double x, double radius,
                           std::span<const double> knots = {});

// Lower counterpart  inf_y { flow(y) + (N/2)(y-x)^2 }, computed by duality
// with the upper envelope of -flow.
double moreau_yosida_lower(const RealFn& flow, int level, double x, double radius,
                           std::span<const double> knots = {});

// Upper envelope of the parabola family  x -> heights[i] - (N/2)(x-ys[i])^2
// evaluated at the sorted query points `xs`.  Linear-time sweep; also
// reports the maximizing center ("owner") for each query.  This is the bulk
// evaluator behind envelope tables and the property tests.
struct SupConvolution {
    std::vector<double> values;
    std::vector<double> owners;
};
SupConvolution sup_convolution(std::span<const double> ys, std::span<const double> heights,
                               int level, std::span<const double> xs);

// Globally Lipschitz truncation of a level-N envelope core.  Outside
// [-N, N] the core is bridged with slopes k_minus/k_plus >= the core's local
// Lipschitz constant onto the growth caps +-D(1 +- x); the junctions land in
// [N, N+1] (resp. [-N-1, -N]), found by doubling the slope from its initial
// value.  Throws construction_error if doubling cannot place the junction.
struct TruncatedFunction {
    RealFn core;
    int level = 1;
    double d = 0.0;       // growth cap constant
    double k_minus = 0.0; // bridge slopes
    double k_plus = 0.0;
    double x_minus = 0.0; // junction abscissas
    double x_plus = 0.0;
    double core_at_minus = 0.0; // core(-N)
    double core_at_plus = 0.0;  // core(+N)
    double operator()(double x) const;
};
TruncatedFunction truncate_to_global_lipschitz(const RealFn& core, int level, double d,
                                               double initial_slope);

// One side of a regularized map: a tabulated envelope core on [-N-1, N+1]
// plus the closed-form truncation pieces outside [-N, N].  `sign` is +1 for
// the upper side and -1 for the lower side (which is built as the negated
// upper construction of the negated branch); `shift` carries inflation.
struct Envelope {
    double x0 = 0.0;
    double step = 0.0;
    std::vector<double> table;
    TruncatedFunction pieces;
    RealFn floor_fn; // base branch: the envelope never crosses it on the core
    double sign = 1.0;
    double shift = 0.0;
    int level = 1;
    double operator()(double x) const;
};

struct RegularizedMap {
    int level = 1;
    Envelope upper_env;
    Envelope lower_env;
    double lipschitz = 0.0; // global Lipschitz constant of both envelopes
    double growth_d = 0.0;  // |envelope(x)| <= growth_d * (1 + |x|)
    double inflation = 0.0; // uniform radius added by inflate()
    std::string base_id;
};

// Full regularization pipeline at level N: Moreau-Yosida envelopes of both
// branches over the map's domain, truncated to global Lipschitz growth.
RegularizedMap regularize(const ScalarSetMap& map, int level);

// Uniform inflation: adds r to the upper envelope and subtracts r from the
// lower one.  The Lipschitz constant is unchanged.  Used with r = 1/N.
RegularizedMap inflate(const RegularizedMap& reg, double r);

// Componentwise envelope box of a state vector.
IntervalBox nemitski_apply(const RegularizedMap& reg, std::span<const double> state);

} // namespace semiflow
