#include "semiflow/setvalued.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "semiflow/errors.hpp"
#include "semiflow/rng.hpp"

namespace semiflow {

namespace {

constexpr double kFineStep = 1e-4;  // dense search / y-grid resolution
constexpr double kTableStep = 1e-3; // envelope table resolution
constexpr double kSafety = 1.5;     // margin on measured constants

double lerp_table(const std::vector<double>& t, double x0, double step, double x) {
    if (t.empty()) return 0.0;
    const double s = (x - x0) / step;
    if (s <= 0.0) return t.front();
    const double last = static_cast<double>(t.size() - 1);
    if (s >= last) return t.back();
    const auto i = static_cast<std::size_t>(s);
    const double frac = s - static_cast<double>(i);
    return t[i] + frac * (t[i + 1] - t[i]);
}

double parse_suffix_number(const std::string& id, const std::string& prefix) {
    const std::string s = id.substr(prefix.size());
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad numeric parameter in map id: " + id);
    }
}

ScalarSetMap load_custom_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open map table: " + path);
    auto us = std::make_shared<std::vector<double>>();
    auto los = std::make_shared<std::vector<double>>();
    auto his = std::make_shared<std::vector<double>>();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double u = 0, lo = 0, hi = 0;
        if (!(ls >> u >> lo >> hi)) {
            throw std::invalid_argument("map table row " + std::to_string(lineno) +
                                        " is not 'u,lower,upper': " + path);
        }
        if (lo > hi) {
            throw std::invalid_argument("map table row " + std::to_string(lineno) +
                                        " has lower > upper: " + path);
        }
        us->push_back(u);
        los->push_back(lo);
        his->push_back(hi);
    }
    if (us->size() < 2) throw std::invalid_argument("map table needs at least 2 rows: " + path);
    for (std::size_t i = 1; i < us->size(); ++i) {
        if ((*us)[i] <= (*us)[i - 1]) {
            throw std::invalid_argument("map table abscissas must be strictly increasing: " + path);
        }
    }
    auto branch = [us](std::shared_ptr<std::vector<double>> vs) {
        return [us, vs](double u) {
            const auto& xs = *us;
            const auto& ys = *vs;
            if (u <= xs.front()) return ys.front();
            if (u >= xs.back()) return ys.back();
            const auto it = std::upper_bound(xs.begin(), xs.end(), u);
            const auto j = static_cast<std::size_t>(it - xs.begin());
            const double frac = (u - xs[j - 1]) / (xs[j] - xs[j - 1]);
            return ys[j - 1] + frac * (ys[j] - ys[j - 1]);
        };
    };
    ScalarSetMap map;
    map.lower = branch(los);
    map.upper = branch(his);
    double amax = 0.0;
    for (std::size_t i = 0; i < us->size(); ++i) {
        amax = std::max({amax, std::fabs((*los)[i]), std::fabs((*his)[i])});
    }
    map.growth_c1 = amax;
    map.growth_c2 = 0.0;
    map.domain_radius = std::max(std::fabs(us->front()), std::fabs(us->back()));
    map.knots = *us;
    return map;
}

} // namespace

bool box_contains(const IntervalBox& outer, const IntervalBox& inner, double slack) {
    if (outer.lo.size() != inner.lo.size()) return false;
    for (std::size_t i = 0; i < inner.lo.size(); ++i) {
        if (inner.lo[i] < outer.lo[i] - slack) return false;
        if (inner.hi[i] > outer.hi[i] + slack) return false;
    }
    return true;
}

Interval eval_interval(const ScalarSetMap& map, double u) {
    if (!std::isfinite(u)) throw std::domain_error("eval_interval: non-finite argument");
    const Interval iv{map.lower(u), map.upper(u)};
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
        throw std::domain_error("eval_interval: non-finite branch value at u=" + std::to_string(u));
    }
    if (iv.lo > iv.hi) {
        throw std::domain_error("eval_interval: branches cross at u=" + std::to_string(u));
    }
    return iv;
}

IntervalBox nemitski_apply(const ScalarSetMap& map, std::span<const double> state) {
    IntervalBox box;
    box.lo.reserve(state.size());
    box.hi.reserve(state.size());
    for (double u : state) {
        const Interval iv = eval_interval(map, u);
        box.lo.push_back(iv.lo);
        box.hi.push_back(iv.hi);
    }
    return box;
}

ScalarSetMap make_named_map(const std::string& id) {
    if (id == "heaviside") {
        ScalarSetMap map;
        map.id = id;
        map.lower = [](double u) { return u > 0.0 ? 1.0 : 0.0; };
        map.upper = [](double u) { return u >= 0.0 ? 1.0 : 0.0; };
        map.growth_c1 = 1.0;
        map.growth_c2 = 0.0;
        map.domain_radius = 10.0;
        map.knots = {0.0};
        return map;
    }
    if (id.rfind("cubic:lambda=", 0) == 0) {
        const double lambda = parse_suffix_number(id, "cubic:lambda=");
        ScalarSetMap map;
        map.id = id;
        auto f = [lambda](double u) { return lambda * u - u * u * u; };
        map.lower = f;
        map.upper = f;
        map.domain_radius = std::max(6.0, 1.5 * std::sqrt(std::max(lambda, 0.0)) + 1.0);
        const double d = map.domain_radius;
        map.growth_c1 = std::fabs(lambda) * d + d * d * d;
        map.growth_c2 = 0.0;
        return map;
    }
    if (id.rfind("interval_band:w=", 0) == 0) {
        const double w = parse_suffix_number(id, "interval_band:w=");
        if (w < 0.0) throw std::invalid_argument("interval_band needs w >= 0: " + id);
        ScalarSetMap map;
        map.id = id;
        map.lower = [w](double u) { return u - w; };
        map.upper = [w](double u) { return u + w; };
        map.growth_c1 = w;
        map.growth_c2 = 1.0;
        map.domain_radius = 10.0;
        return map;
    }
    if (id.rfind("custom:", 0) == 0) {
        ScalarSetMap map = load_custom_table(id.substr(7));
        map.id = id;
        return map;
    }
    throw std::invalid_argument("unknown map id: " + id);
}

double moreau_yosida_upper(const RealFn& fbar, int level, double x, double radius,
                           std::span<const double> knots) {
    if (level < 1) throw std::invalid_argument("moreau_yosida_upper: level must be >= 1");
    if (!std::isfinite(x) || !(radius > 0.0)) {
        throw std::invalid_argument("moreau_yosida_upper: bad point or radius");
    }
    const double lo = x - radius, hi = x + radius;
    const double half_n = 0.5 * static_cast<double>(level);
    auto obj = [&](double y) {
        const double d = y - x;
        return fbar(y) - half_n * d * d;
    };

    // Coarse pass, then a dense pass (step <= 1e-4) around the best cell.
    const double coarse = std::max(kFineStep, (hi - lo) / 8192.0);
    double best_y = x, best_v = obj(x);
    auto consider = [&](double y) {
        const double v = obj(y);
        if (v > best_v) {
            best_v = v;
            best_y = y;
        }
    };
    for (double y = lo; y < hi + 0.5 * coarse; y += coarse) consider(std::min(y, hi));
    for (double k : knots) {
        if (k >= lo && k <= hi) consider(k);
    }
    const double flo = std::max(lo, best_y - coarse), fhi = std::min(hi, best_y + coarse);
    for (double y = flo; y < fhi + 0.5 * kFineStep; y += kFineStep) consider(std::min(y, fhi));

    // One golden-section refinement around the incumbent.
    {
        constexpr double kInvPhi = 0.6180339887498949;
        double a = std::max(lo, best_y - kFineStep), b = std::min(hi, best_y + kFineStep);
        double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
        double fc = obj(c), fd = obj(d);
        for (int it = 0; it < 60 && b - a > 1e-13; ++it) {
            if (fc > fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - kInvPhi * (b - a);
                fc = obj(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + kInvPhi * (b - a);
                fd = obj(d);
            }
        }
        consider(0.5 * (a + b));
    }

    const double edge_tol = 1.5 * kFineStep;
    if (best_y <= lo + edge_tol || best_y >= hi - edge_tol) {
        throw window_error("moreau_yosida_upper: supremum attained at window edge (radius " +
                           std::to_string(radius) + " too small at x=" + std::to_string(x) + ")");
    }
    return best_v;
}

double moreau_yosida_lower(const RealFn& flow, int level, double x, double radius,
                           std::span<const double> knots) {
    RealFn neg = [&flow](double y) { return -flow(y); };
    return -moreau_yosida_upper(neg, level, x, radius, knots);
}

SupConvolution sup_convolution(std::span<const double> ys, std::span<const double> heights,
                               int level, std::span<const double> xs) {
    if (ys.size() != heights.size() || ys.empty()) {
        throw std::invalid_argument("sup_convolution: mismatched or empty inputs");
    }
    const double n = static_cast<double>(level);
    const double inf = std::numeric_limits<double>::infinity();
    // Upper envelope of equal-curvature downward parabolas (hull sweep).
    std::vector<std::size_t> hull(ys.size());
    std::vector<double> z(ys.size() + 1);
    auto cross = [&](std::size_t i, std::size_t j) {
        return 0.5 * (ys[i] + ys[j]) + (heights[i] - heights[j]) / (n * (ys[j] - ys[i]));
    };
    std::size_t k = 0;
    hull[0] = 0;
    z[0] = -inf;
    z[1] = inf;
    for (std::size_t q = 1; q < ys.size(); ++q) {
        double s = cross(hull[k], q);
        while (k > 0 && s <= z[k]) {
            --k;
            s = cross(hull[k], q);
        }
        ++k;
        hull[k] = q;
        z[k] = s;
        z[k + 1] = inf;
    }
    SupConvolution out;
    out.values.reserve(xs.size());
    out.owners.reserve(xs.size());
    std::size_t seg = 0;
    for (double x : xs) {
        while (z[seg + 1] < x) ++seg;
        const std::size_t i = hull[seg];
        const double d = x - ys[i];
        out.values.push_back(heights[i] - 0.5 * n * d * d);
        out.owners.push_back(ys[i]);
    }
    return out;
}

double TruncatedFunction::operator()(double x) const {
    const double n = static_cast<double>(level);
    if (x >= x_plus) return d * (1.0 + x);
    if (x >= n) return core_at_plus + k_plus * (x - n);
    if (x > -n) return core(x);
    if (x > x_minus) return core_at_minus - k_minus * (x + n);
    return d * (1.0 - x);
}

TruncatedFunction truncate_to_global_lipschitz(const RealFn& core, int level, double d,
                                               double initial_slope) {
    if (level < 1) throw std::invalid_argument("truncate: level must be >= 1");
    if (!(d > 0.0)) throw std::invalid_argument("truncate: growth constant must be positive");
    TruncatedFunction tf;
    tf.core = core;
    tf.level = level;
    tf.d = d;
    const double n = static_cast<double>(level);
    tf.core_at_plus = core(n);
    tf.core_at_minus = core(-n);

    // Junction of the bridge from (side*N, core(side*N)) with slope K onto the
    // cap D(1+|x|); doubling K pulls the junction into [N, N+1].
    auto junction = [&](double k, double core_val) { return (k * n + d - core_val) / (k - d); };
    auto place = [&](double core_val) {
        double k = std::max(initial_slope, d * (1.0 + 1e-9) + 1e-12);
        for (int attempt = 0; attempt < 200; ++attempt) {
            const double xj = junction(k, core_val);
            if (xj >= n && xj <= n + 1.0) return std::pair<double, double>{k, xj};
            k *= 2.0;
        }
        throw construction_error("truncate: no valid cap junction after doubling the slope");
    };
    auto [kp, xp] = place(tf.core_at_plus);
    tf.k_plus = kp;
    tf.x_plus = xp;
    auto [km, xm] = place(tf.core_at_minus);
    tf.k_minus = km;
    tf.x_minus = -xm;
    return tf;
}

double Envelope::operator()(double x) const {
    const double n = static_cast<double>(level);
    double raw;
    if (std::fabs(x) <= n) {
        raw = std::max(lerp_table(table, x0, step, x), floor_fn(x));
    } else {
        raw = pieces(x);
    }
    return sign * raw + shift;
}

namespace {

// Shared worker: builds the tabulated upper-side construction for the branch
// `fbar` (already negated for the lower side).  Returns the envelope and the
// measured core Lipschitz constant.
struct SideBuild {
    Envelope env;
    double core_lipschitz = 0.0;
};

SideBuild build_side(const std::vector<double>& ys, const std::vector<double>& heights,
                     int level, double d, const RealFn& floor_fn) {
    const double n = static_cast<double>(level);
    const double x0 = -(n + 1.0);
    const auto count = static_cast<std::size_t>(std::llround(2.0 * (n + 1.0) / kTableStep)) + 1;
    std::vector<double> xs(count);
    for (std::size_t i = 0; i < count; ++i) xs[i] = x0 + static_cast<double>(i) * kTableStep;
    SupConvolution conv = sup_convolution(ys, heights, level, xs);

    // Local Lipschitz constant of the core on [-N-1, N+1]: adjacent-node
    // differences plus random pairs, with a safety margin.
    double lip = 0.0;
    for (std::size_t i = 1; i < count; ++i) {
        lip = std::max(lip, std::fabs(conv.values[i] - conv.values[i - 1]) / kTableStep);
    }
    const double span = 2.0 * (n + 1.0);
    for (std::uint64_t i = 0; i < 10000; ++i) {
        const double a = x0 + span * keyed_uniform(0x1b5e, i, 0, static_cast<std::uint64_t>(level));
        const double b = x0 + span * keyed_uniform(0x1b5e, i, 1, static_cast<std::uint64_t>(level));
        if (std::fabs(a - b) < 1e-9) continue;
        const double va = lerp_table(conv.values, x0, kTableStep, a);
        const double vb = lerp_table(conv.values, x0, kTableStep, b);
        lip = std::max(lip, std::fabs(va - vb) / std::fabs(a - b));
    }
    lip *= kSafety;

    auto core_eval = [vals = conv.values, x0](double x) {
        return lerp_table(vals, x0, kTableStep, x);
    };
    TruncatedFunction pieces = truncate_to_global_lipschitz(core_eval, level, d, lip);

    SideBuild out;
    out.env.x0 = x0;
    out.env.step = kTableStep;
    out.env.table = std::move(conv.values);
    out.env.pieces = std::move(pieces);
    out.env.floor_fn = floor_fn;
    out.env.sign = 1.0;
    out.env.shift = 0.0;
    out.env.level = level;
    out.core_lipschitz = lip;
    return out;
}

} // namespace

RegularizedMap regularize(const ScalarSetMap& map, int level) {
    if (level < 1) throw std::invalid_argument("regularize: level must be >= 1");
    const double dom = map.domain_radius;
    if (!(dom > 0.0)) throw std::invalid_argument("regularize: map needs a positive domain radius");

    // Shared sample grid of both branches over the declared domain, with the
    // map's breakpoints injected exactly.
    const auto ny = static_cast<std::size_t>(std::llround(2.0 * dom / kFineStep)) + 1;
    std::vector<double> ys;
    ys.reserve(ny + map.knots.size());
    for (std::size_t i = 0; i < ny; ++i) ys.push_back(-dom + static_cast<double>(i) * kFineStep);
    for (double k : map.knots) {
        if (k > -dom && k < dom) ys.push_back(k);
    }
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end(),
                         [](double a, double b) { return std::fabs(a - b) < 1e-12; }),
             ys.end());
    std::vector<double> up(ys.size()), low_neg(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const Interval iv = eval_interval(map, ys[i]);
        up[i] = iv.hi;
        low_neg[i] = -iv.lo;
    }

    // Level-independent growth constant D: measured from the level-1
    // envelopes (the widest) over the domain, never below the branch growth
    // constants, with a safety margin.
    double d_raw = std::max(map.growth_c1, map.growth_c2);
    {
        const double scan_step = std::max(1e-2, dom / 2000.0);
        const auto nscan = static_cast<std::size_t>(std::llround(2.0 * dom / scan_step)) + 1;
        std::vector<double> scan(nscan);
        for (std::size_t i = 0; i < nscan; ++i) {
            scan[i] = -dom + static_cast<double>(i) * scan_step;
        }
        const SupConvolution u1 = sup_convolution(ys, up, 1, scan);
        const SupConvolution l1 = sup_convolution(ys, low_neg, 1, scan);
        for (std::size_t i = 0; i < nscan; ++i) {
            const double w = 1.0 + std::fabs(scan[i]);
            d_raw = std::max({d_raw, std::fabs(u1.values[i]) / w, std::fabs(l1.values[i]) / w});
        }
    }
    const double d = kSafety * d_raw;

    RegularizedMap reg;
    reg.level = level;
    reg.base_id = map.id;
    reg.growth_d = d;

    SideBuild upper = build_side(ys, up, level, d, map.upper);
    RealFn low_branch = map.lower;
    RealFn neg_lower = [low_branch](double u) { return -low_branch(u); };
    SideBuild lower = build_side(ys, low_neg, level, d, neg_lower);
    lower.env.sign = -1.0;

    reg.lipschitz = std::max({d, upper.core_lipschitz, lower.core_lipschitz,
                              upper.env.pieces.k_plus, upper.env.pieces.k_minus,
                              lower.env.pieces.k_plus, lower.env.pieces.k_minus});
    reg.upper_env = std::move(upper.env);
    reg.lower_env = std::move(lower.env);
    return reg;
}

RegularizedMap inflate(const RegularizedMap& reg, double r) {
    if (!(r >= 0.0)) throw std::invalid_argument("inflate: radius must be >= 0");
    RegularizedMap out = reg;
    out.upper_env.shift += r;
    out.lower_env.shift -= r;
    out.inflation += r;
    return out;
}

IntervalBox nemitski_apply(const RegularizedMap& reg, std::span<const double> state) {
    IntervalBox box;
    box.lo.reserve(state.size());
    box.hi.reserve(state.size());
    for (double u : state) {
        box.lo.push_back(reg.lower_env(u));
        box.hi.push_back(reg.upper_env(u));
    }
    return box;
}

} // namespace semiflow
