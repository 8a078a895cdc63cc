#include "semiflow/chafee.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "semiflow/errors.hpp"
#include "semiflow/util.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace semiflow {

namespace {

constexpr double kEscape = 1e6; // |u| beyond this counts as shooting blow-up

struct ShootCore {
    double value = 0.0; // u(1), or the (huge, signed) escape value
    bool escaped = false;
    std::size_t escape_step = 0;
};

// RK4 on (u, v): u' = v, v' = -f(u), fixed step 1/n_steps.
ShootCore shoot_core(const ReactionProfile& profile, double slope, std::size_t n_steps,
                     std::vector<double>* path) {
    const double h = 1.0 / static_cast<double>(n_steps);
    double u = 0.0, v = slope;
    if (path) {
        path->clear();
        path->reserve(n_steps + 1);
        path->push_back(u);
    }
    ShootCore out;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double k1u = v, k1v = -profile.f(u);
        const double k2u = v + 0.5 * h * k1v, k2v = -profile.f(u + 0.5 * h * k1u);
        const double k3u = v + 0.5 * h * k2v, k3v = -profile.f(u + 0.5 * h * k2u);
        const double k4u = v + h * k3v, k4v = -profile.f(u + h * k3u);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (!std::isfinite(u) || !std::isfinite(v) || std::fabs(u) > kEscape) {
            out.escaped = true;
            out.escape_step = k + 1;
            const double s = (std::fabs(u) > 1.0 ? u : v) >= 0.0 ? 1.0 : -1.0;
            out.value = s * 1e30;
            return out;
        }
        if (path) path->push_back(u);
    }
    out.value = u;
    return out;
}

double central_fprime(const std::function<double(double)>& f, double u) {
    const double d = 1e-6 * std::max(1.0, std::fabs(u));
    return (f(u + d) - f(u - d)) / (2.0 * d);
}

// Thomas solve for a general tridiagonal system (varying diagonal).
void tridiag_solve(const std::vector<double>& sub, const std::vector<double>& diag,
                   const std::vector<double>& sup, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    std::vector<double> c(n, 0.0);
    double piv = diag[0];
    c[0] = n > 1 ? sup[0] / piv : 0.0;
    rhs[0] /= piv;
    for (std::size_t j = 1; j < n; ++j) {
        piv = diag[j] - sub[j - 1] * c[j - 1];
        if (j + 1 < n) c[j] = sup[j] / piv;
        rhs[j] = (rhs[j] - sub[j - 1] * rhs[j - 1]) / piv;
    }
    for (std::size_t j = n - 1; j-- > 0;) rhs[j] -= c[j] * rhs[j + 1];
}

double forcing_at(const ReactionProfile& profile, std::size_t j) {
    return profile.h.empty() ? 0.0 : profile.h[j];
}

// Newton iteration on A u + sign*f(u) - h = 0 starting from the shooting
// profile; monotone via backtracking, so the result is never worse than
// the seed.
void newton_polish(std::vector<double>& u, const ReactionProfile& profile,
                   const LinearOperator& op) {
    const std::size_t n = u.size();
    const double sigma = profile.sign();
    std::vector<double> g(n), diag(n);
    const std::vector<double> sub(op.off), sup(op.off);
    auto residual = [&](const std::vector<double>& w, std::vector<double>& out) {
        op.apply(w, out);
        for (std::size_t j = 0; j < n; ++j) out[j] += sigma * profile.f(w[j]) - forcing_at(profile, j);
    };
    residual(u, g);
    double best = 0.0;
    for (double v : g) best = std::max(best, std::fabs(v));
    std::vector<double> trial(n);
    for (int it = 0; it < 80 && best > 1e-12; ++it) {
        for (std::size_t j = 0; j < n; ++j)
            diag[j] = op.diag[j] + sigma * central_fprime(profile.f, u[j]);
        std::vector<double> step(g);
        tridiag_solve(sub, diag, sup, step);
        double lambda = 1.0;
        bool improved = false;
        for (int back = 0; back < 30; ++back, lambda *= 0.5) {
            for (std::size_t j = 0; j < n; ++j) trial[j] = u[j] - lambda * step[j];
            residual(trial, g);
            double norm = 0.0;
            for (double v : g) norm = std::max(norm, std::fabs(v));
            if (norm < best) {
                u = trial;
                best = norm;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
}

} // namespace

ReactionProfile cubic_profile(double lambda) {
    ReactionProfile p;
    p.f = [lambda](double u) { return lambda * u - u * u * u; };
    p.antideriv = [lambda](double u) { return 0.5 * lambda * u * u - 0.25 * u * u * u * u; };
    p.fprime0 = lambda;
    p.form = ProblemForm::chafee_infante;
    return p;
}

void validate_profile(const ReactionProfile& profile, double fd_tol) {
    if (!profile.f || !profile.antideriv)
        throw std::invalid_argument("profile: f and its antiderivative are required");
    if (std::fabs(profile.f(0.0)) > fd_tol)
        throw std::invalid_argument("profile: f(0) must vanish");
    if (std::fabs(profile.antideriv(0.0)) > fd_tol)
        throw std::invalid_argument("profile: antiderivative must vanish at 0");
    const double fp0 = central_fprime(profile.f, 0.0);
    if (!std::isfinite(fp0) || std::fabs(fp0 - profile.fprime0) > 1e-3 * (1.0 + std::fabs(fp0)))
        throw std::invalid_argument("profile: recorded f'(0) disagrees with the measured slope");
    // F' = f on a small sample grid (first-order quotient, loose factor)
    const double d = 1e-6;
    for (double u = -2.0; u <= 2.0; u += 0.25) {
        const double q = (profile.antideriv(u + d) - profile.antideriv(u - d)) / (2.0 * d);
        if (std::fabs(q - profile.f(u)) > 1e-4 * (1.0 + std::fabs(profile.f(u))))
            throw std::invalid_argument("profile: antiderivative does not differentiate to f near u=" +
                                        fmt_double(u));
    }
}

ShootResult shoot(const ReactionProfile& profile, double slope, std::size_t n_steps) {
    if (n_steps < 100) throw std::invalid_argument("shoot: need at least 100 steps");
    ShootResult result;
    const ShootCore core = shoot_core(profile, slope, n_steps, &result.path);
    if (core.escaped)
        throw blowup_error("shooting escaped at t=" +
                               fmt_double(static_cast<double>(core.escape_step) /
                                          static_cast<double>(n_steps)),
                           core.escape_step);
    result.u_at_1 = core.value;
    return result;
}

double default_slope_max(const ReactionProfile& profile) {
    // amplitude from the first positive root of f, falling back to 1
    double amplitude = 1.0;
    double prev = profile.f(0.05);
    for (double u = 0.1; u <= 50.0; u += 0.05) {
        const double cur = profile.f(u);
        if (prev > 0.0 && cur <= 0.0) {
            double a = u - 0.05, b = u;
            for (int i = 0; i < 40; ++i) {
                const double m = 0.5 * (a + b);
                (profile.f(m) > 0.0 ? a : b) = m;
            }
            amplitude = 0.5 * (a + b);
            break;
        }
        prev = cur;
    }
    return 3.0 * (1.0 + std::sqrt(std::max(profile.fprime0, 0.0))) * amplitude;
}

EquilibriumSet find_equilibria(const ReactionProfile& profile, std::size_t n_grid,
                               double slope_max, std::size_t n_scan, double tol,
                               ExecMode mode) {
    if (n_grid == 0) throw std::invalid_argument("find_equilibria: empty grid");
    if (n_scan < 2) throw std::invalid_argument("find_equilibria: need at least 2 scan cells");
    if (!(tol > 0.0)) throw std::invalid_argument("find_equilibria: tol must be positive");
    if (slope_max <= 0.0) slope_max = default_slope_max(profile);

    const std::size_t scan_steps = 400;
    std::vector<double> slopes(n_scan + 1), values(n_scan + 1);
    for (std::size_t i = 0; i <= n_scan; ++i)
        slopes[i] = -slope_max + 2.0 * slope_max * static_cast<double>(i) /
                                     static_cast<double>(n_scan);

    const auto phi = [&](double s) { return shoot_core(profile, s, scan_steps, nullptr).value; };

#ifdef _OPENMP
    if (mode == ExecMode::parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i <= static_cast<long long>(n_scan); ++i)
            values[static_cast<std::size_t>(i)] = phi(slopes[static_cast<std::size_t>(i)]);
    } else
#else
    (void)mode;
#endif
    {
        for (std::size_t i = 0; i <= n_scan; ++i) values[i] = phi(slopes[i]);
    }

    EquilibriumSet set;
    std::vector<double> root_slopes;
    for (std::size_t i = 0; i <= n_scan; ++i)
        if (values[i] == 0.0) root_slopes.push_back(slopes[i]);
    for (std::size_t i = 0; i < n_scan; ++i) {
        if (values[i] == 0.0 || values[i + 1] == 0.0) continue;
        if ((values[i] > 0.0) == (values[i + 1] > 0.0)) continue;
        if (i == 0 || i + 1 == n_scan) set.outer_sign_change = true;
        double a = slopes[i], b = slopes[i + 1];
        double fa = values[i];
        bool converged = false;
        for (int it = 0; it < 200; ++it) {
            const double m = 0.5 * (a + b);
            const double fm = phi(m);
            if (std::fabs(fm) < tol) {
                root_slopes.push_back(m);
                converged = true;
                break;
            }
            if ((fm > 0.0) == (fa > 0.0)) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
            if (b - a < 1e-15 * std::max(1.0, slope_max)) break;
        }
        if (!converged)
            set.warnings.push_back("bisection did not converge in cell " + std::to_string(i) +
                                   "; candidate excluded");
    }
    std::sort(root_slopes.begin(), root_slopes.end());

    const LinearOperator op = assemble_laplacian(n_grid, 1.0);
    for (double s : root_slopes) {
        std::vector<double> path;
        const ShootCore core = shoot_core(profile, s, n_grid + 1, &path);
        if (core.escaped) {
            set.warnings.push_back("root at slope " + fmt_double(s) +
                                   " escaped on the profile grid; excluded");
            continue;
        }
        std::vector<double> u(path.begin() + 1, path.begin() + 1 + static_cast<long>(n_grid));
        newton_polish(u, profile, op);
        // merge duplicates (scan cells can bracket the same root twice)
        bool duplicate = false;
        for (const auto& existing : set.profiles) {
            double d = 0.0;
            for (std::size_t j = 0; j < n_grid; ++j)
                d = std::max(d, std::fabs(existing[j] - u[j]));
            if (d <= 10.0 * tol) {
                duplicate = true;
                break;
            }
        }
        if (duplicate) continue;
        const double res = stationary_residual(u, profile, op);
        if (res > 1e-6)
            set.warnings.push_back("residual " + fmt_double(res) + " above polish target at slope " +
                                   fmt_double(s));
        set.residuals.push_back(res);
        set.profiles.push_back(std::move(u));
        set.shooting_slopes.push_back(s);
    }
    return set;
}

double stationary_residual(std::span<const double> u, const ReactionProfile& profile,
                           const LinearOperator& op) {
    if (u.size() != op.size())
        throw std::invalid_argument("stationary_residual: grid mismatch");
    if (!profile.h.empty() && profile.h.size() != u.size())
        throw std::invalid_argument("stationary_residual: forcing grid mismatch");
    std::vector<double> au(u.size());
    op.apply(u, au);
    const double sigma = profile.sign();
    double norm = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j)
        norm = std::max(norm, std::fabs(au[j] + sigma * profile.f(u[j]) - forcing_at(profile, j)));
    return norm;
}

double energy(std::span<const double> u, const ReactionProfile& profile,
              const LinearOperator& op) {
    if (u.size() != op.size()) throw std::invalid_argument("energy: grid mismatch");
    if (!profile.h.empty() && profile.h.size() != u.size())
        throw std::invalid_argument("energy: forcing grid mismatch");
    const double dx = 1.0 / static_cast<double>(u.size() + 1);
    const double sigma = profile.sign();
    double e = 0.5 * dx * op.quad_form(u);
    for (std::size_t j = 0; j < u.size(); ++j)
        e += dx * (sigma * profile.antideriv(u[j]) - forcing_at(profile, j) * u[j]);
    return e;
}

EnergyReport verify_energy_decrease(const TrajectorySample& traj,
                                    const ReactionProfile& profile, const LinearOperator& op,
                                    double slack) {
    if (traj.states.empty()) throw std::invalid_argument("energy report: empty trajectory");
    EnergyReport report;
    report.energies.reserve(traj.states.size());
    for (const auto& s : traj.states) report.energies.push_back(energy(s, profile, op));
    report.initial_energy = report.energies.front();
    for (std::size_t k = 0; k + 1 < report.energies.size(); ++k)
        report.max_increment =
            std::max(report.max_increment, report.energies[k + 1] - report.energies[k]);
    report.total_decrease = report.energies.front() - report.energies.back();
    report.pass = report.max_increment <= slack * (1.0 + std::fabs(report.initial_energy));
    return report;
}

Classification classify_omega(const TrajectorySample& traj, const EquilibriumSet& equilibria,
                              double tol) {
    if (equilibria.profiles.empty())
        throw std::invalid_argument("classify_omega: empty equilibrium set");
    if (traj.states.empty()) throw std::invalid_argument("classify_omega: empty trajectory");
    const double span = traj.times.back() - traj.times.front();
    const double window = std::min(span, std::max(10.0, 0.2 * span));
    const double window_start = traj.times.back() - window;

    const std::size_t m = equilibria.profiles.size();
    std::vector<double> window_max(m, 0.0);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        if (traj.times[k] < window_start) continue;
        for (std::size_t j = 0; j < m; ++j)
            window_max[j] =
                std::max(window_max[j], dist2(traj.states[k], equilibria.profiles[j]));
    }
    std::size_t best = 0;
    std::size_t hits = 0;
    for (std::size_t j = 0; j < m; ++j) {
        if (window_max[j] < window_max[best]) best = j;
        if (window_max[j] < 0.5 * tol) ++hits;
    }
    Classification result;
    result.final_distance = dist2(traj.states.back(), equilibria.profiles[best]);
    if (hits == 1) result.index = best;
    return result;
}

} // namespace semiflow
