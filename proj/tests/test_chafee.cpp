// Stationary profiles by shooting + Newton polish, discrete energy, energy
// monotonicity along dissipative runs, and tail classification.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "semiflow/chafee.hpp"
#include "semiflow/errors.hpp"
#include "semiflow/inclusion.hpp"
#include "semiflow/linops.hpp"
#include "semiflow/rng.hpp"
#include "semiflow/setvalued.hpp"

#include "test_support.hpp"

using namespace semiflow;

namespace {

// u'' = -15 u has the closed form u(x) = slope * sin(sqrt(15) x)/sqrt(15)
constexpr double kLinearShotAt1 = -0.17245240648720886;
// positive nontrivial shooting slope for the cubic at lambda = 15
constexpr double kSlopeStar = 8.834350324273169;
constexpr double kMaxStar = 2.5882204491101706;   // sup of that profile
constexpr double kEnergyStar = -4.448117652006566; // its continuum energy

ReactionProfile linear_profile(double lambda) {
    ReactionProfile p;
    p.f = [lambda](double u) { return lambda * u; };
    p.antideriv = [lambda](double u) { return 0.5 * lambda * u * u; };
    p.fprime0 = lambda;
    p.form = ProblemForm::chafee_infante;
    return p;
}

ReactionProfile zero_profile() {
    ReactionProfile p;
    p.f = [](double) { return 0.0; };
    p.antideriv = [](double) { return 0.0; };
    p.fprime0 = 0.0;
    p.form = ProblemForm::chafee_infante;
    return p;
}

void test_cubic_profile_and_validation() {
    const auto p = cubic_profile(15.0);
    CHECK_CLOSE(p.f(2.0), 30.0 - 8.0, 1e-12);
    CHECK_CLOSE(p.antideriv(2.0), 0.5 * 15.0 * 4.0 - 0.25 * 16.0, 1e-12);
    CHECK_CLOSE(p.fprime0, 15.0, 1e-15);
    CHECK_CLOSE(p.sign(), -1.0, 1e-15);
    validate_profile(p);

    ReactionProfile rd = cubic_profile(3.0);
    rd.form = ProblemForm::reaction_diffusion;
    CHECK_CLOSE(rd.sign(), 1.0, 1e-15);

    ReactionProfile offset = cubic_profile(15.0);
    offset.f = [](double u) { return 15.0 * u - u * u * u + 0.5; };
    CHECK_THROWS(validate_profile(offset), std::invalid_argument);

    ReactionProfile wrong_slope = cubic_profile(15.0);
    wrong_slope.fprime0 = 3.0;
    CHECK_THROWS(validate_profile(wrong_slope), std::invalid_argument);

    ReactionProfile wrong_antideriv = cubic_profile(15.0);
    wrong_antideriv.antideriv = [](double u) { return u * u; };
    CHECK_THROWS(validate_profile(wrong_antideriv), std::invalid_argument);
}

void test_shoot_basics() {
    const auto p = cubic_profile(15.0);
    const auto flat = shoot(p, 0.0, 200);
    CHECK_CLOSE(flat.u_at_1, 0.0, 0.0);
    CHECK(flat.path.size() == 201);
    for (double u : flat.path) CHECK_CLOSE(u, 0.0, 0.0);
    CHECK_THROWS(shoot(p, 1.0, 99), std::invalid_argument);

    // odd reaction term makes the shot odd in the slope, exactly
    const auto up = shoot(p, 3.0, 500);
    const auto down = shoot(p, -3.0, 500);
    CHECK_CLOSE(up.u_at_1 + down.u_at_1, 0.0, 1e-14);

    // linear profile against the closed form
    const auto lin = shoot(linear_profile(15.0), 1.0, 2000);
    CHECK_CLOSE(lin.u_at_1, kLinearShotAt1, 1e-8);

    // steep shots leave the energy well and blow up before x = 1
    CHECK_THROWS(shoot(p, 50.0, 400), blowup_error);
    try {
        shoot(p, 50.0, 400);
    } catch (const blowup_error& e) {
        CHECK(e.step > 0 && e.step <= 400);
    }
}

void test_default_slope_max() {
    const auto p = cubic_profile(15.0);
    // amplitude is the positive zero of f, sqrt(15) for the cubic
    const double expect = 3.0 * (1.0 + std::sqrt(15.0)) * std::sqrt(15.0);
    CHECK_CLOSE(default_slope_max(p), expect, 1e-6);
}

void test_find_equilibria_counts_and_values() {
    const auto p5 = cubic_profile(5.0);
    const auto only_zero = find_equilibria(p5, 60, 0.0, 40, 1e-8, ExecMode::serial);
    CHECK_MSG(only_zero.profiles.size() == 1,
              only_zero.profiles.size() << " equilibria at lambda=5");
    CHECK_CLOSE(only_zero.shooting_slopes[0], 0.0, 1e-9);

    const auto p15 = cubic_profile(15.0);
    const auto set = find_equilibria(p15, 200, 0.0, 40, 1e-8, ExecMode::serial);
    CHECK_MSG(set.profiles.size() == 3, set.profiles.size() << " equilibria at lambda=15");
    CHECK(set.warnings.empty());
    CHECK(!set.outer_sign_change);
    CHECK(set.shooting_slopes.size() == 3 && set.residuals.size() == 3);
    CHECK_CLOSE(set.shooting_slopes[0], -kSlopeStar, 1e-6);
    // The middle root comes from bisection on u(1) to 1e-8; the slope carries
    // that tolerance divided by |du(1)/ds| ~ 0.17, so allow a few 1e-7.
    CHECK_CLOSE(set.shooting_slopes[1], 0.0, 1e-6);
    CHECK_CLOSE(set.shooting_slopes[2], kSlopeStar, 1e-6);

    for (double r : set.residuals) CHECK_MSG(r < 1e-8, "residual " << r);
    for (double u : set.profiles[1]) CHECK_CLOSE(u, 0.0, 1e-9);

    double umax = 0.0;
    for (double u : set.profiles[2]) umax = std::max(umax, u);
    CHECK_CLOSE(umax, kMaxStar, 5e-4);
    // negative branch mirrors the positive one
    for (std::size_t j = 0; j < set.profiles[2].size(); ++j)
        CHECK_CLOSE(set.profiles[0][j], -set.profiles[2][j], 1e-8);

    CHECK_THROWS(find_equilibria(p15, 0, 0.0, 40, 1e-8), std::invalid_argument);
    CHECK_THROWS(find_equilibria(p15, 10, 0.0, 1, 1e-8), std::invalid_argument);
    CHECK_THROWS(find_equilibria(p15, 10, 0.0, 40, 0.0), std::invalid_argument);
}

void test_stationary_residual() {
    const auto p = cubic_profile(15.0);
    const auto set = find_equilibria(p, 120, 0.0, 40, 1e-8, ExecMode::serial);
    const LinearOperator op = assemble_laplacian(120, 1.0);
    for (std::size_t i = 0; i < set.profiles.size(); ++i)
        CHECK_CLOSE(stationary_residual(set.profiles[i], p, op), set.residuals[i], 1e-15);

    const std::vector<double> zeros(120, 0.0);
    CHECK_CLOSE(stationary_residual(zeros, p, op), 0.0, 0.0);

    const std::vector<double> short_u(10, 0.0);
    CHECK_THROWS(stationary_residual(short_u, p, op), std::invalid_argument);
}

void test_shot_profile_residual_order() {
    // the 3-point Laplacian residual of the true profile shrinks like dx^2:
    // doubling the grid must shrink it by >= 3.5x
    const auto p = cubic_profile(15.0);
    const auto coarse = shoot(p, kSlopeStar, 101);
    const auto fine = shoot(p, kSlopeStar, 201);
    const std::vector<double> uc(coarse.path.begin() + 1, coarse.path.begin() + 101);
    const std::vector<double> uf(fine.path.begin() + 1, fine.path.begin() + 201);
    const double rc = stationary_residual(uc, p, assemble_laplacian(100, 1.0));
    const double rf = stationary_residual(uf, p, assemble_laplacian(200, 1.0));
    CHECK_MSG(rc > rf && rc / rf >= 3.5, "residuals " << rc << " -> " << rf);
}

void test_energy_values() {
    const auto none = zero_profile();
    const LinearOperator op7 = assemble_laplacian(7, 1.0);
    std::vector<double> zeros(7, 0.0);
    CHECK_CLOSE(energy(zeros, none, op7), 0.0, 0.0);

    // unit-slope tent: continuum Dirichlet energy is exactly 1/2, and the
    // discrete sum reproduces it when the peak sits on a node
    std::vector<double> tent7(7);
    for (std::size_t j = 0; j < 7; ++j)
        tent7[j] = std::min<double>(static_cast<double>(j + 1), 8.0 - static_cast<double>(j + 1)) / 8.0;
    CHECK_CLOSE(energy(tent7, none, op7), 0.5, 1e-12);

    const LinearOperator op199 = assemble_laplacian(199, 1.0);
    std::vector<double> tent199(199);
    for (std::size_t j = 0; j < 199; ++j)
        tent199[j] =
            std::min<double>(static_cast<double>(j + 1), 200.0 - static_cast<double>(j + 1)) / 200.0;
    CHECK_CLOSE(energy(tent199, none, op199), 0.5, 1e-12);

    // discrete energy of the positive equilibrium vs its continuum value
    const auto p = cubic_profile(15.0);
    const auto set = find_equilibria(p, 200, 0.0, 40, 1e-8, ExecMode::serial);
    CHECK(set.profiles.size() == 3);
    CHECK_CLOSE(energy(set.profiles[2], p, assemble_laplacian(200, 1.0)), kEnergyStar, 1e-3);

    CHECK_THROWS(energy(zeros, none, assemble_laplacian(9, 1.0)), std::invalid_argument);
}

void test_energy_gradient_identity() {
    // d/ds E(u + s v) at s=0 equals dx * (A u + sign*f(u) - h, v) in both
    // sign conventions; checked against a central difference
    for (const auto form : {ProblemForm::chafee_infante, ProblemForm::reaction_diffusion}) {
        ReactionProfile p = cubic_profile(7.0);
        p.form = form;
        const std::size_t n = 16;
        const LinearOperator op = assemble_laplacian(n, 1.0);
        const double dx = 1.0 / static_cast<double>(n + 1);
        std::vector<double> u(n), v(n), au(n);
        for (std::size_t j = 0; j < n; ++j) {
            u[j] = keyed_uniform(17, static_cast<std::size_t>(form), j, 0, -1.5, 1.5);
            v[j] = keyed_uniform(18, static_cast<std::size_t>(form), j, 0, -1.0, 1.0);
        }
        op.apply(u, au);
        double grad_dot_v = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            grad_dot_v += dx * (au[j] + p.sign() * p.f(u[j])) * v[j];

        const double h = 1e-6;
        std::vector<double> up(u), um(u);
        for (std::size_t j = 0; j < n; ++j) {
            up[j] += h * v[j];
            um[j] -= h * v[j];
        }
        const double fd = (energy(up, p, op) - energy(um, p, op)) / (2.0 * h);
        CHECK_CLOSE(fd, grad_dot_v, 1e-5 * (1.0 + std::fabs(grad_dot_v)));
    }
}

TrajectorySample settle_run(const LinearOperator& op, std::span<const double> y0, double t_final,
                            std::size_t stride) {
    const auto map = make_named_map("cubic:lambda=15");
    const auto pol = parse_policy("midpoint");
    IntegrateOptions opt;
    opt.t_final = t_final;
    opt.dt = 1e-3;
    opt.stride = stride;
    return integrate(op, map, pol, y0, opt);
}

void test_energy_decrease_along_runs() {
    const std::size_t n = 40;
    const LinearOperator op = assemble_laplacian(n, 1.0);
    const auto p = cubic_profile(15.0);
    std::vector<double> y0(n);
    const double dx = 1.0 / static_cast<double>(n + 1);
    for (std::size_t j = 0; j < n; ++j)
        y0[j] = 0.5 * std::sin(3.14159265358979 * dx * static_cast<double>(j + 1)) + 0.2;

    const auto traj = settle_run(op, y0, 5.0, 100);
    const auto report = verify_energy_decrease(traj, p, op, 1e-6);
    CHECK_MSG(report.pass, "max increment " << report.max_increment);
    CHECK(report.total_decrease > 0.0);
    CHECK(report.energies.size() == traj.states.size());
    CHECK_CLOSE(report.initial_energy, energy(y0, p, op), 1e-12);

    TrajectorySample reversed = traj;
    std::reverse(reversed.states.begin(), reversed.states.end());
    const auto bad = verify_energy_decrease(reversed, p, op, 1e-6);
    CHECK(!bad.pass);
    CHECK(bad.max_increment > 0.0);

    TrajectorySample empty;
    CHECK_THROWS(verify_energy_decrease(empty, p, op, 1e-6), std::invalid_argument);
}

void test_energy_dissipation_identity() {
    // dE/dt = -||u_t||^2: over one recorded step, E_{k+1} - E_k matches
    // -dx * sum (du/dt)^2 * dt to within 10%
    const std::size_t n = 40;
    const LinearOperator op = assemble_laplacian(n, 1.0);
    const auto p = cubic_profile(15.0);
    const std::vector<double> y0(n, 0.5);
    const auto traj = settle_run(op, y0, 0.5, 1);
    const double dx = 1.0 / static_cast<double>(n + 1);
    const double dt = traj.dt;
    const std::size_t k = 100;
    const double lhs = energy(traj.states[k + 1], p, op) - energy(traj.states[k], p, op);
    double rhs = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double ut = (traj.states[k + 1][j] - traj.states[k][j]) / dt;
        rhs -= dx * ut * ut * dt;
    }
    CHECK_MSG(std::fabs(lhs) > 1e-12, "step too flat: " << lhs);
    CHECK_CLOSE(lhs, rhs, 0.1 * std::fabs(lhs));
}

void test_classify_omega() {
    const auto p = cubic_profile(15.0);
    const std::size_t n = 40;
    const auto set = find_equilibria(p, n, 0.0, 40, 1e-8, ExecMode::serial);
    CHECK(set.profiles.size() == 3);

    auto constant_traj = [&](const std::vector<double>& u) {
        TrajectorySample t;
        for (std::size_t k = 0; k <= 20; ++k) {
            t.times.push_back(static_cast<double>(k));
            t.states.push_back(u);
        }
        return t;
    };

    const auto at_plus = classify_omega(constant_traj(set.profiles[2]), set, 1e-3);
    CHECK(at_plus.index.has_value() && *at_plus.index == 2);
    CHECK_CLOSE(at_plus.final_distance, 0.0, 1e-12);

    const auto at_zero = classify_omega(constant_traj(std::vector<double>(n, 0.0)), set, 1e-3);
    CHECK(at_zero.index.has_value() && *at_zero.index == 1);

    const auto nowhere = classify_omega(constant_traj(std::vector<double>(n, 50.0)), set, 1e-3);
    CHECK(!nowhere.index.has_value());
    CHECK(nowhere.final_distance > 1.0);

    // an actual run from a perturbed positive profile settles back onto it
    const LinearOperator op = assemble_laplacian(n, 1.0);
    std::vector<double> y0 = set.profiles[2];
    for (auto& u : y0) u += 0.01;
    const auto traj = settle_run(op, y0, 30.0, 100);
    const auto settled = classify_omega(traj, set, 1e-3);
    CHECK_MSG(settled.index.has_value() && *settled.index == 2,
              "settled distance " << settled.final_distance);

    EquilibriumSet empty;
    CHECK_THROWS(classify_omega(traj, empty, 1e-3), std::invalid_argument);
    TrajectorySample none;
    CHECK_THROWS(classify_omega(none, set, 1e-3), std::invalid_argument);
}

} // namespace

int main() {
    RUN_TEST(test_cubic_profile_and_validation);
    RUN_TEST(test_shoot_basics);
    RUN_TEST(test_default_slope_max);
    RUN_TEST(test_find_equilibria_counts_and_values);
    RUN_TEST(test_stationary_residual);
    RUN_TEST(test_shot_profile_residual_order);
    RUN_TEST(test_energy_values);
    RUN_TEST(test_energy_gradient_identity);
    RUN_TEST(test_energy_decrease_along_runs);
    RUN_TEST(test_energy_dissipation_identity);
    RUN_TEST(test_classify_omega);
    return testkit::summary();
}
