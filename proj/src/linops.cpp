#include "semiflow/linops.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace semiflow {

void LinearOperator::apply(std::span<const double> u, std::span<double> out) const {
    const std::size_t n = diag.size();
    for (std::size_t i = 0; i < n; ++i) {
        double v = diag[i] * u[i];
        if (i > 0) v += off[i - 1] * u[i - 1];
        if (i + 1 < n) v += off[i] * u[i + 1];
        out[i] = v;
    }
}

double LinearOperator::quad_form(std::span<const double> u) const {
    const std::size_t n = diag.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += diag[i] * u[i] * u[i];
    for (std::size_t i = 0; i + 1 < n; ++i) s += 2.0 * off[i] * u[i] * u[i + 1];
    return s;
}

LinearOperator assemble_laplacian(std::size_t n_interior, double length) {
    if (n_interior < 2)
        throw std::invalid_argument("assemble_laplacian: n_interior must be >= 2");
    if (!(length > 0.0)) throw std::invalid_argument("assemble_laplacian: length must be > 0");
    const double dx = length / static_cast<double>(n_interior + 1);
    const double w = 1.0 / (dx * dx);
    LinearOperator op;
    op.diag.assign(n_interior, 2.0 * w);
    op.off.assign(n_interior - 1, -w);
    const double theta = std::numbers::pi * dx / length;
    op.eig_min = 2.0 * w * (1.0 - std::cos(theta));
    op.eig_max = 2.0 * w * (1.0 - std::cos(std::numbers::pi * static_cast<double>(n_interior) *
                                           dx / length));
    return op;
}

LinearOperator zero_operator(std::size_t n) {
    LinearOperator op;
    op.diag.assign(n, 0.0);
    op.off.assign(n > 1 ? n - 1 : 0, 0.0);
    return op;
}

SemiImplicitSolver::SemiImplicitSolver(const LinearOperator& op, double dt) : dt_(dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("SemiImplicitSolver: dt must be > 0");
    const std::size_t n = op.size();
    diag_.resize(n);
    off_.resize(n > 1 ? n - 1 : 0);
    cprime_.resize(n);
    for (std::size_t i = 0; i < n; ++i) diag_[i] = 1.0 + dt * op.diag[i];
    for (std::size_t i = 0; i + 1 < n; ++i) off_[i] = dt * op.off[i];
    // Forward elimination coefficients are state-independent; precompute.
    double denom = diag_[0];
    cprime_[0] = n > 1 ? off_[0] / denom : 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag_[i] - off_[i - 1] * cprime_[i - 1];
        cprime_[i] = (i + 1 < n) ? off_[i] / denom : 0.0;
    }
}

void SemiImplicitSolver::solve(std::span<const double> rhs, std::span<double> x) const {
    const std::size_t n = diag_.size();
    if (n == 0) return;
    x[0] = rhs[0] / diag_[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double denom = diag_[i] - off_[i - 1] * cprime_[i - 1];
        x[i] = (rhs[i] - off_[i - 1] * x[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= cprime_[i] * x[i + 1];
}

} // namespace semiflow
