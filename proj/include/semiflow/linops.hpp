#pragma once

// Symmetric tridiagonal operators (discrete Dirichlet Laplacian and the zero
// operator) with prefactored solves for the semi-implicit stepper.

#include <cstddef>
#include <span>
#include <vector>

namespace semiflow {

struct LinearOperator {
    std::vector<double> diag;
    std::vector<double> off; // sub/super diagonal, size n-1
    double eig_min = 0.0;
    double eig_max = 0.0;

    std::size_t size() const { return diag.size(); }
    void apply(std::span<const double> u, std::span<double> out) const;
    double quad_form(std::span<const double> u) const; // <Au, u>
};

// Discrete Dirichlet Laplacian on n interior points of an interval of the
// given length: tridiag(-1, 2, -1)/dx^2 with dx = length/(n+1).  Eigenvalue
// bounds come from the closed-form spectrum.
LinearOperator assemble_laplacian(std::size_t n_interior, double length);

// Zero operator (free dynamics), kept for tests.
LinearOperator zero_operator(std::size_t n);

// Prefactored Thomas solve of (I + dt*A) x = rhs.
class SemiImplicitSolver {
  public:
    SemiImplicitSolver(const LinearOperator& op, double dt);
    void solve(std::span<const double> rhs, std::span<double> x) const;
    double dt() const { return dt_; }

  private:
    double dt_;
    std::vector<double> diag_;  // diagonal of I + dt*A
    std::vector<double> off_;   // off-diagonal of I + dt*A
    std::vector<double> cprime_; // forward-sweep workspace (factorization)
};

} // namespace semiflow
