#pragma once
// Preconditioned conjugate gradient on the normal equations (matrix-free via
// the affine residual map) and broken-H1 error reporting against exact
// solutions.

#include <functional>

#include "hpsem/functional.hpp"
#include "hpsem/precond.hpp"

namespace hpsem {

struct SolveReport {
    int iterations = 0;
    std::vector<double> residual_history;  // preconditioned residual norms
    double functional_final = 0.0;
    double rel_error_h1 = -1.0;  // percent; < 0 when no exact solution
    int dof = 0;
    double wall_time = 0.0;  // seconds
};

using VecOp = std::function<std::vector<double>(const std::vector<double>&)>;
// Observer invoked once per iteration with (r_k, P r_k) before the update.
using PcgObserver =
    std::function<void(const std::vector<double>&, const std::vector<double>&)>;

// Plain PCG on X U = b where apply_x is the linear action U -> X U and
// precond is SPD. Stops when the preconditioned residual norm drops below
// tol times its initial value. Throws on breakdown (<p, Xp> <= 0 with a
// nonconverged residual) or non-finite values.
std::vector<double> pcg_solve(const VecOp& apply_x, const std::vector<double>& b,
                              const VecOp& precond, std::vector<double> U0, double tol,
                              int max_iter, SolveReport& report,
                              const PcgObserver& observer = nullptr);

// Minimize the least-squares functional of (problem, mesh): PCG on the
// normal equations with the separable preconditioner, U0 = 0. Fills the
// functional value, DOF, wall time, and (when an exact solution exists) the
// broken-H1 relative error.
std::pair<std::vector<double>, SolveReport> solve_least_squares(
    const Assembly& assembly, const SeparablePrecond& precond, double tol = 1e-8,
    int max_iter = 5000);

// Broken H1 relative error in percent: per-element Cartesian-variable
// quadrature of |u - u_ex|^2 + |grad(u - u_ex)|^2 over the finite (Standard)
// elements, relative to ||u_ex||_{H1} over the same region.
double h1_relative_error(const EllipticProblem& problem, const Mesh& mesh,
                         const Layout& layout, const std::vector<double>& U);

}  // namespace hpsem
