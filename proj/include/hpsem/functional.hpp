#pragma once
// The least-squares functional: weighted PDE residuals collocated on
// per-element fine grids, inter-element jump terms and boundary-data terms
// in the discrete fractional face norms, its gradient (the normal-equation
// residual r(U) = XU - YG) computed matrix-free, and a dense assembly
// oracle for small meshes.

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "hpsem/norms.hpp"
#include "hpsem/problems.hpp"

namespace hpsem {

// Global coefficient-vector layout: one contiguous block per element in id
// order; all CornerConstant elements alias a single shared trailing scalar.
struct Layout {
    std::vector<int> offset;  // per element id
    std::vector<int> size;    // per element id (1 for CornerConstant)
    int total = 0;
    int constant_offset = -1;  // index of the shared corner constant, or -1
};
Layout make_layout(const Mesh& mesh);

// Frame-form differential operator on one element, collocated at the fine
// (order 2W) GLL grid. The residual sample at fine point p is
//   z_p = sum_q c2[q]_p d2_q + sum_m c1[m]_p d1_m + c0_p u - rhs_p
// with d1/d2 the FRAME-coordinate derivatives of u (q = yy-pairs 11,22,33,
// 12,13,23; off-diagonal coefficients carry the symmetry factor 2), and all
// coefficients include the region residual weight and the master-volume
// factor, so that the term value is sum_p qw_p z_p^2.
struct MappedOperator {
    std::array<int, 3> fine{};  // fine orders per direction
    int npts = 0;
    std::array<std::vector<double>, 6> c2;
    std::array<std::vector<double>, 3> c1;
    std::vector<double> c0, rhs, qw;
};
MappedOperator mapped_operator(const EllipticProblem& problem, const Element& e);

struct FunctionalValue {
    double total = 0.0;
    double pde_residual = 0.0;
    double interior_jumps = 0.0;
    double dirichlet_terms = 0.0;
    double neumann_terms = 0.0;
};

struct DenseNormal {
    Eigen::MatrixXd X;
    Eigen::VectorXd YG;
};

// One-time assembly of all functional terms for a (problem, mesh) pair;
// evaluation methods are pure and reusable across solver iterations.
class Assembly {
  public:
    Assembly(const EllipticProblem& problem, const Mesh& mesh);
    ~Assembly();
    Assembly(const Assembly&) = delete;
    Assembly& operator=(const Assembly&) = delete;

    const Layout& layout() const;
    const Mesh& mesh() const;

    FunctionalValue value(const std::vector<double>& U) const;
    // Half-gradient r with value(U + eps V) = value(U) + 2 eps <V, r> + O(eps^2).
    std::vector<double> residual(const std::vector<double>& U) const;
    // Explicit X (SPSD) and YG with X U - YG == residual(U); forward sampling
    // only. Throws when total DOF exceeds the budget (~2000).
    DenseNormal dense() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Convenience wrappers matching the one-shot operation contracts.
FunctionalValue functional_value(const EllipticProblem& problem, const Mesh& mesh,
                                 const std::vector<double>& U);
std::vector<double> normal_residual(const EllipticProblem& problem, const Mesh& mesh,
                                    const std::vector<double>& U);
DenseNormal dense_normal_assembly(const EllipticProblem& problem, const Mesh& mesh);

}  // namespace hpsem
