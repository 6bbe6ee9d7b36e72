#pragma once
// Separable block preconditioners: per-direction 1D quadratic forms in the
// Legendre coefficient basis, their generalized eigendecompositions, the
// tensor-product O(W^4) application of the inverse per-element form, and the
// condition-number study of the H^2 form against its separable surrogate.

#include <Eigen/Dense>

#include "hpsem/functional.hpp"

namespace hpsem {

// 1D forms on the Legendre coefficient basis of degree W:
//   E(v) = int (v'')^2 + (v')^2,   F(v) = int v^2
// (anisotropic variant: E -> eta^4 int (v'')^2 + eta^2 int (v')^2).
struct QuadForm1D {
    int W = 0;
    Eigen::MatrixXd E, F;
};
QuadForm1D quad_forms_1d(int W);
QuadForm1D quad_forms_1d_aniso(int W, double eta);

// F-orthonormal ascending eigenpairs of (E - mu F) b = 0; columns of b are
// Legendre coefficient vectors, sign-fixed by first nonzero entry positive.
struct EigBasis1D {
    int W = 0;
    Eigen::VectorXd mu;
    Eigen::MatrixXd b;
};
EigBasis1D gen_eig(const QuadForm1D& q);

// Per-element separable preconditioner blocks in the global layout:
// Standard elements carry the tensor surrogate form (anisotropic third
// direction for edge / vertex-edge frames), corner cells carry weighted 1D /
// scalar mass blocks.
class SeparablePrecond {
  public:
    SeparablePrecond(const Mesh& mesh, const Layout& layout);
    ~SeparablePrecond();
    SeparablePrecond(const SeparablePrecond&) = delete;
    SeparablePrecond& operator=(const SeparablePrecond&) = delete;

    // P r (inverse of the block form); O(W^4) per element
    std::vector<double> apply(const std::vector<double>& r) const;
    // The explicit block form C u (oracle: apply(apply_form(u)) == u)
    std::vector<double> apply_form(const std::vector<double>& u) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// kappa = lambda_max / lambda_min of the pencil (B, C) on the master cube,
// B(u) = sum_{|alpha|<=2} |D^alpha u|^2_{L2(Q)}, C(u) the separable form;
// assembled exactly in the tensor Legendre basis, extremes by Lanczos with
// full reorthogonalization.
double condition_number_study(int W);

}  // namespace hpsem
