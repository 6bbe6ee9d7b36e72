#pragma once
// 1D Gauss-Lobatto-Legendre machinery: quadrature rules, differentiation
// matrices, discrete Legendre transforms, and the fine<->coarse grid
// transfer operators that every element computation is built from.

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace hpsem {

// Gauss-Lobatto-Legendre rule of order n: n+1 nodes in [-1,1] including the
// endpoints, exact for polynomials of degree <= 2n-1.
struct GllRule {
    int order = 0;
    std::vector<double> nodes;    // ascending, nodes[0] = -1, nodes[n] = +1
    std::vector<double> weights;  // positive, sum = 2
};

GllRule gll_rule(int n);
// Process-wide cache; returned reference is immutable and thread-safe to share.
const GllRule& gll(int n);

// Legendre polynomial values (unnormalized, L_m(1) = 1).
double legendre_eval(int m, double x);
// Fill L[0..maxdeg], and optionally first/second derivatives.
void legendre_eval_all(int maxdeg, double x, double* L, double* L1 = nullptr,
                       double* L2 = nullptr);

// Differentiation matrix on the rule's nodes: (Df)_i = f'(x_i) exactly for
// polynomials of degree <= order.
struct DiffMatrix {
    int order = 0;
    Eigen::MatrixXd d;
};
DiffMatrix diff_matrix(const GllRule& rule);
const Eigen::MatrixXd& diff(int n);  // cached

// Discrete Legendre transform data for a rule: gamma[m] = (m+1/2)^{-1} for
// m < n and gamma[n] = 2/n (discrete orthogonality constants), plus the
// evaluation matrix V_{i,m} = L_m(x_i).
struct LegendreTransform {
    int order = 0;
    std::vector<double> gamma;
    Eigen::MatrixXd vmat;
};
LegendreTransform legendre_transform(const GllRule& rule);
const LegendreTransform& lt(int n);  // cached

// modal[m] = gamma_m^{-1} sum_i w_i nodal_i L_m(x_i)
std::vector<double> legendre_forward(const GllRule& rule,
                                     const std::vector<double>& nodal);
// nodal_i = sum_m modal_m L_m(x_i)
std::vector<double> legendre_inverse(const GllRule& rule,
                                     const std::vector<double>& modal);

// Per-element coefficient tensor: values at the (W1+1)x(W2+1)x(W3+1) GLL
// grid in lexicographic order, index = i + (W1+1)*(j + (W2+1)*k).
struct TensorCoeffs {
    std::array<int, 3> degrees{0, 0, 0};
    std::vector<double> values;
    int size() const {
        return (degrees[0] + 1) * (degrees[1] + 1) * (degrees[2] + 1);
    }
};

// Interpolation matrix from the rule's nodes to arbitrary points
// (barycentric Lagrange evaluation; exact for degree <= rule.order).
Eigen::MatrixXd interp_matrix(const GllRule& from, const std::vector<double>& pts);
// Cached coarse(N) -> fine(M) GLL interpolation matrix, M >= N.
const Eigen::MatrixXd& interp_gll(int from_order, int to_order);

// Apply a matrix M (out_n x dims[dim]) along one dimension of a 3D tensor
// stored lexicographically (i fastest). Returns tensor with that dimension
// resized to out_n.
std::vector<double> apply_dim(const Eigen::MatrixXd& M, const std::vector<double>& in,
                              std::array<int, 3> dims, int dim);

// Fine nodal values (orders M[d]) of the degree-N tensor polynomial through
// the coarse nodal values.
std::vector<double> prolong_coarse_to_fine(const std::vector<double>& coarse,
                                           std::array<int, 3> N, std::array<int, 3> M);

// Transpose-prolongation (G^N)^T O^{M} via the five-step transform algorithm:
// divide by fine weights, forward Legendre transform, truncate modes with the
// gamma rescaling, inverse transform on the coarse grid, multiply by coarse
// weights. Exactly equals prolong's matrix transpose applied to `fine`.
std::vector<double> restrict_fine_to_coarse(const std::vector<double>& fine,
                                            std::array<int, 3> N, std::array<int, 3> M);
// Isotropic convenience overload with M = 2N per direction.
std::vector<double> restrict_fine_to_coarse(const std::vector<double>& fine, int N);

}  // namespace hpsem
