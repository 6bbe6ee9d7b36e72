#pragma once
// Discrete fractional Sobolev norms on element faces: the H^{1/2} quadrature
// form (GLL divided differences + derivative diagonal), the H^{3/2}
// composition, and the weighted anisotropic |||.||| face norms of the edge
// and vertex-edge regions.

#include <Eigen/Dense>

#include "hpsem/basis.hpp"
#include "hpsem/mesh.hpp"

namespace hpsem {

// 1D building block: symmetric PSD matrix Q with
//   s^T Q s = sum_{i != i'} w_i w_{i'} ((s_i - s_{i'})/(x_i - x_{i'}))^2
//           + sum_i w_i^2 ((D s)_i)^2
// (divided differences with the derivative value on the diagonal i' = i).
Eigen::MatrixXd half_seminorm_1d(const GllRule& rule);
const Eigen::MatrixXd& half_seminorm_1d_cached(int order);

// Symmetric positive definite matrix of the full discrete H^{1/2}(S) form on
// an (n1+1)x(n2+1) face grid, lexicographic (first index fastest), with
// direction coefficients: value = c0*L2 + c1*(dir-1 part) + c2*(dir-2 part).
struct HalfNormMatrix {
    int order1 = 0, order2 = 0;
    Eigen::MatrixXd entries;
};
HalfNormMatrix h_half_form(const GllRule& rule);  // square face, c = (1,1,1)
HalfNormMatrix face_form_matrix(const GllRule& r1, const GllRule& r2, double c0,
                                double c1, double c2);

// Evaluate / apply the same form without materializing the matrix.
double face_form_value(const GllRule& r1, const GllRule& r2,
                       const std::vector<double>& v, double c0, double c1, double c2);
std::vector<double> face_form_apply(const GllRule& r1, const GllRule& r2,
                                    const std::vector<double>& v, double c0, double c1,
                                    double c2);

double h_half_norm_sq(const GllRule& r1, const GllRule& r2, const std::vector<double>& v);
// ||u||^2_{3/2} = ||u||^2_0 + |u_1|^2_{1/2} + |u_2|^2_{1/2} with the tangential
// derivative samples supplied by the caller (same polynomial).
double h_three_half_norm_sq(const GllRule& r1, const GllRule& r2,
                            const std::vector<double>& u, const std::vector<double>& du1,
                            const std::vector<double>& du2);

// Analytic suprema of the frame weight functions over a (finite) face.
struct FaceWeights {
    double R = 1.0;  // sup e^{chi} (vertex)
    double E = 1.0;  // sup sin(phi) (vertex-edge)
    double F = 1.0;  // sup e^{zeta} (vertex-edge)
    double G = 1.0;  // sup e^{tau} (edge)
};
FaceWeights face_weights(const Element& e, int face);

// Per-face coefficient bundle implementing the case analysis of
// Eqs. 2.25 / 2.27 / 2.34 / 4.2-4.7.
struct FaceNormCoeffs {
    // coefficients of the case norm |||.|||: (L2 term, t1-diff, t2-diff)
    double base0 = 1.0, base1 = 1.0, base2 = 1.0;
    double jump_l2 = 1.0;                          // weight on L2([u])
    std::array<double, 3> deriv_mult{1.0, 1.0, 1.0};  // per frame-derivative term
    double dirichlet_l2 = 1.0;                     // weight on L2(u - g)
};
FaceNormCoeffs face_norm_coeffs(Frame frame, int axis, const FaceWeights& w);

// The |||.||| value of one component function sampled on the master face
// (case formula selected by the face's normal axis).
double weighted_face_norm(Frame frame, int axis, const FaceWeights& w, const GllRule& r1,
                          const GllRule& r2, const std::vector<double>& v);

// Trace of a Standard element's polynomial on one of its faces: values and
// the three frame-coordinate derivatives, evaluated at the tensor grid of
// (rt1 x rt2) master points of the face.
struct FaceTrace {
    int n1 = 0, n2 = 0;  // points per tangential direction
    std::vector<double> u;
    std::array<std::vector<double>, 3> du;  // d/dy_m, m = frame axis
};
FaceTrace trace_on_face(const Element& e, const std::vector<double>& coarse, int face,
                        const GllRule& rt1, const GllRule& rt2);

// Pointwise jump [u] = u_A - u_B and jumps of the three frame derivatives on
// the shared face grid. Requires same-frame, geometrically identical faces.
FaceTrace jump_face_values(const Mesh& mesh, int elem_a, int face_a,
                           const std::vector<double>& coarse_a,
                           const std::vector<double>& coarse_b, const GllRule& rt1,
                           const GllRule& rt2);

// Tangential axes (ascending) of a face with the given normal axis.
inline std::array<int, 2> face_tangents(int axis) {
    switch (axis) {
        case 0: return {1, 2};
        case 1: return {0, 2};
        default: return {0, 1};
    }
}

}  // namespace hpsem
