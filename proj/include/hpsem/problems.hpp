#pragma once
// Catalog of elliptic model problems: operator coefficients, right-hand
// sides, boundary assignments, domains, and exact solutions with gradients
// for convergence studies.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "hpsem/mesh.hpp"

namespace hpsem {

using Vec3 = std::array<double, 3>;

// Operator data at a Cartesian point for
//   L u = sum_ij a_ij u_{x_i x_j} + sum_i b_i u_{x_i} + c u.
// a is symmetric; the principal part is definite (coefficients as printed,
// negative definite for the -Laplacian family).
struct CoeffValues {
    std::array<std::array<double, 3>, 3> a{};
    Vec3 b{};
    double c = 0.0;
};

enum class DomainKind { RegularBricks, VertexCone, EdgeCylinder, VertexEdgeCone };

struct EllipticProblem {
    std::string name;
    DomainKind domain = DomainKind::RegularBricks;
    std::vector<Brick> bricks;  // base cells of a regular domain (refinable)
    MeshSpec mesh;              // frame-domain parameters (angles, extents)
    BoundaryAssign bc;          // face classification in frame coordinates
    bool robin = false;         // Neumann faces carry du/dnu + u
    bool constant_coeffs = false;
    bool has_exact = true;

    std::function<CoeffValues(const Vec3&)> coeffs;
    std::function<double(const Vec3&)> f;
    std::function<double(const Vec3&)> u_ex;
    std::function<Vec3(const Vec3&)> grad_ex;
    // Cartesian second derivatives (xx, yy, zz, xy, yz, zx); only provided
    // where the exact solution is smooth enough to hand-derive them (the
    // regular-domain entries).
    std::function<std::array<double, 6>(const Vec3&)> hess_ex;
};

// Throws std::invalid_argument for unknown names.
EllipticProblem catalog(const std::string& name);
std::vector<std::string> catalog_names();

Frame problem_frame(const EllipticProblem& p);

// Build the study mesh: regular domains split every base brick n-per-axis
// with uniform degree W; frame domains build n geometric layers with the
// uniform degree W. Table row "p" corresponds to (W, n) = (p-1, p-1).
Mesh problem_mesh(const EllipticProblem& p, int W, int n);

// Residual L u_ex - f at a Cartesian point using finite-difference second
// derivatives of u_ex (4th-order central, step h); consistency oracle for
// entries without analytic Hessians.
double fd_residual(const EllipticProblem& p, const Vec3& x, double h = 1e-2);

}  // namespace hpsem
