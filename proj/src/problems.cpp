#include "hpsem/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace hpsem {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Spherical {
    double rho, phi, theta;
};
Spherical spherical(const Vec3& x) {
    double r = std::hypot(x[0], x[1]);
    double rho = std::hypot(r, x[2]);
    double theta = std::atan2(x[1], x[0]);
    if (theta < 0) theta += 2.0 * kPi;
    return {rho, std::atan2(r, x[2]), theta};
}
struct Cylindrical {
    double r, theta, z;
};
Cylindrical cylindrical(const Vec3& x) {
    double theta = std::atan2(x[1], x[0]);
    if (theta < 0) theta += 2.0 * kPi;
    return {std::hypot(x[0], x[1]), theta, x[2]};
}

// Cartesian gradient from spherical partials (u_rho, u_phi, u_theta).
Vec3 grad_from_spherical(const Spherical& s, double ur, double up, double ut) {
    double sp = std::sin(s.phi), cp = std::cos(s.phi);
    double st = std::sin(s.theta), ct = std::cos(s.theta);
    double a = ur, b = up / s.rho, c = ut / (s.rho * sp);
    return {a * sp * ct + b * cp * ct - c * st, a * sp * st + b * cp * st + c * ct,
            a * cp - b * sp};
}
// Cartesian gradient from cylindrical partials (u_r, u_theta, u_z).
Vec3 grad_from_cylindrical(const Cylindrical& s, double ur, double ut, double uz) {
    double st = std::sin(s.theta), ct = std::cos(s.theta);
    double c = ut / s.r;
    return {ur * ct - c * st, ur * st + c * ct, uz};
}

CoeffValues laplacian_coeffs() {
    CoeffValues c;
    c.a[0][0] = c.a[1][1] = c.a[2][2] = -1.0;
    return c;
}

// f for a manufactured regular-domain solution: contract the coefficients
// with the analytic Hessian/gradient/value.
std::function<double(const Vec3&)> manufactured_rhs(const EllipticProblem& p) {
    auto coeffs = p.coeffs;
    auto u = p.u_ex;
    auto g = p.grad_ex;
    auto h = p.hess_ex;
    return [coeffs, u, g, h](const Vec3& x) {
        CoeffValues c = coeffs(x);
        std::array<double, 6> H = h(x);  // xx, yy, zz, xy, yz, zx
        Vec3 G = g(x);
        double v = c.a[0][0] * H[0] + c.a[1][1] * H[1] + c.a[2][2] * H[2] +
                   2.0 * (c.a[0][1] * H[3] + c.a[1][2] * H[4] + c.a[2][0] * H[5]);
        for (int i = 0; i < 3; ++i) v += c.b[i] * G[i];
        return v + c.c * u(x);
    };
}

FaceTag mixed_split_bc(int axis, int side, const std::array<double, 3>&) {
    // Dirichlet on x = -1, x = 1, y = -1; Neumann on y = 1, z = -1, z = 1
    if (axis == 0 || (axis == 1 && side == 0)) return FaceTag::Dirichlet;
    return FaceTag::Neumann;
}

std::vector<Brick> unit_cube_01() { return {{{0, 1, 0, 1, 0, 1}}}; }
std::vector<Brick> cube_m11() { return {{{-1, 1, -1, 1, -1, 1}}}; }

EllipticProblem make_laplace_dirichlet_cube() {
    EllipticProblem p;
    p.name = "laplace-dirichlet-cube";
    p.bricks = unit_cube_01();
    p.bc = all_dirichlet;
    p.constant_coeffs = true;
    p.coeffs = [](const Vec3&) { return laplacian_coeffs(); };
    const double k = 1.0 / (kPi * kPi * std::sinh(std::sqrt(2.0) * kPi));
    const double s2p = std::sqrt(2.0) * kPi;
    p.u_ex = [k, s2p](const Vec3& x) {
        return k * std::sin(kPi * x[0]) * std::sin(kPi * x[1]) * std::sinh(s2p * x[2]);
    };
    p.grad_ex = [k, s2p](const Vec3& x) -> Vec3 {
        double sx = std::sin(kPi * x[0]), cx = std::cos(kPi * x[0]);
        double sy = std::sin(kPi * x[1]), cy = std::cos(kPi * x[1]);
        double sh = std::sinh(s2p * x[2]), ch = std::cosh(s2p * x[2]);
        return {k * kPi * cx * sy * sh, k * kPi * sx * cy * sh, k * s2p * sx * sy * ch};
    };
    p.hess_ex = [k, s2p](const Vec3& x) -> std::array<double, 6> {
        double sx = std::sin(kPi * x[0]), cx = std::cos(kPi * x[0]);
        double sy = std::sin(kPi * x[1]), cy = std::cos(kPi * x[1]);
        double sh = std::sinh(s2p * x[2]), ch = std::cosh(s2p * x[2]);
        double u = k * sx * sy * sh;
        return {-kPi * kPi * u,          -kPi * kPi * u, 2.0 * kPi * kPi * u,
                k * kPi * kPi * cx * cy * sh, k * kPi * s2p * sx * cy * ch,
                k * kPi * s2p * cx * sy * ch};
    };
    p.f = manufactured_rhs(p);
    return p;
}

EllipticProblem make_poisson_homogeneous() {
    EllipticProblem p;
    p.name = "poisson-homogeneous";
    p.bricks = cube_m11();
    p.bc = all_dirichlet;
    p.constant_coeffs = true;
    p.coeffs = [](const Vec3&) { return laplacian_coeffs(); };
    p.u_ex = [](const Vec3& x) {
        return std::sin(kPi * x[0]) * std::sin(kPi * x[1]) * std::sin(kPi * x[2]);
    };
    p.grad_ex = [](const Vec3& x) -> Vec3 {
        double sx = std::sin(kPi * x[0]), cx = std::cos(kPi * x[0]);
        double sy = std::sin(kPi * x[1]), cy = std::cos(kPi * x[1]);
        double sz = std::sin(kPi * x[2]), cz = std::cos(kPi * x[2]);
        return {kPi * cx * sy * sz, kPi * sx * cy * sz, kPi * sx * sy * cz};
    };
    p.hess_ex = [](const Vec3& x) -> std::array<double, 6> {
        double sx = std::sin(kPi * x[0]), cx = std::cos(kPi * x[0]);
        double sy = std::sin(kPi * x[1]), cy = std::cos(kPi * x[1]);
        double sz = std::sin(kPi * x[2]), cz = std::cos(kPi * x[2]);
        double p2 = kPi * kPi, u = sx * sy * sz;
        return {-p2 * u, -p2 * u, -p2 * u, p2 * cx * cy * sz, p2 * sx * cy * cz,
                p2 * cx * sy * cz};
    };
    p.f = manufactured_rhs(p);
    return p;
}

EllipticProblem make_poisson_mixed() {
    EllipticProblem p;
    p.name = "poisson-mixed";
    p.bricks = cube_m11();
    p.bc = mixed_split_bc;
    p.constant_coeffs = true;
    p.coeffs = [](const Vec3&) { return laplacian_coeffs(); };
    const double k = kPi / 2.0, A = 2.0 / (kPi * kPi);
    p.u_ex = [k, A](const Vec3& x) {
        return A * std::sin(k * x[0]) * (std::cos(k * x[1]) - std::sin(k * x[2]));
    };
    p.grad_ex = [k, A](const Vec3& x) -> Vec3 {
        double sx = std::sin(k * x[0]), cx = std::cos(k * x[0]);
        return {A * k * cx * (std::cos(k * x[1]) - std::sin(k * x[2])),
                -A * k * sx * std::sin(k * x[1]), -A * k * sx * std::cos(k * x[2])};
    };
    p.hess_ex = [k, A](const Vec3& x) -> std::array<double, 6> {
        double sx = std::sin(k * x[0]), cx = std::cos(k * x[0]);
        double cy = std::cos(k * x[1]), sy = std::sin(k * x[1]);
        double cz = std::cos(k * x[2]), sz = std::sin(k * x[2]);
        double k2 = k * k;
        return {-A * k2 * sx * (cy - sz), -A * k2 * sx * cy, A * k2 * sx * sz,
                -A * k2 * cx * sy, 0.0, -A * k2 * cx * cz};
    };
    p.f = manufactured_rhs(p);
    return p;
}

EllipticProblem make_helmholtz_mixed() {
    EllipticProblem p;
    p.name = "helmholtz-mixed";
    p.bricks = cube_m11();
    p.bc = mixed_split_bc;
    p.constant_coeffs = true;
    p.coeffs = [](const Vec3&) {
        CoeffValues c = laplacian_coeffs();
        c.c = 1.0;
        return c;
    };
    p.u_ex = [](const Vec3& x) { return std::exp(x[0]) * std::cos(x[1]) * std::sin(x[2]); };
    p.grad_ex = [](const Vec3& x) -> Vec3 {
        double e = std::exp(x[0]), cy = std::cos(x[1]), sy = std::sin(x[1]);
        double sz = std::sin(x[2]), cz = std::cos(x[2]);
        return {e * cy * sz, -e * sy * sz, e * cy * cz};
    };
    p.hess_ex = [](const Vec3& x) -> std::array<double, 6> {
        double e = std::exp(x[0]), cy = std::cos(x[1]), sy = std::sin(x[1]);
        double sz = std::sin(x[2]), cz = std::cos(x[2]);
        double u = e * cy * sz;
        return {u, -u, -u, -e * sy * sz, -e * sy * cz, e * cy * cz};
    };
    p.f = manufactured_rhs(p);
    return p;
}

EllipticProblem make_varcoef_robin() {
    EllipticProblem p;
    p.name = "varcoef-robin";
    p.bricks = cube_m11();
    p.bc = [](int, int, const std::array<double, 3>&) { return FaceTag::Robin; };
    p.robin = true;
    p.coeffs = [](const Vec3& x) {
        CoeffValues c;
        c.a[0][0] = -(1.00 + 0.01 * x[1] * std::sin(x[0]));
        c.a[1][1] = -(2.50 + 0.02 * std::cos(x[0] * x[0] + x[2]));
        c.a[2][2] = -(3.00 + 0.03 * x[1] * std::exp(x[2]));
        c.c = 0.15 * std::sin(2.0 * kPi * (x[1] + x[2]));
        return c;
    };
    p.u_ex = [](const Vec3& x) { return std::cos(kPi * (x[0] + x[1])) * std::exp(x[2]); };
    p.grad_ex = [](const Vec3& x) -> Vec3 {
        double C = std::cos(kPi * (x[0] + x[1])), S = std::sin(kPi * (x[0] + x[1]));
        double E = std::exp(x[2]);
        return {-kPi * S * E, -kPi * S * E, C * E};
    };
    p.hess_ex = [](const Vec3& x) -> std::array<double, 6> {
        double C = std::cos(kPi * (x[0] + x[1])), S = std::sin(kPi * (x[0] + x[1]));
        double E = std::exp(x[2]);
        double m = -kPi * kPi * C * E;
        return {m, m, C * E, m, -kPi * S * E, -kPi * S * E};
    };
    p.f = manufactured_rhs(p);
    return p;
}

EllipticProblem make_varcoef_lshape() {
    EllipticProblem p;
    p.name = "varcoef-Lshape";
    // three quadrant columns of the L cross-section, full height in z
    p.bricks = {{{0, 1, 0, 1, -1, 1}}, {{-1, 0, 0, 1, -1, 1}}, {{-1, 0, -1, 0, -1, 1}}};
    p.bc = all_dirichlet;
    p.coeffs = [](const Vec3& x) {
        CoeffValues c;
        c.a[0][0] = -(0.50 + 0.01 * x[1] * std::sin(x[0]));
        c.a[1][1] = -(1.50 + 0.02 * std::cos(x[0] * x[0] + x[2]));
        c.a[2][2] = -(2.00 + 0.03 * x[1] * std::exp(x[2]));
        c.b[0] = 0.25 * std::sin(2.0 * kPi * (x[1] + x[2]));
        c.b[1] = 0.25 * std::sin(2.0 * kPi * (x[2] + x[0]));
        c.b[2] = 0.25 * std::sin(2.0 * kPi * (x[0] + x[1]));
        c.c = 2.50 - 0.025 * std::exp(kPi * (x[0] + x[1] + x[2]) / 2.0);
        return c;
    };
    const double k = kPi / 2.0;
    p.u_ex = [k](const Vec3& x) {
        return std::sin(k * (x[0] + x[1] + x[2])) * std::exp(k * x[2]);
    };
    p.grad_ex = [k](const Vec3& x) -> Vec3 {
        double S = std::sin(k * (x[0] + x[1] + x[2])), C = std::cos(k * (x[0] + x[1] + x[2]));
        double E = std::exp(k * x[2]);
        return {k * C * E, k * C * E, k * (C + S) * E};
    };
    p.hess_ex = [k](const Vec3& x) -> std::array<double, 6> {
        double S = std::sin(k * (x[0] + x[1] + x[2])), C = std::cos(k * (x[0] + x[1] + x[2]));
        double E = std::exp(k * x[2]);
        double k2 = k * k;
        return {-k2 * S * E, -k2 * S * E, 2.0 * k2 * C * E,
                -k2 * S * E, k2 * (C - S) * E, k2 * (C - S) * E};
    };
    p.f = manufactured_rhs(p);
    return p;
}

EllipticProblem make_nonselfadjoint_mixed() {
    EllipticProblem p;
    p.name = "nonselfadjoint-mixed";
    p.bricks = cube_m11();
    p.bc = mixed_split_bc;
    p.coeffs = [](const Vec3& x) {
        CoeffValues c;
        c.a[0][0] = -(0.50 + 0.05 * std::exp(x[0] * x[1] * x[2]));
        c.a[1][1] = -(1.00 + 0.015 * std::cos(x[0] + x[1]));
        c.a[2][2] = -(2.50 + 0.02 * std::exp(x[1] + x[2]));
        // d(u_xy + u_yz + u_zx): a_12 = a_23 = a_31 = d/2 in symmetric storage
        double d = -0.001 * std::sin(kPi * (x[0] + x[1] + x[2]));
        c.a[0][1] = c.a[1][0] = d / 2.0;
        c.a[1][2] = c.a[2][1] = d / 2.0;
        c.a[2][0] = c.a[0][2] = d / 2.0;
        c.c = 4.05 + 0.045 * std::cos(kPi * (x[0] + x[1] + x[2]) / 2.0);
        return c;
    };
    p.u_ex = [](const Vec3& x) {
        return (std::sin(kPi * x[0]) + std::sin(kPi * x[1] / 2.0)) * std::cos(kPi * x[2]);
    };
    p.grad_ex = [](const Vec3& x) -> Vec3 {
        double A = std::sin(kPi * x[0]), B = std::sin(kPi * x[1] / 2.0);
        double Cz = std::cos(kPi * x[2]), Sz = std::sin(kPi * x[2]);
        return {kPi * std::cos(kPi * x[0]) * Cz,
                0.5 * kPi * std::cos(kPi * x[1] / 2.0) * Cz, -kPi * (A + B) * Sz};
    };
    p.hess_ex = [](const Vec3& x) -> std::array<double, 6> {
        double A = std::sin(kPi * x[0]), B = std::sin(kPi * x[1] / 2.0);
        double Cz = std::cos(kPi * x[2]), Sz = std::sin(kPi * x[2]);
        double p2 = kPi * kPi;
        return {-p2 * A * Cz, -0.25 * p2 * B * Cz, -p2 * (A + B) * Cz, 0.0,
                -0.5 * p2 * std::cos(kPi * x[1] / 2.0) * Sz,
                -p2 * std::cos(kPi * x[0]) * Sz};
    };
    p.f = manufactured_rhs(p);
    return p;
}

EllipticProblem make_vertex_dirichlet() {
    EllipticProblem p;
    p.name = "vertex-dirichlet";
    p.domain = DomainKind::VertexCone;
    p.mesh.phi_lo = kPi / 6.0;
    p.mesh.phi_hi = kPi / 3.0;
    p.mesh.theta_lo = 0.0;
    p.mesh.theta_hi = 1.5 * kPi;
    p.mesh.rho_v = 1.0;
    p.mesh.I_v = 1;
    p.bc = all_dirichlet;
    p.constant_coeffs = true;
    p.coeffs = [](const Vec3&) { return laplacian_coeffs(); };
    p.u_ex = [](const Vec3& x) {
        Spherical s = spherical(x);
        return std::sqrt(s.rho) * std::sin(s.phi / 2.0);
    };
    p.grad_ex = [](const Vec3& x) -> Vec3 {
        Spherical s = spherical(x);
        double ur = 0.5 / std::sqrt(s.rho) * std::sin(s.phi / 2.0);
        double up = 0.5 * std::sqrt(s.rho) * std::cos(s.phi / 2.0);
        return grad_from_spherical(s, ur, up, 0.0);
    };
    p.f = [](const Vec3& x) {
        Spherical s = spherical(x);
        return -1.0 / (4.0 * std::pow(s.rho, 1.5) * std::sin(s.phi / 2.0));
    };
    return p;
}

EllipticProblem make_vertex_mixed() {
    EllipticProblem p = make_vertex_dirichlet();
    p.name = "vertex-mixed";
    // Neumann on the spherical cap rho = 1 (high chi face); Dirichlet elsewhere
    p.bc = [](int axis, int side, const std::array<double, 3>&) {
        return (axis == 2 && side == 1) ? FaceTag::Neumann : FaceTag::Dirichlet;
    };
    p.u_ex = [](const Vec3& x) {
        Spherical s = spherical(x);
        return std::pow(s.rho, 0.1) * (1.0 - s.rho) * std::sin(2.0 * s.phi);
    };
    p.grad_ex = [](const Vec3& x) -> Vec3 {
        Spherical s = spherical(x);
        double ur = (0.1 * std::pow(s.rho, -0.9) - 1.1 * std::pow(s.rho, 0.1)) *
                    std::sin(2.0 * s.phi);
        double up = (std::pow(s.rho, 0.1) - std::pow(s.rho, 1.1)) * 2.0 *
                    std::cos(2.0 * s.phi);
        return grad_from_spherical(s, ur, up, 0.0);
    };
    p.f = [](const Vec3& x) {
        // -Laplacian of (rho^0.1 - rho^1.1) sin(2 phi) in spherical coordinates
        Spherical s = spherical(x);
        double r19 = std::pow(s.rho, -1.9), r09 = std::pow(s.rho, -0.9);
        double S = std::sin(2.0 * s.phi), C = std::cos(2.0 * s.phi);
        double ang = -4.0 * S + 2.0 * C * std::cos(s.phi) / std::sin(s.phi);
        double lap = (0.1 * 1.1 * r19 - 1.1 * 2.1 * r09) * S + (r19 - r09) * ang;
        return -lap;
    };
    return p;
}

EllipticProblem make_edge_dirichlet() {
    EllipticProblem p;
    p.name = "edge-dirichlet";
    p.domain = DomainKind::EdgeCylinder;
    p.mesh.Z = 1.0;
    p.mesh.theta_lo = 0.0;
    p.mesh.theta_hi = kPi / 2.0;
    p.mesh.x3_lo = 0.0;
    p.mesh.x3_hi = 1.0;
    p.mesh.I_e = 1;
    p.mesh.J_e = 1;
    p.bc = all_dirichlet;
    p.constant_coeffs = true;
    p.coeffs = [](const Vec3&) { return laplacian_coeffs(); };
    p.u_ex = [](const Vec3& x) {
        Cylindrical s = cylindrical(x);
        return std::pow(s.r, 1.0 / 3.0) * std::sin(s.theta / 3.0) * s.z;
    };
    p.grad_ex = [](const Vec3& x) -> Vec3 {
        Cylindrical s = cylindrical(x);
        double ur = std::pow(s.r, -2.0 / 3.0) / 3.0 * std::sin(s.theta / 3.0) * s.z;
        double ut = std::pow(s.r, 1.0 / 3.0) / 3.0 * std::cos(s.theta / 3.0) * s.z;
        double uz = std::pow(s.r, 1.0 / 3.0) * std::sin(s.theta / 3.0);
        return grad_from_cylindrical(s, ur, ut, uz);
    };
    p.f = [](const Vec3&) { return 0.0; };  // harmonic
    return p;
}

EllipticProblem make_edge_crack_mixed() {
    EllipticProblem p;
    p.name = "edge-crack-mixed";
    p.domain = DomainKind::EdgeCylinder;
    p.mesh.Z = 1.0;
    p.mesh.theta_lo = 0.0;
    p.mesh.theta_hi = 2.0 * kPi;
    p.mesh.x3_lo = 0.0;
    p.mesh.x3_hi = 1.0;
    p.mesh.I_e = 4;
    p.mesh.J_e = 1;
    // crack faces theta = 0, 2pi Dirichlet (u = 0); r = 1 and x3 = 0, 1 Neumann
    p.bc = [](int axis, int, const std::array<double, 3>&) {
        return (axis == 1) ? FaceTag::Dirichlet : FaceTag::Neumann;
    };
    p.constant_coeffs = true;
    p.coeffs = [](const Vec3&) { return laplacian_coeffs(); };
    p.u_ex = [](const Vec3& x) {
        Cylindrical s = cylindrical(x);
        return std::sqrt(s.r) * std::sin(s.theta / 2.0);
    };
    p.grad_ex = [](const Vec3& x) -> Vec3 {
        Cylindrical s = cylindrical(x);
        double ur = 0.5 / std::sqrt(s.r) * std::sin(s.theta / 2.0);
        double ut = 0.5 * std::sqrt(s.r) * std::cos(s.theta / 2.0);
        return grad_from_cylindrical(s, ur, ut, 0.0);
    };
    p.f = [](const Vec3&) { return 0.0; };  // harmonic
    return p;
}

EllipticProblem make_vertexedge_dirichlet() {
    EllipticProblem p;
    p.name = "vertexedge-dirichlet";
    p.domain = DomainKind::VertexEdgeCone;
    p.mesh.phi_v = kPi / 6.0;
    p.mesh.rho_v = 1.0;
    p.mesh.theta_lo = 0.0;
    p.mesh.theta_hi = 1.5 * kPi;
    p.mesh.I_ve = 1;
    p.bc = all_dirichlet;
    p.constant_coeffs = true;
    p.coeffs = [](const Vec3&) { return laplacian_coeffs(); };
    p.u_ex = [](const Vec3& x) {
        Spherical s = spherical(x);
        return std::pow(s.rho, 0.75) * std::sqrt(std::sin(s.phi)) *
               std::sin(s.theta / 2.0);
    };
    p.grad_ex = [](const Vec3& x) -> Vec3 {
        Spherical s = spherical(x);
        double g = std::sqrt(std::sin(s.phi)), st = std::sin(s.theta / 2.0);
        double ur = 0.75 * std::pow(s.rho, -0.25) * g * st;
        double up = std::pow(s.rho, 0.75) * 0.5 * std::cos(s.phi) / g * st;
        double ut = std::pow(s.rho, 0.75) * g * 0.5 * std::cos(s.theta / 2.0);
        return grad_from_spherical(s, ur, up, ut);
    };
    p.f = [](const Vec3& x) {
        Spherical s = spherical(x);
        return -9.0 / 16.0 * std::pow(s.rho, -1.25) * std::sqrt(std::sin(s.phi)) *
               std::sin(s.theta / 2.0);
    };
    return p;
}

}  // namespace

EllipticProblem catalog(const std::string& name) {
    if (name == "laplace-dirichlet-cube") return make_laplace_dirichlet_cube();
    if (name == "poisson-homogeneous") return make_poisson_homogeneous();
    if (name == "poisson-mixed") return make_poisson_mixed();
    if (name == "helmholtz-mixed") return make_helmholtz_mixed();
    if (name == "varcoef-robin") return make_varcoef_robin();
    if (name == "varcoef-Lshape") return make_varcoef_lshape();
    if (name == "nonselfadjoint-mixed") return make_nonselfadjoint_mixed();
    if (name == "vertex-dirichlet") return make_vertex_dirichlet();
    if (name == "vertex-mixed") return make_vertex_mixed();
    if (name == "edge-dirichlet") return make_edge_dirichlet();
    if (name == "edge-crack-mixed") return make_edge_crack_mixed();
    if (name == "vertexedge-dirichlet") return make_vertexedge_dirichlet();
    throw std::invalid_argument("unknown catalog problem: " + name);
}

std::vector<std::string> catalog_names() {
    return {"laplace-dirichlet-cube", "poisson-homogeneous", "poisson-mixed",
            "helmholtz-mixed",        "varcoef-robin",       "varcoef-Lshape",
            "nonselfadjoint-mixed",   "vertex-dirichlet",    "vertex-mixed",
            "edge-dirichlet",         "edge-crack-mixed",    "vertexedge-dirichlet"};
}

Frame problem_frame(const EllipticProblem& p) {
    switch (p.domain) {
        case DomainKind::RegularBricks: return Frame::Regular;
        case DomainKind::VertexCone: return Frame::Vertex;
        case DomainKind::EdgeCylinder: return Frame::Edge;
        case DomainKind::VertexEdgeCone: return Frame::VertexEdge;
    }
    return Frame::Regular;
}

Mesh problem_mesh(const EllipticProblem& p, int W, int n) {
    if (W < 1 || n < 1) throw std::invalid_argument("problem_mesh: W, n >= 1 required");
    if (p.domain == DomainKind::RegularBricks) {
        std::vector<Brick> cells;
        for (const Brick& base : p.bricks)
            for (int k = 0; k < n; ++k)
                for (int j = 0; j < n; ++j)
                    for (int i = 0; i < n; ++i) {
                        auto at = [&](int d, int m) {
                            return base.bounds[2 * d] +
                                   (base.bounds[2 * d + 1] - base.bounds[2 * d]) * m / n;
                        };
                        cells.push_back({{at(0, i), at(0, i + 1), at(1, j), at(1, j + 1),
                                          at(2, k), at(2, k + 1)}});
                    }
        return build_regular_mesh(cells, W, p.bc);
    }
    MeshSpec spec = p.mesh;
    spec.N = n;
    spec.W = W;
    spec.uniform_degree = true;
    switch (p.domain) {
        case DomainKind::VertexCone: return build_vertex_mesh(spec, p.bc);
        case DomainKind::EdgeCylinder: return build_edge_mesh(spec, p.bc);
        default: return build_vertex_edge_mesh(spec, p.bc);
    }
}

double fd_residual(const EllipticProblem& p, const Vec3& x, double h) {
    auto u = [&](double dx, double dy, double dz) {
        return p.u_ex({x[0] + dx, x[1] + dy, x[2] + dz});
    };
    // 4th-order central first and second derivatives
    auto d1 = [&](int d) {
        Vec3 e{0, 0, 0};
        e[d] = 1;
        return (-u(2 * h * e[0], 2 * h * e[1], 2 * h * e[2]) +
                8.0 * u(h * e[0], h * e[1], h * e[2]) -
                8.0 * u(-h * e[0], -h * e[1], -h * e[2]) +
                u(-2 * h * e[0], -2 * h * e[1], -2 * h * e[2])) /
               (12.0 * h);
    };
    auto d2 = [&](int d) {
        Vec3 e{0, 0, 0};
        e[d] = 1;
        return (-u(2 * h * e[0], 2 * h * e[1], 2 * h * e[2]) +
                16.0 * u(h * e[0], h * e[1], h * e[2]) - 30.0 * u(0, 0, 0) +
                16.0 * u(-h * e[0], -h * e[1], -h * e[2]) -
                u(-2 * h * e[0], -2 * h * e[1], -2 * h * e[2])) /
               (12.0 * h * h);
    };
    auto dmix = [&](int d1i, int d2i) {
        // nested 4th-order first-derivative stencils
        auto du = [&](double s2) {
            Vec3 y = x;
            y[d2i] += s2;
            auto v = [&](double s1) {
                Vec3 z = y;
                z[d1i] += s1;
                return p.u_ex(z);
            };
            return (-v(2 * h) + 8.0 * v(h) - 8.0 * v(-h) + v(-2 * h)) / (12.0 * h);
        };
        return (-du(2 * h) + 8.0 * du(h) - 8.0 * du(-h) + du(-2 * h)) / (12.0 * h);
    };
    CoeffValues c = p.coeffs(x);
    double v = c.a[0][0] * d2(0) + c.a[1][1] * d2(1) + c.a[2][2] * d2(2);
    if (c.a[0][1] != 0.0) v += 2.0 * c.a[0][1] * dmix(0, 1);
    if (c.a[1][2] != 0.0) v += 2.0 * c.a[1][2] * dmix(1, 2);
    if (c.a[2][0] != 0.0) v += 2.0 * c.a[2][0] * dmix(2, 0);
    for (int d = 0; d < 3; ++d)
        if (c.b[d] != 0.0) v += c.b[d] * d1(d);
    v += c.c * p.u_ex(x);
    return v - p.f(x);
}

}  // namespace hpsem
