#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hpsem/mesh.hpp"

using namespace hpsem;

namespace {
std::vector<Brick> split_box(std::array<double, 6> box, int nx, int ny, int nz) {
    std::vector<Brick> out;
    auto at = [&](int d, int i, int n) {
        return box[2 * d] + (box[2 * d + 1] - box[2 * d]) * i / n;
    };
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                out.push_back({{at(0, i, nx), at(0, i + 1, nx), at(1, j, ny), at(1, j + 1, ny),
                                at(2, k, nz), at(2, k + 1, nz)}});
    return out;
}
}  // namespace

TEST_CASE("regular 2x2x2 mesh: counts and adjacency") {
    Mesh m = build_regular_mesh(split_box({-1, 1, -1, 1, -1, 1}, 2, 2, 2), 2);
    CHECK(m.elems.size() == 8);
    int interior = 0, boundary = 0;
    for (const auto& e : m.elems)
        for (int f = 0; f < 6; ++f) {
            if (e.faces[f].tag == FaceTag::Interior) ++interior;
            else if (e.faces[f].tag == FaceTag::Dirichlet) ++boundary;
        }
    CHECK(interior == 24);  // 12 interior faces, counted from both sides
    CHECK(boundary == 24);
    validate_mesh(m);

    // h = 0.5 on (0,1)^3 also gives 8 elements
    Mesh m2 = build_regular_mesh(split_box({0, 1, 0, 1, 0, 1}, 2, 2, 2), 1);
    CHECK(m2.elems.size() == 8);

    // DOF bookkeeping: degree 4 single cube = 125; 2x2x2 at degree 1 = 64
    Mesh one = build_regular_mesh({{{0, 1, 0, 1, 0, 1}}}, 4);
    CHECK(mesh_dof(one) == 125);
    CHECK(mesh_dof(m2) == 64);
}

TEST_CASE("regular mesh rejects bad input") {
    CHECK_THROWS(build_regular_mesh({{{0, 1, 0, 1, 0, 1}}, {{0.5, 1.5, 0, 1, 0, 1}}}, 1));
    // non-conforming: two bricks meeting on a partial face
    CHECK_THROWS(build_regular_mesh({{{0, 1, 0, 1, 0, 1}}, {{1, 2, 0, 0.5, 0, 1}}}, 1));
    CHECK_THROWS(build_regular_mesh({{{0, 1, 0, 1, 0, 1}}}, 0));
}

TEST_CASE("vertex mesh: layout, degrees, grading") {
    MeshSpec s;
    s.N = 2;
    s.W = 3;
    s.phi_lo = M_PI / 6;
    s.phi_hi = M_PI / 3;
    s.theta_lo = 0;
    s.theta_hi = 1.5 * M_PI;
    s.rho_v = 1.0;
    Mesh m = build_vertex_mesh(s);
    CHECK(m.elems.size() == s.I_v * (s.N + 1));  // I_v(N+1)
    CHECK(m.elems[0].kind == ElemKind::CornerConstant);
    CHECK(m.elems[0].lo(2) == kNegInf);
    CHECK(m.elems[1].kind == ElemKind::Standard);
    CHECK(m.elems[2].kind == ElemKind::Standard);
    // degree grading W_l = clamp([mu1 l], 1, W)
    CHECK(m.elems[1].degrees[0] == 1);
    CHECK(m.elems[2].degrees[0] == 2);
    // geometric grading: rho ratio mu_v, i.e. constant spacing -ln mu in chi
    double d1 = m.elems[1].hi(2) - m.elems[1].lo(2);
    double d2 = m.elems[2].hi(2) - m.elems[2].lo(2);
    CHECK(d1 == doctest::Approx(-std::log(s.mu_v)).epsilon(1e-12));
    CHECK(d2 == doctest::Approx(-std::log(s.mu_v)).epsilon(1e-12));
    CHECK(std::exp(m.elems[2].hi(2)) == doctest::Approx(1.0));
    // multi-panel element count
    s.I_v = 3;
    CHECK(build_vertex_mesh(s).elems.size() == 3 * 3);
}

TEST_CASE("edge mesh: r-breakpoints and counts") {
    MeshSpec s;
    s.N = 3;
    s.W = 2;
    s.Z = 1.0;
    s.theta_lo = 0;
    s.theta_hi = M_PI / 2;
    s.x3_lo = 0;
    s.x3_hi = 1;
    Mesh m = build_edge_mesh(s);
    CHECK(m.elems.size() == s.I_e * s.J_e * (s.N + 1));
    CHECK(m.elems[0].kind == ElemKind::CornerRadial1D);
    CHECK(m.elems[0].degrees == std::array<int, 3>{0, 0, 2});
    // r breakpoints {0.003375, 0.0225, 0.15, 1}
    CHECK(std::exp(m.elems[1].lo(0)) == doctest::Approx(0.003375).epsilon(1e-12));
    CHECK(std::exp(m.elems[1].hi(0)) == doctest::Approx(0.0225).epsilon(1e-12));
    CHECK(std::exp(m.elems[2].hi(0)) == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(std::exp(m.elems[3].hi(0)) == doctest::Approx(1.0).epsilon(1e-12));
    // quasi-uniform in tau
    double dt = m.elems[2].hi(0) - m.elems[2].lo(0);
    CHECK(dt == doctest::Approx(-std::log(s.mu_e)).epsilon(1e-12));
    // panel counts
    s.I_e = 4;
    s.J_e = 2;
    CHECK(build_edge_mesh(s).elems.size() == 4 * 2 * 4);
}

TEST_CASE("vertex-edge mesh: cell catalogue") {
    MeshSpec s;
    s.N = 2;
    s.W = 2;
    s.phi_v = M_PI / 6;
    s.rho_v = 1.0;
    s.theta_lo = 0;
    s.theta_hi = 1.5 * M_PI;
    Mesh m = build_vertex_edge_mesh(s);
    CHECK(m.elems.size() == (s.N + 1) * (s.N + 1));  // I_{v-e}(N+1)^2
    int n_const = 0, n_rad = 0, n_std = 0;
    for (const auto& e : m.elems) {
        if (e.kind == ElemKind::CornerConstant) ++n_const;
        if (e.kind == ElemKind::CornerRadial1D) ++n_rad;
        if (e.kind == ElemKind::Standard) ++n_std;
    }
    CHECK(n_const == 3);
    CHECK(n_rad == 2);
    CHECK(n_std == 4);
    // psi breakpoints for N=1: ln(0.15 tan(pi/6)), ln(tan(pi/6))
    MeshSpec s1 = s;
    s1.N = 1;
    Mesh m1 = build_vertex_edge_mesh(s1);
    const Element& std_cell = m1.elems[3];  // k=1, i=1
    CHECK(std_cell.kind == ElemKind::Standard);
    CHECK(std_cell.lo(0) == doctest::Approx(std::log(0.15 * std::tan(M_PI / 6))).epsilon(1e-12));
    CHECK(std_cell.hi(0) == doctest::Approx(std::log(std::tan(M_PI / 6))).epsilon(1e-12));
    // zeta outer boundary at ln(delta_v)
    CHECK(std_cell.hi(2) == doctest::Approx(std::log(std::cos(M_PI / 6))).epsilon(1e-12));
}

TEST_CASE("frame maps round-trip and match known points") {
    // Edge: (tau=0, theta=0, x3=1) -> (1,0,1)
    auto x = frame_to_cartesian(Frame::Edge, {0, 0, 1});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(0.0).scale(1.0));
    CHECK(x[2] == doctest::Approx(1.0));
    // Vertex: (phi=pi/2, theta=0, chi=0) -> (1,0,0)
    x = frame_to_cartesian(Frame::Vertex, {M_PI / 2, 0, 0});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(std::abs(x[1]) < 1e-15);
    CHECK(std::abs(x[2]) < 1e-15);
    // VertexEdge: (psi=0, theta=0, zeta=0) -> (1,0,1)
    x = frame_to_cartesian(Frame::VertexEdge, {0, 0, 0});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[2] == doctest::Approx(1.0));

    std::mt19937 rng(9);
    std::uniform_real_distribution<double> U(0.1, 0.9);
    for (int t = 0; t < 40; ++t) {
        for (Frame f : {Frame::Regular, Frame::Vertex, Frame::Edge, Frame::VertexEdge}) {
            std::array<double, 3> y = {U(rng), U(rng), U(rng)};
            if (f == Frame::Vertex) y[0] = 0.2 + 2.0 * U(rng);  // phi in (0,pi)
            auto back = cartesian_to_frame(f, frame_to_cartesian(f, y));
            for (int d = 0; d < 3; ++d) CHECK(back[d] == doctest::Approx(y[d]).epsilon(1e-12));
        }
    }
    CHECK_THROWS(cartesian_to_frame(Frame::Edge, {0, 0, 1}));  // r = 0
}

TEST_CASE("frame derivative data matches finite differences") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> U(0.15, 0.85);
    const double h = 1e-6;
    for (Frame f : {Frame::Vertex, Frame::Edge, Frame::VertexEdge}) {
        for (int t = 0; t < 5; ++t) {
            std::array<double, 3> y = {U(rng), U(rng), U(rng)};
            if (f == Frame::Vertex) y[0] += 0.5;
            FrameDerivs d = frame_derivs(f, y);
            for (int p = 0; p < 3; ++p) {
                auto yp = y, ym = y;
                yp[p] += h;
                ym[p] -= h;
                auto xp = frame_to_cartesian(f, yp);
                auto xm = frame_to_cartesian(f, ym);
                for (int i = 0; i < 3; ++i)
                    CHECK(d.T[i][p] == doctest::Approx((xp[i] - xm[i]) / (2 * h)).epsilon(1e-6));
                // second derivatives against first-derivative differences
                FrameDerivs dp = frame_derivs(f, yp);
                FrameDerivs dm = frame_derivs(f, ym);
                for (int i = 0; i < 3; ++i)
                    for (int q = 0; q < 3; ++q)
                        CHECK(d.H[i][q][p] ==
                              doctest::Approx((dp.T[i][q] - dm.T[i][q]) / (2 * h))
                                  .epsilon(1e-5).scale(1.0));
            }
            // B is the inverse of T
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    double s = 0.0;
                    for (int k = 0; k < 3; ++k) s += d.B[i][k] * d.T[k][j];
                    CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10).scale(1.0));
                }
        }
    }
}

TEST_CASE("element map jacobians") {
    // regular cube of side h: jacobian (h/2)^3
    Mesh m = build_regular_mesh({{{0, 0.5, 0, 0.5, 0, 0.5}}}, 1);
    ElementMap em = element_map(m.elems[0]);
    CHECK(em.jacobian({0.1, -0.3, 0.7}) == doctest::Approx(0.25 * 0.25 * 0.25));

    // edge element: volume factor includes e^{2 tau}; Monte-Carlo volume check
    MeshSpec s;
    s.N = 1;
    s.W = 1;
    s.theta_lo = 0;
    s.theta_hi = M_PI / 2;
    Mesh me = build_edge_mesh(s);
    const Element& e = me.elems[1];
    ElementMap eme = element_map(e);
    // integral of jacobian over master cube = Cartesian volume of the shell:
    // quarter annulus r in (0.15, 1) times x3-height 1
    double exact = 0.25 * M_PI * (1.0 - 0.15 * 0.15) * 1.0;
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double acc = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i)
        acc += eme.jacobian({U(rng), U(rng), U(rng)});
    acc *= 8.0 / n;
    CHECK(acc == doctest::Approx(exact).epsilon(0.02));

    // vertex element: e^{3chi} sin(phi) factor, same Monte-Carlo strategy
    MeshSpec sv;
    sv.N = 1;
    sv.W = 1;
    sv.phi_lo = M_PI / 6;
    sv.phi_hi = M_PI / 3;
    sv.theta_lo = 0;
    sv.theta_hi = 1.0;
    Mesh mv = build_vertex_mesh(sv);
    ElementMap emv = element_map(mv.elems[1]);
    // shell rho in (0.15, 1), phi in (pi/6, pi/3), theta width 1
    double ex = (std::cos(M_PI / 6) - std::cos(M_PI / 3)) * 1.0 *
                (1.0 - std::pow(0.15, 3)) / 3.0;
    acc = 0.0;
    for (int i = 0; i < n; ++i)
        acc += emv.jacobian({U(rng), U(rng), U(rng)});
    acc *= 8.0 / n;
    CHECK(acc == doctest::Approx(ex).epsilon(0.02));

    CHECK_THROWS(element_map(mv.elems[0]));  // semi-infinite corner
}

TEST_CASE("mesh CSV export") {
    MeshSpec s;
    s.N = 1;
    s.W = 1;
    s.theta_lo = 0;
    s.theta_hi = 1;
    std::string csv = mesh_summary_csv(build_edge_mesh(s));
    CHECK(csv.find("corner-radial-1d") != std::string::npos);
    CHECK(csv.find("elem:1:face:0") != std::string::npos);
    CHECK(csv.find("dirichlet") != std::string::npos);
}
