#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "hpsem/solver.hpp"

using namespace hpsem;

namespace {

EllipticProblem linear_problem() {
    EllipticProblem p;
    p.name = "linear-exact";
    p.domain = DomainKind::RegularBricks;
    p.bricks = {Brick{{0, 1, 0, 1, 0, 1}}};
    p.bc = all_dirichlet;
    p.constant_coeffs = true;
    p.coeffs = [](const Vec3&) {
        CoeffValues c;
        for (int i = 0; i < 3; ++i) c.a[i][i] = -1.0;
        return c;
    };
    p.u_ex = [](const Vec3& x) { return 1.0 + x[0] + 2.0 * x[1] + 3.0 * x[2]; };
    p.grad_ex = [](const Vec3&) -> Vec3 { return {1.0, 2.0, 3.0}; };
    p.f = [](const Vec3&) { return 0.0; };
    return p;
}

std::vector<double> interpolate_exact(const EllipticProblem& p, const Mesh& mesh,
                                      const Layout& lay) {
    std::vector<double> U(lay.total, 0.0);
    for (const Element& e : mesh.elems) {
        if (e.kind != ElemKind::Standard) continue;
        const GllRule &r1 = gll(e.degrees[0]), &r2 = gll(e.degrees[1]),
                      &r3 = gll(e.degrees[2]);
        int idx = 0;
        for (int k = 0; k <= e.degrees[2]; ++k)
            for (int j = 0; j <= e.degrees[1]; ++j)
                for (int i = 0; i <= e.degrees[0]; ++i, ++idx) {
                    std::array<double, 3> y = {e.mid(0) + e.half(0) * r1.nodes[i],
                                               e.mid(1) + e.half(1) * r2.nodes[j],
                                               e.mid(2) + e.half(2) * r3.nodes[k]};
                    U[lay.offset[e.id] + idx] = p.u_ex(frame_to_cartesian(e.frame, y));
                }
    }
    return U;
}

}  // namespace

TEST_CASE("pcg on a diagonal 2x2 system converges in at most two steps") {
    VecOp X = [](const std::vector<double>& v) {
        return std::vector<double>{2.0 * v[0], 5.0 * v[1]};
    };
    VecOp I = [](const std::vector<double>& v) { return v; };
    SolveReport rep;
    auto U = pcg_solve(X, {2.0, 10.0}, I, {0.0, 0.0}, 1e-12, 50, rep);
    CHECK(U[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(U[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rep.iterations <= 2);
    CHECK(rep.residual_history.size() == (size_t)rep.iterations + 1);
    CHECK(rep.residual_history.back() <= 1e-12 * rep.residual_history.front());

    // exact preconditioner: one step
    VecOp P = [](const std::vector<double>& v) {
        return std::vector<double>{v[0] / 2.0, v[1] / 5.0};
    };
    SolveReport rep1;
    auto U1 = pcg_solve(X, {2.0, 10.0}, P, {0.0, 0.0}, 1e-12, 50, rep1);
    CHECK(rep1.iterations == 1);
    CHECK(U1[1] == doctest::Approx(2.0).epsilon(1e-12));

    // zero right-hand side: immediate return
    SolveReport rep0;
    auto U0 = pcg_solve(X, {0.0, 0.0}, I, {0.0, 0.0}, 1e-12, 50, rep0);
    CHECK(rep0.iterations == 0);
    CHECK(U0[0] == 0.0);

    // indefinite operator raises the breakdown error
    VecOp Xneg = [](const std::vector<double>& v) {
        return std::vector<double>{-v[0], -v[1]};
    };
    SolveReport repn;
    CHECK_THROWS(pcg_solve(Xneg, {1.0, 1.0}, I, {0.0, 0.0}, 1e-12, 50, repn));
}

TEST_CASE("degree-1 exact solution: solve matches the dense minimizer exactly") {
    EllipticProblem p = linear_problem();
    Mesh m = build_regular_mesh({Brick{{0, 0.5, 0, 1, 0, 1}}, Brick{{0.5, 1, 0, 1, 0, 1}}},
                                2, p.bc);
    Assembly a(p, m);
    Layout lay = a.layout();
    SeparablePrecond P(m, lay);
    auto [U, rep] = solve_least_squares(a, P, 1e-13, 5000);
    CHECK(rep.dof == lay.total);
    CHECK(rep.functional_final >= 0.0);
    CHECK(rep.functional_final < 1e-18);
    CHECK(rep.wall_time > 0.0);

    DenseNormal dn = a.dense();
    Eigen::VectorXd Ustar = dn.X.ldlt().solve(dn.YG);
    for (int i = 0; i < lay.total; ++i)
        CHECK(U[i] == doctest::Approx(Ustar(i)).epsilon(1e-8));

    double err = h1_relative_error(p, m, lay, U);
    CHECK(err < 1e-10);

    auto Uex = interpolate_exact(p, m, lay);
    for (int i = 0; i < lay.total; ++i)
        CHECK(U[i] == doctest::Approx(Uex[i]).epsilon(1e-8));
}

TEST_CASE("h1_relative_error: zero guess gives 100 percent, exact gives zero") {
    EllipticProblem p = linear_problem();
    Mesh m = build_regular_mesh(p.bricks, 2, p.bc);
    Layout lay = make_layout(m);
    CHECK(h1_relative_error(p, m, lay, std::vector<double>(lay.total, 0.0)) ==
          doctest::Approx(100.0).epsilon(1e-12));
    CHECK(h1_relative_error(p, m, lay, interpolate_exact(p, m, lay)) < 1e-10);

    EllipticProblem noex = p;
    noex.u_ex = nullptr;
    CHECK_THROWS(h1_relative_error(noex, m, lay, std::vector<double>(lay.total, 0.0)));
}

TEST_CASE("smooth Dirichlet cube at W = 3 lands near the reference accuracy") {
    EllipticProblem p = catalog("laplace-dirichlet-cube");
    Mesh m = problem_mesh(p, 3, 2);
    Assembly a(p, m);
    SeparablePrecond P(m, a.layout());
    auto [U, rep] = solve_least_squares(a, P);
    double err = h1_relative_error(p, m, a.layout(), U);
    // reference value 2.04875 % for this mesh/degree; the functional weight
    // conventions differ, so only factor-3 agreement is pinned
    CHECK(err < 3.0 * 2.04875);
    CHECK(err > 2.04875 / 3.0);
    CHECK(rep.dof == 512);
    CHECK(rep.iterations < 500);
}

TEST_CASE("functional decreases monotonically and residuals are P-orthogonal") {
    EllipticProblem p = catalog("poisson-mixed");
    Mesh m = problem_mesh(p, 2, 2);
    Assembly a(p, m);
    SeparablePrecond P(m, a.layout());
    const int n = a.layout().total;
    auto r0 = a.residual(std::vector<double>(n, 0.0));
    std::vector<double> b(n);
    for (int i = 0; i < n; ++i) b[i] = -r0[i];
    VecOp X = [&](const std::vector<double>& v) {
        auto rv = a.residual(v);
        for (int i = 0; i < n; ++i) rv[i] -= r0[i];
        return rv;
    };
    VecOp pc = [&](const std::vector<double>& r) { return P.apply(r); };

    std::vector<std::vector<double>> rs, zs;
    PcgObserver obs = [&](const std::vector<double>& r, const std::vector<double>& z) {
        if (rs.size() < 12) {
            rs.push_back(r);
            zs.push_back(z);
        }
    };
    SolveReport rep;
    pcg_solve(X, b, pc, std::vector<double>(n, 0.0), 1e-10, 2000, rep, obs);
    CHECK(rep.residual_history.back() <= 1e-10 * rep.residual_history.front());

    // PCG minimizes the functional over growing Krylov spaces, so its value
    // at the truncated iterates is monotone (the residual norm need not be)
    double prevq = a.value(std::vector<double>(n, 0.0)).total;
    for (int k = 1; k <= 12; ++k) {
        SolveReport rk;
        auto Uk = pcg_solve(X, b, pc, std::vector<double>(n, 0.0), 0.0, k, rk);
        double qk = a.value(Uk).total;
        CHECK(qk <= prevq * (1.0 + 1e-12));
        prevq = qk;
    }

    // successive residuals are orthogonal in the P inner product
    for (size_t k = 1; k < rs.size(); ++k)
        for (size_t j = 0; j < k; ++j) {
            double rz = 0.0, nk = 0.0, nj = 0.0;
            for (int i = 0; i < n; ++i) {
                rz += rs[k][i] * zs[j][i];
                nk += rs[k][i] * zs[k][i];
                nj += rs[j][i] * zs[j][i];
            }
            CHECK(std::abs(rz) < 1e-8 * std::sqrt(nk * nj));
        }
}

TEST_CASE("iteration growth from W = 3 to W = 7 stays within a factor four") {
    EllipticProblem p = catalog("poisson-homogeneous");
    int iters[2], idx = 0;
    double errs[2];
    for (int W : {3, 7}) {
        Mesh m = problem_mesh(p, W, 2);
        Assembly a(p, m);
        SeparablePrecond P(m, a.layout());
        auto [U, rep] = solve_least_squares(a, P);
        iters[idx] = rep.iterations;
        errs[idx] = h1_relative_error(p, m, a.layout(), U);
        ++idx;
    }
    CHECK(iters[1] <= 4 * iters[0]);
    CHECK(errs[1] < errs[0]);
    CHECK(errs[1] < 0.1);  // measured 8.9e-3 %
}

TEST_CASE("singular-frame solves: vertex mesh error decreases with degree") {
    EllipticProblem p = catalog("vertex-dirichlet");
    double prev = -1.0;
    for (int W : {1, 2, 3}) {
        Mesh m = problem_mesh(p, W, W + 1);
        Assembly a(p, m);
        SeparablePrecond P(m, a.layout());
        auto [U, rep] = solve_least_squares(a, P, 1e-8, 3000);
        double err = h1_relative_error(p, m, a.layout(), U);
        CAPTURE(W);
        CHECK(err < 150.0);
        if (prev >= 0.0) CHECK(err < prev);
        prev = err;
    }
}
