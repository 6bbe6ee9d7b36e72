#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hpsem/precond.hpp"

using namespace hpsem;

namespace {

Eigen::MatrixXd kron3(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                      const Eigen::MatrixXd& C) {
    const int n1 = (int)A.rows();
    const int n = n1 * n1 * n1;
    Eigen::MatrixXd R(n, n);
    for (int k = 0; k < n1; ++k)
        for (int j = 0; j < n1; ++j)
            for (int i = 0; i < n1; ++i)
                for (int k2 = 0; k2 < n1; ++k2)
                    for (int j2 = 0; j2 < n1; ++j2)
                        for (int i2 = 0; i2 < n1; ++i2)
                            R(i + n1 * (j + n1 * k), i2 + n1 * (j2 + n1 * k2)) =
                                A(i, i2) * B(j, j2) * C(k, k2);
    return R;
}

// Legendre Gram matrices by GLL quadrature of the given order (oracle copy).
Eigen::MatrixXd gram(int W, int d, int qorder) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(W + 1, W + 1);
    const GllRule& r = gll(qorder);
    std::vector<double> L(W + 1), L1(W + 1), L2(W + 1);
    for (size_t q = 0; q < r.nodes.size(); ++q) {
        legendre_eval_all(W, r.nodes[q], L.data(), L1.data(), L2.data());
        const double* v = d == 0 ? L.data() : d == 1 ? L1.data() : L2.data();
        for (int i = 0; i <= W; ++i)
            for (int j = 0; j <= W; ++j) M(i, j) += r.weights[q] * v[i] * v[j];
    }
    return M;
}

std::vector<double> random_vec(int n, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = d(gen);
    return v;
}

}  // namespace

TEST_CASE("1D forms: hand values at W = 1 and structure at W = 16") {
    QuadForm1D q1 = quad_forms_1d(1);
    CHECK(q1.E(0, 0) == doctest::Approx(0.0));
    CHECK(q1.E(0, 1) == doctest::Approx(0.0));
    CHECK(q1.E(1, 1) == doctest::Approx(2.0));
    CHECK(q1.F(0, 0) == doctest::Approx(2.0));
    CHECK(q1.F(1, 1) == doctest::Approx(2.0 / 3.0));
    CHECK(q1.F(0, 1) == doctest::Approx(0.0));

    QuadForm1D q = quad_forms_1d(16);
    for (int i = 0; i <= 16; ++i) {
        CHECK(q.F(i, i) == doctest::Approx(2.0 / (2 * i + 1)).epsilon(1e-13));
        for (int j = 0; j <= 16; ++j) {
            if (i != j) CHECK(std::abs(q.F(i, j)) < 1e-12);
            CHECK(q.E(i, j) == doctest::Approx(q.E(j, i)).epsilon(1e-12));
        }
        // constants in the kernel of E
        CHECK(std::abs(q.E(i, 0)) < 1e-12);
    }
    CHECK_THROWS(quad_forms_1d(0));
}

TEST_CASE("anisotropic forms: eta = 1 reduction, hand eigenvalue, monotonicity") {
    QuadForm1D iso = quad_forms_1d(5), an1 = quad_forms_1d_aniso(5, 1.0);
    CHECK((iso.E - an1.E).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((iso.F - an1.F).cwiseAbs().maxCoeff() < 1e-13);

    // W=1, eta=2: linear v has no v'', so nu_1 = eta^2 * 2 / (2/3) = 12
    EigBasis1D e = gen_eig(quad_forms_1d_aniso(1, 2.0));
    CHECK(e.mu(0) == doctest::Approx(0.0));
    CHECK(e.mu(1) == doctest::Approx(12.0));

    for (double eta : {0.1, 0.5}) {
        EigBasis1D small = gen_eig(quad_forms_1d_aniso(5, eta));
        EigBasis1D unit = gen_eig(quad_forms_1d(5));
        for (int i = 0; i <= 5; ++i) CHECK(small.mu(i) <= unit.mu(i) + 1e-12);
    }
    CHECK_THROWS(quad_forms_1d_aniso(3, -1.0));
}

TEST_CASE("generalized eigenpairs: residuals, normalization, completeness") {
    for (int W : {1, 4, 16}) {
        QuadForm1D q = quad_forms_1d(W);
        EigBasis1D e = gen_eig(q);
        CHECK(e.mu(0) == doctest::Approx(0.0));
        // F-normalized constant: b_0 = (1/sqrt(2), 0, ...)
        CHECK(e.b(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
        for (int i = 1; i <= W; ++i) CHECK(std::abs(e.b(i, 0)) < 1e-12);
        for (int i = 0; i <= W; ++i) {
            CHECK(e.mu(i) >= -1e-14);
            if (i > 0) CHECK(e.mu(i) >= e.mu(i - 1) - 1e-12);
            Eigen::VectorXd res = q.E * e.b.col(i) - e.mu(i) * (q.F * e.b.col(i));
            // relative to the matrix scale (||E|| reaches ~3e6 at W = 16)
            CHECK(res.norm() < 1e-12 * (1.0 + q.E.norm() * e.b.col(i).norm()));
        }
        Eigen::MatrixXd gramF = e.b.transpose() * q.F * e.b;
        CHECK((gramF - Eigen::MatrixXd::Identity(W + 1, W + 1)).cwiseAbs().maxCoeff() <
              1e-10);
        Eigen::MatrixXd comp = e.b * e.b.transpose() * q.F;
        CHECK((comp - Eigen::MatrixXd::Identity(W + 1, W + 1)).cwiseAbs().maxCoeff() <
              1e-10);
        Eigen::MatrixXd gramE = e.b.transpose() * q.E * e.b;
        for (int i = 0; i <= W; ++i)
            for (int j = 0; j <= W; ++j) {
                double expect = i == j ? e.mu(i) : 0.0;
                double tol = 1e-9 * (1.0 + std::max(e.mu(i), e.mu(j)));
                CHECK(std::abs(gramE(i, j) - expect) < tol);
            }
    }
}

TEST_CASE("tensor eigenvalue law: separable 3D form diagonal with mu_i+mu_j+mu_k+1") {
    for (int W : {2, 4}) {
        QuadForm1D q = quad_forms_1d(W);
        EigBasis1D e = gen_eig(q);
        Eigen::MatrixXd C = kron3(q.E, q.F, q.F) + kron3(q.F, q.E, q.F) +
                            kron3(q.F, q.F, q.E) + kron3(q.F, q.F, q.F);
        Eigen::MatrixXd P3 = kron3(e.b, e.b, e.b);
        Eigen::MatrixXd D = P3.transpose() * C * P3;
        const int n1 = W + 1;
        for (int k = 0; k < n1; ++k)
            for (int j = 0; j < n1; ++j)
                for (int i = 0; i < n1; ++i) {
                    int r = i + n1 * (j + n1 * k);
                    double expect = e.mu(i) + e.mu(j) + e.mu(k) + 1.0;
                    CHECK(D(r, r) == doctest::Approx(expect).epsilon(1e-10));
                    for (int c = 0; c < r; ++c)
                        CHECK(std::abs(D(r, c)) < 1e-10 * expect);
                }
    }
}

TEST_CASE("separable preconditioner: inverse property, symmetry, SPD on all frames") {
    struct Case {
        const char* name;
        int W, n;
    };
    for (Case c : {Case{"laplace-dirichlet-cube", 2, 2}, Case{"vertex-dirichlet", 2, 2},
                   Case{"edge-dirichlet", 2, 2}, Case{"edge-crack-mixed", 2, 2},
                   Case{"vertexedge-dirichlet", 2, 2}}) {
        CAPTURE(c.name);
        EllipticProblem p = catalog(c.name);
        Mesh m = problem_mesh(p, c.W, c.n);
        Layout lay = make_layout(m);
        SeparablePrecond P(m, lay);
        auto u = random_vec(lay.total, 5);
        auto cu = P.apply_form(u);
        auto back = P.apply(cu);
        double scale = 0.0;
        for (double x : u) scale = std::max(scale, std::abs(x));
        for (int i = 0; i < lay.total; ++i) CHECK(std::abs(back[i] - u[i]) < 1e-10 * scale);

        auto r = random_vec(lay.total, 17), s = random_vec(lay.total, 29);
        auto Pr = P.apply(r), Ps = P.apply(s);
        double prs = 0.0, rps = 0.0, prr = 0.0;
        for (int i = 0; i < lay.total; ++i) {
            prs += Pr[i] * s[i];
            rps += r[i] * Ps[i];
            prr += Pr[i] * r[i];
        }
        CHECK(prs == doctest::Approx(rps).epsilon(1e-10));
        CHECK(prr > 0.0);
        CHECK_THROWS(P.apply(std::vector<double>(lay.total + 1, 0.0)));
    }
}

TEST_CASE("condition-number study reproduces Table 5.1 anchor rows") {
    CHECK(condition_number_study(2) == doctest::Approx(3.69999999999999).epsilon(1e-10));
    CHECK(condition_number_study(8) == doctest::Approx(5.48239323328901).epsilon(1e-9));
    CHECK(condition_number_study(16) == doctest::Approx(5.85907843805046).epsilon(1e-8));
    CHECK_THROWS(condition_number_study(1));
    CHECK_THROWS(condition_number_study(17));
}

TEST_CASE("Lanczos extremes agree with a dense generalized eigensolve for W <= 8") {
    for (int W : {2, 4, 6, 8}) {
        CAPTURE(W);
        Eigen::MatrixXd G0 = gram(W, 0, W), G1 = gram(W, 1, W), G2 = gram(W, 2, W);
        Eigen::MatrixXd C = kron3(G2 + G1, G0, G0) + kron3(G0, G2 + G1, G0) +
                            kron3(G0, G0, G2 + G1) + kron3(G0, G0, G0);
        const int n = (W + 1) * (W + 1) * (W + 1);
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
        std::array<Eigen::MatrixXd, 3> G = {G0, G1, G2};
        for (int a1 = 0; a1 <= 2; ++a1)
            for (int a2 = 0; a2 + a1 <= 2; ++a2)
                for (int a3 = 0; a3 + a2 + a1 <= 2; ++a3)
                    B += kron3(G[a1], G[a2], G[a3]);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(B, C);
        double dense = es.eigenvalues()(n - 1) / es.eigenvalues()(0);
        CHECK(condition_number_study(W) == doctest::Approx(dense).epsilon(1e-9));
    }
}
