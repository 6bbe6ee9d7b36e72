#include "hpsem/precond.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace hpsem {

namespace {

// Legendre-basis matrices of int v^(d) w^(d) over (-1,1), d = 0,1,2, by GLL
// quadrature of the given order. Order W+1 is exact for all three; order W
// (the W+1-point rule of the method itself) makes the (W,W) mass entry the
// discrete value 2/W instead of 2/(2W+1).
Eigen::MatrixXd legendre_deriv_gram(int W, int d, int qorder) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(W + 1, W + 1);
    if (d == 0 && qorder > W) {
        for (int i = 0; i <= W; ++i) M(i, i) = 2.0 / (2 * i + 1);
        return M;
    }
    const GllRule& r = gll(qorder);
    std::vector<double> L(W + 1), L1(W + 1), L2(W + 1);
    Eigen::MatrixXd vals(W + 1, (int)r.nodes.size());
    for (size_t q = 0; q < r.nodes.size(); ++q) {
        legendre_eval_all(W, r.nodes[q], L.data(), L1.data(), L2.data());
        const double* src = d == 0 ? L.data() : d == 1 ? L1.data() : L2.data();
        for (int i = 0; i <= W; ++i) vals(i, (int)q) = src[i];
    }
    for (int i = 0; i <= W; ++i)
        for (int j = i; j <= W; ++j) {
            double s = 0.0;
            for (size_t q = 0; q < r.nodes.size(); ++q)
                s += r.weights[q] * vals(i, (int)q) * vals(j, (int)q);
            M(i, j) = M(j, i) = s;
        }
    return M;
}

}  // namespace

QuadForm1D quad_forms_1d(int W) { return quad_forms_1d_aniso(W, 1.0); }

QuadForm1D quad_forms_1d_aniso(int W, double eta) {
    if (W < 1) throw std::invalid_argument("quad_forms_1d: W >= 1 required");
    if (!(eta > 0.0)) throw std::invalid_argument("quad_forms_1d_aniso: eta must be positive");
    QuadForm1D q;
    q.W = W;
    q.E = std::pow(eta, 4) * legendre_deriv_gram(W, 2, W + 1) +
          eta * eta * legendre_deriv_gram(W, 1, W + 1);
    q.F = legendre_deriv_gram(W, 0, W + 1);
    return q;
}

EigBasis1D gen_eig(const QuadForm1D& q) {
    const int n = q.W + 1;
    // F is diagonal (Legendre orthogonality): reduce by F^{-1/2} exactly
    Eigen::VectorXd fs(n);
    for (int i = 0; i < n; ++i) {
        if (!(q.F(i, i) > 0.0)) throw std::invalid_argument("gen_eig: mass form not PD");
        fs(i) = 1.0 / std::sqrt(q.F(i, i));
    }
    Eigen::MatrixXd Et = fs.asDiagonal() * q.E * fs.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Et);
    EigBasis1D eb;
    eb.W = q.W;
    eb.mu = es.eigenvalues().cwiseMax(0.0);  // clip -1e-16 rounding
    eb.b = fs.asDiagonal() * es.eigenvectors();
    for (int j = 0; j < n; ++j) {  // deterministic sign
        for (int i = 0; i < n; ++i) {
            if (std::abs(eb.b(i, j)) > 1e-12) {
                if (eb.b(i, j) < 0) eb.b.col(j) *= -1.0;
                break;
            }
        }
    }
    return eb;
}

// ---------------------------------------------------------------------------
// per-element blocks
// ---------------------------------------------------------------------------

namespace {

struct StdBlock {
    int elem = -1;
    std::array<int, 3> dims{};
    // nodal <-> eigen transforms per direction: M = V * P (P = eigenvectors)
    std::array<Eigen::MatrixXd, 3> M, Minv;
    std::vector<double> D;  // tensor eigenvalues * element scale
};

struct RadialBlock {
    int elem = -1;
    int n = 0;
    Eigen::MatrixXd M, Minv;
    Eigen::VectorXd D;
};

// integral of the frame volume weight over the finite window (hi-1, hi) of a
// semi-infinite coordinate, or over (lo, hi) when finite
double exp_mass(double coef, double lo, double hi) {
    double a = (lo > kNegInf) ? lo : hi - 1.0;
    return (std::exp(coef * hi) - std::exp(coef * a)) / coef;
}

Eigen::MatrixXd legendre_vmat(int W) { return lt(W).vmat; }

double element_scale(const Element& e) {
    switch (e.frame) {
        case Frame::Vertex: return std::exp(e.hi(2));      // sup e^chi
        case Frame::VertexEdge: return std::exp(e.hi(2));  // sup e^zeta
        default: return 1.0;
    }
}

}  // namespace

struct SeparablePrecond::Impl {
    Layout lay;
    std::vector<StdBlock> std_blocks;
    std::vector<RadialBlock> rad_blocks;
    double const_mass = 0.0;  // shared corner constant block (0 when absent)

    Impl(const Mesh& mesh, const Layout& layout) : lay(layout) {
        for (const Element& e : mesh.elems) {
            if (e.kind == ElemKind::Standard) {
                StdBlock b;
                b.elem = e.id;
                std::array<EigBasis1D, 3> eig;
                for (int d = 0; d < 3; ++d) {
                    b.dims[d] = e.degrees[d] + 1;
                    bool aniso = d == 2 && (e.frame == Frame::Edge ||
                                            e.frame == Frame::VertexEdge);
                    if (aniso) {
                        // sup of the third-direction coefficient weight:
                        // e^tau (edge) or sin phi (vertex-edge)
                        double eta = e.frame == Frame::Edge
                                         ? std::exp(e.hi(0))
                                         : std::exp(e.hi(0)) /
                                               std::sqrt(1.0 + std::exp(2.0 * e.hi(0)));
                        eig[d] = gen_eig(quad_forms_1d_aniso(e.degrees[d], eta));
                    } else {
                        eig[d] = gen_eig(quad_forms_1d(e.degrees[d]));
                    }
                    b.M[d] = legendre_vmat(e.degrees[d]) * eig[d].b;
                    b.Minv[d] = b.M[d].inverse();
                }
                const double sc = element_scale(e);
                b.D.resize((size_t)b.dims[0] * b.dims[1] * b.dims[2]);
                int idx = 0;
                for (int k = 0; k < b.dims[2]; ++k)
                    for (int j = 0; j < b.dims[1]; ++j)
                        for (int i = 0; i < b.dims[0]; ++i, ++idx)
                            b.D[idx] =
                                sc * (eig[0].mu(i) + eig[1].mu(j) + eig[2].mu(k) + 1.0);
                std_blocks.push_back(std::move(b));
            } else if (e.kind == ElemKind::CornerRadial1D) {
                RadialBlock b;
                b.elem = e.id;
                b.n = e.degrees[2] + 1;
                EigBasis1D eig = gen_eig(quad_forms_1d(e.degrees[2]));
                b.M = legendre_vmat(e.degrees[2]) * eig.b;
                b.Minv = b.M.inverse();
                // mass of the semi-infinite cross-section times the frame scale
                double sc;
                if (e.frame == Frame::Edge) {
                    sc = exp_mass(2.0, e.lo(0), e.hi(0)) * 2.0 * e.half(1);
                } else {  // vertex-edge: radial in zeta
                    sc = exp_mass(2.0, e.lo(0), e.hi(0)) * 2.0 * e.half(1) *
                         std::exp(e.hi(2));
                }
                b.D = sc * (eig.mu.array() + 1.0);
                rad_blocks.push_back(std::move(b));
            } else {  // CornerConstant: weighted L2 mass of the constant
                double m;
                if (e.frame == Frame::Vertex) {
                    m = (std::cos(e.lo(0)) - std::cos(e.hi(0))) * 2.0 * e.half(1) *
                        exp_mass(3.0, e.lo(2), e.hi(2));
                } else {  // vertex-edge
                    m = exp_mass(2.0, e.lo(0), e.hi(0)) * 2.0 * e.half(1) *
                        exp_mass(3.0, e.lo(2), e.hi(2));
                }
                const_mass += m;
            }
        }
    }

    std::vector<double> run(const std::vector<double>& x, bool inverse) const {
        if ((int)x.size() != lay.total)
            throw std::invalid_argument("precond: layout mismatch");
        std::vector<double> out(lay.total, 0.0);
        for (const StdBlock& b : std_blocks) {
            const double* src = x.data() + lay.offset[b.elem];
            std::vector<double> t(src, src + b.D.size());
            for (int d = 0; d < 3; ++d)
                t = apply_dim(inverse ? Eigen::MatrixXd(b.M[d].transpose()) : b.Minv[d], t,
                              b.dims, d);
            for (size_t i = 0; i < t.size(); ++i)
                t[i] = inverse ? t[i] / b.D[i] : t[i] * b.D[i];
            for (int d = 0; d < 3; ++d)
                t = apply_dim(inverse ? b.M[d] : Eigen::MatrixXd(b.Minv[d].transpose()), t,
                              b.dims, d);
            double* dst = out.data() + lay.offset[b.elem];
            for (size_t i = 0; i < t.size(); ++i) dst[i] = t[i];
        }
        for (const RadialBlock& b : rad_blocks) {
            Eigen::Map<const Eigen::VectorXd> src(x.data() + lay.offset[b.elem], b.n);
            Eigen::VectorXd t;
            if (inverse)
                t = b.M * (b.M.transpose() * src).cwiseQuotient(b.D);
            else
                t = b.Minv.transpose() * (b.Minv * src).cwiseProduct(b.D);
            Eigen::Map<Eigen::VectorXd>(out.data() + lay.offset[b.elem], b.n) = t;
        }
        if (lay.constant_offset >= 0)
            out[lay.constant_offset] = inverse ? x[lay.constant_offset] / const_mass
                                               : x[lay.constant_offset] * const_mass;
        return out;
    }
};

SeparablePrecond::SeparablePrecond(const Mesh& mesh, const Layout& layout)
    : impl_(std::make_unique<Impl>(mesh, layout)) {}
SeparablePrecond::~SeparablePrecond() = default;

std::vector<double> SeparablePrecond::apply(const std::vector<double>& r) const {
    return impl_->run(r, true);
}
std::vector<double> SeparablePrecond::apply_form(const std::vector<double>& u) const {
    return impl_->run(u, false);
}

// ---------------------------------------------------------------------------
// condition-number study
// ---------------------------------------------------------------------------

namespace {

// Lanczos with full reorthogonalization for the extreme eigenvalues of a
// symmetric operator.
std::pair<double, double> lanczos_extremes(
    int n, const std::function<std::vector<double>(const std::vector<double>&)>& Av,
    int max_steps) {
    const int m = std::min(n, max_steps);
    std::vector<std::vector<double>> V;
    V.reserve(m);
    std::mt19937 gen(1234);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& z : v) z = dist(gen);
    double nv = 0.0;
    for (double z : v) nv += z * z;
    nv = std::sqrt(nv);
    for (double& z : v) z /= nv;
    std::vector<double> alpha, beta;
    for (int k = 0; k < m; ++k) {
        V.push_back(v);
        auto w = Av(v);
        double a = 0.0;
        for (int i = 0; i < n; ++i) a += w[i] * v[i];
        alpha.push_back(a);
        // full reorthogonalization (twice)
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : V) {
                double c = 0.0;
                for (int i = 0; i < n; ++i) c += w[i] * q[i];
                for (int i = 0; i < n; ++i) w[i] -= c * q[i];
            }
        double bb = 0.0;
        for (double z : w) bb += z * z;
        bb = std::sqrt(bb);
        if (bb < 1e-13 || k == m - 1) break;
        beta.push_back(bb);
        for (int i = 0; i < n; ++i) v[i] = w[i] / bb;
    }
    const int s = (int)alpha.size();
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(s, s);
    for (int i = 0; i < s; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < s) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    return {es.eigenvalues()(0), es.eigenvalues()(s - 1)};
}

}  // namespace

double condition_number_study(int W) {
    if (W < 2 || W > 16) throw std::invalid_argument("condition_number_study: 2 <= W <= 16");
    const int n1 = W + 1;
    const int n = n1 * n1 * n1;
    // The thesis evaluates all 1D integrals with its own (W+1)-point GLL rule
    // (order W): derivative Grams exact, discrete mass entry (W,W) = 2/W.
    // Table 5.1 is reproduced to full precision only under this convention.
    std::array<Eigen::MatrixXd, 3> G;  // Legendre Gram matrices of d = 0,1,2
    for (int d = 0; d < 3; ++d) G[d] = legendre_deriv_gram(W, d, W);
    QuadForm1D qf;
    qf.W = W;
    qf.E = G[2] + G[1];
    qf.F = G[0];
    EigBasis1D eig = gen_eig(qf);
    Eigen::VectorXd dinv(n);
    {
        int idx = 0;
        for (int k = 0; k < n1; ++k)
            for (int j = 0; j < n1; ++j)
                for (int i = 0; i < n1; ++i, ++idx)
                    dinv(idx) =
                        1.0 / std::sqrt(eig.mu(i) + eig.mu(j) + eig.mu(k) + 1.0);
    }
    const std::array<int, 3> dims = {n1, n1, n1};
    Eigen::MatrixXd P = eig.b, Pt = eig.b.transpose();
    // S = D^{-1/2} (P kron P kron P)^T B (P kron P kron P) D^{-1/2}
    auto Sv = [&](const std::vector<double>& x) {
        std::vector<double> t(n);
        for (int i = 0; i < n; ++i) t[i] = x[i] * dinv(i);
        for (int d = 0; d < 3; ++d) t = apply_dim(P, t, dims, d);
        // B = sum over multi-indices |alpha| <= 2 of Gram tensor products
        std::vector<double> acc(n, 0.0);
        for (int a1 = 0; a1 <= 2; ++a1)
            for (int a2 = 0; a2 + a1 <= 2; ++a2)
                for (int a3 = 0; a3 + a2 + a1 <= 2; ++a3) {
                    auto u = apply_dim(G[a1], t, dims, 0);
                    u = apply_dim(G[a2], u, dims, 1);
                    u = apply_dim(G[a3], u, dims, 2);
                    for (int i = 0; i < n; ++i) acc[i] += u[i];
                }
        for (int d = 0; d < 3; ++d) acc = apply_dim(Pt, acc, dims, d);
        for (int i = 0; i < n; ++i) acc[i] *= dinv(i);
        return acc;
    };
    auto [lo, hi] = lanczos_extremes(n, Sv, 400);
    return hi / lo;
}

}  // namespace hpsem
