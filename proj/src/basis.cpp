#include "hpsem/basis.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace hpsem {

double legendre_eval(int m, double x) {
    double Lm1 = 1.0, L = x;
    if (m == 0) return 1.0;
    if (m == 1) return x;
    for (int k = 2; k <= m; ++k) {
        double Lk = ((2 * k - 1) * x * L - (k - 1) * Lm1) / k;
        Lm1 = L;
        L = Lk;
    }
    return L;
}

void legendre_eval_all(int maxdeg, double x, double* L, double* L1, double* L2) {
    L[0] = 1.0;
    if (L1) L1[0] = 0.0;
    if (L2) L2[0] = 0.0;
    if (maxdeg == 0) return;
    L[1] = x;
    if (L1) L1[1] = 1.0;
    if (L2) L2[1] = 0.0;
    for (int k = 2; k <= maxdeg; ++k) {
        // k L_k = (2k-1) x L_{k-1} - (k-1) L_{k-2}, differentiated as needed
        L[k] = ((2 * k - 1) * x * L[k - 1] - (k - 1) * L[k - 2]) / k;
        if (L1)
            L1[k] = ((2 * k - 1) * (L[k - 1] + x * L1[k - 1]) - (k - 1) * L1[k - 2]) / k;
        if (L2)
            L2[k] = ((2 * k - 1) * (2 * L1[k - 1] + x * L2[k - 1]) - (k - 1) * L2[k - 2]) / k;
    }
}

GllRule gll_rule(int n) {
    if (n < 1) throw std::invalid_argument("gll_rule: order must be >= 1");
    GllRule r;
    r.order = n;
    r.nodes.resize(n + 1);
    r.weights.resize(n + 1);
    r.nodes[0] = -1.0;
    r.nodes[n] = 1.0;
    std::vector<double> L(n + 1), L1(n + 1), L2(n + 1);
    // Interior nodes: roots of L_n'(x); Newton from Chebyshev-Lobatto guesses.
    for (int k = 1; k < n; ++k) {
        double x = -std::cos(M_PI * k / n);
        for (int it = 0; it < 100; ++it) {
            legendre_eval_all(n, x, L.data(), L1.data(), L2.data());
            double dx = L1[n] / L2[n];
            x -= dx;
            if (std::abs(dx) < 1e-14) break;
        }
        r.nodes[k] = x;
    }
    // Symmetrize to kill residual asymmetry from the iteration.
    for (int k = 0; k <= n; ++k) {
        double s = 0.5 * (r.nodes[k] - r.nodes[n - k]);
        r.nodes[k] = s;
    }
    for (int k = 0; k <= n; ++k) {
        double Ln = legendre_eval(n, r.nodes[k]);
        r.weights[k] = 2.0 / (n * (n + 1) * Ln * Ln);
    }
    return r;
}

namespace {
std::mutex cache_mutex;

template <class T, class F>
const T& cached(std::map<int, T>& store, int n, F make) {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = store.find(n);
    if (it == store.end()) it = store.emplace(n, make(n)).first;
    return it->second;
}
}  // namespace

const GllRule& gll(int n) {
    static std::map<int, GllRule> store;
    return cached(store, n, gll_rule);
}

DiffMatrix diff_matrix(const GllRule& rule) {
    const int n = rule.order;
    DiffMatrix dm;
    dm.order = n;
    dm.d.resize(n + 1, n + 1);
    // Standard GLL differentiation matrix via L_n values:
    // d_ij = L_n(x_i) / (L_n(x_j) (x_i - x_j)) for i != j.
    std::vector<double> Ln(n + 1);
    for (int i = 0; i <= n; ++i) Ln[i] = legendre_eval(n, rule.nodes[i]);
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            if (i != j)
                dm.d(i, j) = Ln[i] / (Ln[j] * (rule.nodes[i] - rule.nodes[j]));
            else if (i == 0)
                dm.d(i, j) = -0.25 * n * (n + 1);
            else if (i == n)
                dm.d(i, j) = 0.25 * n * (n + 1);
            else
                dm.d(i, j) = 0.0;
        }
    }
    return dm;
}

const Eigen::MatrixXd& diff(int n) {
    static std::map<int, DiffMatrix> store;
    return cached(store, n, [](int m) { return diff_matrix(gll_rule(m)); }).d;
}

LegendreTransform legendre_transform(const GllRule& rule) {
    const int n = rule.order;
    LegendreTransform t;
    t.order = n;
    t.gamma.resize(n + 1);
    for (int m = 0; m < n; ++m) t.gamma[m] = 1.0 / (m + 0.5);
    t.gamma[n] = 2.0 / n;
    t.vmat.resize(n + 1, n + 1);
    std::vector<double> L(n + 1);
    for (int i = 0; i <= n; ++i) {
        legendre_eval_all(n, rule.nodes[i], L.data());
        for (int m = 0; m <= n; ++m) t.vmat(i, m) = L[m];
    }
    return t;
}

const LegendreTransform& lt(int n) {
    static std::map<int, LegendreTransform> store;
    return cached(store, n, [](int m) { return legendre_transform(gll_rule(m)); });
}

std::vector<double> legendre_forward(const GllRule& rule, const std::vector<double>& nodal) {
    const int n = rule.order;
    if ((int)nodal.size() != n + 1)
        throw std::invalid_argument("legendre_forward: length mismatch");
    const LegendreTransform& t = lt(n);
    std::vector<double> modal(n + 1, 0.0);
    for (int m = 0; m <= n; ++m) {
        double s = 0.0;
        for (int i = 0; i <= n; ++i) s += rule.weights[i] * nodal[i] * t.vmat(i, m);
        modal[m] = s / t.gamma[m];
    }
    return modal;
}

std::vector<double> legendre_inverse(const GllRule& rule, const std::vector<double>& modal) {
    const int n = rule.order;
    if ((int)modal.size() != n + 1)
        throw std::invalid_argument("legendre_inverse: length mismatch");
    const LegendreTransform& t = lt(n);
    std::vector<double> nodal(n + 1, 0.0);
    for (int i = 0; i <= n; ++i) {
        double s = 0.0;
        for (int m = 0; m <= n; ++m) s += modal[m] * t.vmat(i, m);
        nodal[i] = s;
    }
    return nodal;
}

Eigen::MatrixXd interp_matrix(const GllRule& from, const std::vector<double>& pts) {
    const int n = from.order;
    // Barycentric weights for the GLL nodes.
    std::vector<double> bw(n + 1, 1.0);
    for (int j = 0; j <= n; ++j)
        for (int k = 0; k <= n; ++k)
            if (k != j) bw[j] /= (from.nodes[j] - from.nodes[k]);
    Eigen::MatrixXd M((int)pts.size(), n + 1);
    for (int p = 0; p < (int)pts.size(); ++p) {
        double x = pts[p];
        int hit = -1;
        for (int j = 0; j <= n; ++j)
            if (x == from.nodes[j]) hit = j;
        if (hit >= 0) {
            for (int j = 0; j <= n; ++j) M(p, j) = (j == hit) ? 1.0 : 0.0;
            continue;
        }
        double denom = 0.0;
        for (int j = 0; j <= n; ++j) denom += bw[j] / (x - from.nodes[j]);
        for (int j = 0; j <= n; ++j) M(p, j) = (bw[j] / (x - from.nodes[j])) / denom;
    }
    return M;
}

const Eigen::MatrixXd& interp_gll(int from_order, int to_order) {
    static std::map<long long, Eigen::MatrixXd> store;
    long long key = (long long)from_order * 100000 + to_order;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = store.find(key);
    if (it == store.end()) {
        Eigen::MatrixXd M = interp_matrix(gll_rule(from_order), gll_rule(to_order).nodes);
        it = store.emplace(key, std::move(M)).first;
    }
    return it->second;
}

std::vector<double> apply_dim(const Eigen::MatrixXd& M, const std::vector<double>& in,
                              std::array<int, 3> dims, int dim) {
    const int n_in = dims[dim];
    if (M.cols() != n_in) throw std::invalid_argument("apply_dim: dimension mismatch");
    const int n_out = (int)M.rows();
    std::array<int, 3> od = dims;
    od[dim] = n_out;
    std::vector<double> out((size_t)od[0] * od[1] * od[2], 0.0);
    const int n1 = dims[0], n2 = dims[1], n3 = dims[2];
    if (dim == 0) {
        for (int k = 0; k < n3; ++k)
            for (int j = 0; j < n2; ++j) {
                const double* src = in.data() + (size_t)n1 * (j + (size_t)n2 * k);
                double* dst = out.data() + (size_t)n_out * (j + (size_t)n2 * k);
                for (int a = 0; a < n_out; ++a) {
                    double s = 0.0;
                    for (int b = 0; b < n1; ++b) s += M(a, b) * src[b];
                    dst[a] = s;
                }
            }
    } else if (dim == 1) {
        for (int k = 0; k < n3; ++k)
            for (int a = 0; a < n_out; ++a)
                for (int b = 0; b < n2; ++b) {
                    const double m = M(a, b);
                    if (m == 0.0) continue;
                    const double* src = in.data() + (size_t)n1 * (b + (size_t)n2 * k);
                    double* dst = out.data() + (size_t)n1 * (a + (size_t)n_out * k);
                    for (int i = 0; i < n1; ++i) dst[i] += m * src[i];
                }
    } else {
        const size_t plane = (size_t)n1 * n2;
        for (int a = 0; a < n_out; ++a)
            for (int b = 0; b < n3; ++b) {
                const double m = M(a, b);
                if (m == 0.0) continue;
                const double* src = in.data() + plane * b;
                double* dst = out.data() + plane * a;
                for (size_t i = 0; i < plane; ++i) dst[i] += m * src[i];
            }
    }
    return out;
}

std::vector<double> prolong_coarse_to_fine(const std::vector<double>& coarse,
                                           std::array<int, 3> N, std::array<int, 3> M) {
    if ((int)coarse.size() != (N[0] + 1) * (N[1] + 1) * (N[2] + 1))
        throw std::invalid_argument("prolong: dimension mismatch");
    std::vector<double> v = coarse;
    std::array<int, 3> dims = {N[0] + 1, N[1] + 1, N[2] + 1};
    for (int d = 0; d < 3; ++d) {
        if (M[d] == N[d]) continue;
        v = apply_dim(interp_gll(N[d], M[d]), v, dims, d);
        dims[d] = M[d] + 1;
    }
    return v;
}

std::vector<double> restrict_fine_to_coarse(const std::vector<double>& fine,
                                            std::array<int, 3> N, std::array<int, 3> M) {
    if ((int)fine.size() != (M[0] + 1) * (M[1] + 1) * (M[2] + 1))
        throw std::invalid_argument("restrict: dimension mismatch");
    std::vector<double> v = fine;
    std::array<int, 3> dims = {M[0] + 1, M[1] + 1, M[2] + 1};
    // Step 1: divide by the fine quadrature weights (per restricted direction).
    for (int d = 0; d < 3; ++d) {
        if (M[d] == N[d]) continue;
        const GllRule& rf = gll(M[d]);
        Eigen::MatrixXd W = Eigen::MatrixXd::Zero(M[d] + 1, M[d] + 1);
        for (int i = 0; i <= M[d]; ++i) W(i, i) = 1.0 / rf.weights[i];
        v = apply_dim(W, v, dims, d);
    }
    // Step 2: forward Legendre transform on the fine grid (gamma^{2N}-scaled),
    // restoring the quadrature weights inside the transform.
    for (int d = 0; d < 3; ++d) {
        if (M[d] == N[d]) continue;
        const GllRule& rf = gll(M[d]);
        const LegendreTransform& tf = lt(M[d]);
        Eigen::MatrixXd F(M[d] + 1, M[d] + 1);
        for (int m = 0; m <= M[d]; ++m)
            for (int i = 0; i <= M[d]; ++i)
                F(m, i) = rf.weights[i] * tf.vmat(i, m) / tf.gamma[m];
        v = apply_dim(F, v, dims, d);
    }
    // Step 3: truncate modes to degree N and rescale gamma^{2N} -> gamma^N.
    for (int d = 0; d < 3; ++d) {
        if (M[d] == N[d]) continue;
        const LegendreTransform& tf = lt(M[d]);
        const LegendreTransform& tc = lt(N[d]);
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(N[d] + 1, M[d] + 1);
        for (int m = 0; m <= N[d]; ++m) T(m, m) = tf.gamma[m] / tc.gamma[m];
        v = apply_dim(T, v, dims, d);
        dims[d] = N[d] + 1;
    }
    // Step 4: inverse Legendre transform on the coarse grid.
    for (int d = 0; d < 3; ++d) {
        if (M[d] == N[d]) continue;
        v = apply_dim(lt(N[d]).vmat, v, dims, d);
    }
    // Step 5: multiply by the coarse quadrature weights.
    for (int d = 0; d < 3; ++d) {
        if (M[d] == N[d]) continue;
        const GllRule& rc = gll(N[d]);
        Eigen::MatrixXd W = Eigen::MatrixXd::Zero(N[d] + 1, N[d] + 1);
        for (int j = 0; j <= N[d]; ++j) W(j, j) = rc.weights[j];
        v = apply_dim(W, v, dims, d);
    }
    return v;
}

std::vector<double> restrict_fine_to_coarse(const std::vector<double>& fine, int N) {
    return restrict_fine_to_coarse(fine, {N, N, N}, {2 * N, 2 * N, 2 * N});
}

}  // namespace hpsem
