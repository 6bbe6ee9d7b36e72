#include "hpsem/norms.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace hpsem {

Eigen::MatrixXd half_seminorm_1d(const GllRule& rule) {
    const int n = rule.order;
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (int i = 0; i <= n; ++i)
        for (int k = 0; k <= n; ++k) {
            if (k == i) continue;
            double c = rule.weights[i] * rule.weights[k] /
                       ((rule.nodes[i] - rule.nodes[k]) * (rule.nodes[i] - rule.nodes[k]));
            // ordered pair (i, k): c * (s_i - s_k)^2
            Q(i, i) += c;
            Q(k, k) += c;
            Q(i, k) -= 2.0 * c;
        }
    // the above double-counts: loop over ordered pairs adds each unordered pair
    // twice, matching the display's sum over i and i' != i; but the rank-one
    // expansion above already accounts for one ordered pair per (i,k) visit,
    // so no correction is needed.
    const Eigen::MatrixXd& D = diff(n);
    Eigen::VectorXd w2(n + 1);
    for (int i = 0; i <= n; ++i) w2(i) = rule.weights[i] * rule.weights[i];
    Q += D.transpose() * w2.asDiagonal() * D;
    return Q;
}

namespace {
std::mutex q_mutex;
}

const Eigen::MatrixXd& half_seminorm_1d_cached(int order) {
    static std::map<int, Eigen::MatrixXd> store;
    std::lock_guard<std::mutex> lock(q_mutex);
    auto it = store.find(order);
    if (it == store.end())
        it = store.emplace(order, half_seminorm_1d(gll_rule(order))).first;
    return it->second;
}

HalfNormMatrix face_form_matrix(const GllRule& r1, const GllRule& r2, double c0, double c1,
                                double c2) {
    const int n1 = r1.order + 1, n2 = r2.order + 1;
    const Eigen::MatrixXd& Q1 = half_seminorm_1d_cached(r1.order);
    const Eigen::MatrixXd& Q2 = half_seminorm_1d_cached(r2.order);
    HalfNormMatrix H;
    H.order1 = r1.order;
    H.order2 = r2.order;
    H.entries = Eigen::MatrixXd::Zero(n1 * n2, n1 * n2);
    for (int j = 0; j < n2; ++j)
        for (int i = 0; i < n1; ++i) {
            int row = i + n1 * j;
            H.entries(row, row) += c0 * r1.weights[i] * r2.weights[j];
            for (int i2 = 0; i2 < n1; ++i2)
                H.entries(row, i2 + n1 * j) += c1 * r2.weights[j] * Q1(i, i2);
            for (int j2 = 0; j2 < n2; ++j2)
                H.entries(row, i + n1 * j2) += c2 * r1.weights[i] * Q2(j, j2);
        }
    return H;
}

HalfNormMatrix h_half_form(const GllRule& rule) {
    return face_form_matrix(rule, rule, 1.0, 1.0, 1.0);
}

std::vector<double> face_form_apply(const GllRule& r1, const GllRule& r2,
                                    const std::vector<double>& v, double c0, double c1,
                                    double c2) {
    const int n1 = r1.order + 1, n2 = r2.order + 1;
    if ((int)v.size() != n1 * n2) throw std::invalid_argument("face_form_apply: size mismatch");
    const Eigen::MatrixXd& Q1 = half_seminorm_1d_cached(r1.order);
    const Eigen::MatrixXd& Q2 = half_seminorm_1d_cached(r2.order);
    std::vector<double> out(v.size(), 0.0);
    for (int j = 0; j < n2; ++j)
        for (int i = 0; i < n1; ++i)
            out[i + n1 * j] += c0 * r1.weights[i] * r2.weights[j] * v[i + n1 * j];
    if (c1 != 0.0)
        for (int j = 0; j < n2; ++j)
            for (int i = 0; i < n1; ++i) {
                double s = 0.0;
                for (int i2 = 0; i2 < n1; ++i2) s += Q1(i, i2) * v[i2 + n1 * j];
                out[i + n1 * j] += c1 * r2.weights[j] * s;
            }
    if (c2 != 0.0)
        for (int j = 0; j < n2; ++j)
            for (int i = 0; i < n1; ++i) {
                double s = 0.0;
                for (int j2 = 0; j2 < n2; ++j2) s += Q2(j, j2) * v[i + n1 * j2];
                out[i + n1 * j] += c2 * r1.weights[i] * s;
            }
    return out;
}

double face_form_value(const GllRule& r1, const GllRule& r2, const std::vector<double>& v,
                       double c0, double c1, double c2) {
    auto qv = face_form_apply(r1, r2, v, c0, c1, c2);
    double s = 0.0;
    for (size_t i = 0; i < v.size(); ++i) s += v[i] * qv[i];
    return s;
}

double h_half_norm_sq(const GllRule& r1, const GllRule& r2, const std::vector<double>& v) {
    return face_form_value(r1, r2, v, 1.0, 1.0, 1.0);
}

double h_three_half_norm_sq(const GllRule& r1, const GllRule& r2,
                            const std::vector<double>& u, const std::vector<double>& du1,
                            const std::vector<double>& du2) {
    return face_form_value(r1, r2, u, 1.0, 0.0, 0.0) + h_half_norm_sq(r1, r2, du1) +
           h_half_norm_sq(r1, r2, du2);
}

FaceWeights face_weights(const Element& e, int face) {
    if (!e.face_finite(face))
        throw std::invalid_argument("face_weights: infinite-measure face is excluded "
                                    "from the functional");
    const int ax = face / 2;
    auto coord_max = [&](int d) {
        if (d == ax) return e.bounds[face];
        return e.hi(d);
    };
    FaceWeights w;
    switch (e.frame) {
        case Frame::Regular:
            break;
        case Frame::Vertex:
            w.R = std::exp(coord_max(2));
            break;
        case Frame::Edge:
            w.G = std::exp(coord_max(0));
            break;
        case Frame::VertexEdge: {
            double psi = coord_max(0);
            double ep = std::exp(psi);
            w.E = ep / std::sqrt(1.0 + ep * ep);  // sin(atan(e^psi)), monotone in psi
            w.F = std::exp(coord_max(2));
            break;
        }
    }
    return w;
}

FaceNormCoeffs face_norm_coeffs(Frame frame, int axis, const FaceWeights& w) {
    FaceNormCoeffs c;
    switch (frame) {
        case Frame::Regular:
            break;
        case Frame::Vertex:
            // plain H^{1/2}/H^{3/2} norms with the sqrt(R) weight throughout
            c.base0 = c.base1 = c.base2 = w.R;
            c.jump_l2 = w.R;
            c.dirichlet_l2 = w.R;
            break;
        case Frame::Edge:
            if (axis == 2) {
                // x3-normal face (Eq. 2.34a): H = G, |||v|||^2 = G(L2 + d1 + d2)
                c.base0 = c.base1 = c.base2 = w.G;
                c.jump_l2 = w.G;
            } else {
                // Eq. 2.34b/c: |||v|||^2 = L2 + (other-diff) + G*(x3-diff)
                c.base0 = 1.0;
                c.base1 = 1.0;   // tangent t1 (tau or theta)
                c.base2 = w.G;   // tangent t2 is always x3 for axis 0/1
                c.jump_l2 = 1.0;
            }
            c.deriv_mult = {1.0, 1.0, w.G * w.G};  // |||G [u_{x3}]|||
            c.dirichlet_l2 = 1.0;                  // Eq. 4.7: unweighted L2(u-g)
            break;
        case Frame::VertexEdge:
            if (axis == 2) {
                // zeta-normal face (Eq. 2.27a): E*F*(L2 + d1 + d2)
                c.base0 = c.base1 = c.base2 = w.E * w.F;
                c.jump_l2 = w.E * w.F;
            } else {
                // Eq. 2.27b/c: F*(L2 + other-diff + E*(zeta-diff))
                c.base0 = w.F;
                c.base1 = w.F;
                c.base2 = w.F * w.E;  // tangent t2 is zeta for axis 0/1
                c.jump_l2 = w.F;
            }
            c.deriv_mult = {1.0, 1.0, w.E * w.E};  // |||E [u_{zeta}]|||
            c.dirichlet_l2 = w.F;                  // Eq. 4.5: sqrt(F) L2(u-g)
            break;
    }
    return c;
}

double weighted_face_norm(Frame frame, int axis, const FaceWeights& w, const GllRule& r1,
                          const GllRule& r2, const std::vector<double>& v) {
    FaceNormCoeffs c = face_norm_coeffs(frame, axis, w);
    return face_form_value(r1, r2, v, c.base0, c.base1, c.base2);
}

namespace {
// Extract the 2D face slice (tangential dims ascending, first fastest) at the
// normal-dim index `idx`.
std::vector<double> slice_face(const std::vector<double>& t, std::array<int, 3> dims,
                               int axis, int idx) {
    std::array<int, 2> tg = face_tangents(axis);
    std::vector<double> out((size_t)dims[tg[0]] * dims[tg[1]]);
    std::array<int, 3> c;
    size_t p = 0;
    for (int b = 0; b < dims[tg[1]]; ++b)
        for (int a = 0; a < dims[tg[0]]; ++a) {
            c[axis] = idx;
            c[tg[0]] = a;
            c[tg[1]] = b;
            out[p++] = t[c[0] + (size_t)dims[0] * (c[1] + (size_t)dims[1] * c[2])];
        }
    return out;
}

std::vector<double> interp2(const std::vector<double>& face, int n1, int n2,
                            const Eigen::MatrixXd& M1, const Eigen::MatrixXd& M2) {
    // out = M1 * face * M2^T on the 2D grid
    Eigen::Map<const Eigen::MatrixXd> F(face.data(), n1, n2);
    Eigen::MatrixXd R = M1 * F * M2.transpose();
    return std::vector<double>(R.data(), R.data() + R.size());
}
}  // namespace

FaceTrace trace_on_face(const Element& e, const std::vector<double>& coarse, int face,
                        const GllRule& rt1, const GllRule& rt2) {
    if (e.kind != ElemKind::Standard)
        throw std::invalid_argument("trace_on_face: Standard elements only");
    const int ax = face / 2, side = face % 2;
    std::array<int, 2> tg = face_tangents(ax);
    std::array<int, 3> dims = {e.degrees[0] + 1, e.degrees[1] + 1, e.degrees[2] + 1};
    if ((int)coarse.size() != dims[0] * dims[1] * dims[2])
        throw std::invalid_argument("trace_on_face: coefficient size mismatch");
    const int idx = side ? e.degrees[ax] : 0;
    const Eigen::MatrixXd M1 = interp_matrix(gll(e.degrees[tg[0]]), rt1.nodes);
    const Eigen::MatrixXd M2 = interp_matrix(gll(e.degrees[tg[1]]), rt2.nodes);

    FaceTrace out;
    out.n1 = rt1.order + 1;
    out.n2 = rt2.order + 1;
    auto push = [&](const std::vector<double>& volume_tensor) {
        auto s = slice_face(volume_tensor, dims, ax, idx);
        return interp2(s, dims[tg[0]], dims[tg[1]], M1, M2);
    };
    out.u = push(coarse);
    for (int m = 0; m < 3; ++m) {
        // frame derivative d/dy_m = (1/half_m) d/dlambda_m
        auto dm = apply_dim(diff(e.degrees[m]), coarse, dims, m);
        for (auto& x : dm) x /= e.half(m);
        out.du[m] = push(dm);
    }
    return out;
}

FaceTrace jump_face_values(const Mesh& mesh, int elem_a, int face_a,
                           const std::vector<double>& coarse_a,
                           const std::vector<double>& coarse_b, const GllRule& rt1,
                           const GllRule& rt2) {
    const Element& A = mesh.elems[elem_a];
    const FaceRecord& fr = A.faces[face_a];
    if (fr.tag != FaceTag::Interior)
        throw std::invalid_argument("jump_face_values: not an interior face");
    const Element& B = mesh.elems[fr.neighbor];
    if (A.frame != B.frame)
        throw std::invalid_argument(
            "jump_face_values: inter-frame faces are handled by the functional module");
    FaceTrace a = trace_on_face(A, coarse_a, face_a, rt1, rt2);
    FaceTrace b = trace_on_face(B, coarse_b, fr.neighbor_face, rt1, rt2);
    for (size_t i = 0; i < a.u.size(); ++i) a.u[i] -= b.u[i];
    for (int m = 0; m < 3; ++m)
        for (size_t i = 0; i < a.du[m].size(); ++i) a.du[m][i] -= b.du[m][i];
    return a;
}

}  // namespace hpsem
