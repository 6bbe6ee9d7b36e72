#include "hpsem/functional.hpp"

#include <cmath>
#include <stdexcept>

namespace hpsem {

namespace {

// pair order for second derivatives: (m,n) with m <= n
constexpr int kPairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};

double region_weight(Frame f, const std::array<double, 3>& y) {
    switch (f) {
        case Frame::Regular: return 1.0;
        case Frame::Vertex:
            return std::exp(2.5 * y[2]) * std::sqrt(std::sin(y[0]));
        case Frame::Edge: return std::exp(2.0 * y[0]);
        case Frame::VertexEdge: return std::exp(2.0 * y[0] + 2.5 * y[2]);
    }
    return 1.0;
}

// pointwise weight applied to Neumann flux residuals
double neumann_weight(Frame f, const std::array<double, 3>& y) {
    switch (f) {
        case Frame::Regular: return 1.0;
        case Frame::Vertex: return std::exp(y[2]) / std::sin(y[0]);
        case Frame::Edge: return std::exp(y[0]);
        case Frame::VertexEdge: return std::exp(y[0] + y[2]);
    }
    return 1.0;
}

}  // namespace

Layout make_layout(const Mesh& mesh) {
    Layout L;
    L.offset.resize(mesh.elems.size(), -1);
    L.size.resize(mesh.elems.size(), 0);
    int run = 0;
    bool any_const = false;
    for (const Element& e : mesh.elems) {
        if (e.kind == ElemKind::CornerConstant) {
            any_const = true;
            L.size[e.id] = 1;
            continue;
        }
        int n = (e.kind == ElemKind::Standard)
                    ? (e.degrees[0] + 1) * (e.degrees[1] + 1) * (e.degrees[2] + 1)
                    : e.degrees[2] + 1;
        L.offset[e.id] = run;
        L.size[e.id] = n;
        run += n;
    }
    if (any_const) {
        L.constant_offset = run;
        for (const Element& e : mesh.elems)
            if (e.kind == ElemKind::CornerConstant) L.offset[e.id] = run;
        ++run;
    }
    L.total = run;
    return L;
}

MappedOperator mapped_operator(const EllipticProblem& problem, const Element& e) {
    if (e.kind != ElemKind::Standard)
        throw std::invalid_argument("mapped_operator: Standard elements only");
    MappedOperator op;
    for (int d = 0; d < 3; ++d) op.fine[d] = 2 * e.degrees[d];
    const GllRule& r1 = gll(op.fine[0]);
    const GllRule& r2 = gll(op.fine[1]);
    const GllRule& r3 = gll(op.fine[2]);
    op.npts = (op.fine[0] + 1) * (op.fine[1] + 1) * (op.fine[2] + 1);
    for (auto& v : op.c2) v.resize(op.npts);
    for (auto& v : op.c1) v.resize(op.npts);
    op.c0.resize(op.npts);
    op.rhs.resize(op.npts);
    op.qw.resize(op.npts);
    const double mscale = std::sqrt(e.half(0) * e.half(1) * e.half(2));

    int p = 0;
    for (int k = 0; k <= op.fine[2]; ++k)
        for (int j = 0; j <= op.fine[1]; ++j)
            for (int i = 0; i <= op.fine[0]; ++i, ++p) {
                std::array<double, 3> y = {e.mid(0) + e.half(0) * r1.nodes[i],
                                           e.mid(1) + e.half(1) * r2.nodes[j],
                                           e.mid(2) + e.half(2) * r3.nodes[k]};
                FrameDerivs fd = frame_derivs(e.frame, y);
                CoeffValues cf = problem.coeffs(fd.x);
                const double w = mscale * region_weight(e.frame, y);
                // principal part: Atilde = B a B^T
                double At[3][3];
                for (int m = 0; m < 3; ++m)
                    for (int n = 0; n < 3; ++n) {
                        double s = 0.0;
                        for (int a = 0; a < 3; ++a)
                            for (int b = 0; b < 3; ++b)
                                s += fd.B[m][a] * cf.a[a][b] * fd.B[n][b];
                        At[m][n] = s;
                    }
                for (int q = 0; q < 6; ++q) {
                    int m = kPairs[q][0], n = kPairs[q][1];
                    op.c2[q][p] = w * At[m][n] * (m == n ? 1.0 : 2.0);
                }
                // first order: sum_ij a_ij d2y_m/dx_i dx_j + sum_i b_i B_mi,
                // with d2y_m/dx_i dx_j = -sum_{r,s,t} B_mr H[r][s][t] B_si B_tj
                for (int m = 0; m < 3; ++m) {
                    double g = 0.0;
                    for (int s = 0; s < 3; ++s)
                        for (int t = 0; t < 3; ++t) {
                            double bh = 0.0;
                            for (int r = 0; r < 3; ++r) bh += fd.B[m][r] * fd.H[r][s][t];
                            // contract with (B a B^T)_{st} pattern via a in x:
                            // sum_ij a_ij B_si B_tj = (B a B^T)_{st} = At with
                            // indices s,t
                            g -= bh * At[s][t];
                        }
                    for (int i = 0; i < 3; ++i) g += cf.b[i] * fd.B[m][i];
                    op.c1[m][p] = w * g;
                }
                op.c0[p] = w * cf.c;
                op.rhs[p] = w * problem.f(fd.x);
                op.qw[p] = r1.weights[i] * r2.weights[j] * r3.weights[k];
            }
    return op;
}

namespace {

// ---------------------------------------------------------------------------
// face traces for all element kinds
// ---------------------------------------------------------------------------

struct SideCtx {
    const Element* e;
    int face;
    const GllRule* rt1;
    const GllRule* rt2;
};

FaceTrace side_trace(const SideCtx& s, const std::vector<double>& coeff) {
    const Element& e = *s.e;
    const int n1 = s.rt1->order + 1, n2 = s.rt2->order + 1;
    if (e.kind == ElemKind::Standard) return trace_on_face(e, coeff, s.face, *s.rt1, *s.rt2);
    FaceTrace t;
    t.n1 = n1;
    t.n2 = n2;
    t.u.assign((size_t)n1 * n2, 0.0);
    for (auto& d : t.du) d.assign((size_t)n1 * n2, 0.0);
    if (e.kind == ElemKind::CornerConstant) {
        for (auto& v : t.u) v = coeff[0];
        return t;
    }
    // CornerRadial1D: u = u(lambda3); face must be the axis-0 high face and
    // tangent 2 of that face is axis 2.
    if (s.face / 2 != 0)
        throw std::invalid_argument("side_trace: corner radial trace only on axis-0 faces");
    const int V = e.degrees[2];
    Eigen::MatrixXd P = interp_matrix(gll(V), s.rt2->nodes);
    Eigen::Map<const Eigen::VectorXd> c(coeff.data(), V + 1);
    Eigen::VectorXd uv = P * c;
    Eigen::VectorXd dv = P * (diff(V) * c) / e.half(2);
    for (int j = 0; j < n2; ++j)
        for (int i = 0; i < n1; ++i) {
            t.u[i + (size_t)n1 * j] = uv(j);
            t.du[2][i + (size_t)n1 * j] = dv(j);
        }
    return t;
}

// Accumulate the transpose of side_trace: face-grid seeds on u and the three
// frame derivatives back to the element coefficient block.
void side_trace_adjoint(const SideCtx& s, const std::vector<double>* su,
                        const std::array<const std::vector<double>*, 3>& sdu,
                        std::vector<double>& g) {
    const Element& e = *s.e;
    const int n1 = s.rt1->order + 1, n2 = s.rt2->order + 1;
    if (e.kind == ElemKind::CornerConstant) {
        if (su)
            for (double v : *su) g[0] += v;
        return;
    }
    if (e.kind == ElemKind::CornerRadial1D) {
        const int V = e.degrees[2];
        Eigen::MatrixXd P = interp_matrix(gll(V), s.rt2->nodes);
        auto rowsum = [&](const std::vector<double>& q) {
            Eigen::VectorXd r = Eigen::VectorXd::Zero(n2);
            for (int j = 0; j < n2; ++j)
                for (int i = 0; i < n1; ++i) r(j) += q[i + (size_t)n1 * j];
            return r;
        };
        Eigen::Map<Eigen::VectorXd> gv(g.data(), V + 1);
        if (su) gv += P.transpose() * rowsum(*su);
        if (sdu[2]) gv += diff(V).transpose() * (P.transpose() * rowsum(*sdu[2])) / e.half(2);
        return;
    }
    // Standard
    const int ax = s.face / 2, side = s.face % 2;
    std::array<int, 2> tg = face_tangents(ax);
    std::array<int, 3> dims = {e.degrees[0] + 1, e.degrees[1] + 1, e.degrees[2] + 1};
    const int idx = side ? e.degrees[ax] : 0;
    Eigen::MatrixXd M1 = interp_matrix(gll(e.degrees[tg[0]]), s.rt1->nodes);
    Eigen::MatrixXd M2 = interp_matrix(gll(e.degrees[tg[1]]), s.rt2->nodes);

    auto scatter = [&](const std::vector<double>& q) {
        // S_adj = M1^T Q M2 placed at the face slice of a zero volume tensor
        Eigen::Map<const Eigen::MatrixXd> Q(q.data(), n1, n2);
        Eigen::MatrixXd S = M1.transpose() * Q * M2;
        std::vector<double> vol((size_t)dims[0] * dims[1] * dims[2], 0.0);
        std::array<int, 3> c;
        for (int b = 0; b < dims[tg[1]]; ++b)
            for (int a = 0; a < dims[tg[0]]; ++a) {
                c[ax] = idx;
                c[tg[0]] = a;
                c[tg[1]] = b;
                vol[c[0] + (size_t)dims[0] * (c[1] + (size_t)dims[1] * c[2])] = S(a, b);
            }
        return vol;
    };
    if (su) {
        auto vol = scatter(*su);
        for (size_t i = 0; i < vol.size(); ++i) g[i] += vol[i];
    }
    for (int m = 0; m < 3; ++m) {
        if (!sdu[m]) continue;
        auto vol = scatter(*sdu[m]);
        auto t = apply_dim(diff(e.degrees[m]).transpose(), vol, dims, m);
        for (size_t i = 0; i < t.size(); ++i) g[i] += t[i] / e.half(m);
    }
}

// ---------------------------------------------------------------------------
// term machinery
// ---------------------------------------------------------------------------

struct Term {
    int category = 0;  // 0 pde, 1 jump, 2 dirichlet, 3 neumann
    std::vector<int> elems;
    bool diag_q = false;
    std::vector<double> qdiag;
    const GllRule* r1 = nullptr;
    const GllRule* r2 = nullptr;
    double q0 = 0.0, q1 = 0.0, q2 = 0.0;
    std::vector<double> data;  // subtracted from the linear sample
    std::function<std::vector<double>(const std::vector<const double*>&)> sample;
    std::function<void(const std::vector<double>&, const std::vector<double*>&)> adjoint;

    std::vector<double> qapply(const std::vector<double>& s) const {
        if (diag_q) {
            std::vector<double> out(s.size());
            for (size_t i = 0; i < s.size(); ++i) out[i] = qdiag[i] * s[i];
            return out;
        }
        return face_form_apply(*r1, *r2, s, q0, q1, q2);
    }
    double qvalue(const std::vector<double>& s) const {
        auto qs = qapply(s);
        double v = 0.0;
        for (size_t i = 0; i < s.size(); ++i) v += s[i] * qs[i];
        return v;
    }
};

int elem_degree_on(const Element& e, int d) { return e.degrees[d]; }

}  // namespace

struct Assembly::Impl {
    const EllipticProblem problem;
    Mesh mesh;
    Layout lay;
    std::vector<Term> terms;

    Impl(const EllipticProblem& p, const Mesh& m) : problem(p), mesh(m) {
        lay = make_layout(mesh);
        build_volume_terms();
        build_face_terms();
    }

    void build_volume_terms() {
        for (const Element& e : mesh.elems) {
            if (e.kind != ElemKind::Standard) continue;
            MappedOperator op = mapped_operator(problem, e);
            Term t;
            t.category = 0;
            t.elems = {e.id};
            t.diag_q = true;
            t.qdiag = op.qw;
            t.data = op.rhs;
            std::array<int, 3> N = e.degrees;
            std::array<int, 3> M = op.fine;
            std::array<int, 3> fdims = {M[0] + 1, M[1] + 1, M[2] + 1};
            std::array<double, 3> half = {e.half(0), e.half(1), e.half(2)};
            auto opp = std::make_shared<MappedOperator>(std::move(op));
            t.sample = [opp, N, M, fdims, half](const std::vector<const double*>& blk) {
                int nc = (N[0] + 1) * (N[1] + 1) * (N[2] + 1);
                std::vector<double> Ue(blk[0], blk[0] + nc);
                auto uf = prolong_coarse_to_fine(Ue, N, M);
                std::array<std::vector<double>, 3> d1;
                for (int m = 0; m < 3; ++m) {
                    d1[m] = apply_dim(diff(M[m]), uf, fdims, m);
                    for (auto& v : d1[m]) v /= half[m];
                }
                std::vector<double> z(opp->npts, 0.0);
                for (int q = 0; q < 6; ++q) {
                    int m = kPairs[q][0], n = kPairs[q][1];
                    auto d2 = apply_dim(diff(M[n]), d1[m], fdims, n);
                    for (int p = 0; p < opp->npts; ++p)
                        z[p] += opp->c2[q][p] * d2[p] / half[n];
                }
                for (int m = 0; m < 3; ++m)
                    for (int p = 0; p < opp->npts; ++p) z[p] += opp->c1[m][p] * d1[m][p];
                for (int p = 0; p < opp->npts; ++p) z[p] += opp->c0[p] * uf[p];
                return z;
            };
            t.adjoint = [opp, N, M, fdims, half](const std::vector<double>& qs,
                                                 const std::vector<double*>& gblk) {
                std::vector<double> acc(opp->npts, 0.0);
                for (int p = 0; p < opp->npts; ++p) acc[p] += opp->c0[p] * qs[p];
                for (int m = 0; m < 3; ++m) {
                    std::vector<double> t1(opp->npts);
                    for (int p = 0; p < opp->npts; ++p) t1[p] = opp->c1[m][p] * qs[p];
                    auto tt = apply_dim(diff(M[m]).transpose(), t1, fdims, m);
                    for (int p = 0; p < opp->npts; ++p) acc[p] += tt[p] / half[m];
                }
                for (int q = 0; q < 6; ++q) {
                    int m = kPairs[q][0], n = kPairs[q][1];
                    std::vector<double> t1(opp->npts);
                    for (int p = 0; p < opp->npts; ++p) t1[p] = opp->c2[q][p] * qs[p];
                    auto t2 = apply_dim(diff(M[n]).transpose(), t1, fdims, n);
                    for (auto& v : t2) v /= half[n];
                    auto t3 = apply_dim(diff(M[m]).transpose(), t2, fdims, m);
                    for (int p = 0; p < opp->npts; ++p) acc[p] += t3[p] / half[m];
                }
                auto g = restrict_fine_to_coarse(acc, N, M);
                for (size_t i = 0; i < g.size(); ++i) gblk[0][i] += g[i];
            };
            terms.push_back(std::move(t));
        }
    }

    // jump component term: (component of trace A) - (component of trace B)
    // comp: -1 for u, else frame-derivative index
    void add_jump_term(const SideCtx& sa, const SideCtx& sb, int comp, double c0, double c1,
                       double c2) {
        Term t;
        t.category = 1;
        t.elems = {sa.e->id, sb.e->id};
        t.r1 = sa.rt1;
        t.r2 = sa.rt2;
        t.q0 = c0;
        t.q1 = c1;
        t.q2 = c2;
        const int na = lay.size[sa.e->id], nb = lay.size[sb.e->id];
        t.data.assign((size_t)(sa.rt1->order + 1) * (sa.rt2->order + 1), 0.0);
        SideCtx A = sa, B = sb;
        t.sample = [A, B, comp, na, nb](const std::vector<const double*>& blk) {
            std::vector<double> ua(blk[0], blk[0] + na), ub(blk[1], blk[1] + nb);
            FaceTrace ta = side_trace(A, ua), tb = side_trace(B, ub);
            const std::vector<double>& va = comp < 0 ? ta.u : ta.du[comp];
            const std::vector<double>& vb = comp < 0 ? tb.u : tb.du[comp];
            std::vector<double> s(va.size());
            for (size_t i = 0; i < s.size(); ++i) s[i] = va[i] - vb[i];
            return s;
        };
        t.adjoint = [A, B, comp, na, nb](const std::vector<double>& qs,
                                         const std::vector<double*>& gblk) {
            std::vector<double> neg(qs.size());
            for (size_t i = 0; i < qs.size(); ++i) neg[i] = -qs[i];
            std::array<const std::vector<double>*, 3> sdu{nullptr, nullptr, nullptr};
            std::vector<double> ga(na, 0.0), gb(nb, 0.0);
            if (comp < 0) {
                side_trace_adjoint(A, &qs, sdu, ga);
                side_trace_adjoint(B, &neg, sdu, gb);
            } else {
                sdu[comp] = &qs;
                side_trace_adjoint(A, nullptr, sdu, ga);
                sdu[comp] = &neg;
                side_trace_adjoint(B, nullptr, sdu, gb);
            }
            for (int i = 0; i < na; ++i) gblk[0][i] += ga[i];
            for (int i = 0; i < nb; ++i) gblk[1][i] += gb[i];
        };
        terms.push_back(std::move(t));
    }

    // boundary component term on one element
    void add_boundary_term(const SideCtx& sc, int comp, std::vector<double> data, double c0,
                           double c1, double c2, int category) {
        Term t;
        t.category = category;
        t.elems = {sc.e->id};
        t.r1 = sc.rt1;
        t.r2 = sc.rt2;
        t.q0 = c0;
        t.q1 = c1;
        t.q2 = c2;
        t.data = std::move(data);
        const int na = lay.size[sc.e->id];
        SideCtx A = sc;
        t.sample = [A, comp, na](const std::vector<const double*>& blk) {
            std::vector<double> ua(blk[0], blk[0] + na);
            FaceTrace ta = side_trace(A, ua);
            return comp < 0 ? ta.u : ta.du[comp];
        };
        t.adjoint = [A, comp, na](const std::vector<double>& qs,
                                  const std::vector<double*>& gblk) {
            std::array<const std::vector<double>*, 3> sdu{nullptr, nullptr, nullptr};
            std::vector<double> ga(na, 0.0);
            if (comp < 0) {
                side_trace_adjoint(A, &qs, sdu, ga);
            } else {
                sdu[comp] = &qs;
                side_trace_adjoint(A, nullptr, sdu, ga);
            }
            for (int i = 0; i < na; ++i) gblk[0][i] += ga[i];
        };
        terms.push_back(std::move(t));
    }

    // Neumann/Robin flux term: sample = sum_m beta_m du_m + betau u - data
    void add_flux_term(const SideCtx& sc, std::array<std::vector<double>, 3> beta,
                       std::vector<double> betau, std::vector<double> data, double c0,
                       double c1, double c2) {
        Term t;
        t.category = 3;
        t.elems = {sc.e->id};
        t.r1 = sc.rt1;
        t.r2 = sc.rt2;
        t.q0 = c0;
        t.q1 = c1;
        t.q2 = c2;
        t.data = std::move(data);
        const int na = lay.size[sc.e->id];
        SideCtx A = sc;
        auto bp = std::make_shared<std::array<std::vector<double>, 3>>(std::move(beta));
        auto bu = std::make_shared<std::vector<double>>(std::move(betau));
        t.sample = [A, bp, bu, na](const std::vector<const double*>& blk) {
            std::vector<double> ua(blk[0], blk[0] + na);
            FaceTrace ta = side_trace(A, ua);
            std::vector<double> s(ta.u.size(), 0.0);
            for (int m = 0; m < 3; ++m)
                for (size_t i = 0; i < s.size(); ++i) s[i] += (*bp)[m][i] * ta.du[m][i];
            for (size_t i = 0; i < s.size(); ++i) s[i] += (*bu)[i] * ta.u[i];
            return s;
        };
        t.adjoint = [A, bp, bu, na](const std::vector<double>& qs,
                                    const std::vector<double*>& gblk) {
            std::vector<double> ga(na, 0.0);
            std::vector<double> su(qs.size());
            std::array<std::vector<double>, 3> wd;
            for (size_t i = 0; i < qs.size(); ++i) su[i] = (*bu)[i] * qs[i];
            std::array<const std::vector<double>*, 3> sdu{};
            for (int m = 0; m < 3; ++m) {
                wd[m].resize(qs.size());
                for (size_t i = 0; i < qs.size(); ++i) wd[m][i] = (*bp)[m][i] * qs[i];
                sdu[m] = &wd[m];
            }
            side_trace_adjoint(A, &su, sdu, ga);
            for (int i = 0; i < na; ++i) gblk[0][i] += ga[i];
        };
        terms.push_back(std::move(t));
    }

    void build_face_terms() {
        for (const Element& A : mesh.elems) {
            for (int fa = 0; fa < 6; ++fa) {
                const FaceRecord& fr = A.faces[fa];
                if (fr.tag == FaceTag::Truncated) continue;
                if (!A.face_finite(fa)) continue;
                const int axis = fa / 2;
                std::array<int, 2> tg = face_tangents(axis);
                if (fr.tag == FaceTag::Interior) {
                    if (fr.neighbor < A.id) continue;  // visit each face once
                    const Element& B = mesh.elems[fr.neighbor];
                    if (B.frame != A.frame)
                        throw std::runtime_error(
                            "functional: inter-frame faces are not supported (meshes are "
                            "single-frame)");
                    const Element& ws = (A.kind == ElemKind::Standard) ? A : B;
                    const int wf = (A.kind == ElemKind::Standard) ? fa : fr.neighbor_face;
                    std::array<int, 2> wtg = face_tangents(wf / 2);
                    int d1 = std::max({1, 2 * A.degrees[tg[0]],
                                       2 * B.degrees[face_tangents(fr.neighbor_face / 2)[0]]});
                    int d2 = std::max({1, 2 * A.degrees[tg[1]],
                                       2 * B.degrees[face_tangents(fr.neighbor_face / 2)[1]]});
                    SideCtx sa{&A, fa, &gll(d1), &gll(d2)};
                    SideCtx sb{&B, fr.neighbor_face, &gll(d1), &gll(d2)};
                    FaceWeights w = face_weights(ws, wf);
                    FaceNormCoeffs nc = face_norm_coeffs(A.frame, wf / 2, w);
                    // In the edge frame, faces shared with a semi-infinite 1D
                    // corner element carry the squared radial factor on every
                    // jump norm (the vertex frame's sup e^chi face weight does
                    // this implicitly). At O(1) weight the irreducible mismatch
                    // against the reduced corner trace would drag the innermost
                    // layer off the solution (that layer's own residual weight
                    // vanishes near the singular set), stalling convergence at
                    // O(r_1^{1/3}); at one power of G a smaller but still
                    // N-independent distortion of that layer survives.
                    if (A.kind == ElemKind::CornerRadial1D ||
                        B.kind == ElemKind::CornerRadial1D) {
                        double rad = A.frame == Frame::Edge ? w.G * w.G : 1.0;
                        nc.jump_l2 *= rad;
                        nc.base0 *= rad;
                        nc.base1 *= rad;
                        nc.base2 *= rad;
                    }
                    double s1 = ws.half(wtg[0]), s2 = ws.half(wtg[1]);
                    add_jump_term(sa, sb, -1, nc.jump_l2 * s1 * s2, 0.0, 0.0);
                    bool corner_const = A.kind == ElemKind::CornerConstant ||
                                        B.kind == ElemKind::CornerConstant;
                    if (!corner_const)
                        for (int m = 0; m < 3; ++m) {
                            double dm = nc.deriv_mult[m];
                            add_jump_term(sa, sb, m, dm * nc.base0 * s1 * s2,
                                          dm * nc.base1 * s2, dm * nc.base2 * s1);
                        }
                    continue;
                }
                // boundary face
                if (!problem.u_ex || !problem.grad_ex)
                    throw std::runtime_error("functional: missing boundary data");
                int d1 = std::max(1, 2 * elem_degree_on(A, tg[0]));
                int d2 = std::max(1, 2 * elem_degree_on(A, tg[1]));
                SideCtx sc{&A, fa, &gll(d1), &gll(d2)};
                const int n1 = d1 + 1, n2 = d2 + 1;
                FaceWeights w = face_weights(A, fa);
                FaceNormCoeffs nc = face_norm_coeffs(A.frame, axis, w);
                double s1 = A.half(tg[0]), s2 = A.half(tg[1]);
                // face point geometry
                std::vector<std::array<double, 3>> ypts((size_t)n1 * n2);
                std::vector<Vec3> xpts((size_t)n1 * n2);
                for (int j = 0; j < n2; ++j)
                    for (int i = 0; i < n1; ++i) {
                        std::array<double, 3> y;
                        y[axis] = A.bounds[fa];
                        y[tg[0]] = A.mid(tg[0]) + A.half(tg[0]) * sc.rt1->nodes[i];
                        y[tg[1]] = A.mid(tg[1]) + A.half(tg[1]) * sc.rt2->nodes[j];
                        ypts[i + (size_t)n1 * j] = y;
                        xpts[i + (size_t)n1 * j] = frame_to_cartesian(A.frame, y);
                    }
                if (fr.tag == FaceTag::Dirichlet) {
                    std::vector<double> g0(xpts.size());
                    for (size_t i = 0; i < xpts.size(); ++i) g0[i] = problem.u_ex(xpts[i]);
                    add_boundary_term(sc, -1, g0, nc.dirichlet_l2 * s1 * s2, 0.0, 0.0, 2);
                    // tangential derivatives of g by spectral differentiation
                    for (int which = 0; which < 2; ++which) {
                        int m = tg[which];
                        std::vector<double> gd(xpts.size(), 0.0);
                        const Eigen::MatrixXd& D =
                            which == 0 ? diff(sc.rt1->order) : diff(sc.rt2->order);
                        for (int j = 0; j < n2; ++j)
                            for (int i = 0; i < n1; ++i) {
                                double v = 0.0;
                                if (which == 0)
                                    for (int i2 = 0; i2 < n1; ++i2)
                                        v += D(i, i2) * g0[i2 + (size_t)n1 * j];
                                else
                                    for (int j2 = 0; j2 < n2; ++j2)
                                        v += D(j, j2) * g0[i + (size_t)n1 * j2];
                                gd[i + (size_t)n1 * j] = v / A.half(m);
                            }
                        double dm = nc.deriv_mult[m];
                        add_boundary_term(sc, m, gd, dm * nc.base0 * s1 * s2,
                                          dm * nc.base1 * s2, dm * nc.base2 * s1, 2);
                    }
                } else {  // Neumann or Robin
                    const bool robin = (fr.tag == FaceTag::Robin);
                    const double sign = (fa % 2) ? 1.0 : -1.0;
                    std::array<std::vector<double>, 3> beta;
                    for (auto& b : beta) b.resize(xpts.size());
                    std::vector<double> betau(xpts.size(), 0.0), data(xpts.size());
                    for (size_t p = 0; p < xpts.size(); ++p) {
                        FrameDerivs fdv = frame_derivs(A.frame, ypts[p]);
                        double nn = 0.0;
                        for (int i = 0; i < 3; ++i) nn += fdv.B[axis][i] * fdv.B[axis][i];
                        nn = std::sqrt(nn);
                        Vec3 nu;
                        for (int i = 0; i < 3; ++i) nu[i] = sign * fdv.B[axis][i] / nn;
                        double om = neumann_weight(A.frame, ypts[p]);
                        for (int m = 0; m < 3; ++m) {
                            double bm = 0.0;
                            for (int i = 0; i < 3; ++i) bm += nu[i] * fdv.B[m][i];
                            beta[m][p] = om * bm;
                        }
                        Vec3 ge = problem.grad_ex(xpts[p]);
                        double h = nu[0] * ge[0] + nu[1] * ge[1] + nu[2] * ge[2];
                        if (robin) {
                            betau[p] = om;
                            h += problem.u_ex(xpts[p]);
                        }
                        data[p] = om * h;
                    }
                    add_flux_term(sc, std::move(beta), std::move(betau), std::move(data),
                                  nc.base0 * s1 * s2, nc.base1 * s2, nc.base2 * s1);
                }
            }
        }
    }

    std::vector<const double*> blocks(const std::vector<double>& U, const Term& t) const {
        std::vector<const double*> b;
        for (int id : t.elems) b.push_back(U.data() + lay.offset[id]);
        return b;
    }
    std::vector<double*> gblocks(std::vector<double>& G, const Term& t) const {
        std::vector<double*> b;
        for (int id : t.elems) b.push_back(G.data() + lay.offset[id]);
        return b;
    }
};

Assembly::Assembly(const EllipticProblem& problem, const Mesh& mesh)
    : impl_(std::make_unique<Impl>(problem, mesh)) {}
Assembly::~Assembly() = default;

const Layout& Assembly::layout() const { return impl_->lay; }
const Mesh& Assembly::mesh() const { return impl_->mesh; }

FunctionalValue Assembly::value(const std::vector<double>& U) const {
    if ((int)U.size() != impl_->lay.total)
        throw std::invalid_argument("functional: coefficient vector size mismatch");
    FunctionalValue v;
    for (const Term& t : impl_->terms) {
        auto s = t.sample(impl_->blocks(U, t));
        for (size_t i = 0; i < s.size(); ++i) s[i] -= t.data[i];
        double val = t.qvalue(s);
        switch (t.category) {
            case 0: v.pde_residual += val; break;
            case 1: v.interior_jumps += val; break;
            case 2: v.dirichlet_terms += val; break;
            default: v.neumann_terms += val; break;
        }
    }
    v.total = v.pde_residual + v.interior_jumps + v.dirichlet_terms + v.neumann_terms;
    return v;
}

std::vector<double> Assembly::residual(const std::vector<double>& U) const {
    if ((int)U.size() != impl_->lay.total)
        throw std::invalid_argument("functional: coefficient vector size mismatch");
    std::vector<double> G(impl_->lay.total, 0.0);
    for (const Term& t : impl_->terms) {
        auto s = t.sample(impl_->blocks(U, t));
        for (size_t i = 0; i < s.size(); ++i) s[i] -= t.data[i];
        auto qs = t.qapply(s);
        t.adjoint(qs, impl_->gblocks(G, t));
    }
    return G;
}

DenseNormal Assembly::dense() const {
    const int n = impl_->lay.total;
    if (n > 2000) throw std::runtime_error("dense_normal_assembly: DOF budget exceeded");
    DenseNormal dn;
    dn.X = Eigen::MatrixXd::Zero(n, n);
    dn.YG = Eigen::VectorXd::Zero(n);
    std::vector<double> zero(n, 0.0);
    for (const Term& t : impl_->terms) {
        // local index map (shared constants may repeat; columns accumulate)
        std::vector<int> gidx;
        for (int id : t.elems)
            for (int k = 0; k < impl_->lay.size[id]; ++k)
                gidx.push_back(impl_->lay.offset[id] + k);
        const int nloc = (int)gidx.size();
        auto s0 = t.sample(impl_->blocks(zero, t));  // = 0 for the linear part
        // columns of T via unit-vector forward passes
        std::vector<std::vector<double>> cols(nloc);
        std::vector<double> unit(n, 0.0);
        for (int k = 0; k < nloc; ++k) {
            unit[gidx[k]] = 1.0;
            auto sk = t.sample(impl_->blocks(unit, t));
            unit[gidx[k]] = 0.0;
            for (size_t i = 0; i < sk.size(); ++i) sk[i] -= s0[i];
            cols[k] = std::move(sk);
        }
        for (int l = 0; l < nloc; ++l) {
            auto qc = t.qapply(cols[l]);
            for (int k = 0; k < nloc; ++k) {
                double v = 0.0;
                for (size_t i = 0; i < qc.size(); ++i) v += cols[k][i] * qc[i];
                dn.X(gidx[k], gidx[l]) += v;
            }
        }
        auto qd = t.qapply(t.data);
        for (int k = 0; k < nloc; ++k) {
            double v = 0.0;
            for (size_t i = 0; i < qd.size(); ++i) v += cols[k][i] * qd[i];
            dn.YG(gidx[k]) += v;
        }
    }
    return dn;
}

FunctionalValue functional_value(const EllipticProblem& problem, const Mesh& mesh,
                                 const std::vector<double>& U) {
    return Assembly(problem, mesh).value(U);
}
std::vector<double> normal_residual(const EllipticProblem& problem, const Mesh& mesh,
                                    const std::vector<double>& U) {
    return Assembly(problem, mesh).residual(U);
}
DenseNormal dense_normal_assembly(const EllipticProblem& problem, const Mesh& mesh) {
    return Assembly(problem, mesh).dense();
}

}  // namespace hpsem
