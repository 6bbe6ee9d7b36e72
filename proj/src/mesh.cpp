#include "hpsem/mesh.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hpsem {

const char* frame_name(Frame f) {
    switch (f) {
        case Frame::Regular: return "regular";
        case Frame::Vertex: return "vertex";
        case Frame::Edge: return "edge";
        case Frame::VertexEdge: return "vertex-edge";
    }
    return "?";
}
const char* kind_name(ElemKind k) {
    switch (k) {
        case ElemKind::Standard: return "standard";
        case ElemKind::CornerConstant: return "corner-constant";
        case ElemKind::CornerRadial1D: return "corner-radial-1d";
    }
    return "?";
}
const char* tag_name(FaceTag t) {
    switch (t) {
        case FaceTag::Interior: return "interior";
        case FaceTag::Dirichlet: return "dirichlet";
        case FaceTag::Neumann: return "neumann";
        case FaceTag::Robin: return "robin";
        case FaceTag::Truncated: return "truncated";
    }
    return "?";
}

FaceTag all_dirichlet(int, int, const std::array<double, 3>&) { return FaceTag::Dirichlet; }

namespace {

int clamp_degree(double mu, int layer, int W) {
    int d = (int)std::floor(mu * layer + 1e-12);
    if (d < 1) d = 1;
    if (d > W) d = W;
    return d;
}

void link(Mesh& m, int a, int fa, int b, int fb) {
    m.elems[a].faces[fa] = {FaceTag::Interior, b, fb};
    m.elems[b].faces[fb] = {FaceTag::Interior, a, fa};
}

std::array<double, 3> face_center(const Element& e, int f) {
    int ax = f / 2, side = f % 2;
    std::array<double, 3> c;
    for (int d = 0; d < 3; ++d) {
        if (d == ax)
            c[d] = side ? e.hi(d) : e.lo(d);
        else
            c[d] = (e.lo(d) > kNegInf) ? e.mid(d) : e.hi(d);
    }
    return c;
}

// Tag every still-unset (Truncated, neighbor-less) face through the callback,
// except semi-infinite low faces of corner elements which remain Truncated.
void assign_boundaries(Mesh& m, const BoundaryAssign& bc) {
    for (auto& e : m.elems)
        for (int f = 0; f < 6; ++f) {
            if (e.faces[f].tag != FaceTag::Truncated || e.faces[f].neighbor >= 0) continue;
            if (!(e.bounds[f] > kNegInf)) continue;  // truncated corner face
            FaceTag t = bc(f / 2, f % 2, face_center(e, f));
            if (t == FaceTag::Interior || t == FaceTag::Truncated)
                throw std::runtime_error("boundary assignment must return a boundary tag");
            e.faces[f].tag = t;
        }
}

}  // namespace

Mesh build_regular_mesh(const std::vector<Brick>& bricks, int degree,
                        const BoundaryAssign& bc) {
    if (degree < 1) throw std::invalid_argument("build_regular_mesh: degree >= 1 required");
    Mesh m;
    m.frame = Frame::Regular;
    const double tol = 1e-12;
    for (size_t i = 0; i < bricks.size(); ++i) {
        Element e;
        e.id = (int)i;
        e.frame = Frame::Regular;
        e.kind = ElemKind::Standard;
        e.bounds = bricks[i].bounds;
        for (int d = 0; d < 3; ++d)
            if (!(e.hi(d) > e.lo(d)))
                throw std::invalid_argument("build_regular_mesh: degenerate brick");
        e.degrees = {degree, degree, degree};
        m.elems.push_back(e);
    }
    auto same = [&](double a, double b) { return std::abs(a - b) <= tol; };
    auto ivl_overlap = [&](double a0, double a1, double b0, double b1) {
        return std::min(a1, b1) - std::max(a0, b0) > tol;
    };
    for (size_t a = 0; a < m.elems.size(); ++a)
        for (size_t b = a + 1; b < m.elems.size(); ++b) {
            Element& A = m.elems[a];
            Element& B = m.elems[b];
            bool vol = true;
            for (int d = 0; d < 3; ++d)
                vol = vol && ivl_overlap(A.lo(d), A.hi(d), B.lo(d), B.hi(d));
            if (vol) throw std::invalid_argument("build_regular_mesh: overlapping bricks");
            for (int ax = 0; ax < 3; ++ax) {
                int t1 = (ax + 1) % 3, t2 = (ax + 2) % 3;
                bool touch_hi = same(A.hi(ax), B.lo(ax));
                bool touch_lo = same(A.lo(ax), B.hi(ax));
                if (!touch_hi && !touch_lo) continue;
                bool o1 = ivl_overlap(A.lo(t1), A.hi(t1), B.lo(t1), B.hi(t1));
                bool o2 = ivl_overlap(A.lo(t2), A.hi(t2), B.lo(t2), B.hi(t2));
                if (!(o1 && o2)) continue;  // touching at an edge/corner only
                bool conforming = same(A.lo(t1), B.lo(t1)) && same(A.hi(t1), B.hi(t1)) &&
                                  same(A.lo(t2), B.lo(t2)) && same(A.hi(t2), B.hi(t2));
                if (!conforming)
                    throw std::invalid_argument(
                        "build_regular_mesh: non-conforming interface between bricks");
                if (touch_hi)
                    link(m, (int)a, 2 * ax + 1, (int)b, 2 * ax);
                else
                    link(m, (int)a, 2 * ax, (int)b, 2 * ax + 1);
            }
        }
    assign_boundaries(m, bc);
    validate_mesh(m);
    return m;
}

Mesh build_vertex_mesh(const MeshSpec& s, const BoundaryAssign& bc) {
    if (s.N < 1 || s.W < 1 || !(s.mu_v > 0 && s.mu_v < 1) || s.I_v < 1 ||
        !(s.phi_hi > s.phi_lo) || !(s.theta_hi > s.theta_lo) || !(s.rho_v > 0))
        throw std::invalid_argument("build_vertex_mesh: invalid spec");
    Mesh m;
    m.frame = Frame::Vertex;
    m.layers = s.N;
    m.has_corner_constant = true;
    const int N = s.N;
    std::vector<double> chi(N + 2);  // chi[k] for layer boundaries, chi[0] unused
    for (int k = 1; k <= N + 1; ++k)
        chi[k] = std::log(s.rho_v) + (N + 1 - k) * std::log(s.mu_v);
    auto theta_at = [&](int i) {
        return s.theta_lo + (s.theta_hi - s.theta_lo) * i / s.I_v;
    };
    auto idx = [&](int i, int l) { return i * (N + 1) + l; };
    for (int i = 0; i < s.I_v; ++i)
        for (int l = 0; l <= N; ++l) {
            Element e;
            e.id = idx(i, l);
            e.frame = Frame::Vertex;
            double clo = (l == 0) ? kNegInf : chi[l];
            e.bounds = {s.phi_lo, s.phi_hi, theta_at(i), theta_at(i + 1), clo, chi[l + 1]};
            if (l == 0) {
                e.kind = ElemKind::CornerConstant;
                e.degrees = {0, 0, 0};
            } else {
                e.kind = ElemKind::Standard;
                int W = s.uniform_degree ? s.W : clamp_degree(s.mu1, l, s.W);
                e.degrees = {W, W, W};
            }
            m.elems.push_back(e);
        }
    for (int i = 0; i < s.I_v; ++i)
        for (int l = 0; l <= N; ++l) {
            if (l < N) link(m, idx(i, l), 5, idx(i, l + 1), 4);
            if (i + 1 < s.I_v) link(m, idx(i, l), 3, idx(i + 1, l), 2);
        }
    assign_boundaries(m, bc);
    validate_mesh(m);
    return m;
}

Mesh build_edge_mesh(const MeshSpec& s, const BoundaryAssign& bc) {
    if (s.N < 1 || s.W < 1 || !(s.mu_e > 0 && s.mu_e < 1) || s.I_e < 1 || s.J_e < 1 ||
        !(s.theta_hi > s.theta_lo) || !(s.x3_hi > s.x3_lo) || !(s.Z > 0))
        throw std::invalid_argument("build_edge_mesh: invalid spec");
    Mesh m;
    m.frame = Frame::Edge;
    m.layers = s.N;
    const int N = s.N;
    std::vector<double> tau(N + 2);
    for (int j = 1; j <= N + 1; ++j)
        tau[j] = std::log(s.Z) + (N + 1 - j) * std::log(s.mu_e);
    auto theta_at = [&](int i) {
        return s.theta_lo + (s.theta_hi - s.theta_lo) * i / s.I_e;
    };
    auto x3_at = [&](int j) { return s.x3_lo + (s.x3_hi - s.x3_lo) * j / s.J_e; };
    auto idx = [&](int i, int j2, int l) { return (i * s.J_e + j2) * (N + 1) + l; };
    for (int i = 0; i < s.I_e; ++i)
        for (int j2 = 0; j2 < s.J_e; ++j2)
            for (int l = 0; l <= N; ++l) {
                Element e;
                e.id = idx(i, j2, l);
                e.frame = Frame::Edge;
                double tlo = (l == 0) ? kNegInf : tau[l];
                e.bounds = {tlo, tau[l + 1], theta_at(i), theta_at(i + 1),
                            x3_at(j2), x3_at(j2 + 1)};
                if (l == 0) {
                    e.kind = ElemKind::CornerRadial1D;
                    e.degrees = {0, 0, s.W};
                } else {
                    e.kind = ElemKind::Standard;
                    int Wq = s.uniform_degree ? s.W : clamp_degree(s.mu1, l, s.W);
                    e.degrees = {Wq, Wq, s.W};
                }
                m.elems.push_back(e);
            }
    for (int i = 0; i < s.I_e; ++i)
        for (int j2 = 0; j2 < s.J_e; ++j2)
            for (int l = 0; l <= N; ++l) {
                if (l < N) link(m, idx(i, j2, l), 1, idx(i, j2, l + 1), 0);
                if (i + 1 < s.I_e) link(m, idx(i, j2, l), 3, idx(i + 1, j2, l), 2);
                if (j2 + 1 < s.J_e) link(m, idx(i, j2, l), 5, idx(i, j2 + 1, l), 4);
            }
    assign_boundaries(m, bc);
    validate_mesh(m);
    return m;
}

Mesh build_vertex_edge_mesh(const MeshSpec& s, const BoundaryAssign& bc) {
    if (s.N < 1 || s.W < 1 || !(s.mu_v > 0 && s.mu_v < 1) || !(s.mu_e > 0 && s.mu_e < 1) ||
        s.I_ve < 1 || !(s.theta_hi > s.theta_lo) || !(s.phi_v > 0) || !(s.rho_v > 0))
        throw std::invalid_argument("build_vertex_edge_mesh: invalid spec");
    Mesh m;
    m.frame = Frame::VertexEdge;
    m.layers = s.N;
    m.has_corner_constant = true;
    const int N = s.N;
    const double delta_v = s.rho_v * std::cos(s.phi_v);
    std::vector<double> psi(N + 2), zeta(N + 2);
    for (int k = 1; k <= N + 1; ++k) {
        psi[k] = std::log(std::tan(s.phi_v)) + (N + 1 - k) * std::log(s.mu_e);
        zeta[k] = std::log(delta_v) + (N + 1 - k) * std::log(s.mu_v);
    }
    auto theta_at = [&](int t) {
        return s.theta_lo + (s.theta_hi - s.theta_lo) * t / s.I_ve;
    };
    auto idx = [&](int t, int k, int i) { return (t * (N + 1) + k) * (N + 1) + i; };
    for (int t = 0; t < s.I_ve; ++t)
        for (int k = 0; k <= N; ++k)
            for (int i = 0; i <= N; ++i) {
                Element e;
                e.id = idx(t, k, i);
                e.frame = Frame::VertexEdge;
                double plo = (i == 0) ? kNegInf : psi[i];
                double zlo = (k == 0) ? kNegInf : zeta[k];
                e.bounds = {plo, psi[i + 1], theta_at(t), theta_at(t + 1), zlo, zeta[k + 1]};
                if (k == 0) {
                    e.kind = ElemKind::CornerConstant;
                    e.degrees = {0, 0, 0};
                } else if (i == 0) {
                    e.kind = ElemKind::CornerRadial1D;
                    int V = s.uniform_degree ? s.W : clamp_degree(s.mu2, k, s.W);
                    e.degrees = {0, 0, V};
                } else {
                    e.kind = ElemKind::Standard;
                    int Wq = s.uniform_degree ? s.W : clamp_degree(s.mu1, i, s.W);
                    int V = s.uniform_degree ? s.W : clamp_degree(s.mu2, k, s.W);
                    e.degrees = {Wq, Wq, V};
                }
                m.elems.push_back(e);
            }
    for (int t = 0; t < s.I_ve; ++t)
        for (int k = 0; k <= N; ++k)
            for (int i = 0; i <= N; ++i) {
                if (i < N) link(m, idx(t, k, i), 1, idx(t, k, i + 1), 0);
                if (k < N) link(m, idx(t, k, i), 5, idx(t, k + 1, i), 4);
                if (t + 1 < s.I_ve) link(m, idx(t, k, i), 3, idx(t + 1, k, i), 2);
            }
    assign_boundaries(m, bc);
    validate_mesh(m);
    return m;
}

void validate_mesh(const Mesh& m) {
    for (const auto& e : m.elems) {
        if (e.id < 0 || e.id >= (int)m.elems.size() || &m.elems[e.id] != &e)
            throw std::runtime_error("validate_mesh: element ids must equal positions");
        for (int f = 0; f < 6; ++f) {
            const FaceRecord& fr = e.faces[f];
            if (fr.tag == FaceTag::Interior) {
                if (fr.neighbor < 0 || fr.neighbor >= (int)m.elems.size())
                    throw std::runtime_error("validate_mesh: bad neighbor id");
                const FaceRecord& back = m.elems[fr.neighbor].faces[fr.neighbor_face];
                if (back.tag != FaceTag::Interior || back.neighbor != e.id ||
                    back.neighbor_face != f)
                    throw std::runtime_error("validate_mesh: asymmetric adjacency");
            } else if (fr.tag == FaceTag::Truncated) {
                if (e.bounds[f] > kNegInf)
                    throw std::runtime_error("validate_mesh: dangling finite face");
            }
        }
    }
}

std::array<double, 3> frame_to_cartesian(Frame f, const std::array<double, 3>& y) {
    switch (f) {
        case Frame::Regular:
            return y;
        case Frame::Vertex: {
            double phi = y[0], th = y[1], rho = std::exp(y[2]);
            if (!(phi > 0.0 && phi < M_PI))
                throw std::domain_error("vertex frame: phi out of (0, pi)");
            return {rho * std::sin(phi) * std::cos(th), rho * std::sin(phi) * std::sin(th),
                    rho * std::cos(phi)};
        }
        case Frame::Edge: {
            double r = std::exp(y[0]), th = y[1];
            return {r * std::cos(th), r * std::sin(th), y[2]};
        }
        case Frame::VertexEdge: {
            double r = std::exp(y[2] + y[0]), th = y[1];
            return {r * std::cos(th), r * std::sin(th), std::exp(y[2])};
        }
    }
    throw std::logic_error("unreachable");
}

namespace {
double wrap_theta(double t) {
    while (t < 0.0) t += 2.0 * M_PI;
    while (t >= 2.0 * M_PI) t -= 2.0 * M_PI;
    return t;
}
}  // namespace

std::array<double, 3> cartesian_to_frame(Frame f, const std::array<double, 3>& x) {
    switch (f) {
        case Frame::Regular:
            return x;
        case Frame::Vertex: {
            double rho = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
            if (!(rho > 0.0)) throw std::domain_error("vertex frame: rho = 0");
            double phi = std::acos(x[2] / rho);
            return {phi, wrap_theta(std::atan2(x[1], x[0])), std::log(rho)};
        }
        case Frame::Edge: {
            double r = std::hypot(x[0], x[1]);
            if (!(r > 0.0)) throw std::domain_error("edge frame: r = 0");
            return {std::log(r), wrap_theta(std::atan2(x[1], x[0])), x[2]};
        }
        case Frame::VertexEdge: {
            double r = std::hypot(x[0], x[1]);
            if (!(r > 0.0) || !(x[2] > 0.0))
                throw std::domain_error("vertex-edge frame: r or x3 = 0");
            return {std::log(r) - std::log(x[2]), wrap_theta(std::atan2(x[1], x[0])),
                    std::log(x[2])};
        }
    }
    throw std::logic_error("unreachable");
}

FrameDerivs frame_derivs(Frame f, const std::array<double, 3>& y) {
    FrameDerivs d{};
    auto& T = d.T;
    auto& H = d.H;
    switch (f) {
        case Frame::Regular: {
            d.x = y;
            for (int i = 0; i < 3; ++i) T[i][i] = 1.0;
            break;
        }
        case Frame::Vertex: {
            double sp = std::sin(y[0]), cp = std::cos(y[0]);
            double st = std::sin(y[1]), ct = std::cos(y[1]);
            double r = std::exp(y[2]);
            d.x = {r * sp * ct, r * sp * st, r * cp};
            // columns: d/dphi, d/dtheta, d/dchi
            std::array<double, 3> xp = {r * cp * ct, r * cp * st, -r * sp};
            std::array<double, 3> xt = {-r * sp * st, r * sp * ct, 0.0};
            std::array<double, 3> xc = d.x;
            for (int i = 0; i < 3; ++i) {
                T[i][0] = xp[i];
                T[i][1] = xt[i];
                T[i][2] = xc[i];
            }
            std::array<double, 3> xpp = {-r * sp * ct, -r * sp * st, -r * cp};
            std::array<double, 3> xpt = {-r * cp * st, r * cp * ct, 0.0};
            std::array<double, 3> xtt = {-r * sp * ct, -r * sp * st, 0.0};
            for (int i = 0; i < 3; ++i) {
                H[i][0][0] = xpp[i];
                H[i][0][1] = H[i][1][0] = xpt[i];
                H[i][0][2] = H[i][2][0] = xp[i];
                H[i][1][1] = xtt[i];
                H[i][1][2] = H[i][2][1] = xt[i];
                H[i][2][2] = xc[i];
            }
            break;
        }
        case Frame::Edge: {
            double r = std::exp(y[0]);
            double st = std::sin(y[1]), ct = std::cos(y[1]);
            d.x = {r * ct, r * st, y[2]};
            std::array<double, 3> xr = {r * ct, r * st, 0.0};
            std::array<double, 3> xt = {-r * st, r * ct, 0.0};
            for (int i = 0; i < 3; ++i) {
                T[i][0] = xr[i];
                T[i][1] = xt[i];
                T[i][2] = (i == 2) ? 1.0 : 0.0;
            }
            for (int i = 0; i < 3; ++i) {
                H[i][0][0] = xr[i];
                H[i][0][1] = H[i][1][0] = xt[i];
                H[i][1][1] = -xr[i];
            }
            break;
        }
        case Frame::VertexEdge: {
            double u = std::exp(y[2] + y[0]);  // r = e^{zeta+psi}
            double z = std::exp(y[2]);
            double st = std::sin(y[1]), ct = std::cos(y[1]);
            d.x = {u * ct, u * st, z};
            std::array<double, 3> xpsi = {u * ct, u * st, 0.0};
            std::array<double, 3> xth = {-u * st, u * ct, 0.0};
            std::array<double, 3> xze = {u * ct, u * st, z};
            for (int i = 0; i < 3; ++i) {
                T[i][0] = xpsi[i];
                T[i][1] = xth[i];
                T[i][2] = xze[i];
            }
            for (int i = 0; i < 3; ++i) {
                H[i][0][0] = xpsi[i];
                H[i][0][1] = H[i][1][0] = xth[i];
                H[i][0][2] = H[i][2][0] = xpsi[i];
                H[i][1][1] = -xpsi[i];
                H[i][1][2] = H[i][2][1] = xth[i];
                H[i][2][2] = xze[i];
            }
            break;
        }
    }
    Eigen::Matrix3d Tm;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) Tm(i, j) = T[i][j];
    Eigen::Matrix3d Bm = Tm.inverse();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) d.B[i][j] = Bm(i, j);
    return d;
}

double frame_volume_factor(Frame f, const std::array<double, 3>& y) {
    switch (f) {
        case Frame::Regular: return 1.0;
        case Frame::Vertex: return std::exp(3.0 * y[2]) * std::sin(y[0]);
        case Frame::Edge: return std::exp(2.0 * y[0]);
        case Frame::VertexEdge: return std::exp(2.0 * y[0] + 3.0 * y[2]);
    }
    return 0.0;
}

double ElementMap::jacobian(const std::array<double, 3>& lambda) const {
    return half[0] * half[1] * half[2] * frame_volume_factor(frame, to_frame(lambda));
}

ElementMap element_map(const Element& e) {
    if (!e.finite())
        throw std::invalid_argument("element_map: semi-infinite corner element has no 3D map");
    ElementMap m;
    m.frame = e.frame;
    for (int d = 0; d < 3; ++d) {
        m.mid[d] = e.mid(d);
        m.half[d] = e.half(d);
    }
    return m;
}

std::string mesh_summary_csv(const Mesh& m) {
    std::ostringstream os;
    os << "id,frame,kind,lo1,hi1,lo2,hi2,lo3,hi3,deg1,deg2,deg3,"
          "face0,face1,face2,face3,face4,face5\n";
    os.precision(17);
    for (const auto& e : m.elems) {
        os << e.id << ',' << frame_name(e.frame) << ',' << kind_name(e.kind);
        for (int d = 0; d < 3; ++d) os << ',' << e.lo(d) << ',' << e.hi(d);
        for (int d = 0; d < 3; ++d) os << ',' << e.degrees[d];
        for (int f = 0; f < 6; ++f) {
            os << ',';
            if (e.faces[f].tag == FaceTag::Interior)
                os << "elem:" << e.faces[f].neighbor << ":face:" << e.faces[f].neighbor_face;
            else
                os << tag_name(e.faces[f].tag);
        }
        os << '\n';
    }
    return os.str();
}

int mesh_dof(const Mesh& m) {
    int dof = 0;
    bool any_const = false;
    for (const auto& e : m.elems) {
        switch (e.kind) {
            case ElemKind::Standard:
                dof += (e.degrees[0] + 1) * (e.degrees[1] + 1) * (e.degrees[2] + 1);
                break;
            case ElemKind::CornerRadial1D:
                dof += e.degrees[2] + 1;
                break;
            case ElemKind::CornerConstant:
                any_const = true;
                break;
        }
    }
    if (any_const) dof += 1;
    return dof;
}

}  // namespace hpsem
