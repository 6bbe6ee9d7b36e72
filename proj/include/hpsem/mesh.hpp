#pragma once
// Meshes: regular brick meshes and the geometrically graded vertex / edge /
// vertex-edge neighborhood meshes in their modified coordinate frames, with
// element->master-cube maps, Jacobians, and face adjacency.

#include <array>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace hpsem {

enum class Frame { Regular, Vertex, Edge, VertexEdge };
enum class ElemKind { Standard, CornerConstant, CornerRadial1D };
enum class FaceTag { Interior, Dirichlet, Neumann, Robin, Truncated };

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

const char* frame_name(Frame f);
const char* kind_name(ElemKind k);
const char* tag_name(FaceTag t);

// Face index convention: 2*axis + side, side 0 = low bound, 1 = high bound.
struct FaceRecord {
    FaceTag tag = FaceTag::Truncated;
    int neighbor = -1;       // element id when tag == Interior
    int neighbor_face = -1;  // face index on the neighbor
};

struct Element {
    int id = -1;
    Frame frame = Frame::Regular;
    ElemKind kind = ElemKind::Standard;
    // Axis-aligned box in frame coordinates: {lo1, hi1, lo2, hi2, lo3, hi3}.
    // Corner elements may have lo = -inf in one (or two) coordinates.
    std::array<double, 6> bounds{};
    std::array<int, 3> degrees{0, 0, 0};
    std::array<FaceRecord, 6> faces{};

    double lo(int d) const { return bounds[2 * d]; }
    double hi(int d) const { return bounds[2 * d + 1]; }
    double mid(int d) const { return 0.5 * (lo(d) + hi(d)); }
    double half(int d) const { return 0.5 * (hi(d) - lo(d)); }
    bool finite() const {
        for (int d = 0; d < 3; ++d)
            if (!(lo(d) > kNegInf)) return false;
        return true;
    }
    // A face is finite when its two tangential extents and its position are.
    bool face_finite(int f) const {
        int ax = f / 2;
        if (!(bounds[f] > kNegInf)) return false;
        for (int d = 0; d < 3; ++d)
            if (d != ax && !(lo(d) > kNegInf)) return false;
        return true;
    }
};

struct Mesh {
    Frame frame = Frame::Regular;
    std::vector<Element> elems;
    int layers = 0;  // N for singular meshes
    // True when the mesh carries a shared corner constant unknown h_v
    // (vertex and vertex-edge meshes).
    bool has_corner_constant = false;
};

// Boundary assignment callback: axis (0..2), side (0 lo / 1 hi), and the
// face-center position in frame coordinates. Must return Dirichlet, Neumann
// or Robin.
using BoundaryAssign =
    std::function<FaceTag(int axis, int side, const std::array<double, 3>& center)>;
FaceTag all_dirichlet(int, int, const std::array<double, 3>&);

struct Brick {
    std::array<double, 6> bounds;  // {x_lo, x_hi, y_lo, y_hi, z_lo, z_hi}
};

// Mesh parameters for the singular-neighborhood builders.
struct MeshSpec {
    int N = 1;             // geometric layers
    double mu_v = 0.15;    // radial ratio toward the vertex
    double mu_e = 0.15;    // radial ratio toward the edge
    double mu1 = 1.0;      // degree grading factor (layers)
    double mu2 = 1.0;      // degree grading factor (vertex-edge rows)
    int W = 1;             // degree cap
    bool uniform_degree = false;  // use degree W in every layer (study mode)

    // Vertex neighborhood: (phi, theta) rectangle, radius rho_v, I_v theta panels.
    double rho_v = 1.0;
    double phi_lo = 0.0, phi_hi = 0.0;
    double theta_lo = 0.0, theta_hi = 0.0;
    int I_v = 1;

    // Edge neighborhood: radius Z, x3 range, I_e theta panels, J_e x3 panels.
    double Z = 1.0;
    double x3_lo = 0.0, x3_hi = 1.0;
    int I_e = 1, J_e = 1;

    // Vertex-edge neighborhood: cone half-angle phi_v, vertex distance rho_v
    // (delta_v = rho_v cos phi_v), I_ve theta panels.
    double phi_v = 0.0;
    int I_ve = 1;
};

Mesh build_regular_mesh(const std::vector<Brick>& bricks, int degree,
                        const BoundaryAssign& bc = all_dirichlet);
Mesh build_vertex_mesh(const MeshSpec& spec, const BoundaryAssign& bc = all_dirichlet);
Mesh build_edge_mesh(const MeshSpec& spec, const BoundaryAssign& bc = all_dirichlet);
Mesh build_vertex_edge_mesh(const MeshSpec& spec, const BoundaryAssign& bc = all_dirichlet);

// Throws std::runtime_error on broken adjacency/tagging invariants.
void validate_mesh(const Mesh& mesh);

// Coordinate maps (Eqs. 2.3 / 2.5 / 2.8 frames).
std::array<double, 3> frame_to_cartesian(Frame f, const std::array<double, 3>& y);
std::array<double, 3> cartesian_to_frame(Frame f, const std::array<double, 3>& x);

// Frame map differential data at a frame point y: Cartesian position x,
// T = dx/dy, B = dy/dx = T^{-1}, and the second derivatives
// H[r][p][q] = d^2 x_r / dy_p dy_q.
struct FrameDerivs {
    std::array<double, 3> x;
    std::array<std::array<double, 3>, 3> T;
    std::array<std::array<double, 3>, 3> B;
    std::array<std::array<std::array<double, 3>, 3>, 3> H;
};
FrameDerivs frame_derivs(Frame f, const std::array<double, 3>& y);

// Volume factor of the frame map alone: dx = frame_volume_factor(y) dy.
double frame_volume_factor(Frame f, const std::array<double, 3>& y);

// Affine master-cube map of a finite Standard element plus the composite
// Jacobian to Cartesian volume. Throws for semi-infinite corner elements.
struct ElementMap {
    Frame frame;
    std::array<double, 3> mid, half;
    std::array<double, 3> to_frame(const std::array<double, 3>& lambda) const {
        return {mid[0] + half[0] * lambda[0], mid[1] + half[1] * lambda[1],
                mid[2] + half[2] * lambda[2]};
    }
    // Full volume Jacobian of master -> Cartesian at master point lambda.
    double jacobian(const std::array<double, 3>& lambda) const;
};
ElementMap element_map(const Element& e);

// Element table (id, frame, kind, bounds, degrees, adjacency) as CSV.
std::string mesh_summary_csv(const Mesh& mesh);

// Nodal DOF bookkeeping: sum over elements of the per-element coefficient
// counts; the shared corner constant counts once.
int mesh_dof(const Mesh& mesh);

}  // namespace hpsem
