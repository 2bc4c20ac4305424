#pragma once

#include <array>
#include <compare>
#include <string>
#include <utility>
#include <vector>

#include "nk/base.hpp"
#include "nk/surf2.hpp"
#include "nk/tri3.hpp"

namespace nk::nsurf {

using tri3::Triangulation3;

// Marked points on 3-manifold edge class e sit at ordinates (i+1)/(count[e]+1)
// along the class reference direction; they cut the edge into count[e]+1
// sub-edges.
struct Marking {
    std::vector<int> count;

    explicit Marking(const Triangulation3& T) : count(std::size_t(T.num_edges()), 0) {}
    Marking(const Triangulation3& T, std::vector<int> counts);

    int total() const;
    int subs(int e) const { return count[std::size_t(e)] + 1; }
    Rat position(int e, int i) const;
};

// Marking induced on the boundary surface: the same count, edge by edge; a
// surface edge inherits the reference direction of its manifold edge class.
surf2::Marking boundary_marking(const Triangulation3& T, const tri3::BoundarySurface& S,
                                const Marking& M);

// Pieces inside one tetrahedron. quad q separates vertex pair {0,q+1} from the
// other two vertices; oct q crosses the same four edges once each and both
// in-pair edges twice; a tube is two disjoint disks joined by an annulus
// around an arc in the tetrahedron's interior.
enum class PieceKind { tri, quad, oct, tube };

// The mate of v under quad direction q's vertex pairing.
int quad_partner(int q, int v);

// Disk pairs joinable by a tube, 25 kinds: 0..3 nested (tri v, tri v);
// 4..9 (tri u, tri v) by pair 01,02,03,12,13,23; 10+3v+q (tri v, quad q);
// 22+q parallel (quad q, quad q).
inline constexpr int kTubeKinds = 25;
struct TubeParts {
    std::array<PieceKind, 2> kind{};
    std::array<int, 2> index{};
};
const TubeParts& tube_parts(int k);

// subs list the crossing sub-edges in canonical order: ascending tetrahedron
// edge, an octagon's doubled edges with the slot nearer the low vertex first,
// a tube with its first disk's crossings then its second's. Sub-edges count
// along the manifold edge class reference direction.
struct SurfaceType {
    int tet = -1;
    PieceKind kind = PieceKind::tri;
    int index = 0;  // tri: vertex; quad/oct: direction 0..2; tube: kind 0..24
    std::vector<int> subs;
    auto operator<=>(const SurfaceType&) const = default;
};

class SurfaceTypeTable {
  public:
    // almost = true adds octagon and tube types.
    SurfaceTypeTable(const Triangulation3& T, const Marking& M, bool almost);

    int size() const { return int(types_.size()); }
    const SurfaceType& type(int i) const { return types_[std::size_t(i)]; }
    int index(const SurfaceType& t) const;  // -1 when absent
    bool exceptional(int i) const;          // octagon or tube
    const std::vector<int>& tet_types(int tet) const { return by_tet_[std::size_t(tet)]; }
    int num_tets() const { return int(by_tet_.size()); }
    bool almost() const { return almost_; }

    std::string id(int i) const;
    int parse_id(const std::string& s) const;  // throws Domain if unknown

    int num_crossings(int i) const { return int(types_[std::size_t(i)].subs.size()); }
    // Tetrahedron edge of crossing c and the vertex it hugs, -1 for single slots.
    std::pair<int, int> crossing_edge(int i, int c) const;
    // Tet-local sub-edge of crossing c, counted from the edge's low vertex, and
    // the mark count of the underlying edge class.
    int local_sub(int i, int c) const { return loc_[std::size_t(i)][std::size_t(c)]; }
    int mark_count(int i, int c) const { return marks_[std::size_t(i)][std::size_t(c)]; }

    // Disjoint same-tetrahedron representatives exist; always true across
    // distinct tetrahedra, false for two exceptional types (or one twice).
    bool compatible(int i, int j) const;

    // One row per (interior face class, cut-off corner, sub-edge pair), in the
    // face's representative chart: arc counts enter +1 from the representative
    // incidence and -1 from the other.
    const std::vector<std::vector<Int>>& matching_rows() const { return rows_; }
    struct RowKey {
        int face = -1, corner = -1;
        // Sub-edges on the corner's two facet edges, lower tetrahedron edge first.
        int sub1 = 0, sub2 = 0;
    };
    RowKey row_key(int r) const { return row_key_[std::size_t(r)]; }

  private:
    std::vector<SurfaceType> types_;
    // Tet-local sub (counted from the low vertex) and mark count per crossing.
    std::vector<std::vector<int>> loc_, marks_;
    std::vector<std::vector<int>> by_tet_;
    std::vector<std::vector<Int>> rows_;
    std::vector<RowKey> row_key_;
    bool almost_ = false;
};

using SurfaceVector = std::vector<Int>;

bool is_admissible(const SurfaceTypeTable& T, const SurfaceVector& v);
// Throws Domain on shape errors, TooManyExceptional when octagon and tube
// counts exceed one in total, QuadConflict naming a tetrahedron with two quad
// directions, MatchingViolation naming the failing row, Incompatible naming
// the clashing type pair.
void check_admissible(const SurfaceTypeTable& T, const SurfaceVector& v);

// One realized copy of a surface type in the chart with tetrahedron vertices
// (0,0,0),(1,0,0),(0,1,0),(0,0,1). Disks carry one polygon, tubes two, the
// vertices being edge crossing points in boundary-walk order.
struct PieceCopy {
    int tet = -1;
    PieceKind kind = PieceKind::tri;
    int index = 0;
    int type = -1;  // column in the type table
    int component = -1;
    std::vector<std::vector<std::array<Rat, 3>>> polys;
};

struct Component {
    std::vector<int> pieces;  // indices into NormalSurface::pieces
    long long chi = 0;
    long long weight = 0;           // edge crossings
    long long boundary_length = 0;  // boundary arc count
    bool orientable = false;
    bool closed = false;
};

struct NormalSurface {
    SurfaceVector vec;
    bool almost = false;  // carries an octagon or tube
    std::vector<PieceCopy> pieces;
    std::vector<Component> components;
    long long chi = 0, weight = 0, boundary_length = 0;
    bool orientable = false, closed = false;
    // Normal curve cut on the boundary surface, over the arc type table of
    // boundary_surface(T) with the induced marking.
    surf2::CurveVector boundary_vec;
};

// Canonical embedded realization of an admissible vector. Throws what
// check_admissible throws, plus Domain when the total weight is too large to
// lay out.
NormalSurface surface_from_vector(const Triangulation3& T, const Marking& M,
                                  const SurfaceTypeTable& Tt, const SurfaceVector& v);

// Geometric sum: the realization of a+b. At most one summand may carry an
// exceptional piece.
NormalSurface normal_sum(const Triangulation3& T, const Marking& M, const SurfaceTypeTable& Tt,
                         const SurfaceVector& a, const SurfaceVector& b);

surf2::CurveVector boundary_of(const NormalSurface& s);

// s must be connected: true when s is a copy of one vertex link, one triangle
// per corner of the vertex class and nothing else.
bool is_vertex_linking(const Triangulation3& T, const NormalSurface& s);

struct BoundaryCrossing {
    int tri = -1;           // boundary surface triangle
    std::array<Rat, 2> at;  // chart coordinates, corners at (0,0),(1,0),(0,1)
    int sign = 0;           // frame sign of (first, second) curve directions
};
struct IntersectionArc {
    // Signs are opposite at the two ends of every arc.
    BoundaryCrossing start, end;
};
struct IntersectionReport {
    long long loops = 0;
    std::vector<IntersectionArc> arcs;
};

// Intersection pattern of the joint canonical realization of two admissible
// vectors, after straightening every disk into flat triangles. Throws
// NotOrientable unless the manifold and both surfaces are orientable,
// NotTransverse when the joint position is degenerate.
IntersectionReport intersection_signs(const Triangulation3& T, const Marking& M,
                                      const SurfaceTypeTable& Tt, const SurfaceVector& a,
                                      const SurfaceVector& b);

struct EfficiencyResult {
    bool efficient = false;
    bool complete = true;   // fundamental enumeration finished within budget
    SurfaceVector witness;  // offending vector when inefficient
    std::string witness_kind;  // "disk" or "sphere"
};

// A triangulation with boundary is 0-efficient when every fundamental normal
// disk is vertex linking and no fundamental normal 2-sphere exists. Throws
// NotApplicable on closed manifolds, Domain on sphere boundary components,
// BudgetExceeded when enumeration cannot finish.
EfficiencyResult check_0_efficiency(const Triangulation3& T, const Budget& budget);

}  // namespace nk::nsurf
