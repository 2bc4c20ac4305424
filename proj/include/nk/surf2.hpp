#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "nk/base.hpp"
#include "nk/tri3.hpp"

namespace nk::surf2 {

using tri3::BoundarySurface;

// Marked points on edge e sit at ordinates (i+1)/(count[e]+1) along the edge
// reference direction; they cut the edge into count[e]+1 sub-edges.
struct Marking {
    std::vector<int> count;

    explicit Marking(const BoundarySurface& S) : count(S.edges.size(), 0) {}
    Marking(const BoundarySurface& S, std::vector<int> counts);

    int total() const;
    int subs(int e) const { return count[std::size_t(e)] + 1; }
    Rat position(int e, int i) const;
};

// Arc type inside one triangle: endpoints on sides s1 < s2 (side s lies
// opposite corner s), within sub-edge sub1/sub2 of the underlying edges,
// both counted along their edge's reference direction.
struct ArcType {
    int tri = -1;
    int s1 = -1, s2 = -1;
    int sub1 = 0, sub2 = 0;
    auto operator<=>(const ArcType&) const = default;
};

class TypeTable {
  public:
    TypeTable(const BoundarySurface& S, const Marking& M);

    int size() const { return int(types_.size()); }
    const ArcType& type(int i) const { return types_[std::size_t(i)]; }
    int index(const ArcType& t) const;
    const std::vector<int>& face_types(int tri) const { return by_face_[std::size_t(tri)]; }

    // Disjoint representatives exist; always true across distinct faces.
    bool compatible(int i, int j) const;

    // tri*3 + cut-off corner; forgets the marking.
    int unmarked_index(int i) const;
    int num_unmarked() const { return 3 * int(by_face_.size()); }

    std::string id(int i) const;
    int parse_id(const std::string& s) const;  // throws Domain if unknown

    // One row per (edge, sub-edge): arc ends counted +1 from the edge's first
    // incidence and -1 from the second. Admissible vectors lie in the kernel.
    const std::vector<std::vector<Int>>& matching_rows() const { return rows_; }
    std::pair<int, int> row_cell(int r) const { return row_cell_[std::size_t(r)]; }

  private:
    std::vector<ArcType> types_;
    std::vector<std::vector<int>> by_face_;
    std::vector<std::array<Rat, 2>> starts_;  // walk start of each end cell
    std::vector<std::vector<Int>> rows_;
    std::vector<std::pair<int, int>> row_cell_;  // (edge, sub) per row
};

using CurveVector = std::vector<Int>;

bool is_admissible(const TypeTable& T, const CurveVector& v);
// Throws Domain on shape errors, MatchingViolation naming the failing
// (edge, sub-edge), Incompatible naming the clashing type pair.
void check_admissible(const TypeTable& T, const CurveVector& v);

struct EdgeCrossing {
    int edge = -1, sub = 0;
    Rat ordinate;
    // Piece and piece end met on each incidence, parallel to SurfaceEdge::sides.
    std::array<int, 2> piece{-1, -1};
    std::array<int, 2> piece_end{-1, -1};
};

// Maximal sub-curve inside one face. Arcs run between two edge crossings;
// loops close up without touching an edge.
struct Piece {
    int tri = -1;
    bool loop = false;
    bool normal = false;  // arc whose ends lie on two distinct sides
    int type = -1;        // arc type when normal
    std::array<int, 2> side{{-1, -1}};      // side met at each end (arcs only)
    std::array<int, 2> crossing{{-1, -1}};  // edge crossing at each end (arcs only)
    std::vector<std::array<Rat, 2>> pts;    // chart polyline; loops omit the closing point
};

struct GeometricCurve {
    std::vector<EdgeCrossing> crossings;  // sorted by (edge, ordinate)
    std::vector<Piece> pieces;
    std::vector<std::vector<int>> components;  // piece indices in traversal order
    long long length = 0;                      // total edge crossings
    bool normal = false;
    CurveVector vec;  // type counts when normal, zeros otherwise
};

GeometricCurve curve_from_vector(const BoundarySurface& S, const Marking& M, const TypeTable& T,
                                 const CurveVector& v);

// (length, unmarked arc counts), compared lexicographically; the vector is
// zero when the curve is not normal.
struct ComplexityKey {
    long long ell = 0;
    std::vector<Int> unmarked;
};
ComplexityKey complexity(const BoundarySurface& S, const GeometricCurve& c);
int complexity_compare(const ComplexityKey& a, const ComplexityKey& b);

enum class Switch { regular, irregular };

struct PairCrossing {
    int tri = -1;
    int piece_a = -1, piece_b = -1;
    std::array<Rat, 2> at;
    Rat along_a, along_b;  // chord parameters from piece end 0
    // Piece end lying on the smallest shared side, for each curve.
    int a_edge_end = -1, b_edge_end = -1;
    int sign = 0;  // +-1: frame sign of the strands directed at the shared side; 0 unorientable
};

// Both curves share edge ordinates: within every sub-edge the first curve's
// crossings precede the second's, each curve keeping its own order.
struct CurvePair {
    GeometricCurve a, b;
    std::vector<PairCrossing> crossings;  // sorted by (tri, piece_a, along_a)
};

CurvePair place_pair(const BoundarySurface& S, const Marking& M, const TypeTable& T,
                     const CurveVector& va, const CurveVector& vb);

// One switch per crossing of P, in P's crossing order. The regular switch is
// the one whose rejoined arcs avoid an abnormal arc at that crossing.
GeometricCurve haken_sum(const BoundarySurface& S, const Marking& M, const TypeTable& T,
                         const CurvePair& P, const std::vector<Switch>& switches);

// Rail: normal arc through two marked points; a fence is a closed union.
struct Rail {
    int tri = -1;
    int s1 = -1, s2 = -1;        // sides met, s1 < s2
    int mark1 = -1, mark2 = -1;  // marked-point index on each side's edge
    auto operator<=>(const Rail&) const = default;
};
struct Fence {
    std::vector<Rail> rails;
};

void check_fence(const BoundarySurface& S, const Marking& M, const Fence& f);

// One marked point per crossing of c, in ordinate order.
Marking marking_from_curve(const BoundarySurface& S, const GeometricCurve& c);
// c itself, as rails through the marks of marking_from_curve(c).
Fence fence_from_curve(const BoundarySurface& S, const GeometricCurve& c);

// Minimal crossing count between a curve with vector v and the fence;
// depends only on the arc types met by v.
Int fence_intersections(const BoundarySurface& S, const Marking& M, const TypeTable& T,
                        const CurveVector& v, const Fence& f);

// True when the given component of c bounds an embedded disk in S.
bool bounds_disk_in_surface(const BoundarySurface& S, const GeometricCurve& c, int component);

}  // namespace nk::surf2
