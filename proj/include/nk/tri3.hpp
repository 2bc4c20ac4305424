#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nk/base.hpp"
#include "nk/perm.hpp"

namespace nk::tri3 {

// Facet gluing target. Facet f of a tetrahedron is the face opposite vertex f.
// A gluing (t,f) -> (tet, perm) sends vertex v of t to vertex perm(v) of tet,
// and facet f onto facet perm(f).
struct Gluing {
    int tet = -1;
    Perm4 perm;

    bool is_boundary() const { return tet < 0; }
    static Gluing boundary() { return Gluing{}; }

    friend bool operator==(const Gluing&, const Gluing&) = default;
};

// Edge numbering within a tetrahedron: 0..5 = 01,02,03,12,13,23.
inline constexpr std::array<std::array<int, 2>, 6> kEdgeEnds{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

int edge_index(int a, int b);  // unordered pair, a != b

// Generalized triangulation: tetrahedra glued along facets, self-gluings of a
// tetrahedron to itself allowed, gluing a facet to itself not allowed.
// Immutable after construction; construction validates that the identification
// space is a compact 3-manifold (possibly with boundary).
class Triangulation3 {
public:
    static Triangulation3 parse(const std::string& text);
    // gluings as (t, f, t2, f2, perm); unlisted facets are boundary.
    static Triangulation3 from_gluings(int num_tets,
                                       const std::vector<std::tuple<int, int, int, int, Perm4>>& gluings);

    std::string serialize() const;

    int num_tets() const { return int(glue_.size()); }
    const Gluing& gluing(int tet, int facet) const { return glue_[tet][facet]; }

    // Skeleton classes.
    int num_vertices() const { return num_vertices_; }
    int num_edges() const { return num_edges_; }
    int num_faces() const { return num_faces_; }
    int vertex_class(int tet, int v) const { return vertex_class_[4 * tet + v]; }
    int edge_class(int tet, int e) const { return edge_class_[6 * tet + e]; }
    // +1 if tet-local direction low->high vertex agrees with the class's
    // reference direction, -1 otherwise.
    int edge_sign(int tet, int e) const { return edge_sign_[6 * tet + e]; }
    int face_class(int tet, int f) const { return face_class_[4 * tet + f]; }

    bool vertex_is_boundary(int cls) const { return vertex_boundary_[cls]; }
    bool edge_is_boundary(int cls) const { return edge_boundary_[cls]; }
    bool face_is_boundary(int cls) const { return face_boundary_[cls]; }
    // Number of tetrahedron wedges around the edge, counted with multiplicity.
    int edge_degree(int cls) const { return edge_degree_[cls]; }
    // Representative incidence (tet, e) whose low->high direction is the class
    // reference direction.
    std::pair<int, int> edge_rep(int cls) const { return edge_rep_[cls]; }
    std::pair<int, int> face_rep(int cls) const { return face_rep_[cls]; }
    std::pair<int, int> vertex_rep(int cls) const { return vertex_rep_[cls]; }

    bool closed() const { return closed_; }
    bool orientable() const { return orientable_; }
    // +-1 per tetrahedron, consistent across gluings; only when orientable.
    int orientation(int tet) const;

    int num_components() const { return num_components_; }
    int component(int tet) const { return component_[tet]; }
    // Component as a standalone triangulation; tet_map returns the original
    // tetrahedron indices in order.
    Triangulation3 component_triangulation(int comp, std::vector<int>* tet_map = nullptr) const;

    long long euler_characteristic() const {
        return num_vertices_ + num_faces_ - num_edges_ - num_tets();
    }

private:
    Triangulation3() = default;
    void finalize();

    std::vector<std::array<Gluing, 4>> glue_;
    std::vector<int> vertex_class_, edge_class_, edge_sign_, face_class_;
    std::vector<std::pair<int, int>> vertex_rep_, edge_rep_, face_rep_;
    std::vector<char> vertex_boundary_, edge_boundary_, face_boundary_;
    std::vector<int> edge_degree_;
    std::vector<int> component_;
    std::vector<int> orientation_;
    int num_vertices_ = 0, num_edges_ = 0, num_faces_ = 0, num_components_ = 0;
    bool closed_ = false, orientable_ = false;
};

Triangulation3 disjoint_union(const Triangulation3& a, const Triangulation3& b);

// Build from tetrahedra listed as 4 distinct global vertex ids each; facets
// sharing the same id triple are glued by the id-matching permutation. Each
// triple may be shared by at most two facets.
Triangulation3 from_labeled_tets(const std::vector<std::array<long long, 4>>& tets);

// Finitely generated abelian group: Z^rank + sum of Z/d with d1 | d2 | ...
struct AbelianGroup {
    int rank = 0;
    std::vector<Int> torsion;

    bool is_trivial() const { return rank == 0 && torsion.empty(); }
    std::string str() const;
    friend bool operator==(const AbelianGroup&, const AbelianGroup&) = default;
};

struct Summary {
    bool orientable = false;
    bool closed = false;
    long long euler = 0;
    std::array<AbelianGroup, 4> homology;  // H_0 .. H_3
};

Summary summarize(const Triangulation3& T);

// Smith normal form diagonal of an integer matrix (non-zero entries, each
// dividing the next). Exposed for reuse by tests and the surface code.
std::vector<Int> smith_diagonal(std::vector<std::vector<Int>> A);

// Homology of a finite chain complex given by boundary matrices d[k] mapping
// C_k -> C_{k-1}; dims[k] = rank of C_k.
std::vector<AbelianGroup> chain_homology(const std::vector<int>& dims,
                                         const std::vector<std::vector<std::vector<Int>>>& boundary);

// Triangulated closed surface extracted from the boundary facets.
// Local corners of a triangle are 0,1,2 in increasing order of the facet's
// vertex labels; side s is the side opposite corner s (joining the other two).
struct SurfaceTriangle {
    int tet = -1, facet = -1;
    std::array<int, 3> vtx{};       // tet vertex labels, increasing
    std::array<int, 3> side_edge{}; // surface edge class per side
    std::array<int, 3> side_dir{};  // +1 if side's low->high corner order agrees with edge reference
    std::array<int, 3> corner_class{};  // surface vertex class per corner
};

struct SurfaceEdge {
    int mfld_edge = -1;  // 3-manifold edge class this surface edge lies in
    // The two (triangle, side) incidences, in discovery order.
    std::array<std::pair<int, int>, 2> sides{};
    int vclass_tail = -1, vclass_head = -1;  // along the reference direction
};

struct SurfaceComponent {
    std::vector<int> triangles;
    bool orientable = false;
    long long genus = 0;  // orientable genus, or cross-cap count if non-orientable
    long long euler = 0;
};

struct BoundarySurface {
    std::vector<SurfaceTriangle> triangles;
    std::vector<SurfaceEdge> edges;
    int num_vertices = 0;
    std::vector<int> vertex_mfld_class;  // surface vertex class -> 3-manifold vertex class
    std::vector<SurfaceComponent> components;
    std::vector<int> triangle_component;
    // orientation[i] = +-1 per triangle when every component is orientable.
    std::vector<int> orientation;

    bool empty() const { return triangles.empty(); }
    long long euler_characteristic() const;
    int vertex_degree(int vclass) const;  // number of triangle corners at the vertex
};

BoundarySurface boundary_surface(const Triangulation3& T);

// Non-increasing list of boundary component genera, compared lexicographically
// after zero-padding. Requires every component orientable.
struct GenusVector {
    std::vector<long long> genera;

    std::string str() const;
    friend bool operator==(const GenusVector&, const GenusVector&) = default;
};

GenusVector genus_vector(const BoundarySurface& S);
int genus_vector_compare(const GenusVector& a, const GenusVector& b);  // -1, 0, +1

}  // namespace nk::tri3
