#include <algorithm>
#include <map>

#include "nk/tri3.hpp"

namespace nk::tri3 {

namespace {

std::array<int, 3> facet_vertices(int f) {
    std::array<int, 3> r{};
    int n = 0;
    for (int v = 0; v < 4; ++v)
        if (v != f) r[n++] = v;
    return r;
}

// Traversal sign of side k in the boundary cycle of an oriented triangle
// [c0 c1 c2], relative to the side's low->high corner direction:
// sides (0->1),(1->2),(2->0) give +1 for sides 2,0 and -1 for side 1.
int side_traversal(int k) { return k == 1 ? -1 : 1; }

}  // namespace

long long BoundarySurface::euler_characteristic() const {
    long long chi = 0;
    for (const auto& c : components) chi += c.euler;
    return chi;
}

int BoundarySurface::vertex_degree(int vclass) const {
    int deg = 0;
    for (const auto& t : triangles)
        for (int c = 0; c < 3; ++c)
            if (t.corner_class[c] == vclass) ++deg;
    return deg;
}

BoundarySurface boundary_surface(const Triangulation3& T) {
    BoundarySurface S;
    for (int t = 0; t < T.num_tets(); ++t)
        for (int f = 0; f < 4; ++f) {
            if (!T.gluing(t, f).is_boundary()) continue;
            SurfaceTriangle tri;
            tri.tet = t;
            tri.facet = f;
            tri.vtx = facet_vertices(f);
            S.triangles.push_back(tri);
        }
    if (S.triangles.empty()) return S;

    // Each boundary 3-manifold edge class meets the boundary facets in exactly
    // two sides; those two sides form one surface edge.
    std::map<int, int> edge_of_cls;
    std::vector<int> side_count;
    for (int i = 0; i < int(S.triangles.size()); ++i) {
        auto& tri = S.triangles[std::size_t(i)];
        for (int k = 0; k < 3; ++k) {
            int a = -1, b = -1;
            for (int c = 0; c < 3; ++c) {
                if (c == k) continue;
                (a < 0 ? a : b) = tri.vtx[std::size_t(c)];
            }
            int e = edge_index(a, b);
            int cls = T.edge_class(tri.tet, e);
            auto [it, fresh] = edge_of_cls.try_emplace(cls, int(S.edges.size()));
            if (fresh) {
                SurfaceEdge se;
                se.mfld_edge = cls;
                S.edges.push_back(se);
                side_count.push_back(0);
            }
            int eid = it->second;
            require(side_count[std::size_t(eid)] < 2, "Internal",
                    "boundary edge class with more than two boundary sides");
            S.edges[std::size_t(eid)].sides[std::size_t(side_count[std::size_t(eid)]++)] = {i, k};
            tri.side_edge[std::size_t(k)] = eid;
            tri.side_dir[std::size_t(k)] = T.edge_sign(tri.tet, e);
        }
    }
    for (int c : side_count)
        require(c == 2, "Internal", "boundary edge class with a single boundary side");

    // Surface vertex classes: corners merged across the side pairings,
    // matching the ends along the reference direction of the shared edge.
    auto low_high = [](int k) {
        // Local corners of side k, increasing.
        std::array<int, 2> r{};
        int n = 0;
        for (int c = 0; c < 3; ++c)
            if (c != k) r[std::size_t(n++)] = c;
        return r;
    };
    SignedPartition corners(S.triangles.size() * 3);
    for (const auto& e : S.edges) {
        auto [t1, k1] = e.sides[0];
        auto [t2, k2] = e.sides[1];
        auto lh1 = low_high(k1), lh2 = low_high(k2);
        int d1 = S.triangles[std::size_t(t1)].side_dir[std::size_t(k1)];
        int d2 = S.triangles[std::size_t(t2)].side_dir[std::size_t(k2)];
        int tail1 = d1 > 0 ? lh1[0] : lh1[1], head1 = d1 > 0 ? lh1[1] : lh1[0];
        int tail2 = d2 > 0 ? lh2[0] : lh2[1], head2 = d2 > 0 ? lh2[1] : lh2[0];
        corners.merge(std::size_t(t1) * 3 + std::size_t(tail1), std::size_t(t2) * 3 + std::size_t(tail2), 1);
        corners.merge(std::size_t(t1) * 3 + std::size_t(head1), std::size_t(t2) * 3 + std::size_t(head2), 1);
    }
    S.num_vertices = 0;
    std::vector<int> corner_cls(S.triangles.size() * 3, -1);
    for (std::size_t i = 0; i < S.triangles.size() * 3; ++i) {
        std::size_t root = corners.find(i);
        if (corner_cls[root] < 0) {
            corner_cls[root] = S.num_vertices++;
            auto& tri = S.triangles[root / 3];
            S.vertex_mfld_class.push_back(T.vertex_class(tri.tet, tri.vtx[root % 3]));
        }
        corner_cls[i] = corner_cls[root];
    }
    for (std::size_t i = 0; i < S.triangles.size(); ++i)
        for (int c = 0; c < 3; ++c) S.triangles[i].corner_class[std::size_t(c)] = corner_cls[i * 3 + std::size_t(c)];

    // Edge endpoints along the reference direction.
    for (auto& e : S.edges) {
        auto [t1, k1] = e.sides[0];
        auto lh1 = low_high(k1);
        int d1 = S.triangles[std::size_t(t1)].side_dir[std::size_t(k1)];
        e.vclass_tail = S.triangles[std::size_t(t1)].corner_class[std::size_t(d1 > 0 ? lh1[0] : lh1[1])];
        e.vclass_head = S.triangles[std::size_t(t1)].corner_class[std::size_t(d1 > 0 ? lh1[1] : lh1[0])];
    }

    // Components and orientability: adjacent triangles must traverse their
    // shared edge in opposite directions.
    SignedPartition orient(S.triangles.size());
    bool all_orientable = true;
    for (const auto& e : S.edges) {
        auto [t1, k1] = e.sides[0];
        auto [t2, k2] = e.sides[1];
        int d1 = S.triangles[std::size_t(t1)].side_dir[std::size_t(k1)];
        int d2 = S.triangles[std::size_t(t2)].side_dir[std::size_t(k2)];
        int rel = -side_traversal(k1) * d1 * side_traversal(k2) * d2;
        if (!orient.merge(std::size_t(t1), std::size_t(t2), rel)) all_orientable = false;
    }
    std::map<std::size_t, int> comp_of_root;
    S.triangle_component.assign(S.triangles.size(), -1);
    for (std::size_t i = 0; i < S.triangles.size(); ++i) {
        std::size_t root = orient.find(i);
        auto [it, fresh] = comp_of_root.try_emplace(root, int(S.components.size()));
        if (fresh) S.components.push_back({});
        S.triangle_component[i] = it->second;
        S.components[std::size_t(it->second)].triangles.push_back(int(i));
    }

    // Per-component orientability must be re-derived (a failed merge taints
    // only its own component).
    std::vector<char> comp_bad(S.components.size(), 0);
    {
        SignedPartition o2(S.triangles.size());
        for (const auto& e : S.edges) {
            auto [t1, k1] = e.sides[0];
            auto [t2, k2] = e.sides[1];
            int d1 = S.triangles[std::size_t(t1)].side_dir[std::size_t(k1)];
            int d2 = S.triangles[std::size_t(t2)].side_dir[std::size_t(k2)];
            int rel = -side_traversal(k1) * d1 * side_traversal(k2) * d2;
            if (!o2.merge(std::size_t(t1), std::size_t(t2), rel))
                comp_bad[std::size_t(S.triangle_component[std::size_t(t1)])] = 1;
        }
    }

    for (std::size_t ci = 0; ci < S.components.size(); ++ci) {
        auto& comp = S.components[ci];
        std::vector<char> in_comp(S.triangles.size(), 0);
        for (int t : comp.triangles) in_comp[std::size_t(t)] = 1;
        long long F = (long long)comp.triangles.size();
        long long E = 0;
        for (const auto& e : S.edges)
            if (in_comp[std::size_t(e.sides[0].first)]) ++E;
        std::vector<char> vseen(std::size_t(S.num_vertices), 0);
        long long V = 0;
        for (int t : comp.triangles)
            for (int c = 0; c < 3; ++c) {
                int vc = S.triangles[std::size_t(t)].corner_class[std::size_t(c)];
                if (!vseen[std::size_t(vc)]) {
                    vseen[std::size_t(vc)] = 1;
                    ++V;
                }
            }
        comp.euler = V - E + F;
        comp.orientable = !comp_bad[ci];
        if (comp.orientable) {
            require((2 - comp.euler) % 2 == 0, "Internal", "odd Euler characteristic on orientable component");
            comp.genus = (2 - comp.euler) / 2;
        } else {
            comp.genus = 2 - comp.euler;  // cross-cap count
        }
        require(comp.genus >= 0, "Internal", "negative genus");
    }

    if (all_orientable) {
        S.orientation.assign(S.triangles.size(), 0);
        std::vector<int> comp_fix(S.components.size(), 0);
        for (std::size_t i = 0; i < S.triangles.size(); ++i) {
            S.orientation[i] = orient.sign(i);
            int c = S.triangle_component[i];
            if (!comp_fix[std::size_t(c)]) comp_fix[std::size_t(c)] = S.orientation[i];
        }
        for (std::size_t i = 0; i < S.triangles.size(); ++i)
            S.orientation[i] *= comp_fix[std::size_t(S.triangle_component[i])];
    }
    return S;
}

GenusVector genus_vector(const BoundarySurface& S) {
    GenusVector g;
    for (const auto& c : S.components) {
        require(c.orientable, "NotOrientable", "genus vector requested with a non-orientable boundary component");
        g.genera.push_back(c.genus);
    }
    std::sort(g.genera.begin(), g.genera.end(), std::greater<>());
    return g;
}

int genus_vector_compare(const GenusVector& a, const GenusVector& b) {
    std::size_t n = std::max(a.genera.size(), b.genera.size());
    for (std::size_t i = 0; i < n; ++i) {
        long long x = i < a.genera.size() ? a.genera[i] : 0;
        long long y = i < b.genera.size() ? b.genera[i] : 0;
        if (x != y) return x < y ? -1 : 1;
    }
    return 0;
}

std::string GenusVector::str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < genera.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(genera[i]);
    }
    return s + ")";
}

}  // namespace nk::tri3
