#include <algorithm>

#include "nk/corpus.hpp"

namespace nk::corpus {

using tri3::Triangulation3;

namespace {

Perm4 perm(int a, int b, int c, int d) {
    return Perm4::from_images(std::uint8_t(a), std::uint8_t(b), std::uint8_t(c), std::uint8_t(d));
}

Perm4 transposition(int a, int b) {
    std::array<std::uint8_t, 4> img{0, 1, 2, 3};
    std::swap(img[std::size_t(a)], img[std::size_t(b)]);
    return Perm4::from_images(img[0], img[1], img[2], img[3]);
}

// The 7-vertex 14-triangle torus: triangles {i,i+1,i+3} and {i,i+2,i+3} mod 7.
std::vector<std::array<long long, 3>> seven_vertex_torus() {
    std::vector<std::array<long long, 3>> tris;
    for (long long i = 0; i < 7; ++i) {
        tris.push_back({i, (i + 1) % 7, (i + 3) % 7});
        tris.push_back({i, (i + 2) % 7, (i + 3) % 7});
    }
    return tris;
}

// Prism over an ordered triangle (u,v,w) between vertex layers bottom/top.
void add_prism(std::vector<std::array<long long, 4>>& tets, long long u0, long long v0, long long w0,
               long long u1, long long v1, long long w1) {
    tets.push_back({u0, v0, w0, w1});
    tets.push_back({u0, v0, v1, w1});
    tets.push_back({u0, u1, v1, w1});
}

std::vector<std::array<long long, 4>> thickened_torus_tets() {
    std::vector<std::array<long long, 4>> tets;
    for (auto tri : seven_vertex_torus()) {
        std::sort(tri.begin(), tri.end());
        add_prism(tets, tri[0], tri[1], tri[2], tri[0] + 7, tri[1] + 7, tri[2] + 7);
    }
    return tets;
}

}  // namespace

Triangulation3 ball() { return Triangulation3::from_gluings(1, {}); }

Triangulation3 solid_torus() {
    return Triangulation3::from_gluings(1, {{0, 2, 0, 3, perm(1, 2, 3, 0)}});
}

Triangulation3 s3_two_tet() {
    std::vector<std::tuple<int, int, int, int, Perm4>> gl;
    for (int f = 0; f < 4; ++f) gl.emplace_back(0, f, 1, f, Perm4::identity());
    return Triangulation3::from_gluings(2, gl);
}

Triangulation3 solid_klein_bottle() {
    // Prism (a0,b0,c0,a1),(b0,c0,a1,b1),(c0,a1,b1,c1); the top triangle is
    // glued back to the bottom by the reflection a->a, b->c, c->b.
    return Triangulation3::from_gluings(3, {{0, 0, 1, 3, perm(3, 0, 1, 2)},
                                            {1, 0, 2, 3, perm(3, 0, 1, 2)},
                                            {2, 0, 0, 3, perm(3, 0, 2, 1)}});
}

Triangulation3 solid_torus_interior_vertex() {
    // 1-4 subdivision of the solid torus tetrahedron: child f has the new
    // interior vertex at label f and keeps the other original labels.
    std::vector<std::tuple<int, int, int, int, Perm4>> gl;
    for (int f = 0; f < 4; ++f)
        for (int g = f + 1; g < 4; ++g) gl.emplace_back(f, g, g, f, transposition(f, g));
    gl.emplace_back(2, 2, 3, 3, perm(1, 2, 3, 0));
    return Triangulation3::from_gluings(4, gl);
}

Triangulation3 two_solid_tori() { return disjoint_union(solid_torus(), solid_torus()); }

Triangulation3 genus2_handlebody() {
    // Solid torus (0), prism 1-handle (1,2,3), solid torus (4); the prism's
    // end triangles are glued to one boundary facet of each torus.
    std::vector<std::tuple<int, int, int, int, Perm4>> gl;
    gl.emplace_back(0, 2, 0, 3, perm(1, 2, 3, 0));
    gl.emplace_back(4, 2, 4, 3, perm(1, 2, 3, 0));
    gl.emplace_back(1, 0, 2, 3, perm(3, 0, 1, 2));
    gl.emplace_back(2, 0, 3, 3, perm(3, 0, 1, 2));
    gl.emplace_back(0, 0, 1, 3, perm(3, 0, 1, 2));
    gl.emplace_back(4, 0, 3, 0, Perm4::identity());
    return Triangulation3::from_gluings(5, gl);
}

Triangulation3 thickened_torus() { return tri3::from_labeled_tets(thickened_torus_tets()); }

Triangulation3 thickened_torus_plus_handle() {
    auto tets = thickened_torus_tets();
    // Handle from bottom face {1,2,4} to top face {10,12,13}, routed through a
    // fresh middle triangle so no handle side face coincides with a product
    // face. Each half is a three-tet staircase prism; the middle vertex order
    // sets the attaching parity and is chosen to keep the result orientable.
    auto stair = [&](long long a, long long b, long long c, long long d, long long e,
                     long long f) {
        tets.push_back({a, b, c, d});
        tets.push_back({b, c, d, e});
        tets.push_back({c, d, e, f});
    };
    stair(2, 1, 4, 100, 101, 102);
    stair(100, 102, 101, 10, 13, 12);
    return tri3::from_labeled_tets(tets);
}

const std::vector<NamedTriangulation>& all() {
    static const std::vector<NamedTriangulation> entries = {
        {"ball", &ball},
        {"solid_torus", &solid_torus},
        {"s3_two_tet", &s3_two_tet},
        {"solid_klein_bottle", &solid_klein_bottle},
        {"solid_torus_interior_vertex", &solid_torus_interior_vertex},
        {"two_solid_tori", &two_solid_tori},
        {"genus2_handlebody", &genus2_handlebody},
        {"thickened_torus", &thickened_torus},
        {"thickened_torus_plus_handle", &thickened_torus_plus_handle},
    };
    return entries;
}

}  // namespace nk::corpus
