#pragma once

// Programmatic builders for the reference triangulations used by tests and
// the registry. Every builder is deterministic; derived labels (orientability,
// homology, boundary genus) are re-checked in the test suite.

#include <string>
#include <vector>

#include "nk/tri3.hpp"

namespace nk::corpus {

// One tetrahedron, all four facets free: a 3-ball with 4 boundary triangles.
tri3::Triangulation3 ball();

// One tetrahedron, facet 2 glued to facet 3: one-vertex solid torus,
// genus-1 boundary, H1 = Z.
tri3::Triangulation3 solid_torus();

// Two tetrahedra glued facet-for-facet by the identity: S^3.
tri3::Triangulation3 s3_two_tet();

// Triangle prism with its ends glued by a reflection: the mapping torus of a
// reflected triangle, a solid Klein bottle. Non-orientable, Klein-bottle
// boundary. (No valid one-tetrahedron non-orientable gluing exists; the
// exhaustive search in the tests confirms this.)
tri3::Triangulation3 solid_klein_bottle();

// Solid torus with an extra interior vertex (1-4 subdivision of one
// tetrahedron of a two-tet solid torus): not 0-efficient.
tri3::Triangulation3 solid_torus_interior_vertex();

// Two disjoint solid tori.
tri3::Triangulation3 two_solid_tori();

// Genus-2 handlebody: two solid tori joined by a triangulated 1-handle.
tri3::Triangulation3 genus2_handlebody();

// T^2 x I with a 1-handle joining its two boundary tori: does not embed in
// S^3 (cutting the handle's cocore disk leaves scars on distinct boundary
// components).
tri3::Triangulation3 thickened_torus_plus_handle();

// T^2 x I (two boundary tori, no handle).
tri3::Triangulation3 thickened_torus();

struct NamedTriangulation {
    std::string name;
    tri3::Triangulation3 (*build)();
};

const std::vector<NamedTriangulation>& all();

}  // namespace nk::corpus
