#include "doctest.h"

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <tuple>

#include "nk/corpus.hpp"
#include "nk/surf2.hpp"

using namespace nk;
using namespace nk::surf2;
using tri3::BoundarySurface;

namespace {

int surface_vclass(const BoundarySurface& S, const tri3::Triangulation3& T, int tet, int v) {
    int m = T.vertex_class(tet, v);
    for (int i = 0; i < S.num_vertices; ++i)
        if (S.vertex_mfld_class[std::size_t(i)] == m) return i;
    REQUIRE(false);
    return -1;
}

int edge_between(const BoundarySurface& S, int vca, int vcb) {
    for (int e = 0; e < int(S.edges.size()); ++e) {
        const auto& ed = S.edges[std::size_t(e)];
        if ((ed.vclass_tail == vca && ed.vclass_head == vcb) ||
            (ed.vclass_tail == vcb && ed.vclass_head == vca))
            return e;
    }
    REQUIRE(false);
    return -1;
}

int face_with(const BoundarySurface& S, std::array<int, 3> vcs) {
    std::sort(vcs.begin(), vcs.end());
    for (int t = 0; t < int(S.triangles.size()); ++t) {
        auto c = S.triangles[std::size_t(t)].corner_class;
        std::sort(c.begin(), c.end());
        if (c == vcs) return t;
    }
    REQUIRE(false);
    return -1;
}

// Sub-edge (or marked-point index) closest to the given vertex class end.
int sub_near(const BoundarySurface& S, const Marking& M, int e, int vclass) {
    if (S.edges[std::size_t(e)].vclass_tail == vclass) return 0;
    REQUIRE(S.edges[std::size_t(e)].vclass_head == vclass);
    return M.count[std::size_t(e)];
}
int mark_near(const BoundarySurface& S, const Marking& M, int e, int vclass) {
    if (S.edges[std::size_t(e)].vclass_tail == vclass) return 0;
    REQUIRE(S.edges[std::size_t(e)].vclass_head == vclass);
    return M.count[std::size_t(e)] - 1;
}

// Sub-edge of side s adjacent to triangle corner `corner`.
int sub_at_corner(const BoundarySurface& S, const Marking& M, int t, int s, int corner) {
    int lo = s == 0 ? 1 : 0;
    bool at_ord0 = (corner == lo) == (S.triangles[std::size_t(t)].side_dir[std::size_t(s)] > 0);
    return at_ord0 ? 0 : M.count[std::size_t(S.triangles[std::size_t(t)].side_edge[std::size_t(s)])];
}

ArcType make_type(int t, int sx, int kx, int sy, int ky) {
    if (sx < sy) return {t, sx, sy, kx, ky};
    return {t, sy, sx, ky, kx};
}

ArcType corner_cut(const BoundarySurface& S, const Marking& M, int t, int corner) {
    std::array<int, 2> ss{};
    int k = 0;
    for (int s = 0; s < 3; ++s)
        if (s != corner) ss[std::size_t(k++)] = s;
    return make_type(t, ss[0], sub_at_corner(S, M, t, ss[0], corner), ss[1],
                     sub_at_corner(S, M, t, ss[1], corner));
}

CurveVector link_vector(const BoundarySurface& S, const Marking& M, const TypeTable& T, int vclass) {
    CurveVector v(std::size_t(T.size()), 0);
    for (int t = 0; t < int(S.triangles.size()); ++t)
        for (int c = 0; c < 3; ++c)
            if (S.triangles[std::size_t(t)].corner_class[std::size_t(c)] == vclass) {
                int i = T.index(corner_cut(S, M, t, c));
                REQUIRE(i >= 0);
                v[std::size_t(i)] += 1;
            }
    return v;
}

// Sphere curve separating vertex classes {p, q} from the other two; esub
// overrides the sub-edge used on specific surface edges.
CurveVector square_vector(const BoundarySurface& S, const TypeTable& T, int p, int q,
                          const std::map<int, int>& esub) {
    CurveVector v(std::size_t(T.size()), 0);
    for (int t = 0; t < int(S.triangles.size()); ++t) {
        const auto& cc = S.triangles[std::size_t(t)].corner_class;
        std::vector<int> in, out;
        for (int c = 0; c < 3; ++c) (cc[std::size_t(c)] == p || cc[std::size_t(c)] == q ? in : out).push_back(c);
        REQUIRE(!in.empty());
        REQUIRE(!out.empty());
        int cut = in.size() == 1 ? in[0] : out[0];
        std::array<int, 2> ss{};
        int k = 0;
        for (int s = 0; s < 3; ++s)
            if (s != cut) ss[std::size_t(k++)] = s;
        auto sub_of = [&](int s) {
            auto it = esub.find(S.triangles[std::size_t(t)].side_edge[std::size_t(s)]);
            return it == esub.end() ? 0 : it->second;
        };
        int i = T.index(make_type(t, ss[0], sub_of(ss[0]), ss[1], sub_of(ss[1])));
        REQUIRE(i >= 0);
        v[std::size_t(i)] += 1;
    }
    return v;
}

CurveVector add(const CurveVector& a, const CurveVector& b) {
    REQUIRE(a.size() == b.size());
    CurveVector r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}

CurveVector scale(const CurveVector& a, int k) {
    CurveVector r = a;
    for (auto& x : r) x *= k;
    return r;
}

Int total(const CurveVector& a) {
    Int t = 0;
    for (const auto& x : a) t += x;
    return t;
}

template <class F>
std::string error_code(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

bool proper_cross(const std::array<Rat, 2>& p0, const std::array<Rat, 2>& p1,
                  const std::array<Rat, 2>& q0, const std::array<Rat, 2>& q1) {
    auto d = [](const std::array<Rat, 2>& a, const std::array<Rat, 2>& b, const std::array<Rat, 2>& c) {
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    };
    return d(p0, p1, q0) * d(p0, p1, q1) < 0 && d(q0, q1, p0) * d(q0, q1, p1) < 0;
}

void check_embedded(const GeometricCurve& c) {
    for (std::size_t i = 0; i < c.pieces.size(); ++i)
        for (std::size_t j = i + 1; j < c.pieces.size(); ++j) {
            const auto& a = c.pieces[i];
            const auto& b = c.pieces[j];
            if (a.tri != b.tri) continue;
            REQUIRE(a.pts.size() == 2);
            REQUIRE(b.pts.size() == 2);
            CHECK(!proper_cross(a.pts[0], a.pts[1], b.pts[0], b.pts[1]));
        }
}

// Random closed transversal: walk across faces cell to cell until the start
// cell repeats, then keep the vector if it is self-compatible.
CurveVector random_admissible(const BoundarySurface& S, const Marking& M, const TypeTable& T,
                              std::mt19937& rng) {
    auto side_edge = [&](int t, int s) { return S.triangles[std::size_t(t)].side_edge[std::size_t(s)]; };
    for (int attempt = 0; attempt < 64; ++attempt) {
        int e = int(rng() % S.edges.size());
        int k = int(rng() % std::size_t(M.subs(e)));
        auto [t0, s0] = S.edges[std::size_t(e)].sides[rng() % 2];
        std::array<int, 3> start{t0, s0, k};
        std::array<int, 3> cur = start;
        CurveVector v(std::size_t(T.size()), 0);
        bool closed = false;
        for (int step = 0; step < 64; ++step) {
            auto [t, s, k1] = cur;
            std::vector<std::pair<int, int>> exits;
            for (int s2 = 0; s2 < 3; ++s2) {
                if (s2 == s) continue;
                for (int k2 = 0; k2 < M.subs(side_edge(t, s2)); ++k2) exits.push_back({s2, k2});
            }
            auto [s2, k2] = exits[rng() % exits.size()];
            int i = T.index(make_type(t, s, k1, s2, k2));
            REQUIRE(i >= 0);
            v[std::size_t(i)] += 1;
            int e2 = side_edge(t, s2);
            const auto& inc = S.edges[std::size_t(e2)].sides;
            auto [nt, ns] = inc[0] == std::pair{t, s2} ? inc[1] : inc[0];
            cur = {nt, ns, k2};
            if (cur == start) {
                closed = true;
                break;
            }
        }
        if (closed && is_admissible(T, v)) return v;
    }
    return CurveVector(std::size_t(T.size()), 0);
}

std::vector<CurveVector> curve_pool(const BoundarySurface& S, const Marking& M, const TypeTable& T,
                                    std::mt19937& rng, int want) {
    std::vector<CurveVector> pool;
    std::set<std::vector<Int>> seen;
    for (int i = 0; i < want * 10 && int(pool.size()) < want; ++i) {
        CurveVector v = random_admissible(S, M, T, rng);
        if (total(v) == 0) continue;
        if (seen.insert(v).second) pool.push_back(v);
    }
    return pool;
}

// All admissible vectors with exactly n arcs in total.
std::vector<CurveVector> enum_total(const TypeTable& T, int n) {
    std::vector<CurveVector> out;
    CurveVector v(std::size_t(T.size()), 0);
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == T.size()) {
            if (left == 0 && is_admissible(T, v)) out.push_back(v);
            return;
        }
        for (int c = 0; c <= left; ++c) {
            v[std::size_t(i)] = c;
            rec(i + 1, left - c);
        }
        v[std::size_t(i)] = 0;
    };
    rec(0, n);
    return out;
}

// Recomputes a crossing sign from raw geometry: direct both strands toward
// their shared side and take the frame orientation.
int sign_oracle(const BoundarySurface& S, const CurvePair& P, const PairCrossing& x) {
    const auto& A = P.a.pieces[std::size_t(x.piece_a)];
    const auto& B = P.b.pieces[std::size_t(x.piece_b)];
    auto dir_toward = [](const Piece& p, int end) {
        return std::array<Rat, 2>{p.pts[std::size_t(end)][0] - p.pts[std::size_t(1 - end)][0],
                                  p.pts[std::size_t(end)][1] - p.pts[std::size_t(1 - end)][1]};
    };
    auto da = dir_toward(A, x.a_edge_end);
    auto db = dir_toward(B, x.b_edge_end);
    Rat c = da[0] * db[1] - da[1] * db[0];
    int s = c > Rat(0) ? 1 : c < Rat(0) ? -1 : 0;
    REQUIRE(s != 0);
    return S.orientation[std::size_t(x.tri)] * s;
}

}  // namespace

TEST_CASE("surf2: type table enumerates marked arc types") {
    auto Tri = corpus::ball();
    auto S = tri3::boundary_surface(Tri);
    REQUIRE(S.triangles.size() == 4);
    REQUIRE(S.edges.size() == 6);

    Marking M0(S);
    TypeTable T0(S, M0);
    CHECK(T0.size() == 12);
    CHECK(T0.num_unmarked() == 12);
    for (int t = 0; t < 4; ++t) CHECK(T0.face_types(t).size() == 3);

    // Matching rows: one per (edge, sub-edge); two +1 and two -1 entries each
    // on a closed surface where every edge separates two distinct sides.
    CHECK(T0.matching_rows().size() == 6);
    for (int r = 0; r < 6; ++r) {
        const auto& row = T0.matching_rows()[std::size_t(r)];
        Int pos = 0, neg = 0;
        for (const auto& x : row) {
            if (x > 0) pos += x;
            if (x < 0) neg -= x;
        }
        CHECK(pos == 2);
        CHECK(neg == 2);
        auto [e, k] = T0.row_cell(r);
        CHECK(e == r);
        CHECK(k == 0);
    }

    for (int i = 0; i < T0.size(); ++i) {
        CHECK(T0.parse_id(T0.id(i)) == i);
        CHECK(T0.index(T0.type(i)) == i);
        int u = T0.unmarked_index(i);
        CHECK(u >= 0);
        CHECK(u < T0.num_unmarked());
        const auto& ty = T0.type(i);
        CHECK(u == ty.tri * 3 + (3 - ty.s1 - ty.s2));
    }
    CHECK(error_code([&] { T0.parse_id("face:0;corner:03;sub:0,0"); }) == "Domain");
    CHECK(error_code([&] { T0.parse_id("face:0;corner:01;sub:1,0"); }) == "Domain");
    CHECK(error_code([&] { T0.parse_id("gibberish"); }) == "Domain");

    // One mark on (0,1) and one on (2,3): each face sees exactly one marked
    // side, so 2 + 2 + 1 types per face.
    int v0 = surface_vclass(S, Tri, 0, 0), v1 = surface_vclass(S, Tri, 0, 1);
    int v2 = surface_vclass(S, Tri, 0, 2), v3 = surface_vclass(S, Tri, 0, 3);
    std::vector<int> counts(6, 0);
    counts[std::size_t(edge_between(S, v0, v1))] = 1;
    counts[std::size_t(edge_between(S, v2, v3))] = 1;
    Marking M1(S, counts);
    CHECK(M1.total() == 2);
    TypeTable T1(S, M1);
    CHECK(T1.size() == 20);
    for (int t = 0; t < 4; ++t) CHECK(T1.face_types(t).size() == 5);
    CHECK(T1.matching_rows().size() == 8);
    for (int i = 0; i < T1.size(); ++i) CHECK(T1.parse_id(T1.id(i)) == i);

    CHECK(error_code([&] { Marking(S, std::vector<int>(5, 0)); }) == "Domain");
    CHECK(error_code([&] { Marking(S, std::vector<int>{0, 0, -1, 0, 0, 0}); }) == "Domain");
    CHECK(M1.position(edge_between(S, v0, v1), 0) == Rat(1, 2));
}

TEST_CASE("surf2: admissibility of curve vectors") {
    auto Tri = corpus::ball();
    auto S = tri3::boundary_surface(Tri);
    Marking M(S);
    TypeTable T(S, M);

    CurveVector zero(std::size_t(T.size()), 0);
    CHECK(is_admissible(T, zero));

    CurveVector one = zero;
    one[0] = 1;
    CHECK(!is_admissible(T, one));
    CHECK(error_code([&] { check_admissible(T, one); }) == "MatchingViolation");

    CurveVector neg = zero;
    neg[0] = -1;
    CHECK(error_code([&] { check_admissible(T, neg); }) == "Domain");
    CHECK(error_code([&] { check_admissible(T, CurveVector(3, 0)); }) == "Domain");

    for (int vc = 0; vc < S.num_vertices; ++vc) {
        CurveVector link = link_vector(S, M, T, vc);
        CHECK(total(link) == 3);
        CHECK(is_admissible(T, link));
    }
    CurveVector sum = add(scale(link_vector(S, M, T, 0), 5), link_vector(S, M, T, 1));
    CHECK(is_admissible(T, sum));
}

TEST_CASE("surf2: compatibility splits marked types") {
    auto Tri = corpus::ball();
    auto S = tri3::boundary_surface(Tri);
    int v0 = surface_vclass(S, Tri, 0, 0), v1 = surface_vclass(S, Tri, 0, 1);
    std::vector<int> counts(6, 0);
    counts[std::size_t(edge_between(S, v0, v1))] = 1;
    Marking M(S, counts);
    TypeTable T(S, M);

    // A face whose marked side is sm; arcs from its two sub-edges to the two
    // other sides cross in exactly one of the two mixed sub assignments.
    int t = face_with(S, {v0, v1, surface_vclass(S, Tri, 0, 2)});
    int sm = -1;
    for (int s = 0; s < 3; ++s)
        if (M.count[std::size_t(S.triangles[std::size_t(t)].side_edge[std::size_t(s)])] == 1) sm = s;
    REQUIRE(sm >= 0);
    std::array<int, 2> others{};
    int k = 0;
    for (int s = 0; s < 3; ++s)
        if (s != sm) others[std::size_t(k++)] = s;
    int sa = others[0], sb = others[1];

    auto idx = [&](int s_from, int sub, int s_to) { return T.index(make_type(t, s_from, sub, s_to, 0)); };
    int A0 = idx(sm, 0, sa), A1 = idx(sm, 1, sa);
    int B0 = idx(sm, 0, sb), B1 = idx(sm, 1, sb);
    REQUIRE(A0 >= 0);
    REQUIRE(A1 >= 0);
    REQUIRE(B0 >= 0);
    REQUIRE(B1 >= 0);

    CHECK(T.compatible(A0, B0));  // share the sub-0 cell
    CHECK(T.compatible(A1, B1));
    CHECK(T.compatible(A0, A1));  // share the far side
    CHECK(T.compatible(B0, B1));
    CHECK(T.compatible(A0, B1) != T.compatible(A1, B0));
    CHECK(T.compatible(A0, A0));

    // Across faces always compatible.
    int t2 = (t + 1) % 4;
    CHECK(T.compatible(A0, T.face_types(t2)[0]));
}

TEST_CASE("surf2: vertex links realize as round embedded curves") {
    auto Tri = corpus::ball();
    auto S = tri3::boundary_surface(Tri);
    Marking M(S);
    TypeTable T(S, M);
    int v0 = surface_vclass(S, Tri, 0, 0), v1 = surface_vclass(S, Tri, 0, 1);
    int v2 = surface_vclass(S, Tri, 0, 2);

    CurveVector link0 = link_vector(S, M, T, v0);
    GeometricCurve c0 = curve_from_vector(S, M, T, link0);
    CHECK(c0.length == 3);
    CHECK(c0.normal);
    CHECK(c0.vec == link0);
    CHECK(c0.pieces.size() == 3);
    CHECK(c0.crossings.size() == 3);
    REQUIRE(c0.components.size() == 1);
    CHECK(c0.components[0].size() == 3);
    check_embedded(c0);
    CHECK(std::is_sorted(c0.crossings.begin(), c0.crossings.end(), [](const auto& a, const auto& b) {
        return std::tie(a.edge, a.ordinate) < std::tie(b.edge, b.ordinate);
    }));
    for (const auto& p : c0.pieces) {
        CHECK(p.normal);
        CHECK(!p.loop);
        CHECK(p.type >= 0);
    }

    // Determinism: a second realization is identical.
    GeometricCurve c0b = curve_from_vector(S, M, T, link0);
    REQUIRE(c0b.crossings.size() == c0.crossings.size());
    for (std::size_t i = 0; i < c0.crossings.size(); ++i) {
        CHECK(c0b.crossings[i].edge == c0.crossings[i].edge);
        CHECK(c0b.crossings[i].ordinate == c0.crossings[i].ordinate);
        CHECK(c0b.crossings[i].piece == c0.crossings[i].piece);
    }

    GeometricCurve empty = curve_from_vector(S, M, T, CurveVector(std::size_t(T.size()), 0));
    CHECK(empty.length == 0);
    CHECK(empty.normal);
    CHECK(empty.pieces.empty());
    CHECK(empty.components.empty());

    // 5 copies around one vertex plus 2 and 1 around others.
    CurveVector v = add(add(scale(link_vector(S, M, T, v0), 5), scale(link_vector(S, M, T, v1), 2)),
                        link_vector(S, M, T, v2));
    GeometricCurve c = curve_from_vector(S, M, T, v);
    CHECK(c.length == 24);
    CHECK(c.pieces.size() == 24);
    CHECK(c.components.size() == 8);
    check_embedded(c);
    int t012 = face_with(S, {v0, v1, v2});
    int in_face = 0;
    for (const auto& p : c.pieces)
        if (p.tri == t012) ++in_face;
    CHECK(in_face == 8);
    for (const auto& comp : c.components) {
        CurveVector cv(std::size_t(T.size()), 0);
        for (int p : comp) cv[std::size_t(c.pieces[std::size_t(p)].type)] += 1;
        CHECK(is_admissible(T, cv));
        CHECK(total(cv) == 3);
    }

    ComplexityKey k0 = complexity(S, c0);
    CHECK(k0.ell == 3);
    CHECK(total(k0.unmarked) == 3);
    ComplexityKey kz = complexity(S, empty);
    CHECK(complexity_compare(kz, k0) < 0);
    CHECK(complexity_compare(k0, k0) == 0);
    CHECK(complexity_compare(complexity(S, c), k0) > 0);
}

TEST_CASE("surf2: no short curves on the sphere, short essential curves on the torus") {
    auto ball = corpus::ball();
    auto Sb = tri3::boundary_surface(ball);
    Marking Mb(Sb);
    TypeTable Tb(Sb, Mb);
    CHECK(enum_total(Tb, 1).empty());
    CHECK(enum_total(Tb, 2).empty());
    CHECK(enum_total(Tb, 3).size() == 4);  // the four vertex links

    auto st = corpus::solid_torus();
    auto St = tri3::boundary_surface(st);
    REQUIRE(St.triangles.size() == 2);
    Marking Mt(St);
    TypeTable Tt(St, Mt);

    std::vector<CurveVector> essential;
    for (int n = 1; n <= 2; ++n)
        for (const auto& v : enum_total(Tt, n)) {
            GeometricCurve c = curve_from_vector(St, Mt, Tt, v);
            check_embedded(c);
            if (c.components.size() != 1) continue;
            if (!bounds_disk_in_surface(St, c, 0)) essential.push_back(v);
        }
    CHECK(!essential.empty());
    bool has_len2 = false;
    for (const auto& v : essential)
        if (total(v) == 2) has_len2 = true;
    CHECK(has_len2);
}

TEST_CASE("surf2: marked fundamentality is finer than unmarked") {
    auto Tri = corpus::ball();
    auto S = tri3::boundary_surface(Tri);
    int v0 = surface_vclass(S, Tri, 0, 0), v1 = surface_vclass(S, Tri, 0, 1);
    int v2 = surface_vclass(S, Tri, 0, 2), v3 = surface_vclass(S, Tri, 0, 3);
    int e01 = edge_between(S, v0, v1), e23 = edge_between(S, v2, v3);
    std::vector<int> counts(6, 0);
    counts[std::size_t(e01)] = 1;
    counts[std::size_t(e23)] = 1;
    Marking M(S, counts);
    TypeTable T(S, M);
    Marking M0(S);
    TypeTable T0(S, M0);

    // Curves crossing all eight sub-edges once: per face, split the marked
    // side's two cells between the two unmarked sides (two ways per face).
    std::vector<CurveVector> connected;
    int admissible_count = 0;
    for (int mask = 0; mask < 16; ++mask) {
        CurveVector v(std::size_t(T.size()), 0);
        for (int t = 0; t < 4; ++t) {
            int sm = -1;
            for (int s = 0; s < 3; ++s)
                if (M.count[std::size_t(S.triangles[std::size_t(t)].side_edge[std::size_t(s)])] == 1) sm = s;
            REQUIRE(sm >= 0);
            std::array<int, 2> others{};
            int k = 0;
            for (int s = 0; s < 3; ++s)
                if (s != sm) others[std::size_t(k++)] = s;
            int sa = others[0], sb = others[1];
            if (mask >> t & 1) std::swap(sa, sb);
            v[std::size_t(T.index(make_type(t, sm, 0, sa, 0)))] += 1;
            v[std::size_t(T.index(make_type(t, sm, 1, sb, 0)))] += 1;
        }
        if (!is_admissible(T, v)) continue;
        ++admissible_count;
        GeometricCurve c = curve_from_vector(S, M, T, v);
        CHECK(c.length == 8);
        check_embedded(c);
        std::set<std::pair<int, int>> cells;
        for (const auto& cr : c.crossings) cells.insert({cr.edge, cr.sub});
        CHECK(cells.size() == 8);
        if (c.components.size() == 1) connected.push_back(v);
    }
    CHECK(admissible_count > 0);
    REQUIRE(!connected.empty());
    std::sort(connected.begin(), connected.end());
    CurveVector gamma = connected.front();

    // Fundamental: no split into two nonzero admissible vectors.
    std::vector<int> support;
    for (int i = 0; i < T.size(); ++i)
        if (gamma[std::size_t(i)] > 0) {
            CHECK(gamma[std::size_t(i)] == 1);
            support.push_back(i);
        }
    REQUIRE(support.size() == 8);
    bool split_found = false;
    for (int mask = 1; mask < 255; ++mask) {
        CurveVector w(std::size_t(T.size()), 0);
        for (int b = 0; b < 8; ++b)
            if (mask >> b & 1) w[std::size_t(support[std::size_t(b)])] = 1;
        CurveVector rest = gamma;
        for (std::size_t i = 0; i < rest.size(); ++i) rest[i] -= w[i];
        if (is_admissible(T, w) && is_admissible(T, rest)) split_found = true;
    }
    CHECK(!split_found);

    // The unmarked shadow does split: it is the sum of two squares.
    CurveVector u(std::size_t(T0.size()), 0);
    for (int i : support) {
        const auto& ty = T.type(i);
        int j = T0.index(ArcType{ty.tri, ty.s1, ty.s2, 0, 0});
        REQUIRE(j >= 0);
        u[std::size_t(j)] += 1;
    }
    CHECK(is_admissible(T0, u));
    std::vector<int> usup;
    for (int i = 0; i < T0.size(); ++i)
        if (u[std::size_t(i)] > 0) usup.push_back(i);
    REQUIRE(usup.size() == 8);
    bool shadow_splits = false;
    for (int mask = 1; mask < 255 && !shadow_splits; ++mask) {
        CurveVector w(std::size_t(T0.size()), 0);
        for (int b = 0; b < 8; ++b)
            if (mask >> b & 1) w[std::size_t(usup[std::size_t(b)])] = 1;
        CurveVector rest = u;
        for (std::size_t i = 0; i < rest.size(); ++i) rest[i] -= w[i];
        if (is_admissible(T0, w) && is_admissible(T0, rest)) shadow_splits = true;
    }
    CHECK(shadow_splits);

    // Marked squares: sums are admissible exactly when the shared-edge
    // sub-edges agree; mixed choices force a crossing.
    auto sq1 = [&](int k01, int k23) {
        return square_vector(S, T, v0, v2, {{e01, k01}, {e23, k23}});
    };
    auto sq2 = [&](int k01, int k23) {
        return square_vector(S, T, v0, v3, {{e01, k01}, {e23, k23}});
    };
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            CHECK(is_admissible(T, sq1(a, b)));
            CHECK(is_admissible(T, sq2(a, b)));
        }
    for (int a1 = 0; a1 < 2; ++a1)
        for (int b1 = 0; b1 < 2; ++b1)
            for (int a2 = 0; a2 < 2; ++a2)
                for (int b2 = 0; b2 < 2; ++b2) {
                    CurveVector s = add(sq1(a1, b1), sq2(a2, b2));
                    CHECK(is_admissible(T, s) == (a1 == a2 && b1 == b2));
                    if (a1 != a2 || b1 != b2)
                        CHECK(error_code([&] { check_admissible(T, s); }) == "Incompatible");
                    else {
                        // The two separations interleave, so no disjoint pair
                        // of squares realizes this vector; its embedded
                        // realization is a single curve.
                        GeometricCurve c = curve_from_vector(S, M, T, s);
                        CHECK(c.components.size() == 1);
                        CHECK(s != gamma);
                    }
                }
}

TEST_CASE("surf2: pair placement separates curves and orders crossings") {
    std::mt19937 rng(12345);

    auto check_pair_geometry = [&](const BoundarySurface& S, const CurvePair& P, bool orientable) {
        check_embedded(P.a);
        check_embedded(P.b);
        for (const auto& x : P.crossings) {
            CHECK(x.along_a > 0);
            CHECK(x.along_a < 1);
            CHECK(x.along_b > 0);
            CHECK(x.along_b < 1);
            CHECK(x.at[0] > 0);
            CHECK(x.at[1] > 0);
            CHECK(x.at[0] + x.at[1] < 1);
            if (orientable) {
                CHECK((x.sign == 1 || x.sign == -1));
                CHECK(x.sign == sign_oracle(S, P, x));
            } else {
                CHECK(x.sign == 0);
            }
            const auto& A = P.a.pieces[std::size_t(x.piece_a)];
            const auto& B = P.b.pieces[std::size_t(x.piece_b)];
            CHECK(A.tri == x.tri);
            CHECK(B.tri == x.tri);
            // Both recorded ends sit on the smallest side the strands share.
            int shared = -1;
            for (int sd = 0; sd < 3 && shared < 0; ++sd)
                if ((A.side[0] == sd || A.side[1] == sd) && (B.side[0] == sd || B.side[1] == sd))
                    shared = sd;
            REQUIRE(shared >= 0);
            CHECK(A.side[std::size_t(x.a_edge_end)] == shared);
            CHECK(B.side[std::size_t(x.b_edge_end)] == shared);
        }
        CHECK(std::is_sorted(P.crossings.begin(), P.crossings.end(), [](const auto& x, const auto& y) {
            return std::tie(x.tri, x.piece_a, x.along_a) < std::tie(y.tri, y.piece_a, y.along_a);
        }));
        (void)S;
    };

    auto ball = corpus::ball();
    auto Sb = tri3::boundary_surface(ball);
    Marking Mb(Sb);
    TypeTable Tb(Sb, Mb);
    auto pool = curve_pool(Sb, Mb, Tb, rng, 12);
    REQUIRE(pool.size() >= 4);
    for (std::size_t i = 0; i + 1 < pool.size(); i += 2) {
        CurvePair P = place_pair(Sb, Mb, Tb, pool[i], pool[i + 1]);
        check_pair_geometry(Sb, P, true);
        // Geometric crossing counts depend on the placement order, but the
        // intersection parity does not.
        CurvePair Q = place_pair(Sb, Mb, Tb, pool[i + 1], pool[i]);
        CHECK((P.crossings.size() + Q.crossings.size()) % 2 == 0);
    }

    auto st = corpus::solid_torus();
    auto St = tri3::boundary_surface(st);
    Marking Mt(St);
    TypeTable Tt(St, Mt);
    auto tpool = curve_pool(St, Mt, Tt, rng, 12);
    REQUIRE(tpool.size() >= 4);
    for (std::size_t i = 0; i + 1 < tpool.size(); i += 2) {
        CurvePair P = place_pair(St, Mt, Tt, tpool[i], tpool[i + 1]);
        check_pair_geometry(St, P, true);
        // Doubling one curve doubles the crossing multiset.
        CurvePair P2 = place_pair(St, Mt, Tt, scale(tpool[i], 2), tpool[i + 1]);
        CHECK(P2.crossings.size() == 2 * P.crossings.size());
        CurvePair Q = place_pair(St, Mt, Tt, tpool[i + 1], tpool[i]);
        CHECK((P.crossings.size() + Q.crossings.size()) % 2 == 0);
    }

    auto skb = corpus::solid_klein_bottle();
    auto Sk = tri3::boundary_surface(skb);
    REQUIRE(Sk.orientation.empty());
    Marking Mk(Sk);
    TypeTable Tk(Sk, Mk);
    auto kpool = curve_pool(Sk, Mk, Tk, rng, 6);
    REQUIRE(kpool.size() >= 2);
    CurvePair P = place_pair(Sk, Mk, Tk, kpool[0], kpool[1]);
    check_pair_geometry(Sk, P, false);
}

TEST_CASE("surf2: regular sums add curve vectors") {
    std::mt19937 rng(777);
    struct Surf {
        tri3::Triangulation3 tri;
        std::vector<int> marks;
    };
    std::vector<tri3::Triangulation3> tris;
    tris.push_back(corpus::ball());
    tris.push_back(corpus::solid_torus());
    tris.push_back(corpus::genus2_handlebody());
    tris.push_back(corpus::thickened_torus());

    int pairs_checked = 0;
    for (const auto& tri : tris) {
        auto S = tri3::boundary_surface(tri);
        for (int marked = 0; marked < 2; ++marked) {
            std::vector<int> counts(S.edges.size(), 0);
            if (marked)
                for (std::size_t e = 0; e < counts.size(); ++e) counts[e] = int(rng() % 2);
            Marking M(S, counts);
            TypeTable T(S, M);
            auto pool = curve_pool(S, M, T, rng, 8);
            for (std::size_t i = 0; i < pool.size(); ++i)
                for (std::size_t j = i; j < pool.size(); ++j) {
                    CurveVector sum = add(pool[i], pool[j]);
                    if (!is_admissible(T, sum)) continue;
                    CurvePair P = place_pair(S, M, T, pool[i], pool[j]);
                    std::vector<Switch> sw(P.crossings.size(), Switch::regular);
                    GeometricCurve out = haken_sum(S, M, T, P, sw);
                    CHECK(out.normal);
                    CHECK(out.vec == sum);
                    CHECK(out.length == P.a.length + P.b.length);
                    ComplexityKey ka = complexity(S, P.a), kb = complexity(S, P.b), ko = complexity(S, out);
                    CHECK(ko.ell == ka.ell + kb.ell);
                    REQUIRE(ko.unmarked.size() == ka.unmarked.size());
                    for (std::size_t q = 0; q < ko.unmarked.size(); ++q)
                        CHECK(ko.unmarked[q] == ka.unmarked[q] + kb.unmarked[q]);
                    ++pairs_checked;
                }
        }
    }
    CHECK(pairs_checked >= 40);

    // Incompatible marked pair: the regular sum is still normal with the
    // right length, but its vector is not the coordinate sum.
    auto Tri = corpus::ball();
    auto S = tri3::boundary_surface(Tri);
    int v0 = surface_vclass(S, Tri, 0, 0), v1 = surface_vclass(S, Tri, 0, 1);
    int v2 = surface_vclass(S, Tri, 0, 2), v3 = surface_vclass(S, Tri, 0, 3);
    int e01 = edge_between(S, v0, v1), e23 = edge_between(S, v2, v3);
    std::vector<int> counts(6, 0);
    counts[std::size_t(e01)] = 1;
    counts[std::size_t(e23)] = 1;
    Marking M(S, counts);
    TypeTable T(S, M);
    CurveVector va = square_vector(S, T, v0, v2, {{e01, 0}, {e23, 0}});
    CurveVector vb = square_vector(S, T, v0, v3, {{e01, 1}, {e23, 1}});
    REQUIRE(is_admissible(T, va));
    REQUIRE(is_admissible(T, vb));
    REQUIRE(!is_admissible(T, add(va, vb)));
    CurvePair P = place_pair(S, M, T, va, vb);
    CHECK(P.crossings.size() >= 1);
    GeometricCurve out = haken_sum(S, M, T, P, std::vector<Switch>(P.crossings.size(), Switch::regular));
    CHECK(out.normal);
    CHECK(out.length == 8);
    CHECK(out.vec != add(va, vb));
    CHECK(is_admissible(T, out.vec));
}

TEST_CASE("surf2: irregular switches break normality") {
    auto st = corpus::solid_torus();
    auto S = tri3::boundary_surface(st);
    Marking M(S);
    TypeTable T(S, M);

    // Two essential slopes that cross; doubling gives parallel strands whose
    // crossings bound face rectangles.
    std::vector<CurveVector> slopes;
    for (int n = 1; n <= 2; ++n)
        for (const auto& v : enum_total(T, n)) {
            GeometricCurve c = curve_from_vector(S, M, T, v);
            if (c.components.size() == 1 && !bounds_disk_in_surface(S, c, 0)) slopes.push_back(v);
        }
    REQUIRE(slopes.size() >= 2);
    int best_i = -1, best_j = -1;
    std::size_t best = 1000;
    for (std::size_t i = 0; i < slopes.size(); ++i)
        for (std::size_t j = i + 1; j < slopes.size(); ++j) {
            auto P = place_pair(S, M, T, slopes[i], slopes[j]);
            if (!P.crossings.empty() && P.crossings.size() < best) {
                best = P.crossings.size();
                best_i = int(i);
                best_j = int(j);
            }
        }
    REQUIRE(best_i >= 0);
    REQUIRE(best <= 4);

    {
        // Exhaust all switch choices on the minimal crossing pair.
        CurvePair P = place_pair(S, M, T, slopes[std::size_t(best_i)], slopes[std::size_t(best_j)]);
        int k = int(P.crossings.size());
        CurveVector sum = add(slopes[std::size_t(best_i)], slopes[std::size_t(best_j)]);
        for (int mask = 0; mask < (1 << k); ++mask) {
            std::vector<Switch> sw;
            for (int b = 0; b < k; ++b)
                sw.push_back(mask >> b & 1 ? Switch::irregular : Switch::regular);
            GeometricCurve out = haken_sum(S, M, T, P, sw);
            CHECK(out.length == P.a.length + P.b.length);
            CHECK(out.normal == (mask == 0));
            if (mask == 0) {
                CHECK(out.vec == sum);
            } else {
                CHECK(out.vec == CurveVector(std::size_t(T.size()), 0));
                bool bad_piece = false;
                for (const auto& p : out.pieces)
                    if (!p.normal) bad_piece = true;
                CHECK(bad_piece);
                ComplexityKey ko = complexity(S, out);
                CHECK(ko.ell == out.length);
                CHECK(total(ko.unmarked) == 0);
                CHECK(complexity_compare(ko, complexity(S, haken_sum(S, M, T, P,
                                                                     std::vector<Switch>(std::size_t(k),
                                                                                         Switch::regular)))) < 0);
            }
        }
    }

    {
        // Doubled slopes: some switch choice pinches off a face loop.
        CurvePair P = place_pair(S, M, T, scale(slopes[std::size_t(best_i)], 2),
                                 scale(slopes[std::size_t(best_j)], 2));
        int k = int(P.crossings.size());
        REQUIRE(k >= 4);
        REQUIRE(k <= 12);
        bool loop_found = false;
        int loop_mask = -1;
        for (int mask = 0; mask < (1 << k) && !loop_found; ++mask) {
            GeometricCurve out;
            std::vector<Switch> sw;
            for (int b = 0; b < k; ++b)
                sw.push_back(mask >> b & 1 ? Switch::irregular : Switch::regular);
            out = haken_sum(S, M, T, P, sw);
            for (std::size_t p = 0; p < out.pieces.size(); ++p)
                if (out.pieces[p].loop) {
                    loop_found = true;
                    loop_mask = mask;
                }
        }
        REQUIRE(loop_found);
        std::vector<Switch> sw;
        for (int b = 0; b < k; ++b)
            sw.push_back(loop_mask >> b & 1 ? Switch::irregular : Switch::regular);
        GeometricCurve out = haken_sum(S, M, T, P, sw);
        CHECK(!out.normal);
        CHECK(out.length == P.a.length + P.b.length);
        for (std::size_t p = 0; p < out.pieces.size(); ++p)
            if (out.pieces[p].loop) {
                int comp = -1;
                for (std::size_t ci = 0; ci < out.components.size(); ++ci)
                    for (int q : out.components[ci])
                        if (q == int(p)) comp = int(ci);
                REQUIRE(comp >= 0);
                CHECK(out.components[std::size_t(comp)].size() == 1);
                CHECK(bounds_disk_in_surface(S, out, comp));
            }
    }
}

TEST_CASE("surf2: fences certify crossing counts") {
    auto Tri = corpus::ball();
    auto S = tri3::boundary_surface(Tri);
    Marking M0(S);
    TypeTable T0(S, M0);
    int v0 = surface_vclass(S, Tri, 0, 0), v1 = surface_vclass(S, Tri, 0, 1);
    int v2 = surface_vclass(S, Tri, 0, 2), v3 = surface_vclass(S, Tri, 0, 3);

    // The vertex link around 0 as a fence.
    GeometricCurve c0 = curve_from_vector(S, M0, T0, link_vector(S, M0, T0, v0));
    Marking M1 = marking_from_curve(S, c0);
    CHECK(M1.total() == 3);
    Fence f = fence_from_curve(S, c0);
    CHECK(f.rails.size() == 3);
    check_fence(S, M1, f);

    TypeTable T1(S, M1);
    int e02 = edge_between(S, v0, v2), e03 = edge_between(S, v0, v3);

    // A curve separating {2,3} hugging those vertices avoids the fence; the
    // variant pushed against vertex 0 must cross it twice.
    CurveVector away = square_vector(S, T1, v2, v3,
                                     {{e02, sub_near(S, M1, e02, v2)}, {e03, sub_near(S, M1, e03, v3)}});
    CurveVector toward = square_vector(S, T1, v2, v3,
                                       {{e02, sub_near(S, M1, e02, v0)}, {e03, sub_near(S, M1, e03, v0)}});
    REQUIRE(is_admissible(T1, away));
    REQUIRE(is_admissible(T1, toward));
    CHECK(fence_intersections(S, M1, T1, away, f) == 0);
    CHECK(fence_intersections(S, M1, T1, toward, f) == 2);
    CHECK(fence_intersections(S, M1, T1, add(away, toward), f) == 2);
    CHECK(fence_intersections(S, M1, T1, CurveVector(std::size_t(T1.size()), 0), f) == 0);

    // Parallel copies of the link slip past their own fence on either side.
    int e01 = edge_between(S, v0, v1);
    auto link_copy = [&](bool near0) {
        std::map<int, int> esub;
        for (int e : {e01, e02, e03}) esub[e] = near0 ? sub_near(S, M1, e, v0) : 1 - sub_near(S, M1, e, v0);
        CurveVector v(std::size_t(T1.size()), 0);
        for (int t = 0; t < 4; ++t)
            for (int c = 0; c < 3; ++c)
                if (S.triangles[std::size_t(t)].corner_class[std::size_t(c)] == v0) {
                    std::array<int, 2> ss{};
                    int k = 0;
                    for (int s = 0; s < 3; ++s)
                        if (s != c) ss[std::size_t(k++)] = s;
                    auto sub_of = [&](int s) {
                        auto it = esub.find(S.triangles[std::size_t(t)].side_edge[std::size_t(s)]);
                        return it == esub.end() ? 0 : it->second;
                    };
                    v[std::size_t(T1.index(make_type(t, ss[0], sub_of(ss[0]), ss[1], sub_of(ss[1]))))] += 1;
                }
        return v;
    };
    for (bool near0 : {true, false}) {
        CurveVector v = link_copy(near0);
        REQUIRE(is_admissible(T1, v));
        CHECK(fence_intersections(S, M1, T1, v, f) == 0);
    }

    // Structural fence errors.
    CHECK(error_code([&] { check_fence(S, M1, Fence{{f.rails[0]}}); }) == "Domain");
    {
        Fence bad = f;
        bad.rails[0].mark1 = 5;
        CHECK(error_code([&] { check_fence(S, M1, bad); }) == "Domain");
    }
    CHECK(error_code([&] { check_fence(S, M0, f); }) == "Domain");

    // Two squares whose separations interleave can never be drawn together:
    // every mark assignment leaves a pair of rails crossing in some face.
    {
        std::vector<int> counts(6, 0);
        counts[std::size_t(e01)] = 2;
        counts[std::size_t(edge_between(S, v2, v3))] = 2;
        counts[std::size_t(e02)] = 1;
        counts[std::size_t(e03)] = 1;
        counts[std::size_t(edge_between(S, v1, v2))] = 1;
        counts[std::size_t(edge_between(S, v1, v3))] = 1;
        Marking M2(S, counts);
        auto rails_for = [&](int p, int q, const std::map<int, int>& emark) {
            std::vector<Rail> rails;
            for (int t = 0; t < 4; ++t) {
                const auto& cc = S.triangles[std::size_t(t)].corner_class;
                std::vector<int> in, out;
                for (int c = 0; c < 3; ++c)
                    (cc[std::size_t(c)] == p || cc[std::size_t(c)] == q ? in : out).push_back(c);
                int cut = in.size() == 1 ? in[0] : out[0];
                std::array<int, 2> ss{};
                int k = 0;
                for (int s = 0; s < 3; ++s)
                    if (s != cut) ss[std::size_t(k++)] = s;
                auto mark_of = [&](int s) {
                    auto it = emark.find(S.triangles[std::size_t(t)].side_edge[std::size_t(s)]);
                    return it == emark.end() ? 0 : it->second;
                };
                rails.push_back(Rail{t, ss[0], ss[1], mark_of(ss[0]), mark_of(ss[1])});
            }
            return rails;
        };
        int e23m = edge_between(S, v2, v3);
        for (int a = 0; a < 2; ++a)
            for (int c = 0; c < 2; ++c) {
                Fence crossing;
                for (auto& r : rails_for(v0, v2, {{e01, a}, {e23m, c}})) crossing.rails.push_back(r);
                for (auto& r : rails_for(v0, v3, {{e01, 1 - a}, {e23m, 1 - c}})) crossing.rails.push_back(r);
                CHECK(error_code([&] { check_fence(S, M2, crossing); }) == "NotEmbedded");
            }
        // Disjoint separations coexist: the vertex link fence plus a far square.
        std::vector<int> counts2(6, 0);
        counts2[std::size_t(e01)] = 1;
        counts2[std::size_t(e02)] = 2;
        counts2[std::size_t(e03)] = 2;
        counts2[std::size_t(edge_between(S, v1, v2))] = 1;
        counts2[std::size_t(edge_between(S, v1, v3))] = 1;
        Marking M3(S, counts2);
        Fence both;
        {
            // link(0) through the near-0 marks
            for (int t = 0; t < 4; ++t)
                for (int c = 0; c < 3; ++c)
                    if (S.triangles[std::size_t(t)].corner_class[std::size_t(c)] == v0) {
                        std::array<int, 2> ss{};
                        int k = 0;
                        for (int s = 0; s < 3; ++s)
                            if (s != c) ss[std::size_t(k++)] = s;
                        auto mk = [&](int s) {
                            int e = S.triangles[std::size_t(t)].side_edge[std::size_t(s)];
                            return mark_near(S, M3, e, v0);
                        };
                        both.rails.push_back(Rail{t, ss[0], ss[1], mk(ss[0]), mk(ss[1])});
                    }
            int e12 = edge_between(S, v1, v2), e13 = edge_between(S, v1, v3);
            for (auto& r : rails_for(v2, v3,
                                     {{e02, mark_near(S, M3, e02, v2)},
                                      {e03, mark_near(S, M3, e03, v3)},
                                      {e12, 0},
                                      {e13, 0}}))
                both.rails.push_back(r);
        }
        check_fence(S, M3, both);
    }
}

TEST_CASE("surf2: disk bounding in the surface") {
    std::mt19937 rng(2024);

    // Every embedded closed curve on a sphere bounds on both sides.
    auto ball = corpus::ball();
    auto Sb = tri3::boundary_surface(ball);
    Marking Mb(Sb);
    TypeTable Tb(Sb, Mb);
    auto pool = curve_pool(Sb, Mb, Tb, rng, 10);
    REQUIRE(pool.size() >= 5);
    for (const auto& v : pool) {
        GeometricCurve c = curve_from_vector(Sb, Mb, Tb, v);
        for (int comp = 0; comp < int(c.components.size()); ++comp)
            CHECK(bounds_disk_in_surface(Sb, c, comp));
    }
    {
        int v0 = surface_vclass(Sb, ball, 0, 0);
        GeometricCurve c = curve_from_vector(Sb, Mb, Tb, link_vector(Sb, Mb, Tb, v0));
        CHECK(bounds_disk_in_surface(Sb, c, 0));
        CHECK(error_code([&] { bounds_disk_in_surface(Sb, c, 5); }) == "Domain");
    }

    // Marked sphere curves bound too.
    {
        int v0 = surface_vclass(Sb, ball, 0, 0), v1 = surface_vclass(Sb, ball, 0, 1);
        std::vector<int> counts(6, 0);
        counts[std::size_t(edge_between(Sb, v0, v1))] = 2;
        Marking Mm(Sb, counts);
        TypeTable Tm(Sb, Mm);
        auto mpool = curve_pool(Sb, Mm, Tm, rng, 8);
        REQUIRE(mpool.size() >= 3);
        for (const auto& v : mpool) {
            GeometricCurve c = curve_from_vector(Sb, Mm, Tm, v);
            for (int comp = 0; comp < int(c.components.size()); ++comp)
                CHECK(bounds_disk_in_surface(Sb, c, comp));
        }
    }

    // Torus: the vertex link bounds, essential slopes do not.
    auto st = corpus::solid_torus();
    auto St = tri3::boundary_surface(st);
    Marking Mt(St);
    TypeTable Tt(St, Mt);
    {
        GeometricCurve c = curve_from_vector(St, Mt, Tt, link_vector(St, Mt, Tt, 0));
        REQUIRE(c.components.size() == 1);
        CHECK(bounds_disk_in_surface(St, c, 0));
    }
    for (int n = 1; n <= 2; ++n)
        for (const auto& v : enum_total(Tt, n)) {
            GeometricCurve c = curve_from_vector(St, Mt, Tt, v);
            if (c.components.size() == 1) CHECK(!bounds_disk_in_surface(St, c, 0));
        }

    // Non-orientable surfaces work the same way.
    auto skb = corpus::solid_klein_bottle();
    auto Sk = tri3::boundary_surface(skb);
    Marking Mk(Sk);
    TypeTable Tk(Sk, Mk);
    {
        GeometricCurve c = curve_from_vector(Sk, Mk, Tk, link_vector(Sk, Mk, Tk, 0));
        REQUIRE(!c.components.empty());
        CHECK(bounds_disk_in_surface(Sk, c, 0));
    }
}
