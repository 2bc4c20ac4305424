#include <algorithm>
#include <cstdint>
#include <map>
#include <tuple>
#include <utility>

#include "nk/nsurf.hpp"

namespace nk::nsurf {

using tri3::edge_index;
using tri3::kEdgeEnds;

namespace {

int sgn(const Rat& r) { return r > Rat(0) ? 1 : r < Rat(0) ? -1 : 0; }

std::array<int, 3> facet_verts(int f) {
    std::array<int, 3> r{};
    int n = 0;
    for (int v = 0; v < 4; ++v)
        if (v != f) r[std::size_t(n++)] = v;
    return r;
}

// Group 0 of quad direction q holds vertices 0 and q+1.
int group_of(int q, int v) { return (v == 0 || v == q + 1) ? 0 : 1; }

struct Cross {
    int edge = -1;
    int near = -1;  // hugged vertex on a doubled octagon edge, -1 for single slots
};

struct ElemArc {
    int facet = -1, corner = -1;
    std::array<int, 2> slot{{-1, -1}};  // crossing slots joined, walk order
};

// Unmarked elementary disk: crossing census in canonical order plus the
// boundary walk; arcs[i] joins cycle[i] to cycle[i+1].
struct Elem {
    PieceKind kind = PieceKind::tri;
    int index = 0;
    std::vector<Cross> crossings;
    std::vector<int> cycle;
    std::vector<ElemArc> arcs;
};

int slot_of(const Elem& e, int edge, int near = -1) {
    for (int c = 0; c < int(e.crossings.size()); ++c)
        if (e.crossings[std::size_t(c)].edge == edge && e.crossings[std::size_t(c)].near == near)
            return c;
    fail("Internal", "missing crossing slot");
}

struct RawArc {
    int facet = -1, corner = -1, sa = -1, sb = -1;
};

void stitch(Elem& e, const std::vector<RawArc>& raw) {
    std::vector<std::array<int, 2>> at(e.crossings.size(), {-1, -1});
    auto note = [&](int slot, int arc) {
        auto& pair = at[std::size_t(slot)];
        require(pair[1] < 0, "Internal", "crossing slot met by three arcs");
        (pair[0] < 0 ? pair[0] : pair[1]) = arc;
    };
    for (int i = 0; i < int(raw.size()); ++i) {
        note(raw[std::size_t(i)].sa, i);
        note(raw[std::size_t(i)].sb, i);
    }
    for (const auto& pair : at)
        require(pair[0] >= 0 && pair[1] >= 0, "Internal", "crossing slot met by one arc");
    int slot = 0;
    int arc = std::min(at[0][0], at[0][1]);
    for (std::size_t step = 0; step < raw.size(); ++step) {
        e.cycle.push_back(slot);
        const auto& r = raw[std::size_t(arc)];
        int next = r.sa == slot ? r.sb : r.sa;
        e.arcs.push_back({r.facet, r.corner, {slot, next}});
        slot = next;
        arc = at[std::size_t(slot)][0] == arc ? at[std::size_t(slot)][1] : at[std::size_t(slot)][0];
    }
    require(slot == 0 && e.cycle.size() == e.crossings.size(), "Internal",
            "elementary boundary walk does not close");
}

Elem make_tri(int v) {
    Elem e;
    e.kind = PieceKind::tri;
    e.index = v;
    for (int ed = 0; ed < 6; ++ed)
        if (kEdgeEnds[std::size_t(ed)][0] == v || kEdgeEnds[std::size_t(ed)][1] == v)
            e.crossings.push_back({ed, -1});
    std::vector<RawArc> raw;
    for (int f = 0; f < 4; ++f) {
        if (f == v) continue;
        std::array<int, 2> xy{};
        int n = 0;
        for (int w : facet_verts(f))
            if (w != v) xy[std::size_t(n++)] = w;
        raw.push_back({f, v, slot_of(e, edge_index(v, xy[0])), slot_of(e, edge_index(v, xy[1]))});
    }
    stitch(e, raw);
    return e;
}

Elem make_quad(int q) {
    Elem e;
    e.kind = PieceKind::quad;
    e.index = q;
    for (int ed = 0; ed < 6; ++ed)
        if (group_of(q, kEdgeEnds[std::size_t(ed)][0]) != group_of(q, kEdgeEnds[std::size_t(ed)][1]))
            e.crossings.push_back({ed, -1});
    std::vector<RawArc> raw;
    for (int f = 0; f < 4; ++f) {
        int c = quad_partner(q, f);
        std::array<int, 2> xy{};
        int n = 0;
        for (int w : facet_verts(f))
            if (w != c) xy[std::size_t(n++)] = w;
        raw.push_back({f, c, slot_of(e, edge_index(c, xy[0])), slot_of(e, edge_index(c, xy[1]))});
    }
    stitch(e, raw);
    return e;
}

Elem make_oct(int q) {
    Elem e;
    e.kind = PieceKind::oct;
    e.index = q;
    for (int ed = 0; ed < 6; ++ed) {
        auto [a, b] = kEdgeEnds[std::size_t(ed)];
        if (group_of(q, a) == group_of(q, b)) {
            e.crossings.push_back({ed, a});
            e.crossings.push_back({ed, b});
        } else {
            e.crossings.push_back({ed, -1});
        }
    }
    std::vector<RawArc> raw;
    for (int v = 0; v < 4; ++v) {
        int p = quad_partner(q, v);
        for (int f = 0; f < 4; ++f) {
            if (f == v || f == p) continue;
            int r = 6 - v - p - f;
            raw.push_back({f, v, slot_of(e, edge_index(v, p), v), slot_of(e, edge_index(v, r))});
        }
    }
    stitch(e, raw);
    return e;
}

const Elem& elem_of(PieceKind k, int index) {
    static const std::array<Elem, 10> table = [] {
        std::array<Elem, 10> t;
        for (int v = 0; v < 4; ++v) t[std::size_t(v)] = make_tri(v);
        for (int q = 0; q < 3; ++q) t[std::size_t(4 + q)] = make_quad(q);
        for (int q = 0; q < 3; ++q) t[std::size_t(7 + q)] = make_oct(q);
        return t;
    }();
    switch (k) {
        case PieceKind::tri: return table[std::size_t(index)];
        case PieceKind::quad: return table[std::size_t(4 + index)];
        case PieceKind::oct: return table[std::size_t(7 + index)];
        case PieceKind::tube: break;
    }
    fail("Internal", "a tube has no single boundary walk");
}

// Restriction of a stored type (or one tube constituent) to the geometry the
// pairwise rules consume.
struct TypeView {
    PieceKind kind = PieceKind::tri;
    int index = 0;
    const Elem* el = nullptr;
    const int* loc = nullptr;
    const int* m = nullptr;
};

int depth_from(const TypeView& t, int c, int v) {
    int e = t.el->crossings[std::size_t(c)].edge;
    return v == kEdgeEnds[std::size_t(e)][0] ? t.loc[c] : t.m[c] - t.loc[c];
}

std::vector<int> corner_depths(const TypeView& t) {
    std::vector<int> d(3);
    for (int c = 0; c < 3; ++c) d[std::size_t(c)] = depth_from(t, c, t.index);
    return d;
}

// Depth from the group-0 end on the four crossed edges, ascending edge order.
std::vector<int> side_depths(const TypeView& t) {
    std::vector<int> d;
    for (int c = 0; c < int(t.el->crossings.size()); ++c) {
        if (t.el->crossings[std::size_t(c)].near >= 0) continue;
        int e = t.el->crossings[std::size_t(c)].edge;
        auto [a, b] = kEdgeEnds[std::size_t(e)];
        d.push_back(depth_from(t, c, group_of(t.index, a) == 0 ? a : b));
    }
    return d;
}

bool cw_le(const std::vector<int>& a, const std::vector<int>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}

bool comparable(const std::vector<int>& a, const std::vector<int>& b) {
    return cw_le(a, b) || cw_le(b, a);
}

bool plain_pair_ok(const TypeView& a0, const TypeView& b0) {
    const TypeView& A = a0.kind <= b0.kind ? a0 : b0;
    const TypeView& B = a0.kind <= b0.kind ? b0 : a0;
    if (A.kind == PieceKind::tri && B.kind == PieceKind::tri) {
        if (A.index == B.index) return comparable(corner_depths(A), corner_depths(B));
        int u = A.index, v = B.index;
        int e = edge_index(u, v);
        int cu = slot_of(*A.el, e), cv = slot_of(*B.el, e);
        return depth_from(A, cu, u) + depth_from(B, cv, v) <= A.m[cu];
    }
    if (A.kind == PieceKind::tri && B.kind == PieceKind::quad) {
        int v = A.index, q = B.index;
        for (int w = 0; w < 4; ++w) {
            if (w == v || group_of(q, w) == group_of(q, v)) continue;
            int e = edge_index(v, w);
            if (depth_from(A, slot_of(*A.el, e), v) > depth_from(B, slot_of(*B.el, e), v))
                return false;
        }
        return true;
    }
    if (A.kind == PieceKind::tri && B.kind == PieceKind::oct) {
        int v = A.index, q = B.index;
        int p = quad_partner(q, v);
        for (int w = 0; w < 4; ++w) {
            if (w == v) continue;
            int e = edge_index(v, w);
            int cb = w == p ? slot_of(*B.el, e, v) : slot_of(*B.el, e);
            if (depth_from(A, slot_of(*A.el, e), v) > depth_from(B, cb, v)) return false;
        }
        return true;
    }
    // quad or oct against quad or oct: must share the direction
    if (A.index != B.index) return false;
    return comparable(side_depths(A), side_depths(B));
}

int quad_dir_of(const SurfaceType& t) {
    switch (t.kind) {
        case PieceKind::quad:
        case PieceKind::oct: return t.index;
        case PieceKind::tube: {
            const auto& parts = tube_parts(t.index);
            return parts.kind[1] == PieceKind::quad ? parts.index[1] : -1;
        }
        case PieceKind::tri: break;
    }
    return -1;
}

std::string kind_name(PieceKind k, int index) {
    switch (k) {
        case PieceKind::tri: return "tri" + std::to_string(index);
        case PieceKind::quad: return "quad" + std::to_string(index);
        case PieceKind::oct: return "oct" + std::to_string(index);
        case PieceKind::tube: return "tube" + std::to_string(index);
    }
    fail("Internal", "unknown piece kind");
}

}  // namespace

int quad_partner(int q, int v) {
    require(q >= 0 && q < 3 && v >= 0 && v < 4, "Domain", "quad direction or vertex out of range");
    if (v == 0) return q + 1;
    if (v == q + 1) return 0;
    for (int w = 1; w < 4; ++w)
        if (w != v && w != q + 1) return w;
    fail("Internal", "vertex has no quad partner");
}

const TubeParts& tube_parts(int k) {
    static const std::array<TubeParts, kTubeKinds> table = [] {
        std::array<TubeParts, kTubeKinds> t{};
        for (int v = 0; v < 4; ++v)
            t[std::size_t(v)] = {{PieceKind::tri, PieceKind::tri}, {v, v}};
        for (int p = 0; p < 6; ++p)
            t[std::size_t(4 + p)] = {{PieceKind::tri, PieceKind::tri},
                                     {kEdgeEnds[std::size_t(p)][0], kEdgeEnds[std::size_t(p)][1]}};
        for (int v = 0; v < 4; ++v)
            for (int q = 0; q < 3; ++q)
                t[std::size_t(10 + 3 * v + q)] = {{PieceKind::tri, PieceKind::quad}, {v, q}};
        for (int q = 0; q < 3; ++q)
            t[std::size_t(22 + q)] = {{PieceKind::quad, PieceKind::quad}, {q, q}};
        return t;
    }();
    require(k >= 0 && k < kTubeKinds, "Domain", "tube kind out of range");
    return table[std::size_t(k)];
}

Marking::Marking(const Triangulation3& T, std::vector<int> counts) : count(std::move(counts)) {
    require(int(count.size()) == T.num_edges(), "Domain", "marking does not fit the triangulation");
    for (int c : count) require(c >= 0, "Domain", "negative mark count");
}

int Marking::total() const {
    int s = 0;
    for (int c : count) s += c;
    return s;
}

Rat Marking::position(int e, int i) const {
    require(e >= 0 && e < int(count.size()), "Domain", "marking edge out of range");
    require(i >= 0 && i < count[std::size_t(e)], "Domain", "marked point index out of range");
    return Rat(i + 1, count[std::size_t(e)] + 1);
}

surf2::Marking boundary_marking(const Triangulation3& T, const tri3::BoundarySurface& S,
                                const Marking& M) {
    require(int(M.count.size()) == T.num_edges(), "Domain", "marking does not fit the triangulation");
    std::vector<int> counts(S.edges.size(), 0);
    for (std::size_t i = 0; i < S.edges.size(); ++i)
        counts[i] = M.count[std::size_t(S.edges[i].mfld_edge)];
    return surf2::Marking(S, std::move(counts));
}

SurfaceTypeTable::SurfaceTypeTable(const Triangulation3& T, const Marking& M, bool almost)
    : almost_(almost) {
    require(int(M.count.size()) == T.num_edges(), "Domain", "marking does not fit the triangulation");
    int nt = T.num_tets();
    by_tet_.resize(std::size_t(nt));

    for (int t = 0; t < nt; ++t) {
        auto gen = [&](PieceKind kind, int index, const std::vector<Cross>& cr, auto&& valid) {
            int n = int(cr.size());
            std::vector<int> mk(std::size_t(n), 0), sg(std::size_t(n), 0);
            for (int c = 0; c < n; ++c) {
                mk[std::size_t(c)] = M.count[std::size_t(T.edge_class(t, cr[std::size_t(c)].edge))];
                sg[std::size_t(c)] = T.edge_sign(t, cr[std::size_t(c)].edge);
            }
            std::vector<int> sub(std::size_t(n), 0), loc(std::size_t(n), 0);
            while (true) {
                for (int c = 0; c < n; ++c)
                    loc[std::size_t(c)] = sg[std::size_t(c)] > 0 ? sub[std::size_t(c)]
                                                                 : mk[std::size_t(c)] - sub[std::size_t(c)];
                if (valid(loc, mk)) {
                    by_tet_[std::size_t(t)].push_back(int(types_.size()));
                    types_.push_back({t, kind, index, sub});
                    loc_.push_back(loc);
                    marks_.push_back(mk);
                }
                int c = n - 1;
                while (c >= 0 && sub[std::size_t(c)] == mk[std::size_t(c)]) {
                    sub[std::size_t(c)] = 0;
                    --c;
                }
                if (c < 0) break;
                ++sub[std::size_t(c)];
            }
        };
        auto always = [](const std::vector<int>&, const std::vector<int>&) { return true; };
        for (int v = 0; v < 4; ++v) gen(PieceKind::tri, v, elem_of(PieceKind::tri, v).crossings, always);
        for (int q = 0; q < 3; ++q) gen(PieceKind::quad, q, elem_of(PieceKind::quad, q).crossings, always);
        if (almost) {
            for (int q = 0; q < 3; ++q) {
                const Elem& el = elem_of(PieceKind::oct, q);
                // The slot nearer the low vertex may not pass the one nearer the high.
                gen(PieceKind::oct, q, el.crossings,
                    [&](const std::vector<int>& loc, const std::vector<int>&) {
                        for (std::size_t c = 0; c + 1 < el.crossings.size(); ++c)
                            if (el.crossings[c].near >= 0 && el.crossings[c + 1].near >= 0 &&
                                el.crossings[c].edge == el.crossings[c + 1].edge && loc[c] > loc[c + 1])
                                return false;
                        return true;
                    });
            }
            for (int k = 0; k < kTubeKinds; ++k) {
                const auto& parts = tube_parts(k);
                const Elem& e0 = elem_of(parts.kind[0], parts.index[0]);
                const Elem& e1 = elem_of(parts.kind[1], parts.index[1]);
                int off = int(e0.crossings.size());
                std::vector<Cross> cr = e0.crossings;
                cr.insert(cr.end(), e1.crossings.begin(), e1.crossings.end());
                // The two disks must leave room for a disjoint tube between them.
                auto valid = [&](const std::vector<int>& loc, const std::vector<int>& mk) {
                    auto d0 = [&](int c, int v) {
                        int e = e0.crossings[std::size_t(c)].edge;
                        return v == kEdgeEnds[std::size_t(e)][0] ? loc[std::size_t(c)]
                                                                 : mk[std::size_t(c)] - loc[std::size_t(c)];
                    };
                    auto d1 = [&](int c, int v) {
                        int e = e1.crossings[std::size_t(c)].edge;
                        return v == kEdgeEnds[std::size_t(e)][0]
                                   ? loc[std::size_t(off + c)]
                                   : mk[std::size_t(off + c)] - loc[std::size_t(off + c)];
                    };
                    if (k < 4) {  // nested (tri v, tri v): first disk inside
                        int v = parts.index[0];
                        for (int c = 0; c < 3; ++c)
                            if (d0(c, v) > d1(c, v)) return false;
                        return true;
                    }
                    if (k < 10) {  // (tri u, tri v): room on the shared edge
                        int u = parts.index[0], v = parts.index[1];
                        int e = edge_index(u, v);
                        int c0 = slot_of(e0, e), c1 = slot_of(e1, e);
                        return d0(c0, u) + d1(c1, v) <= mk[std::size_t(c0)];
                    }
                    if (k < 22) {  // (tri v, quad q): triangle on the v side
                        int v = parts.index[0], q = parts.index[1];
                        for (int w = 0; w < 4; ++w) {
                            if (w == v || group_of(q, w) == group_of(q, v)) continue;
                            int e = edge_index(v, w);
                            if (d0(slot_of(e0, e), v) > d1(slot_of(e1, e), v)) return false;
                        }
                        return true;
                    }
                    // parallel (quad q, quad q): first disk on the group-0 side
                    int q = parts.index[0];
                    for (int c = 0; c < int(e0.crossings.size()); ++c) {
                        int e = e0.crossings[std::size_t(c)].edge;
                        auto [a, b] = kEdgeEnds[std::size_t(e)];
                        int pend = group_of(q, a) == 0 ? a : b;
                        if (d0(c, pend) > d1(c, pend)) return false;
                    }
                    return true;
                };
                gen(PieceKind::tube, k, cr, valid);
            }
        }
    }

    if (M.total() == 0)
        require(int(types_.size()) == (almost ? 35 : 7) * nt, "Internal",
                "elementary census size is off");
    int mmax = 0;
    for (int c : M.count) mmax = std::max(mmax, c);
    Int bound = Int(42) * nt;
    for (int i = 0; i < 8; ++i) bound *= mmax + 1;
    require(Int(types_.size()) <= bound, "Internal", "type census exceeds its bound");

    // Matching rows: one block per (interior face class, corner).
    int nf = T.num_faces();
    std::vector<int> block_off(std::size_t(nf) * 4, -1);
    int total = 0;
    for (int F = 0; F < nf; ++F) {
        if (T.face_is_boundary(F)) continue;
        auto [rt, rf] = T.face_rep(F);
        for (int c : facet_verts(rf)) {
            std::array<int, 2> xy{};
            int n = 0;
            for (int w : facet_verts(rf))
                if (w != c) xy[std::size_t(n++)] = w;
            int e1 = edge_index(c, xy[0]), e2 = edge_index(c, xy[1]);
            if (e1 > e2) std::swap(e1, e2);
            int m1 = M.count[std::size_t(T.edge_class(rt, e1))];
            int m2 = M.count[std::size_t(T.edge_class(rt, e2))];
            block_off[std::size_t(F * 4 + c)] = total;
            for (int s1 = 0; s1 <= m1; ++s1)
                for (int s2 = 0; s2 <= m2; ++s2) row_key_.push_back({F, c, s1, s2});
            total += (m1 + 1) * (m2 + 1);
        }
    }
    rows_.assign(std::size_t(total), std::vector<Int>(types_.size(), 0));

    for (int j = 0; j < int(types_.size()); ++j) {
        const auto& ty = types_[std::size_t(j)];
        auto add_arcs = [&](const Elem& el, int off) {
            for (const auto& a : el.arcs) {
                int F = T.face_class(ty.tet, a.facet);
                if (T.face_is_boundary(F)) continue;
                int cu = a.slot[0], cw = a.slot[1];
                int eu = el.crossings[std::size_t(cu)].edge;
                int ew = el.crossings[std::size_t(cw)].edge;
                int xu = kEdgeEnds[std::size_t(eu)][0] + kEdgeEnds[std::size_t(eu)][1] - a.corner;
                int xw = kEdgeEnds[std::size_t(ew)][0] + kEdgeEnds[std::size_t(ew)][1] - a.corner;
                auto [rt, rf] = T.face_rep(F);
                int sign, c_rep, x_u, x_w;
                if (rt == ty.tet && rf == a.facet) {
                    sign = 1;
                    c_rep = a.corner;
                    x_u = xu;
                    x_w = xw;
                } else {
                    const auto& g = T.gluing(ty.tet, a.facet);
                    require(g.tet == rt && int(g.perm(std::uint8_t(a.facet))) == rf, "Internal",
                            "face representative mismatch");
                    sign = -1;
                    c_rep = g.perm(std::uint8_t(a.corner));
                    x_u = g.perm(std::uint8_t(xu));
                    x_w = g.perm(std::uint8_t(xw));
                }
                int su = ty.subs[std::size_t(off + cu)], sw = ty.subs[std::size_t(off + cw)];
                int eA = edge_index(c_rep, x_u), eB = edge_index(c_rep, x_w);
                if (eA > eB) {
                    std::swap(eA, eB);
                    std::swap(su, sw);
                }
                int m2 = M.count[std::size_t(T.edge_class(rt, eB))];
                int row = block_off[std::size_t(F * 4 + c_rep)] + su * (m2 + 1) + sw;
                rows_[std::size_t(row)][std::size_t(j)] += sign;
            }
        };
        if (ty.kind == PieceKind::tube) {
            const auto& parts = tube_parts(ty.index);
            const Elem& e0 = elem_of(parts.kind[0], parts.index[0]);
            add_arcs(e0, 0);
            add_arcs(elem_of(parts.kind[1], parts.index[1]), int(e0.crossings.size()));
        } else {
            add_arcs(elem_of(ty.kind, ty.index), 0);
        }
    }
}

int SurfaceTypeTable::index(const SurfaceType& t) const {
    auto it = std::lower_bound(types_.begin(), types_.end(), t);
    if (it == types_.end() || !(*it == t)) return -1;
    return int(it - types_.begin());
}

bool SurfaceTypeTable::exceptional(int i) const {
    auto k = types_[std::size_t(i)].kind;
    return k == PieceKind::oct || k == PieceKind::tube;
}

std::pair<int, int> SurfaceTypeTable::crossing_edge(int i, int c) const {
    const auto& ty = types_[std::size_t(i)];
    if (ty.kind == PieceKind::tube) {
        const auto& parts = tube_parts(ty.index);
        const Elem& e0 = elem_of(parts.kind[0], parts.index[0]);
        int n0 = int(e0.crossings.size());
        const Cross& cr = c < n0
                              ? e0.crossings[std::size_t(c)]
                              : elem_of(parts.kind[1], parts.index[1]).crossings[std::size_t(c - n0)];
        return {cr.edge, cr.near};
    }
    const Cross& cr = elem_of(ty.kind, ty.index).crossings[std::size_t(c)];
    return {cr.edge, cr.near};
}

std::string SurfaceTypeTable::id(int i) const {
    const auto& t = types_[std::size_t(i)];
    std::string s = "tet:" + std::to_string(t.tet) + ";kind:" + kind_name(t.kind, t.index) + ";subs:";
    for (std::size_t c = 0; c < t.subs.size(); ++c) {
        if (c) s += ",";
        s += std::to_string(t.subs[c]);
    }
    return s;
}

int SurfaceTypeTable::parse_id(const std::string& s) const {
    std::size_t pos = 0;
    auto bad = [&]() { fail("Domain", "bad surface type id '" + s + "'"); };
    auto expect = [&](const std::string& word) {
        if (s.compare(pos, word.size(), word) != 0) bad();
        pos += word.size();
    };
    auto num = [&]() {
        std::size_t start = pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        if (pos == start) bad();
        int v = 0;
        for (std::size_t i = start; i < pos; ++i) {
            v = v * 10 + (s[i] - '0');
            if (v > 1000000) bad();
        }
        return v;
    };
    SurfaceType t;
    expect("tet:");
    t.tet = num();
    expect(";kind:");
    std::size_t start = pos;
    while (pos < s.size() && s[pos] >= 'a' && s[pos] <= 'z') ++pos;
    std::string word = s.substr(start, pos - start);
    if (word == "tri") t.kind = PieceKind::tri;
    else if (word == "quad") t.kind = PieceKind::quad;
    else if (word == "oct") t.kind = PieceKind::oct;
    else if (word == "tube") t.kind = PieceKind::tube;
    else bad();
    t.index = num();
    expect(";subs:");
    t.subs.push_back(num());
    while (pos < s.size()) {
        expect(",");
        t.subs.push_back(num());
    }
    int i = index(t);
    require(i >= 0, "Domain", "unknown surface type '" + s + "'");
    return i;
}

bool SurfaceTypeTable::compatible(int i, int j) const {
    const auto& a = types_[std::size_t(i)];
    const auto& b = types_[std::size_t(j)];
    bool ea = a.kind == PieceKind::oct || a.kind == PieceKind::tube;
    bool eb = b.kind == PieceKind::oct || b.kind == PieceKind::tube;
    if (ea && eb) return false;
    if (a.tet != b.tet) return true;
    if (i == j) return true;

    auto whole = [&](int idx) {
        const auto& t = types_[std::size_t(idx)];
        return TypeView{t.kind, t.index, &elem_of(t.kind, t.index), loc_[std::size_t(idx)].data(),
                        marks_[std::size_t(idx)].data()};
    };
    auto part = [&](int idx, int d) {
        const auto& t = types_[std::size_t(idx)];
        const auto& parts = tube_parts(t.index);
        int off = d == 0 ? 0 : int(elem_of(parts.kind[0], parts.index[0]).crossings.size());
        return TypeView{parts.kind[std::size_t(d)], parts.index[std::size_t(d)],
                        &elem_of(parts.kind[std::size_t(d)], parts.index[std::size_t(d)]),
                        loc_[std::size_t(idx)].data() + off, marks_[std::size_t(idx)].data() + off};
    };

    int ti = a.kind == PieceKind::tube ? i : (b.kind == PieceKind::tube ? j : -1);
    if (ti < 0) return plain_pair_ok(whole(i), whole(j));

    int pi = ti == i ? j : i;
    const auto& parts = tube_parts(types_[std::size_t(ti)].index);
    TypeView D0 = part(ti, 0), D1 = part(ti, 1);
    TypeView P = whole(pi);
    int k = types_[std::size_t(ti)].index;
    if (k < 4) {  // nested: a same-corner triangle stays inside or outside
        int v = parts.index[0];
        if (P.kind == PieceKind::tri && P.index == v)
            return cw_le(corner_depths(P), corner_depths(D0)) ||
                   cw_le(corner_depths(D1), corner_depths(P));
        return plain_pair_ok(P, D0) && plain_pair_ok(P, D1);
    }
    if (k < 10) {  // (tri u, tri v): like corners stay on their own side
        int u = parts.index[0], v = parts.index[1];
        if (P.kind == PieceKind::tri && P.index == u)
            return cw_le(corner_depths(P), corner_depths(D0));
        if (P.kind == PieceKind::tri && P.index == v)
            return cw_le(corner_depths(P), corner_depths(D1));
        if (P.kind == PieceKind::quad && group_of(P.index, u) != group_of(P.index, v)) return false;
        return plain_pair_ok(P, D0) && plain_pair_ok(P, D1);
    }
    if (k < 22) {  // (tri v, quad q)
        int v = parts.index[0], q = parts.index[1];
        if (P.kind == PieceKind::tri && P.index == v)
            return cw_le(corner_depths(P), corner_depths(D0));
        if (P.kind == PieceKind::quad) {
            if (P.index != q) return false;
            if (!plain_pair_ok(P, D0)) return false;
            return group_of(q, v) == 0 ? cw_le(side_depths(D1), side_depths(P))
                                       : cw_le(side_depths(P), side_depths(D1));
        }
        return plain_pair_ok(P, D0) && plain_pair_ok(P, D1);
    }
    // parallel quads: a like quad stays clear of the gap
    int q = parts.index[0];
    if (P.kind == PieceKind::quad) {
        if (P.index != q) return false;
        return cw_le(side_depths(P), side_depths(D0)) || cw_le(side_depths(D1), side_depths(P));
    }
    return plain_pair_ok(P, D0) && plain_pair_ok(P, D1);
}

void check_admissible(const SurfaceTypeTable& T, const SurfaceVector& v) {
    require(int(v.size()) == T.size(), "Domain",
            "surface vector has " + std::to_string(v.size()) + " entries, type table has " +
                std::to_string(T.size()));
    for (const Int& x : v) require(x >= 0, "Domain", "negative piece count");
    Int exc = 0;
    for (int i = 0; i < T.size(); ++i)
        if (T.exceptional(i)) exc += v[std::size_t(i)];
    if (exc > 1) fail("TooManyExceptional", "surface carries " + to_string(exc) + " octagons and tubes");
    for (int t = 0; t < T.num_tets(); ++t) {
        int dir = -1;
        for (int i : T.tet_types(t)) {
            if (v[std::size_t(i)] == 0) continue;
            int d = quad_dir_of(T.type(i));
            if (d < 0) continue;
            if (dir < 0) dir = d;
            else if (dir != d)
                fail("QuadConflict", "tetrahedron " + std::to_string(t) + " carries quad directions " +
                                         std::to_string(dir) + " and " + std::to_string(d));
        }
    }
    const auto& rows = T.matching_rows();
    for (int r = 0; r < int(rows.size()); ++r) {
        Int s = 0;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (rows[std::size_t(r)][i] != 0) s += rows[std::size_t(r)][i] * v[i];
        if (s != 0) {
            auto k = T.row_key(r);
            fail("MatchingViolation", "arc ends unbalanced on face " + std::to_string(k.face) +
                                          " corner " + std::to_string(k.corner) + " sub-edges (" +
                                          std::to_string(k.sub1) + "," + std::to_string(k.sub2) +
                                          ") (net " + to_string(s) + ")");
        }
    }
    for (int t = 0; t < T.num_tets(); ++t) {
        const auto& tt = T.tet_types(t);
        for (std::size_t x = 0; x < tt.size(); ++x) {
            if (v[std::size_t(tt[x])] == 0) continue;
            for (std::size_t y = x + 1; y < tt.size(); ++y) {
                if (v[std::size_t(tt[y])] == 0) continue;
                if (!T.compatible(tt[x], tt[y]))
                    fail("Incompatible", "piece types '" + T.id(tt[x]) + "' and '" + T.id(tt[y]) +
                                             "' cross in every position");
            }
        }
    }
}

bool is_admissible(const SurfaceTypeTable& T, const SurfaceVector& v) {
    try {
        check_admissible(T, v);
        return true;
    } catch (const Error&) {
        return false;
    }
}

namespace {

struct Slot {
    int copy = -1, disk = 0;
    const Elem* el = nullptr;
    int off = 0;  // crossing offset within the type's subs
    int tet = -1, type = -1;
};

}  // namespace

NormalSurface surface_from_vector(const Triangulation3& T, const Marking& M,
                                  const SurfaceTypeTable& Tt, const SurfaceVector& v) {
    check_admissible(Tt, v);
    NormalSurface S;
    S.vec = v;

    long long total_cross = 0;
    for (int i = 0; i < Tt.size(); ++i) {
        if (v[std::size_t(i)] == 0) continue;
        const auto& ty = Tt.type(i);
        require(v[std::size_t(i)] <= (Int(1) << 22), "Domain", "surface too large to realize");
        long long n = v[std::size_t(i)].convert_to<long long>();
        total_cross += n * (long long)ty.subs.size();
        require(total_cross <= (1ll << 22), "Domain", "surface too large to realize");
        for (long long c = 0; c < n; ++c) {
            PieceCopy pc;
            pc.tet = ty.tet;
            pc.kind = ty.kind;
            pc.index = ty.index;
            pc.type = i;
            S.pieces.push_back(pc);
        }
    }
    if (std::find_if(S.pieces.begin(), S.pieces.end(), [](const PieceCopy& p) {
            return p.kind == PieceKind::oct || p.kind == PieceKind::tube;
        }) != S.pieces.end())
        S.almost = true;

    std::vector<Slot> slots;
    std::vector<std::array<int, 2>> copy_slots(S.pieces.size(), {-1, -1});
    for (int c = 0; c < int(S.pieces.size()); ++c) {
        const auto& ty = Tt.type(S.pieces[std::size_t(c)].type);
        if (ty.kind == PieceKind::tube) {
            const auto& parts = tube_parts(ty.index);
            const Elem& e0 = elem_of(parts.kind[0], parts.index[0]);
            const Elem& e1 = elem_of(parts.kind[1], parts.index[1]);
            copy_slots[std::size_t(c)] = {int(slots.size()), int(slots.size()) + 1};
            slots.push_back({c, 0, &e0, 0, ty.tet, S.pieces[std::size_t(c)].type});
            slots.push_back({c, 1, &e1, int(e0.crossings.size()), ty.tet, S.pieces[std::size_t(c)].type});
        } else {
            copy_slots[std::size_t(c)] = {int(slots.size()), -1};
            slots.push_back({c, 0, &elem_of(ty.kind, ty.index), 0, ty.tet, S.pieces[std::size_t(c)].type});
        }
    }

    auto slot_sub = [&](int s, int c) {
        return Tt.type(slots[std::size_t(s)].type).subs[std::size_t(slots[std::size_t(s)].off + c)];
    };
    auto slot_loc = [&](int s, int c) {
        return Tt.local_sub(slots[std::size_t(s)].type, slots[std::size_t(s)].off + c);
    };
    auto slot_m = [&](int s, int c) {
        return Tt.mark_count(slots[std::size_t(s)].type, slots[std::size_t(s)].off + c);
    };
    auto slot_dep = [&](int s, int c, int vtx) {
        int e = slots[std::size_t(s)].el->crossings[std::size_t(c)].edge;
        return vtx == kEdgeEnds[std::size_t(e)][0] ? slot_loc(s, c) : slot_m(s, c) - slot_loc(s, c);
    };

    // Chains: linear disjoint order near each corner and across each middle.
    int nt = T.num_tets();
    std::vector<std::vector<int>> corner(std::size_t(nt) * 4), middle;
    middle.resize(std::size_t(nt));
    std::vector<int> tet_dir(std::size_t(nt), -1), tet_oct(std::size_t(nt), -1);
    for (int s = 0; s < int(slots.size()); ++s) {
        const auto& sl = slots[std::size_t(s)];
        if (sl.el->kind == PieceKind::tri) {
            corner[std::size_t(sl.tet * 4 + sl.el->index)].push_back(s);
        } else {
            middle[std::size_t(sl.tet)].push_back(s);
            require(tet_dir[std::size_t(sl.tet)] < 0 || tet_dir[std::size_t(sl.tet)] == sl.el->index,
                    "Internal", "mixed quad directions survived admissibility");
            tet_dir[std::size_t(sl.tet)] = sl.el->index;
            if (sl.el->kind == PieceKind::oct) tet_oct[std::size_t(sl.tet)] = s;
        }
    }

    auto corner_key = [&](int s) {
        std::vector<int> d(3);
        for (int c = 0; c < 3; ++c) d[std::size_t(c)] = slot_dep(s, c, slots[std::size_t(s)].el->index);
        return d;
    };
    auto middle_key = [&](int s) {
        std::vector<int> d;
        const Elem& el = *slots[std::size_t(s)].el;
        for (int c = 0; c < int(el.crossings.size()); ++c) {
            if (el.crossings[std::size_t(c)].near >= 0) continue;
            int e = el.crossings[std::size_t(c)].edge;
            auto [a, b] = kEdgeEnds[std::size_t(e)];
            d.push_back(slot_dep(s, c, group_of(el.index, a) == 0 ? a : b));
        }
        return d;
    };
    auto lex_sort = [&](std::vector<int>& g, auto&& key) {
        std::sort(g.begin(), g.end(), [&](int x, int y) {
            auto kx = key(x), ky = key(y);
            if (kx != ky) return kx < ky;
            return x < y;
        });
    };
    auto is_tube_slot = [&](int s) {
        return S.pieces[std::size_t(slots[std::size_t(s)].copy)].kind == PieceKind::tube;
    };

    for (int t = 0; t < nt; ++t)
        for (int vtx = 0; vtx < 4; ++vtx) {
            auto& g = corner[std::size_t(t * 4 + vtx)];
            std::vector<int> plains, cons;
            for (int s : g) (is_tube_slot(s) ? cons : plains).push_back(s);
            lex_sort(plains, corner_key);
            if (cons.empty()) {
                g = plains;
                continue;
            }
            require(cons.size() <= 2, "Internal", "several tubes survived admissibility");
            if (cons.size() == 1) {
                for (int p : plains)
                    require(cw_le(corner_key(p), corner_key(cons[0])), "Internal",
                            "triangle outside a tubed disk");
                plains.push_back(cons[0]);
                g = plains;
                continue;
            }
            std::vector<int> chain, outer;
            for (int p : plains)
                (cw_le(corner_key(p), corner_key(cons[0])) ? chain : outer).push_back(p);
            for (int p : outer)
                require(cw_le(corner_key(cons[1]), corner_key(p)), "Internal",
                        "triangle caught between tubed disks");
            chain.push_back(cons[0]);
            chain.push_back(cons[1]);
            chain.insert(chain.end(), outer.begin(), outer.end());
            g = chain;
        }

    for (int t = 0; t < nt; ++t) {
        auto& g = middle[std::size_t(t)];
        if (g.empty()) continue;
        std::vector<int> plains, cons;
        for (int s : g) (is_tube_slot(s) ? cons : plains).push_back(s);
        lex_sort(plains, middle_key);
        if (cons.empty()) {
            g = plains;
            continue;
        }
        require(cons.size() <= 2, "Internal", "several tubes survived admissibility");
        if (cons.size() == 2) {
            std::vector<int> chain, outer;
            for (int p : plains)
                (cw_le(middle_key(p), middle_key(cons[0])) ? chain : outer).push_back(p);
            for (int p : outer)
                require(cw_le(middle_key(cons[1]), middle_key(p)), "Internal",
                        "quad caught between tubed disks");
            chain.push_back(cons[0]);
            chain.push_back(cons[1]);
            chain.insert(chain.end(), outer.begin(), outer.end());
            g = chain;
            continue;
        }
        const auto& parts = tube_parts(Tt.type(slots[std::size_t(cons[0])].type).index);
        require(parts.kind[0] == PieceKind::tri && parts.kind[1] == PieceKind::quad, "Internal",
                "stray tube constituent in a middle chain");
        int vtx = parts.index[0];
        if (group_of(tet_dir[std::size_t(t)], vtx) == 0) {
            for (int p : plains)
                require(cw_le(middle_key(cons[0]), middle_key(p)), "Internal",
                        "quad on the tube side of a tubed quad");
            std::vector<int> chain{cons[0]};
            chain.insert(chain.end(), plains.begin(), plains.end());
            g = chain;
        } else {
            for (int p : plains)
                require(cw_le(middle_key(p), middle_key(cons[0])), "Internal",
                        "quad on the tube side of a tubed quad");
            plains.push_back(cons[0]);
            g = plains;
        }
    }

    // Crossing order along every tetrahedron edge, low vertex to high.
    std::vector<std::vector<std::pair<int, int>>> eseq(std::size_t(nt) * 6);
    for (int t = 0; t < nt; ++t) {
        int dir = tet_dir[std::size_t(t)];
        for (int e = 0; e < 6; ++e) {
            auto& seq = eseq[std::size_t(t * 6 + e)];
            int a = kEdgeEnds[std::size_t(e)][0], b = kEdgeEnds[std::size_t(e)][1];
            for (int s : corner[std::size_t(t * 4 + a)])
                seq.push_back({s, slot_of(*slots[std::size_t(s)].el, e)});
            bool pair_edge = dir >= 0 && group_of(dir, a) == group_of(dir, b);
            if (pair_edge) {
                int os = tet_oct[std::size_t(t)];
                if (os >= 0) {
                    seq.push_back({os, slot_of(*slots[std::size_t(os)].el, e, a)});
                    seq.push_back({os, slot_of(*slots[std::size_t(os)].el, e, b)});
                }
            } else if (dir >= 0) {
                const auto& mid = middle[std::size_t(t)];
                if (group_of(dir, a) == 0) {
                    for (int s : mid) seq.push_back({s, slot_of(*slots[std::size_t(s)].el, e)});
                } else {
                    for (auto it = mid.rbegin(); it != mid.rend(); ++it)
                        seq.push_back({*it, slot_of(*slots[std::size_t(*it)].el, e)});
                }
            }
            const auto& cb = corner[std::size_t(t * 4 + b)];
            for (auto it = cb.rbegin(); it != cb.rend(); ++it)
                seq.push_back({*it, slot_of(*slots[std::size_t(*it)].el, e)});
            for (std::size_t i = 0; i + 1 < seq.size(); ++i)
                require(slot_loc(seq[i].first, seq[i].second) <=
                            slot_loc(seq[i + 1].first, seq[i + 1].second),
                        "Internal", "edge crossings out of order");
        }
    }

    // Global crossing points per edge class, positions within each sub-edge.
    int ne = T.num_edges();
    std::vector<std::vector<std::pair<int, int>>> inc;
    inc.resize(std::size_t(ne));
    for (int t = 0; t < nt; ++t)
        for (int e = 0; e < 6; ++e) inc[std::size_t(T.edge_class(t, e))].push_back({t, e});

    std::vector<std::vector<int>> sub_count, sub_off;
    sub_count.resize(std::size_t(ne));
    sub_off.resize(std::size_t(ne));
    std::vector<int> cls_off(std::size_t(ne) + 1, 0);
    for (int cls = 0; cls < ne; ++cls) {
        int m = M.count[std::size_t(cls)];
        bool first = true;
        for (auto [t, e] : inc[std::size_t(cls)]) {
            std::vector<int> cnt(std::size_t(m) + 1, 0);
            for (auto [s, c] : eseq[std::size_t(t * 6 + e)]) ++cnt[std::size_t(slot_sub(s, c))];
            if (first) {
                sub_count[std::size_t(cls)] = cnt;
                first = false;
            } else {
                require(cnt == sub_count[std::size_t(cls)], "Internal",
                        "edge incidences disagree on crossing counts");
            }
        }
        sub_off[std::size_t(cls)].assign(std::size_t(m) + 1, 0);
        int run = 0;
        for (int s = 0; s <= m; ++s) {
            sub_off[std::size_t(cls)][std::size_t(s)] = run;
            run += sub_count[std::size_t(cls)][std::size_t(s)];
        }
        cls_off[std::size_t(cls) + 1] = cls_off[std::size_t(cls)] + run;
    }

    std::vector<std::vector<int>> cross_pid(slots.size());
    std::vector<std::vector<Rat>> cross_loc(slots.size());
    for (std::size_t s = 0; s < slots.size(); ++s) {
        cross_pid[s].assign(slots[s].el->crossings.size(), -1);
        cross_loc[s].assign(slots[s].el->crossings.size(), Rat(0));
    }
    for (int cls = 0; cls < ne; ++cls) {
        int m = M.count[std::size_t(cls)];
        for (auto [t, e] : inc[std::size_t(cls)]) {
            int sg = T.edge_sign(t, e);
            const auto& seq = eseq[std::size_t(t * 6 + e)];
            std::vector<int> k(std::size_t(m) + 1, 0);
            int n = int(seq.size());
            for (int step = 0; step < n; ++step) {
                auto [s, c] = sg > 0 ? seq[std::size_t(step)] : seq[std::size_t(n - 1 - step)];
                int sub = slot_sub(s, c);
                int idx = k[std::size_t(sub)]++;
                require(cross_pid[std::size_t(s)][std::size_t(c)] < 0, "Internal",
                        "crossing placed twice");
                cross_pid[std::size_t(s)][std::size_t(c)] =
                    cls_off[std::size_t(cls)] + sub_off[std::size_t(cls)][std::size_t(sub)] + idx;
                int cnt = sub_count[std::size_t(cls)][std::size_t(sub)];
                Rat mu(Int((long long)sub * (cnt + 1) + idx + 1), Int((long long)(m + 1) * (cnt + 1)));
                cross_loc[std::size_t(s)][std::size_t(c)] = sg > 0 ? mu : Rat(1) - mu;
            }
        }
    }

    // Chart polygons in boundary-walk order.
    const std::array<std::array<Rat, 3>, 4> VV{{{{Rat(0), Rat(0), Rat(0)}},
                                                {{Rat(1), Rat(0), Rat(0)}},
                                                {{Rat(0), Rat(1), Rat(0)}},
                                                {{Rat(0), Rat(0), Rat(1)}}}};
    for (auto& pc : S.pieces) pc.polys.resize(pc.kind == PieceKind::tube ? 2 : 1);
    for (std::size_t s = 0; s < slots.size(); ++s) {
        const auto& sl = slots[s];
        auto& poly = S.pieces[std::size_t(sl.copy)].polys[std::size_t(sl.disk)];
        for (int cyc : sl.el->cycle) {
            int e = sl.el->crossings[std::size_t(cyc)].edge;
            int a = kEdgeEnds[std::size_t(e)][0], b = kEdgeEnds[std::size_t(e)][1];
            const Rat& lam = cross_loc[s][std::size_t(cyc)];
            std::array<Rat, 3> p;
            for (int i = 0; i < 3; ++i)
                p[std::size_t(i)] = VV[std::size_t(a)][std::size_t(i)] * (Rat(1) - lam) +
                                    VV[std::size_t(b)][std::size_t(i)] * lam;
            poly.push_back(p);
        }
    }

    // Arc instances per facet incidence.
    struct Inst {
        int slot = -1, corner = -1;
        int pid_from = -1, pid_to = -1;
        std::array<int, 2> cr{{-1, -1}};
    };
    std::vector<std::vector<Inst>> facet_arcs(std::size_t(nt) * 4);
    for (int s = 0; s < int(slots.size()); ++s) {
        const auto& sl = slots[std::size_t(s)];
        for (const auto& a : sl.el->arcs) {
            Inst in;
            in.slot = s;
            in.corner = a.corner;
            in.cr = a.slot;
            in.pid_from = cross_pid[std::size_t(s)][std::size_t(a.slot[0])];
            in.pid_to = cross_pid[std::size_t(s)][std::size_t(a.slot[1])];
            require(in.pid_from >= 0 && in.pid_to >= 0, "Internal", "crossing never placed");
            facet_arcs[std::size_t(sl.tet * 4 + a.facet)].push_back(in);
        }
    }

    // Pair arcs across every interior face class, positionally within each
    // (corner, sub-edge pair) group ordered by distance from the corner.
    SignedPartition comp_uf(S.pieces.size());
    SignedPartition orient(slots.size());
    std::vector<int> bad_copy;
    std::vector<std::pair<int, int>> paired;  // slot pairs
    for (int F = 0; F < T.num_faces(); ++F) {
        if (T.face_is_boundary(F)) continue;
        auto [rt, rf] = T.face_rep(F);
        const auto& g = T.gluing(rt, rf);
        int ot = g.tet, of = int(g.perm(std::uint8_t(rf)));
        const auto& g1 = T.gluing(ot, of);
        require(g1.tet == rt && int(g1.perm(std::uint8_t(of))) == rf, "Internal",
                "gluing not involutive");

        struct Keyed {
            std::tuple<int, int, int> key;  // rep corner, sub on low rep edge, sub on high
            Rat d;                          // distance from the corner along the low rep edge
            const Inst* in = nullptr;
        };
        auto keyed = [&](const Inst& in, bool repside) {
            const auto& el = *slots[std::size_t(in.slot)].el;
            int e0 = el.crossings[std::size_t(in.cr[0])].edge;
            int e1 = el.crossings[std::size_t(in.cr[1])].edge;
            int x0 = kEdgeEnds[std::size_t(e0)][0] + kEdgeEnds[std::size_t(e0)][1] - in.corner;
            int x1 = kEdgeEnds[std::size_t(e1)][0] + kEdgeEnds[std::size_t(e1)][1] - in.corner;
            int c_rep = repside ? in.corner : int(g1.perm(std::uint8_t(in.corner)));
            int xr0 = repside ? x0 : int(g1.perm(std::uint8_t(x0)));
            int xr1 = repside ? x1 : int(g1.perm(std::uint8_t(x1)));
            int s0 = slot_sub(in.slot, in.cr[0]), s1 = slot_sub(in.slot, in.cr[1]);
            int lo_cr = in.cr[0], lo_e = e0;
            if (edge_index(c_rep, xr0) > edge_index(c_rep, xr1)) {
                std::swap(s0, s1);
                lo_cr = in.cr[1];
                lo_e = e1;
            }
            Rat lam = cross_loc[std::size_t(in.slot)][std::size_t(lo_cr)];
            Rat d = in.corner == kEdgeEnds[std::size_t(lo_e)][0] ? lam : Rat(1) - lam;
            return Keyed{{c_rep, s0, s1}, d, &in};
        };
        std::vector<Keyed> k0, k1;
        for (const auto& in : facet_arcs[std::size_t(rt * 4 + rf)]) k0.push_back(keyed(in, true));
        for (const auto& in : facet_arcs[std::size_t(ot * 4 + of)]) k1.push_back(keyed(in, false));
        auto by = [](const Keyed& x, const Keyed& y) {
            if (x.key != y.key) return x.key < y.key;
            return x.d < y.d;
        };
        std::sort(k0.begin(), k0.end(), by);
        std::sort(k1.begin(), k1.end(), by);
        require(k0.size() == k1.size(), "Internal", "face incidences disagree on arc counts");
        for (std::size_t i = 0; i < k0.size(); ++i) {
            require(k0[i].key == k1[i].key, "Internal", "face incidences disagree on arc types");
            const Inst& A = *k0[i].in;
            const Inst& B = *k1[i].in;
            bool same = A.pid_from == B.pid_from && A.pid_to == B.pid_to;
            bool opp = A.pid_from == B.pid_to && A.pid_to == B.pid_from;
            require(same || opp, "Internal", "paired arcs disagree on endpoints");
            comp_uf.merge(std::size_t(slots[std::size_t(A.slot)].copy),
                          std::size_t(slots[std::size_t(B.slot)].copy), 1);
            if (!orient.merge(std::size_t(A.slot), std::size_t(B.slot), opp ? 1 : -1))
                bad_copy.push_back(slots[std::size_t(A.slot)].copy);
            paired.push_back({A.slot, B.slot});
        }
    }

    // A tube correlates its disk orientations: facing along the axis, one disk
    // is seen from the front and the other from the back.
    auto newell = [](const std::vector<std::array<Rat, 3>>& P) {
        std::array<Rat, 3> n{Rat(0), Rat(0), Rat(0)};
        for (std::size_t i = 0; i < P.size(); ++i) {
            const auto& u = P[i];
            const auto& w = P[(i + 1) % P.size()];
            n[0] += u[1] * w[2] - u[2] * w[1];
            n[1] += u[2] * w[0] - u[0] * w[2];
            n[2] += u[0] * w[1] - u[1] * w[0];
        }
        return n;
    };
    for (std::size_t c = 0; c < S.pieces.size(); ++c) {
        if (S.pieces[c].kind != PieceKind::tube) continue;
        const auto& P0 = S.pieces[c].polys[0];
        const auto& P1 = S.pieces[c].polys[1];
        std::array<Rat, 3> c0{Rat(0), Rat(0), Rat(0)}, c1{Rat(0), Rat(0), Rat(0)};
        for (const auto& p : P0)
            for (int i = 0; i < 3; ++i) c0[std::size_t(i)] += p[std::size_t(i)];
        for (const auto& p : P1)
            for (int i = 0; i < 3; ++i) c1[std::size_t(i)] += p[std::size_t(i)];
        std::array<Rat, 3> axis;
        for (int i = 0; i < 3; ++i)
            axis[std::size_t(i)] = c1[std::size_t(i)] * Rat(Int(P0.size())) -
                                   c0[std::size_t(i)] * Rat(Int(P1.size()));
        auto n0 = newell(P0), n1 = newell(P1);
        Rat dot0 = n0[0] * axis[0] + n0[1] * axis[1] + n0[2] * axis[2];
        Rat dot1 = n1[0] * axis[0] + n1[1] * axis[1] + n1[2] * axis[2];
        int s0 = sgn(dot0), s1 = sgn(dot1);
        require(s0 != 0 && s1 != 0, "Internal", "tube disk degenerate against the tube axis");
        if (!orient.merge(std::size_t(copy_slots[c][0]), std::size_t(copy_slots[c][1]), -s0 * s1))
            bad_copy.push_back(int(c));
    }

    // Components.
    std::vector<int> comp_of(S.pieces.size(), -1);
    int ncomp = 0;
    {
        std::vector<int> root_comp(S.pieces.size(), -1);
        for (std::size_t c = 0; c < S.pieces.size(); ++c) {
            std::size_t r = comp_uf.find(c);
            if (root_comp[r] < 0) root_comp[r] = ncomp++;
            comp_of[c] = root_comp[r];
        }
    }
    S.components.assign(std::size_t(ncomp), Component{});
    for (std::size_t c = 0; c < S.pieces.size(); ++c) {
        S.pieces[c].component = comp_of[c];
        auto& comp = S.components[std::size_t(comp_of[c])];
        comp.pieces.push_back(int(c));
        comp.chi += S.pieces[c].kind == PieceKind::tube ? 0 : 1;
        comp.orientable = true;
    }
    for (int c : bad_copy) S.components[std::size_t(comp_of[std::size_t(c)])].orientable = false;

    // Vertices: every slot meeting a point must sit in the point's component.
    std::vector<int> pid_comp(std::size_t(cls_off[std::size_t(ne)]), -1);
    for (std::size_t s = 0; s < slots.size(); ++s)
        for (std::size_t c = 0; c < cross_pid[s].size(); ++c) {
            int pid = cross_pid[s][c];
            int cc = comp_of[std::size_t(slots[s].copy)];
            if (pid_comp[std::size_t(pid)] < 0) pid_comp[std::size_t(pid)] = cc;
            else
                require(pid_comp[std::size_t(pid)] == cc, "Internal",
                        "edge point shared by two components");
        }
    for (int pid = 0; pid < cls_off[std::size_t(ne)]; ++pid) {
        require(pid_comp[std::size_t(pid)] >= 0, "Internal", "orphan edge point");
        auto& comp = S.components[std::size_t(pid_comp[std::size_t(pid)])];
        comp.weight += 1;
        comp.chi += 1;
    }
    for (auto [sa, sb] : paired)
        S.components[std::size_t(comp_of[std::size_t(slots[std::size_t(sa)].copy)])].chi -= 1;

    // Boundary arcs become a normal curve on the boundary surface.
    tri3::BoundarySurface SB = tri3::boundary_surface(T);
    surf2::Marking bM = boundary_marking(T, SB, M);
    surf2::TypeTable bT(SB, bM);
    S.boundary_vec.assign(std::size_t(bT.size()), Int(0));
    std::map<std::pair<int, int>, int> btri;
    for (int i = 0; i < int(SB.triangles.size()); ++i)
        btri[{SB.triangles[std::size_t(i)].tet, SB.triangles[std::size_t(i)].facet}] = i;
    auto local_corner = [&](const tri3::SurfaceTriangle& tr, int v) {
        for (int c = 0; c < 3; ++c)
            if (tr.vtx[std::size_t(c)] == v) return c;
        fail("Internal", "vertex not on boundary facet");
    };
    for (int t = 0; t < nt; ++t)
        for (int f = 0; f < 4; ++f) {
            if (!T.gluing(t, f).is_boundary()) continue;
            auto it = btri.find({t, f});
            require(it != btri.end(), "Internal", "boundary facet has no surface triangle");
            const auto& tr = SB.triangles[std::size_t(it->second)];
            for (const auto& in : facet_arcs[std::size_t(t * 4 + f)]) {
                const auto& el = *slots[std::size_t(in.slot)].el;
                int lc = local_corner(tr, in.corner);
                surf2::ArcType at;
                at.tri = it->second;
                std::array<int, 2> side{}, sub{};
                for (int j = 0; j < 2; ++j) {
                    int e = el.crossings[std::size_t(in.cr[std::size_t(j)])].edge;
                    int x = kEdgeEnds[std::size_t(e)][0] + kEdgeEnds[std::size_t(e)][1] - in.corner;
                    side[std::size_t(j)] = 3 - lc - local_corner(tr, x);
                    sub[std::size_t(j)] = slot_sub(in.slot, in.cr[std::size_t(j)]);
                }
                if (side[0] < side[1]) {
                    at.s1 = side[0];
                    at.s2 = side[1];
                    at.sub1 = sub[0];
                    at.sub2 = sub[1];
                } else {
                    at.s1 = side[1];
                    at.s2 = side[0];
                    at.sub1 = sub[1];
                    at.sub2 = sub[0];
                }
                int ai = bT.index(at);
                require(ai >= 0, "Internal", "boundary arc type missing from the table");
                S.boundary_vec[std::size_t(ai)] += 1;
                auto& comp = S.components[std::size_t(comp_of[std::size_t(slots[std::size_t(in.slot)].copy)])];
                comp.chi -= 1;
                comp.boundary_length += 1;
            }
        }

    S.orientable = true;
    S.closed = true;
    for (auto& comp : S.components) {
        comp.closed = comp.boundary_length == 0;
        S.chi += comp.chi;
        S.weight += comp.weight;
        S.boundary_length += comp.boundary_length;
        if (!comp.orientable) S.orientable = false;
        if (!comp.closed) S.closed = false;
    }
    return S;
}

NormalSurface normal_sum(const Triangulation3& T, const Marking& M, const SurfaceTypeTable& Tt,
                         const SurfaceVector& a, const SurfaceVector& b) {
    check_admissible(Tt, a);
    check_admissible(Tt, b);
    Int ea = 0, eb = 0;
    for (int i = 0; i < Tt.size(); ++i)
        if (Tt.exceptional(i)) {
            ea += a[std::size_t(i)];
            eb += b[std::size_t(i)];
        }
    if (ea > 0 && eb > 0) fail("TooManyExceptional", "both summands carry exceptional pieces");
    SurfaceVector sum(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) sum[i] = a[i] + b[i];
    return surface_from_vector(T, M, Tt, sum);
}

surf2::CurveVector boundary_of(const NormalSurface& s) { return s.boundary_vec; }

bool is_vertex_linking(const Triangulation3& T, const NormalSurface& s) {
    if (s.pieces.empty()) return false;
    int cls = -1;
    std::map<std::pair<int, int>, int> cnt;
    for (const auto& p : s.pieces) {
        if (p.kind != PieceKind::tri) return false;
        int c = T.vertex_class(p.tet, p.index);
        if (cls < 0) cls = c;
        else if (cls != c) return false;
        ++cnt[{p.tet, p.index}];
    }
    for (int t = 0; t < T.num_tets(); ++t)
        for (int v = 0; v < 4; ++v) {
            if (T.vertex_class(t, v) != cls) continue;
            auto it = cnt.find({t, v});
            if (it == cnt.end() || it->second != 1) return false;
        }
    return true;
}

}  // namespace nk::nsurf
