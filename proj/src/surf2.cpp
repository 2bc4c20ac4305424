#include "nk/surf2.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

namespace nk::surf2 {

namespace {

using XY = std::array<Rat, 2>;

XY sub2(const XY& a, const XY& b) { return {a[0] - b[0], a[1] - b[1]}; }
Rat cross2(const XY& a, const XY& b) { return a[0] * b[1] - a[1] * b[0]; }
int sgn(const Rat& r) { return r > 0 ? 1 : r < 0 ? -1 : 0; }

XY corner_pt(int c) {
    switch (c) {
        case 0: return {Rat(0), Rat(0)};
        case 1: return {Rat(1), Rat(0)};
        default: return {Rat(0), Rat(1)};
    }
}

// Side s joins its two corners in increasing order; lam runs low -> high.
XY side_point(int s, const Rat& lam) {
    int lo = s == 0 ? 1 : 0;
    int hi = s == 2 ? 1 : 2;
    XY a = corner_pt(lo), b = corner_pt(hi);
    return {a[0] + lam * (b[0] - a[0]), a[1] + lam * (b[1] - a[1])};
}

int side_edge(const BoundarySurface& S, int t, int s) {
    return S.triangles[std::size_t(t)].side_edge[std::size_t(s)];
}
int side_dir(const BoundarySurface& S, int t, int s) {
    return S.triangles[std::size_t(t)].side_dir[std::size_t(s)];
}

Rat ord_to_lambda(int dir, const Rat& x) { return dir > 0 ? x : 1 - x; }

// Boundary walk visits side 2, side 0, side 1, spanning walk coordinates
// [0,1), [1,2), [2,3); side 1 is traversed against its low->high order.
Rat lambda_to_walk(int s, const Rat& lam) {
    Rat base(s == 2 ? 0 : s == 0 ? 1 : 2);
    return base + (s == 1 ? 1 - lam : lam);
}

Rat ord_to_walk(const BoundarySurface& S, int t, int s, const Rat& x) {
    return lambda_to_walk(s, ord_to_lambda(side_dir(S, t, s), x));
}

XY ord_to_chart(const BoundarySurface& S, int t, int s, const Rat& x) {
    return side_point(s, ord_to_lambda(side_dir(S, t, s), x));
}

// Walk interval of the cell (side s, sub-edge k), endpoints in increasing order.
std::pair<Rat, Rat> cell_walk(const BoundarySurface& S, const Marking& M, int t, int s, int k) {
    int m1 = M.subs(side_edge(S, t, s));
    Rat lo = ord_to_walk(S, t, s, Rat(k, m1));
    Rat hi = ord_to_walk(S, t, s, Rat(k + 1, m1));
    if (hi < lo) std::swap(lo, hi);
    return {lo, hi};
}

// Ordinate order along a cell agrees with walk order unless exactly one of
// the two direction flips applies.
bool cell_flip(const BoundarySurface& S, int t, int s) {
    return (side_dir(S, t, s) < 0) != (s == 1);
}

Rat walk_dist(const Rat& from, const Rat& to) {
    Rat d = to - from;
    if (d <= 0) d += 3;
    return d;
}

// Cyclic arc (w1 -> w2) in walk coordinates, endpoints excluded.
bool in_arc(const Rat& p, const Rat& w1, const Rat& w2) {
    return walk_dist(w1, p) < walk_dist(w1, w2);
}

}  // namespace

Marking::Marking(const BoundarySurface& S, std::vector<int> counts) : count(std::move(counts)) {
    require(count.size() == S.edges.size(), "Domain", "marking has " + std::to_string(count.size()) +
                                                          " entries for " + std::to_string(S.edges.size()) +
                                                          " surface edges");
    for (int c : count) require(c >= 0, "Domain", "negative mark count");
}

int Marking::total() const {
    int n = 0;
    for (int c : count) n += c;
    return n;
}

Rat Marking::position(int e, int i) const {
    require(e >= 0 && e < int(count.size()), "Domain", "marking edge out of range");
    require(i >= 0 && i < count[std::size_t(e)], "Domain", "marked point index out of range");
    return Rat(i + 1, count[std::size_t(e)] + 1);
}

TypeTable::TypeTable(const BoundarySurface& S, const Marking& M) {
    require(M.count.size() == S.edges.size(), "Domain", "marking does not fit the surface");
    by_face_.resize(S.triangles.size());
    static constexpr std::array<std::array<int, 2>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};
    for (int t = 0; t < int(S.triangles.size()); ++t)
        for (auto [s1, s2] : kPairs) {
            int n1 = M.subs(side_edge(S, t, s1)), n2 = M.subs(side_edge(S, t, s2));
            for (int a = 0; a < n1; ++a)
                for (int b = 0; b < n2; ++b) {
                    by_face_[std::size_t(t)].push_back(int(types_.size()));
                    types_.push_back({t, s1, s2, a, b});
                }
        }

    // Walk-interval starts of the two end cells, for compatibility tests.
    starts_.reserve(types_.size());
    for (const auto& ty : types_)
        starts_.push_back({cell_walk(S, M, ty.tri, ty.s1, ty.sub1).first,
                           cell_walk(S, M, ty.tri, ty.s2, ty.sub2).first});

    std::vector<int> row_start(S.edges.size() + 1, 0);
    for (int e = 0; e < int(S.edges.size()); ++e) row_start[std::size_t(e) + 1] = row_start[std::size_t(e)] + M.subs(e);
    rows_.assign(std::size_t(row_start.back()), std::vector<Int>(types_.size(), 0));
    row_cell_.resize(std::size_t(row_start.back()));
    for (int e = 0; e < int(S.edges.size()); ++e)
        for (int k = 0; k < M.subs(e); ++k) row_cell_[std::size_t(row_start[std::size_t(e)] + k)] = {e, k};
    for (int i = 0; i < int(types_.size()); ++i) {
        const auto& ty = types_[std::size_t(i)];
        for (auto [s, k] : {std::pair{ty.s1, ty.sub1}, std::pair{ty.s2, ty.sub2}}) {
            int e = side_edge(S, ty.tri, s);
            const auto& inc = S.edges[std::size_t(e)].sides;
            int which = (inc[0] == std::pair{ty.tri, s}) ? 0 : 1;
            require(inc[std::size_t(which)] == (std::pair{ty.tri, s}), "Internal", "side not incident to its edge");
            rows_[std::size_t(row_start[std::size_t(e)] + k)][std::size_t(i)] += which == 0 ? 1 : -1;
        }
    }
}

int TypeTable::index(const ArcType& t) const {
    auto it = std::lower_bound(types_.begin(), types_.end(), t);
    if (it == types_.end() || !(*it == t)) return -1;
    return int(it - types_.begin());
}

int TypeTable::unmarked_index(int i) const {
    const auto& ty = types_[std::size_t(i)];
    return ty.tri * 3 + (3 - ty.s1 - ty.s2);
}

bool TypeTable::compatible(int i, int j) const {
    const auto& a = types_[std::size_t(i)];
    const auto& b = types_[std::size_t(j)];
    if (a.tri != b.tri) return true;
    auto cell = [](const ArcType& t, int w) {
        return w == 0 ? std::pair{t.s1, t.sub1} : std::pair{t.s2, t.sub2};
    };
    for (int u = 0; u < 2; ++u)
        for (int w = 0; w < 2; ++w)
            if (cell(a, u) == cell(b, w)) return true;
    // Four distinct cells: compatible unless they alternate around the face.
    std::array<std::pair<Rat, int>, 4> ev{{{starts_[std::size_t(i)][0], 0},
                                           {starts_[std::size_t(i)][1], 0},
                                           {starts_[std::size_t(j)][0], 1},
                                           {starts_[std::size_t(j)][1], 1}}};
    std::sort(ev.begin(), ev.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    return ev[0].second == ev[1].second || ev[1].second == ev[2].second;
}

std::string TypeTable::id(int i) const {
    const auto& t = types_[std::size_t(i)];
    return "face:" + std::to_string(t.tri) + ";corner:" + std::to_string(t.s1) + std::to_string(t.s2) +
           ";sub:" + std::to_string(t.sub1) + "," + std::to_string(t.sub2);
}

int TypeTable::parse_id(const std::string& s) const {
    auto bad = [&]() -> int { fail("Domain", "bad arc type id '" + s + "'"); };
    auto num = [&](std::size_t& p) {
        std::size_t q = p;
        while (q < s.size() && s[q] >= '0' && s[q] <= '9') ++q;
        if (q == p) bad();
        int v = std::stoi(s.substr(p, q - p));
        p = q;
        return v;
    };
    auto expect = [&](std::size_t& p, const std::string& word) {
        if (s.compare(p, word.size(), word) != 0) bad();
        p += word.size();
    };
    std::size_t p = 0;
    ArcType t;
    expect(p, "face:");
    t.tri = num(p);
    expect(p, ";corner:");
    if (p + 2 > s.size() || s[p] < '0' || s[p] > '2' || s[p + 1] < '0' || s[p + 1] > '2') bad();
    t.s1 = s[p] - '0';
    t.s2 = s[p + 1] - '0';
    p += 2;
    expect(p, ";sub:");
    t.sub1 = num(p);
    expect(p, ",");
    t.sub2 = num(p);
    if (p != s.size()) bad();
    int idx = index(t);
    require(idx >= 0, "Domain", "unknown arc type '" + s + "'");
    return idx;
}

void check_admissible(const TypeTable& T, const CurveVector& v) {
    require(int(v.size()) == T.size(), "Domain", "curve vector has " + std::to_string(v.size()) +
                                                     " entries, type table has " + std::to_string(T.size()));
    for (const Int& x : v) require(x >= 0, "Domain", "negative arc count");
    const auto& rows = T.matching_rows();
    for (int r = 0; r < int(rows.size()); ++r) {
        Int s = 0;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (rows[std::size_t(r)][i] != 0) s += rows[std::size_t(r)][i] * v[i];
        if (s != 0) {
            auto [e, k] = T.row_cell(r);
            fail("MatchingViolation", "arc ends unbalanced on edge " + std::to_string(e) + " sub-edge " +
                                          std::to_string(k) + " (net " + to_string(s) + ")");
        }
    }
    for (int t = 0; t < T.num_unmarked() / 3; ++t) {
        const auto& ft = T.face_types(t);
        for (std::size_t x = 0; x < ft.size(); ++x) {
            if (v[std::size_t(ft[x])] == 0) continue;
            for (std::size_t y = x + 1; y < ft.size(); ++y) {
                if (v[std::size_t(ft[y])] == 0) continue;
                if (!T.compatible(ft[x], ft[y]))
                    fail("Incompatible",
                         "arc types '" + T.id(ft[x]) + "' and '" + T.id(ft[y]) + "' cross in every position");
            }
        }
    }
}

bool is_admissible(const TypeTable& T, const CurveVector& v) {
    try {
        check_admissible(T, v);
        return true;
    } catch (const Error&) {
        return false;
    }
}

namespace {

struct EndKey {
    int piece = -1;
    int end = 0;
};

void trace_components(GeometricCurve& c) {
    c.components.clear();
    std::vector<char> seen(c.pieces.size(), 0);
    for (int p = 0; p < int(c.pieces.size()); ++p) {
        if (seen[std::size_t(p)]) continue;
        if (c.pieces[std::size_t(p)].loop) {
            seen[std::size_t(p)] = 1;
            c.components.push_back({p});
            continue;
        }
        std::vector<int> comp;
        int cur = p, enter = 0;
        do {
            seen[std::size_t(cur)] = 1;
            comp.push_back(cur);
            int exit = 1 - enter;
            const auto& cr = c.crossings[std::size_t(c.pieces[std::size_t(cur)].crossing[std::size_t(exit)])];
            if (cr.piece[0] == cur && cr.piece_end[0] == exit) {
                cur = cr.piece[1];
                enter = cr.piece_end[1];
            } else {
                cur = cr.piece[0];
                enter = cr.piece_end[0];
            }
        } while (cur != p || enter != 0);
        c.components.push_back(std::move(comp));
    }
}

GeometricCurve realize(const BoundarySurface& S, const Marking& M, const TypeTable& T, const CurveVector& v) {
    check_admissible(T, v);
    GeometricCurve c;
    c.normal = true;
    c.vec = v;
    for (int i = 0; i < T.size(); ++i) {
        const auto& ty = T.type(i);
        for (Int n = 0; n < v[std::size_t(i)]; ++n) {
            Piece p;
            p.tri = ty.tri;
            p.normal = true;
            p.type = i;
            p.side = {ty.s1, ty.s2};
            c.pieces.push_back(p);
        }
    }

    // End lists per cell, sorted into walk order: within a cell, ends whose
    // far cell is cyclically farther come first; parallel arcs nest by copy
    // index, ascending at the cell with the smaller walk start.
    std::map<std::array<int, 3>, std::vector<EndKey>> cells;
    for (int p = 0; p < int(c.pieces.size()); ++p) {
        const auto& ty = T.type(c.pieces[std::size_t(p)].type);
        cells[{ty.tri, ty.s1, ty.sub1}].push_back({p, 0});
        cells[{ty.tri, ty.s2, ty.sub2}].push_back({p, 1});
    }
    for (auto& [key, ends] : cells) {
        auto [t, s, k] = key;
        Rat here = cell_walk(S, M, t, s, k).first;
        auto far_start = [&](const EndKey& e) {
            const auto& ty = T.type(c.pieces[std::size_t(e.piece)].type);
            int fs = e.end == 0 ? ty.s2 : ty.s1;
            int fk = e.end == 0 ? ty.sub2 : ty.sub1;
            return cell_walk(S, M, t, fs, fk).first;
        };
        std::stable_sort(ends.begin(), ends.end(), [&](const EndKey& a, const EndKey& b) {
            Rat fa = far_start(a), fb = far_start(b);
            Rat da = walk_dist(here, fa), db = walk_dist(here, fb);
            if (da != db) return da > db;
            return here < fa ? a.piece < b.piece : a.piece > b.piece;
        });
    }

    for (int e = 0; e < int(S.edges.size()); ++e) {
        auto [t1, s1] = S.edges[std::size_t(e)].sides[0];
        auto [t2, s2] = S.edges[std::size_t(e)].sides[1];
        int m1 = M.subs(e);
        for (int k = 0; k < m1; ++k) {
            auto list_of = [&](int t, int s) {
                auto it = cells.find({t, s, k});
                std::vector<EndKey> l = it == cells.end() ? std::vector<EndKey>{} : it->second;
                if (cell_flip(S, t, s)) std::reverse(l.begin(), l.end());
                return l;
            };
            auto l1 = list_of(t1, s1), l2 = list_of(t2, s2);
            require(l1.size() == l2.size(), "Internal", "unbalanced cell after matching check");
            int n = int(l1.size());
            for (int q = 0; q < n; ++q) {
                EdgeCrossing cr;
                cr.edge = e;
                cr.sub = k;
                cr.ordinate = Rat(k * (n + 1) + q + 1, m1 * (n + 1));
                cr.piece = {l1[std::size_t(q)].piece, l2[std::size_t(q)].piece};
                cr.piece_end = {l1[std::size_t(q)].end, l2[std::size_t(q)].end};
                int ci = int(c.crossings.size());
                c.pieces[std::size_t(cr.piece[0])].crossing[std::size_t(cr.piece_end[0])] = ci;
                c.pieces[std::size_t(cr.piece[1])].crossing[std::size_t(cr.piece_end[1])] = ci;
                c.crossings.push_back(cr);
            }
        }
    }

    for (auto& p : c.pieces) {
        p.pts.clear();
        for (int end = 0; end < 2; ++end) {
            const auto& cr = c.crossings[std::size_t(p.crossing[std::size_t(end)])];
            p.pts.push_back(ord_to_chart(S, p.tri, p.side[std::size_t(end)], cr.ordinate));
        }
    }
    c.length = (long long)c.crossings.size();
    trace_components(c);
    return c;
}

}  // namespace

GeometricCurve curve_from_vector(const BoundarySurface& S, const Marking& M, const TypeTable& T,
                                 const CurveVector& v) {
    return realize(S, M, T, v);
}

ComplexityKey complexity(const BoundarySurface& S, const GeometricCurve& c) {
    ComplexityKey k;
    k.ell = c.length;
    k.unmarked.assign(S.triangles.size() * 3, 0);
    if (!c.normal) return k;
    for (const auto& p : c.pieces)
        if (p.normal) k.unmarked[std::size_t(p.tri * 3 + (3 - p.side[0] - p.side[1]))] += 1;
    return k;
}

int complexity_compare(const ComplexityKey& a, const ComplexityKey& b) {
    if (a.ell != b.ell) return a.ell < b.ell ? -1 : 1;
    require(a.unmarked.size() == b.unmarked.size(), "Domain", "complexity keys from different surfaces");
    for (std::size_t i = 0; i < a.unmarked.size(); ++i)
        if (a.unmarked[i] != b.unmarked[i]) return a.unmarked[i] < b.unmarked[i] ? -1 : 1;
    return 0;
}

CurvePair place_pair(const BoundarySurface& S, const Marking& M, const TypeTable& T, const CurveVector& va,
                     const CurveVector& vb) {
    CurvePair P;
    P.a = realize(S, M, T, va);
    P.b = realize(S, M, T, vb);

    // Shared ordinates: in every cell the first curve's crossings come first,
    // each curve keeping its own order.
    for (int e = 0; e < int(S.edges.size()); ++e) {
        int m1 = M.subs(e);
        std::vector<std::vector<EdgeCrossing*>> per_cell;
        per_cell.resize(std::size_t(m1));
        for (auto* g : {&P.a, &P.b})
            for (auto& cr : g->crossings)
                if (cr.edge == e) per_cell[std::size_t(cr.sub)].push_back(&cr);
        for (int k = 0; k < m1; ++k) {
            int n = int(per_cell[std::size_t(k)].size());
            for (int q = 0; q < n; ++q)
                per_cell[std::size_t(k)][std::size_t(q)]->ordinate = Rat(k * (n + 1) + q + 1, m1 * (n + 1));
        }
    }
    for (auto* g : {&P.a, &P.b})
        for (auto& p : g->pieces)
            for (int end = 0; end < 2; ++end) {
                const auto& cr = g->crossings[std::size_t(p.crossing[std::size_t(end)])];
                p.pts[std::size_t(end)] = ord_to_chart(S, p.tri, p.side[std::size_t(end)], cr.ordinate);
            }

    for (int pa = 0; pa < int(P.a.pieces.size()); ++pa) {
        const auto& A = P.a.pieces[std::size_t(pa)];
        for (int pb = 0; pb < int(P.b.pieces.size()); ++pb) {
            const auto& B = P.b.pieces[std::size_t(pb)];
            if (A.tri != B.tri) continue;
            XY r = sub2(A.pts[1], A.pts[0]), s = sub2(B.pts[1], B.pts[0]);
            Rat d1 = cross2(r, sub2(B.pts[0], A.pts[0]));
            Rat d2 = cross2(r, sub2(B.pts[1], A.pts[0]));
            Rat d3 = cross2(s, sub2(A.pts[0], B.pts[0]));
            Rat d4 = cross2(s, sub2(A.pts[1], B.pts[0]));
            require(sgn(d1) != 0 && sgn(d2) != 0 && sgn(d3) != 0 && sgn(d4) != 0, "Internal",
                    "degenerate chord pair");
            if (sgn(d1) == sgn(d2) || sgn(d3) == sgn(d4)) continue;
            PairCrossing x;
            x.tri = A.tri;
            x.piece_a = pa;
            x.piece_b = pb;
            Rat denom = cross2(r, s);
            x.along_a = cross2(sub2(B.pts[0], A.pts[0]), s) / denom;
            x.along_b = cross2(sub2(B.pts[0], A.pts[0]), r) / denom;
            x.at = {A.pts[0][0] + x.along_a * r[0], A.pts[0][1] + x.along_a * r[1]};
            int shared = -1;
            for (int sd = 0; sd < 3 && shared < 0; ++sd)
                if ((A.side[0] == sd || A.side[1] == sd) && (B.side[0] == sd || B.side[1] == sd)) shared = sd;
            require(shared >= 0, "Internal", "crossing chords share no side");
            x.a_edge_end = A.side[1] == shared ? 1 : 0;
            x.b_edge_end = B.side[1] == shared ? 1 : 0;
            // Directing both strands toward the shared side, the sign is the
            // orientation of that frame; it flips with curve order and with
            // the surface orientation, and marks which opposite quadrant
            // pair the regular exchange joins.
            if (!S.orientation.empty()) {
                int aes = x.a_edge_end == 1 ? 1 : -1;
                int bes = x.b_edge_end == 1 ? 1 : -1;
                x.sign = S.orientation[std::size_t(A.tri)] * sgn(denom) * aes * bes;
            }
            P.crossings.push_back(std::move(x));
        }
    }
    std::sort(P.crossings.begin(), P.crossings.end(), [](const PairCrossing& x, const PairCrossing& y) {
        if (x.tri != y.tri) return x.tri < y.tri;
        if (x.piece_a != y.piece_a) return x.piece_a < y.piece_a;
        return x.along_a < y.along_a;
    });
    return P;
}

namespace {

// Port at a pair crossing: arms 0..3 = a toward end 0, a toward end 1,
// b toward end 0, b toward end 1. Terminals are original piece ends.
struct Port {
    int crossing = -1;  // -1: terminal
    int arm = -1;
    int curve = -1, piece = -1, end = -1;
};

}  // namespace

GeometricCurve haken_sum(const BoundarySurface& S, const Marking&, const TypeTable& T, const CurvePair& P,
                         const std::vector<Switch>& switches) {
    require(switches.size() == P.crossings.size(),
            "Domain", "got " + std::to_string(switches.size()) + " switches for " +
                          std::to_string(P.crossings.size()) + " crossings");
    const GeometricCurve* curves[2] = {&P.a, &P.b};

    GeometricCurve out;
    // Merged edge crossings, re-sorted; remap[q][i] is curve q's crossing i.
    std::array<std::vector<int>, 2> remap{std::vector<int>(P.a.crossings.size()),
                                          std::vector<int>(P.b.crossings.size())};
    {
        std::vector<std::tuple<int, Rat, int, int>> all;
        for (int q = 0; q < 2; ++q)
            for (int i = 0; i < int(curves[q]->crossings.size()); ++i) {
                const auto& cr = curves[q]->crossings[std::size_t(i)];
                all.emplace_back(cr.edge, cr.ordinate, q, i);
            }
        std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
            if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) < std::get<0>(y);
            return std::get<1>(x) < std::get<1>(y);
        });
        for (const auto& [e, o, q, i] : all) {
            remap[std::size_t(q)][std::size_t(i)] = int(out.crossings.size());
            EdgeCrossing cr = curves[std::size_t(q)]->crossings[std::size_t(i)];
            cr.piece = {-1, -1};
            cr.piece_end = {-1, -1};
            out.crossings.push_back(cr);
        }
    }

    // Split each chord at its pair crossings; glue arms per switch.
    struct Segment {
        std::vector<XY> pts;  // two endpoints
        Port port0, port1;
    };
    std::vector<Segment> segs;
    std::map<std::pair<int, int>, std::pair<int, int>> port_seg;  // (crossing, arm) -> (seg, end)
    auto arm_of = [](int curve, int toward_end) { return curve * 2 + toward_end; };
    for (int q = 0; q < 2; ++q) {
        std::vector<std::vector<std::pair<Rat, int>>> on_piece(curves[std::size_t(q)]->pieces.size());
        for (int ci = 0; ci < int(P.crossings.size()); ++ci) {
            const auto& x = P.crossings[std::size_t(ci)];
            int pc = q == 0 ? x.piece_a : x.piece_b;
            on_piece[std::size_t(pc)].emplace_back(q == 0 ? x.along_a : x.along_b, ci);
        }
        for (int pc = 0; pc < int(curves[std::size_t(q)]->pieces.size()); ++pc) {
            auto& cuts = on_piece[std::size_t(pc)];
            std::sort(cuts.begin(), cuts.end(),
                      [](const auto& x, const auto& y) { return x.first < y.first; });
            const auto& piece = curves[std::size_t(q)]->pieces[std::size_t(pc)];
            XY prev_pt = piece.pts[0];
            Port prev_port{-1, -1, q, pc, 0};
            for (const auto& [t, ci] : cuts) {
                Segment s;
                s.pts = {prev_pt, P.crossings[std::size_t(ci)].at};
                s.port0 = prev_port;
                s.port1 = {ci, arm_of(q, 0), -1, -1, -1};
                int si = int(segs.size());
                if (s.port0.crossing >= 0) port_seg[{s.port0.crossing, s.port0.arm}] = {si, 0};
                port_seg[{ci, arm_of(q, 0)}] = {si, 1};
                segs.push_back(std::move(s));
                prev_pt = P.crossings[std::size_t(ci)].at;
                prev_port = {ci, arm_of(q, 1), -1, -1, -1};
            }
            Segment s;
            s.pts = {prev_pt, piece.pts[1]};
            s.port0 = prev_port;
            s.port1 = {-1, -1, q, pc, 1};
            if (s.port0.crossing >= 0) port_seg[{s.port0.crossing, s.port0.arm}] = {int(segs.size()), 0};
            segs.push_back(std::move(s));
        }
    }
    std::map<std::pair<int, int>, std::pair<int, int>> glue;  // (crossing, arm) -> partner
    for (int ci = 0; ci < int(P.crossings.size()); ++ci) {
        const auto& x = P.crossings[std::size_t(ci)];
        int a_to = arm_of(0, x.a_edge_end), a_away = arm_of(0, 1 - x.a_edge_end);
        int b_to = arm_of(1, x.b_edge_end), b_away = arm_of(1, 1 - x.b_edge_end);
        if (switches[std::size_t(ci)] == Switch::regular) {
            glue[{ci, a_to}] = {ci, b_away};
            glue[{ci, b_away}] = {ci, a_to};
            glue[{ci, a_away}] = {ci, b_to};
            glue[{ci, b_to}] = {ci, a_away};
        } else {
            glue[{ci, a_to}] = {ci, b_to};
            glue[{ci, b_to}] = {ci, a_to};
            glue[{ci, a_away}] = {ci, b_away};
            glue[{ci, b_away}] = {ci, a_away};
        }
    }

    std::vector<char> used(segs.size(), 0);
    auto walk = [&](int seg, int enter_end, bool close_loop) {
        Piece piece;
        std::vector<XY> pts;
        int cur = seg, enter = enter_end;
        Port final_port;
        while (true) {
            used[std::size_t(cur)] = 1;
            const auto& sg = segs[std::size_t(cur)];
            if (pts.empty()) pts.push_back(enter == 0 ? sg.pts[0] : sg.pts[1]);
            pts.push_back(enter == 0 ? sg.pts[1] : sg.pts[0]);
            const Port& exitp = enter == 0 ? sg.port1 : sg.port0;
            if (exitp.crossing < 0) {
                final_port = exitp;
                break;
            }
            auto partner = glue.at({exitp.crossing, exitp.arm});
            auto [nseg, nend] = port_seg.at(partner);
            if (close_loop && nseg == seg && nend == enter_end) {
                pts.pop_back();  // the closing point repeats the start
                final_port = Port{};
                break;
            }
            cur = nseg;
            enter = nend;
        }
        piece.pts = std::move(pts);
        return std::pair{piece, final_port};
    };

    // Arcs: start from every terminal port.
    for (int si = 0; si < int(segs.size()); ++si)
        for (int end = 0; end < 2; ++end) {
            const Port& p = end == 0 ? segs[std::size_t(si)].port0 : segs[std::size_t(si)].port1;
            if (p.crossing >= 0 || used[std::size_t(si)]) continue;
            auto [piece, last] = walk(si, end, false);
            require(last.crossing < 0, "Internal", "arc ended mid-face");
            const auto& first_piece = curves[std::size_t(p.curve)]->pieces[std::size_t(p.piece)];
            piece.tri = first_piece.tri;
            int c0 = remap[std::size_t(p.curve)]
                          [std::size_t(first_piece.crossing[std::size_t(p.end)])];
            const auto& last_piece = curves[std::size_t(last.curve)]->pieces[std::size_t(last.piece)];
            int c1 = remap[std::size_t(last.curve)]
                          [std::size_t(last_piece.crossing[std::size_t(last.end)])];
            piece.crossing = {c0, c1};
            piece.side = {first_piece.side[std::size_t(p.end)], last_piece.side[std::size_t(last.end)]};
            piece.loop = false;
            if (piece.side[0] != piece.side[1]) {
                piece.normal = true;
                int slo = std::min(piece.side[0], piece.side[1]);
                int shi = std::max(piece.side[0], piece.side[1]);
                int clo = piece.side[0] == slo ? 0 : 1;
                ArcType ty{piece.tri, slo, shi, out.crossings[std::size_t(piece.crossing[std::size_t(clo)])].sub,
                           out.crossings[std::size_t(piece.crossing[std::size_t(1 - clo)])].sub};
                piece.type = T.index(ty);
                require(piece.type >= 0, "Internal", "arc type missing from table");
            }
            out.pieces.push_back(std::move(piece));
        }
    // Leftover segments close up inside their faces.
    for (int si = 0; si < int(segs.size()); ++si) {
        if (used[std::size_t(si)]) continue;
        auto [piece, last] = walk(si, 0, true);
        const Port& p0 = segs[std::size_t(si)].port0;
        piece.tri = P.crossings[std::size_t(p0.crossing)].tri;
        piece.loop = true;
        out.pieces.push_back(std::move(piece));
    }

    for (int pi = 0; pi < int(out.pieces.size()); ++pi) {
        const auto& piece = out.pieces[std::size_t(pi)];
        if (piece.loop) continue;
        for (int end = 0; end < 2; ++end) {
            auto& cr = out.crossings[std::size_t(piece.crossing[std::size_t(end)])];
            const auto& inc = S.edges[std::size_t(cr.edge)].sides;
            int which = (inc[0] == std::pair{piece.tri, piece.side[std::size_t(end)]}) ? 0 : 1;
            require(inc[std::size_t(which)] == (std::pair{piece.tri, piece.side[std::size_t(end)]}), "Internal",
                    "piece end not on its edge");
            cr.piece[std::size_t(which)] = pi;
            cr.piece_end[std::size_t(which)] = end;
        }
    }
    out.length = (long long)out.crossings.size();
    out.normal = true;
    for (const auto& piece : out.pieces)
        if (!piece.normal) out.normal = false;
    out.vec.assign(std::size_t(T.size()), 0);
    if (out.normal)
        for (const auto& piece : out.pieces) out.vec[std::size_t(piece.type)] += 1;
    trace_components(out);
    return out;
}

void check_fence(const BoundarySurface& S, const Marking& M, const Fence& f) {
    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> at_mark;  // (edge, mark) -> (tri, side)
    for (const auto& r : f.rails) {
        require(r.tri >= 0 && r.tri < int(S.triangles.size()), "Domain", "rail face out of range");
        require(0 <= r.s1 && r.s1 < r.s2 && r.s2 <= 2, "Domain", "rail sides out of order");
        for (auto [s, mk] : {std::pair{r.s1, r.mark1}, std::pair{r.s2, r.mark2}}) {
            int e = side_edge(S, r.tri, s);
            require(mk >= 0 && mk < M.count[std::size_t(e)], "Domain",
                    "rail mark " + std::to_string(mk) + " out of range on edge " + std::to_string(e));
            at_mark[{e, mk}].push_back({r.tri, s});
        }
    }
    for (const auto& [key, ends] : at_mark) {
        auto [e, mk] = key;
        require(ends.size() == 2, "Domain", "fence has " + std::to_string(ends.size()) + " rail ends at edge " +
                                                std::to_string(e) + " mark " + std::to_string(mk));
        const auto& inc = S.edges[std::size_t(e)].sides;
        bool ok = (ends[0] == inc[0] && ends[1] == inc[1]) || (ends[0] == inc[1] && ends[1] == inc[0]);
        require(ok, "NotEmbedded", "fence touches edge " + std::to_string(e) + " mark " + std::to_string(mk) +
                                       " twice from one side");
    }
    // Rails inside one face must not cross.
    auto rail_pts = [&](const Rail& r) {
        auto pt = [&](int s, int mk) {
            int e = side_edge(S, r.tri, s);
            return ord_to_chart(S, r.tri, s, M.position(e, mk));
        };
        return std::array<XY, 2>{pt(r.s1, r.mark1), pt(r.s2, r.mark2)};
    };
    for (std::size_t i = 0; i < f.rails.size(); ++i)
        for (std::size_t j = i + 1; j < f.rails.size(); ++j) {
            if (f.rails[i].tri != f.rails[j].tri) continue;
            auto A = rail_pts(f.rails[i]), B = rail_pts(f.rails[j]);
            XY r = sub2(A[1], A[0]), s = sub2(B[1], B[0]);
            int d1 = sgn(cross2(r, sub2(B[0], A[0]))), d2 = sgn(cross2(r, sub2(B[1], A[0])));
            int d3 = sgn(cross2(s, sub2(A[0], B[0]))), d4 = sgn(cross2(s, sub2(A[1], B[0])));
            if (d1 * d2 < 0 && d3 * d4 < 0)
                fail("NotEmbedded", "rails " + std::to_string(i) + " and " + std::to_string(j) + " cross in face " +
                                        std::to_string(f.rails[i].tri));
        }
}

Marking marking_from_curve(const BoundarySurface& S, const GeometricCurve& c) {
    std::vector<int> counts(S.edges.size(), 0);
    for (const auto& cr : c.crossings) ++counts[std::size_t(cr.edge)];
    return Marking(S, counts);
}

Fence fence_from_curve(const BoundarySurface& S, const GeometricCurve& c) {
    require(c.normal, "Domain", "fence requires a normal curve");
    std::vector<int> rank(c.crossings.size(), 0);
    {
        std::vector<int> seen(S.edges.size(), 0);
        for (std::size_t i = 0; i < c.crossings.size(); ++i)
            rank[i] = seen[std::size_t(c.crossings[i].edge)]++;
    }
    Fence f;
    for (const auto& p : c.pieces) {
        Rail r;
        r.tri = p.tri;
        int e0 = p.side[0] <= p.side[1] ? 0 : 1;
        r.s1 = p.side[std::size_t(e0)];
        r.s2 = p.side[std::size_t(1 - e0)];
        r.mark1 = rank[std::size_t(p.crossing[std::size_t(e0)])];
        r.mark2 = rank[std::size_t(p.crossing[std::size_t(1 - e0)])];
        f.rails.push_back(r);
    }
    return f;
}

Int fence_intersections(const BoundarySurface& S, const Marking& M, const TypeTable& T, const CurveVector& v,
                        const Fence& f) {
    require(int(v.size()) == T.size(), "Domain", "curve vector does not fit the type table");
    check_fence(S, M, f);
    Int total = 0;
    for (int i = 0; i < T.size(); ++i) {
        if (v[std::size_t(i)] == 0) continue;
        const auto& ty = T.type(i);
        auto c1 = cell_walk(S, M, ty.tri, ty.s1, ty.sub1);
        auto c2 = cell_walk(S, M, ty.tri, ty.s2, ty.sub2);
        Rat m1 = (c1.first + c1.second) / 2, m2 = (c2.first + c2.second) / 2;
        for (const auto& r : f.rails) {
            if (r.tri != ty.tri) continue;
            Rat w1 = ord_to_walk(S, r.tri, r.s1, M.position(side_edge(S, r.tri, r.s1), r.mark1));
            Rat w2 = ord_to_walk(S, r.tri, r.s2, M.position(side_edge(S, r.tri, r.s2), r.mark2));
            if (in_arc(m1, w1, w2) != in_arc(m2, w1, w2)) total += v[std::size_t(i)];
        }
    }
    return total;
}

bool bounds_disk_in_surface(const BoundarySurface& S, const GeometricCurve& c, int component) {
    require(component >= 0 && component < int(c.components.size()), "Domain", "component out of range");
    const auto& comp = c.components[std::size_t(component)];
    if (comp.size() == 1 && c.pieces[std::size_t(comp[0])].loop) return true;
    std::set<int> in_comp(comp.begin(), comp.end());
    for (int p : comp)
        require(!c.pieces[std::size_t(p)].loop, "Internal", "loop piece in a multi-piece component");

    // Regions of each visited face, from the nesting of the component's
    // chords around the boundary walk.
    struct FaceRegions {
        std::vector<Rat> pos;            // event walk positions, sorted
        std::vector<int> after;          // region right after each event
        std::vector<std::array<int, 2>> chord_sides;  // piece -> (outer, inner), via local index
        std::vector<int> chord_piece;
        int nregions = 1;
    };
    std::map<int, FaceRegions> faces;
    for (int p : comp) {
        const auto& piece = c.pieces[std::size_t(p)];
        faces[piece.tri];  // ensure present
    }
    for (auto& [t, fr] : faces) {
        struct Ev {
            Rat pos;
            int piece;
        };
        std::vector<Ev> evs;
        for (int p : comp) {
            const auto& piece = c.pieces[std::size_t(p)];
            if (piece.tri != t) continue;
            for (int end = 0; end < 2; ++end) {
                const auto& cr = c.crossings[std::size_t(piece.crossing[std::size_t(end)])];
                evs.push_back({ord_to_walk(S, t, piece.side[std::size_t(end)], cr.ordinate), p});
            }
        }
        std::sort(evs.begin(), evs.end(), [](const Ev& a, const Ev& b) { return a.pos < b.pos; });
        std::vector<int> stack{0};
        std::map<int, int> open;  // piece -> inner region
        for (const auto& ev : evs) {
            auto it = open.find(ev.piece);
            if (it == open.end()) {
                int inner = fr.nregions++;
                open[ev.piece] = inner;
                fr.chord_piece.push_back(ev.piece);
                fr.chord_sides.push_back({stack.back(), inner});
                stack.push_back(inner);
            } else {
                require(stack.back() == it->second, "NotEmbedded", "component crosses itself in a face");
                stack.pop_back();
            }
            fr.pos.push_back(ev.pos);
            fr.after.push_back(stack.back());
        }
        require(stack.size() == 1, "Internal", "unbalanced chord nesting");
    }
    auto region_at = [&](int t, const Rat& w) {
        auto it = faces.find(t);
        if (it == faces.end()) return 0;
        const auto& fr = it->second;
        auto up = std::upper_bound(fr.pos.begin(), fr.pos.end(), w);
        if (up == fr.pos.begin()) return 0;  // wrap interval, base region
        return fr.after[std::size_t(up - fr.pos.begin() - 1)];
    };

    // Global region ids and the gluing across edge segments.
    std::map<int, int> face_base;
    int total_regions = 0;
    std::vector<int> tri_regions(S.triangles.size(), 1);
    for (auto& [t, fr] : faces) tri_regions[std::size_t(t)] = fr.nregions;
    for (int t = 0; t < int(S.triangles.size()); ++t) {
        face_base[t] = total_regions;
        total_regions += tri_regions[std::size_t(t)];
    }
    SignedPartition uf{std::size_t(total_regions)};
    auto gid = [&](int t, int r) { return std::size_t(face_base[t] + r); };

    std::vector<std::vector<const EdgeCrossing*>> on_edge(S.edges.size());
    for (const auto& cr : c.crossings)
        if (in_comp.count(cr.piece[0])) on_edge[std::size_t(cr.edge)].push_back(&cr);

    // comp_of(edge, segment): the complement region along that piece of edge.
    std::vector<std::vector<std::array<std::size_t, 2>>> seg_regions(S.edges.size());
    for (int e = 0; e < int(S.edges.size()); ++e) {
        const auto& cuts = on_edge[std::size_t(e)];
        for (int j = 0; j <= int(cuts.size()); ++j) {
            Rat lo = j == 0 ? Rat(0) : cuts[std::size_t(j - 1)]->ordinate;
            Rat hi = j == int(cuts.size()) ? Rat(1) : cuts[std::size_t(j)]->ordinate;
            Rat mid = (lo + hi) / 2;
            std::array<std::size_t, 2> reg{};
            for (int inc = 0; inc < 2; ++inc) {
                auto [t, s] = S.edges[std::size_t(e)].sides[std::size_t(inc)];
                reg[std::size_t(inc)] = gid(t, region_at(t, ord_to_walk(S, t, s, mid)));
            }
            uf.merge(reg[0], reg[1], 1);
            seg_regions[std::size_t(e)].push_back(reg);
        }
    }

    // Euler characteristic of each complement piece, cut along the component.
    std::map<std::size_t, long long> V, E, F;
    for (int t = 0; t < int(S.triangles.size()); ++t)
        for (int r = 0; r < tri_regions[std::size_t(t)]; ++r) ++F[uf.find(gid(t, r))];
    for (int e = 0; e < int(S.edges.size()); ++e)
        for (const auto& reg : seg_regions[std::size_t(e)]) ++E[uf.find(reg[0])];
    for (const auto& [t, fr] : faces)
        for (const auto& sides : fr.chord_sides) {
            ++E[uf.find(gid(t, sides[0]))];
            ++E[uf.find(gid(t, sides[1]))];
        }
    {
        std::vector<char> seen(std::size_t(S.num_vertices), 0);
        for (int t = 0; t < int(S.triangles.size()); ++t)
            for (int corner = 0; corner < 3; ++corner) {
                int vc = S.triangles[std::size_t(t)].corner_class[std::size_t(corner)];
                if (seen[std::size_t(vc)]) continue;
                seen[std::size_t(vc)] = 1;
                ++V[uf.find(gid(t, region_at(t, Rat(corner))))];
            }
    }
    // Each crossing splits into one copy per bank: the regions of the edge
    // segments before and after it.
    for (int e = 0; e < int(S.edges.size()); ++e)
        for (std::size_t j = 0; j + 1 < seg_regions[std::size_t(e)].size(); ++j) {
            ++V[uf.find(seg_regions[std::size_t(e)][j][0])];
            ++V[uf.find(seg_regions[std::size_t(e)][j + 1][0])];
        }

    // The two sides of the loop.
    int t0 = -1;
    std::size_t inner = 0, outer = 0;
    for (const auto& [t, fr] : faces)
        if (!fr.chord_sides.empty()) {
            t0 = t;
            outer = uf.find(gid(t, fr.chord_sides[0][0]));
            inner = uf.find(gid(t, fr.chord_sides[0][1]));
            break;
        }
    require(t0 >= 0, "Internal", "component with no chords");
    if (inner == outer) return false;
    auto chi = [&](std::size_t root) { return V[root] - E[root] + F[root]; };
    return chi(uf.find(inner)) == 1 || chi(uf.find(outer)) == 1;
}

}  // namespace nk::surf2
