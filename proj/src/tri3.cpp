#include "nk/tri3.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace nk::tri3 {

int edge_index(int a, int b) {
    if (a > b) std::swap(a, b);
    for (int e = 0; e < 6; ++e)
        if (kEdgeEnds[e][0] == a && kEdgeEnds[e][1] == b) return e;
    fail("Internal", "bad edge pair");
}

namespace {

// The two facets of a tetrahedron flanking edge (a,b): the other two labels.
std::array<int, 2> flanking_facets(int a, int b) {
    std::array<int, 2> r{};
    int n = 0;
    for (int v = 0; v < 4; ++v)
        if (v != a && v != b) r[n++] = v;
    return r;
}

// Vertices of facet f, increasing.
std::array<int, 3> facet_vertices(int f) {
    std::array<int, 3> r{};
    int n = 0;
    for (int v = 0; v < 4; ++v)
        if (v != f) r[n++] = v;
    return r;
}

}  // namespace

Triangulation3 Triangulation3::from_gluings(
    int num_tets, const std::vector<std::tuple<int, int, int, int, Perm4>>& gluings) {
    require(num_tets > 0, "ParseError", "no tetrahedra");
    Triangulation3 T;
    T.glue_.assign(num_tets, {});
    for (const auto& [t, f, t2, f2, perm] : gluings) {
        require(t >= 0 && t < num_tets && t2 >= 0 && t2 < num_tets && f >= 0 && f < 4 && f2 >= 0 && f2 < 4,
                "ParseError", "gluing index out of range");
        require(int(perm(std::uint8_t(f))) == f2, "ParseError", "permutation does not map facet to facet");
        require(T.glue_[t][f].is_boundary() && T.glue_[t2][f2].is_boundary(), "ParseError",
                "facet glued twice");
        require(!(t == t2 && f == f2), "NonManifold", "facet glued to itself");
        T.glue_[t][f] = Gluing{t2, perm};
        T.glue_[t2][f2] = Gluing{t, perm.inverse()};
    }
    T.finalize();
    return T;
}

Triangulation3 Triangulation3::parse(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    Triangulation3 T;
    std::vector<std::array<std::optional<std::pair<int, Perm4>>, 4>> rows;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv(line);
        while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
        while (!sv.empty() && (sv.back() == ' ' || sv.back() == '\t' || sv.back() == '\r'))
            sv.remove_suffix(1);
        if (sv.empty() || sv.front() == '#') continue;

        std::istringstream ls{std::string(sv)};
        std::string kw;
        int idx = -1;
        char colon = 0;
        ls >> kw >> idx >> colon;
        require(kw == "tet" && colon == ':' && !ls.fail(), "ParseError",
                "line " + std::to_string(lineno) + ": expected 'tet <i>: ...'");
        require(idx == int(rows.size()), "ParseError",
                "line " + std::to_string(lineno) + ": tetrahedra must be numbered consecutively from 0");
        std::array<std::optional<std::pair<int, Perm4>>, 4> row;
        for (int f = 0; f < 4; ++f) {
            std::string tok;
            ls >> tok;
            require(!tok.empty(), "ParseError",
                    "line " + std::to_string(lineno) + ": expected 4 gluing fields");
            if (tok == "bdry") continue;
            auto slash = tok.find('/');
            require(slash != std::string::npos && slash > 0 && tok.size() == slash + 5, "ParseError",
                    "line " + std::to_string(lineno) + ": bad gluing token '" + tok + "'");
            int target = 0;
            try {
                std::size_t used = 0;
                target = std::stoi(tok.substr(0, slash), &used);
                require(used == slash && target >= 0, "ParseError", "bad index");
            } catch (const Error&) {
                throw;
            } catch (...) {
                fail("ParseError", "line " + std::to_string(lineno) + ": bad tetrahedron index in '" + tok + "'");
            }
            std::array<std::uint8_t, 4> img{};
            for (int i = 0; i < 4; ++i) {
                char c = tok[slash + 1 + i];
                require(c >= '0' && c <= '3', "ParseError",
                        "line " + std::to_string(lineno) + ": bad permutation in '" + tok + "'");
                img[i] = std::uint8_t(c - '0');
            }
            row[f] = {target, Perm4::from_images(img[0], img[1], img[2], img[3])};
        }
        std::string extra;
        ls >> extra;
        require(extra.empty() || extra[0] == '#', "ParseError",
                "line " + std::to_string(lineno) + ": trailing content '" + extra + "'");
        rows.push_back(row);
    }
    require(!rows.empty(), "ParseError", "no tetrahedra");

    int n = int(rows.size());
    T.glue_.assign(n, {});
    for (int t = 0; t < n; ++t)
        for (int f = 0; f < 4; ++f) {
            if (!rows[t][f]) continue;
            auto [t2, perm] = *rows[t][f];
            require(t2 < n, "ParseError", "gluing target " + std::to_string(t2) + " out of range");
            int f2 = perm(std::uint8_t(f));
            require(!(t2 == t && f2 == f), "NonManifold", "facet glued to itself");
            require(rows[t2][f2].has_value(), "NotInvolution",
                    "facet " + std::to_string(t2) + ":" + std::to_string(f2) + " missing reverse gluing");
            auto [back, bperm] = *rows[t2][f2];
            require(back == t && bperm == perm.inverse(), "NotInvolution",
                    "gluing " + std::to_string(t) + ":" + std::to_string(f) + " not matched by its reverse");
            T.glue_[t][f] = Gluing{t2, perm};
        }
    T.finalize();
    return T;
}

std::string Triangulation3::serialize() const {
    std::string out;
    for (int t = 0; t < num_tets(); ++t) {
        out += "tet " + std::to_string(t) + ":";
        for (int f = 0; f < 4; ++f) {
            const Gluing& g = glue_[t][f];
            if (g.is_boundary()) {
                out += " bdry";
            } else {
                out += " " + std::to_string(g.tet) + "/";
                for (int i = 0; i < 4; ++i) out += char('0' + g.perm(std::uint8_t(i)));
            }
        }
        out += "\n";
    }
    return out;
}

void Triangulation3::finalize() {
    int n = num_tets();

    // Face classes: boundary facets are singletons, glued pairs merge.
    face_class_.assign(4 * n, -1);
    num_faces_ = 0;
    face_rep_.clear();
    face_boundary_.clear();
    for (int t = 0; t < n; ++t)
        for (int f = 0; f < 4; ++f) {
            if (face_class_[4 * t + f] >= 0) continue;
            face_class_[4 * t + f] = num_faces_;
            face_rep_.emplace_back(t, f);
            const Gluing& g = glue_[t][f];
            if (g.is_boundary()) {
                face_boundary_.push_back(1);
            } else {
                face_class_[4 * g.tet + g.perm(std::uint8_t(f))] = num_faces_;
                face_boundary_.push_back(0);
            }
            ++num_faces_;
        }

    // Edge classes with orientation parity. An edge identified with its own
    // reverse is not a manifold point.
    SignedPartition edges(std::size_t(6) * n);
    for (int t = 0; t < n; ++t)
        for (int f = 0; f < 4; ++f) {
            const Gluing& g = glue_[t][f];
            if (g.is_boundary()) continue;
            auto fv = facet_vertices(f);
            for (int i = 0; i < 3; ++i)
                for (int j = i + 1; j < 3; ++j) {
                    int a = fv[i], b = fv[j];
                    int a2 = g.perm(std::uint8_t(a)), b2 = g.perm(std::uint8_t(b));
                    int rel = a2 < b2 ? 1 : -1;
                    bool ok = edges.merge(std::size_t(6) * t + edge_index(a, b),
                                          std::size_t(6) * g.tet + edge_index(a2, b2), rel);
                    require(ok, "NonManifold",
                            "edge of tet " + std::to_string(t) + " identified with its own reverse");
                }
        }
    edge_class_.assign(6 * n, -1);
    edge_sign_.assign(6 * n, 0);
    num_edges_ = 0;
    edge_rep_.clear();
    for (int i = 0; i < 6 * n; ++i) {
        std::size_t root = edges.find(std::size_t(i));
        if (edge_class_[root] < 0) {
            edge_class_[root] = num_edges_++;
            edge_rep_.emplace_back(int(root) / 6, int(root) % 6);
        }
        edge_class_[i] = edge_class_[root];
        edge_sign_[i] = edges.sign(std::size_t(i));
    }

    // Vertex classes.
    SignedPartition verts(std::size_t(4) * n);
    for (int t = 0; t < n; ++t)
        for (int f = 0; f < 4; ++f) {
            const Gluing& g = glue_[t][f];
            if (g.is_boundary()) continue;
            for (int v = 0; v < 4; ++v)
                if (v != f) verts.merge(std::size_t(4) * t + v, std::size_t(4) * g.tet + g.perm(std::uint8_t(v)), 1);
        }
    vertex_class_.assign(4 * n, -1);
    num_vertices_ = 0;
    vertex_rep_.clear();
    for (int i = 0; i < 4 * n; ++i) {
        std::size_t root = verts.find(std::size_t(i));
        if (vertex_class_[root] < 0) {
            vertex_class_[root] = num_vertices_++;
            vertex_rep_.emplace_back(int(root) / 4, int(root) % 4);
        }
        vertex_class_[i] = vertex_class_[root];
    }

    // Boundary flags. A vertex is boundary iff some incident facet is.
    face_boundary_.resize(num_faces_);
    edge_boundary_.assign(num_edges_, 0);
    vertex_boundary_.assign(num_vertices_, 0);
    closed_ = true;
    for (int t = 0; t < n; ++t)
        for (int f = 0; f < 4; ++f) {
            if (!glue_[t][f].is_boundary()) continue;
            closed_ = false;
            auto fv = facet_vertices(f);
            for (int i = 0; i < 3; ++i) {
                vertex_boundary_[vertex_class_[4 * t + fv[i]]] = 1;
                for (int j = i + 1; j < 3; ++j)
                    edge_boundary_[edge_class_[6 * t + edge_index(fv[i], fv[j])]] = 1;
            }
        }

    // Edge degrees by walking wedges around each class. Walk state: directed
    // edge (a,b) in tet t, about to exit through flanking facet x. Interior
    // classes close into one cycle, boundary classes form one chain between
    // two boundary facets.
    edge_degree_.assign(num_edges_, 0);
    {
        std::vector<char> done(num_edges_, 0);
        for (int t0 = 0; t0 < n && int(std::count(done.begin(), done.end(), 1)) < num_edges_; ++t0)
            for (int e0 = 0; e0 < 6; ++e0) {
                int cls = edge_class_[6 * t0 + e0];
                if (done[cls]) continue;
                done[cls] = 1;
                int a0 = kEdgeEnds[e0][0], b0 = kEdgeEnds[e0][1];
                // Counts wedges from the start state through the exit facet
                // until the boundary (true) or back to the start state (false).
                auto walk = [&](int t, int a, int b, int exit_facet) {
                    int count = 0;
                    int start_t = t, start_a = a, start_b = b, start_exit = exit_facet;
                    while (true) {
                        ++count;
                        const Gluing& g = glue_[t][exit_facet];
                        if (g.is_boundary()) return std::pair{count, true};
                        int t2 = g.tet;
                        int a2 = g.perm(std::uint8_t(a)), b2 = g.perm(std::uint8_t(b));
                        int entered = g.perm(std::uint8_t(exit_facet));
                        auto fl = flanking_facets(a2, b2);
                        int exit2 = fl[0] == entered ? fl[1] : fl[0];
                        t = t2, a = a2, b = b2, exit_facet = exit2;
                        if (t == start_t && a == start_a && b == start_b && exit_facet == start_exit)
                            return std::pair{count, false};
                    }
                };
                auto fl = flanking_facets(a0, b0);
                auto [cnt, hit_bdry] = walk(t0, a0, b0, fl[0]);
                if (!hit_bdry) {
                    edge_degree_[cls] = cnt;
                } else {
                    // Chain: walk the other way too; the start wedge is counted twice.
                    auto [cnt2, hb2] = walk(t0, a0, b0, fl[1]);
                    require(hb2, "Internal", "edge walk inconsistent");
                    edge_degree_[cls] = cnt + cnt2 - 1;
                }
            }
    }

    // Vertex links: one triangle per (tet, vertex) corner, sides on the three
    // facets at the vertex, glued by the facet maps. Each class's link must be
    // a sphere (interior vertex) or a disk (boundary vertex).
    {
        // Corner points: (t, v, w) = point of the link triangle at (t,v) on edge (v,w).
        auto corner_id = [n](int t, int v, int w) {
            return (std::size_t(t) * 4 + v) * 4 + w;
        };
        SignedPartition pts(std::size_t(16) * n);
        long long glued_sides = 0;
        for (int t = 0; t < n; ++t)
            for (int f = 0; f < 4; ++f) {
                const Gluing& g = glue_[t][f];
                if (g.is_boundary()) continue;
                for (int v = 0; v < 4; ++v) {
                    if (v == f) continue;
                    ++glued_sides;
                    for (int w = 0; w < 4; ++w) {
                        if (w == v || w == f) continue;
                        pts.merge(corner_id(t, v, w),
                                  corner_id(g.tet, g.perm(std::uint8_t(v)), g.perm(std::uint8_t(w))), 1);
                    }
                }
            }
        (void)glued_sides;
        // Per vertex class: F = corners, E = glued side pairs + boundary sides,
        // V = corner point classes.
        std::vector<long long> F(num_vertices_, 0), Eb(num_vertices_, 0), Ei2(num_vertices_, 0);
        for (int t = 0; t < n; ++t)
            for (int v = 0; v < 4; ++v) {
                int vc = vertex_class_[4 * t + v];
                ++F[vc];
                for (int f = 0; f < 4; ++f) {
                    if (f == v) continue;
                    if (glue_[t][f].is_boundary())
                        ++Eb[vc];
                    else
                        ++Ei2[vc];  // counted once per side, pairs count twice
                }
            }
        std::vector<long long> V(num_vertices_, 0);
        std::vector<char> seen(std::size_t(16) * n, 0);
        for (int t = 0; t < n; ++t)
            for (int v = 0; v < 4; ++v)
                for (int w = 0; w < 4; ++w) {
                    if (w == v) continue;
                    std::size_t root = pts.find(corner_id(t, v, w));
                    if (!seen[root]) {
                        seen[root] = 1;
                        ++V[vertex_class_[4 * t + v]];
                    }
                }
        for (int vc = 0; vc < num_vertices_; ++vc) {
            require(Ei2[vc] % 2 == 0, "Internal", "side pairing parity");
            long long E = Eb[vc] + Ei2[vc] / 2;
            long long chi = V[vc] - E + F[vc];
            bool has_bdry = Eb[vc] > 0;
            if (has_bdry)
                require(chi == 1, "NonManifold",
                        "vertex class " + std::to_string(vc) + " has a non-disk link");
            else
                require(chi == 2, "NonManifold",
                        "vertex class " + std::to_string(vc) + " has a non-sphere link");
            require(bool(vertex_boundary_[vc]) == has_bdry, "Internal", "boundary flag mismatch");
        }
    }

    // Components over the face-gluing graph.
    component_.assign(n, -1);
    num_components_ = 0;
    for (int t0 = 0; t0 < n; ++t0) {
        if (component_[t0] >= 0) continue;
        std::vector<int> stack{t0};
        component_[t0] = num_components_;
        while (!stack.empty()) {
            int t = stack.back();
            stack.pop_back();
            for (int f = 0; f < 4; ++f) {
                const Gluing& g = glue_[t][f];
                if (!g.is_boundary() && component_[g.tet] < 0) {
                    component_[g.tet] = num_components_;
                    stack.push_back(g.tet);
                }
            }
        }
        ++num_components_;
    }

    // Orientability: s(t2) = -s(t) * sign(perm) must be consistent.
    SignedPartition orient{std::size_t(n)};
    orientable_ = true;
    for (int t = 0; t < n && orientable_; ++t)
        for (int f = 0; f < 4; ++f) {
            const Gluing& g = glue_[t][f];
            if (g.is_boundary()) continue;
            if (!orient.merge(std::size_t(t), std::size_t(g.tet), -g.perm.sign())) {
                orientable_ = false;
                break;
            }
        }
    orientation_.assign(n, 0);
    if (orientable_) {
        // Root of each component gets +1.
        for (int t = 0; t < n; ++t) orientation_[t] = orient.sign(std::size_t(t));
        std::vector<int> comp_fix(num_components_, 0);
        for (int t = 0; t < n; ++t)
            if (!comp_fix[component_[t]]) comp_fix[component_[t]] = orientation_[t];
        for (int t = 0; t < n; ++t) orientation_[t] *= comp_fix[component_[t]];
    }
}

int Triangulation3::orientation(int tet) const {
    require(orientable_, "NotOrientable", "orientation requested on a non-orientable triangulation");
    return orientation_[tet];
}

Triangulation3 Triangulation3::component_triangulation(int comp, std::vector<int>* tet_map) const {
    std::vector<int> mine;
    std::vector<int> newidx(num_tets(), -1);
    for (int t = 0; t < num_tets(); ++t)
        if (component_[t] == comp) {
            newidx[t] = int(mine.size());
            mine.push_back(t);
        }
    require(!mine.empty(), "ParseError", "no such component");
    std::vector<std::tuple<int, int, int, int, Perm4>> gl;
    for (int t : mine)
        for (int f = 0; f < 4; ++f) {
            const Gluing& g = glue_[t][f];
            if (g.is_boundary()) continue;
            int t2 = newidx[g.tet];
            int f2 = g.perm(std::uint8_t(f));
            if (std::make_pair(newidx[t], f) < std::make_pair(t2, f2))
                gl.emplace_back(newidx[t], f, t2, f2, g.perm);
        }
    if (tet_map) *tet_map = mine;
    return from_gluings(int(mine.size()), gl);
}

Triangulation3 from_labeled_tets(const std::vector<std::array<long long, 4>>& tets) {
    require(!tets.empty(), "ParseError", "no tetrahedra");
    std::map<std::array<long long, 3>, std::vector<std::pair<int, int>>> by_triple;
    for (int t = 0; t < int(tets.size()); ++t) {
        const auto& ids = tets[std::size_t(t)];
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                require(ids[std::size_t(i)] != ids[std::size_t(j)], "ParseError",
                        "tetrahedron " + std::to_string(t) + " repeats a vertex id");
        for (int f = 0; f < 4; ++f) {
            std::array<long long, 3> tri{};
            int n = 0;
            for (int v = 0; v < 4; ++v)
                if (v != f) tri[std::size_t(n++)] = ids[std::size_t(v)];
            std::sort(tri.begin(), tri.end());
            by_triple[tri].emplace_back(t, f);
        }
    }
    std::vector<std::tuple<int, int, int, int, Perm4>> gl;
    for (const auto& [tri, inc] : by_triple) {
        require(inc.size() <= 2, "NonManifold", "vertex triple shared by more than two facets");
        if (inc.size() < 2) continue;
        auto [t1, f1] = inc[0];
        auto [t2, f2] = inc[1];
        std::array<std::uint8_t, 4> img{};
        img[std::size_t(f1)] = std::uint8_t(f2);
        for (int v = 0; v < 4; ++v) {
            if (v == f1) continue;
            long long id = tets[std::size_t(t1)][std::size_t(v)];
            for (int w = 0; w < 4; ++w)
                if (w != f2 && tets[std::size_t(t2)][std::size_t(w)] == id) img[std::size_t(v)] = std::uint8_t(w);
        }
        gl.emplace_back(t1, f1, t2, f2, Perm4::from_images(img[0], img[1], img[2], img[3]));
    }
    return Triangulation3::from_gluings(int(tets.size()), gl);
}

Triangulation3 disjoint_union(const Triangulation3& a, const Triangulation3& b) {
    int na = a.num_tets();
    std::vector<std::tuple<int, int, int, int, Perm4>> gl;
    auto add = [&](const Triangulation3& T, int off) {
        for (int t = 0; t < T.num_tets(); ++t)
            for (int f = 0; f < 4; ++f) {
                const Gluing& g = T.gluing(t, f);
                if (g.is_boundary()) continue;
                int f2 = g.perm(std::uint8_t(f));
                if (std::make_pair(t, f) < std::make_pair(g.tet, f2))
                    gl.emplace_back(t + off, f, g.tet + off, f2, g.perm);
            }
    };
    add(a, 0);
    add(b, na);
    return Triangulation3::from_gluings(na + b.num_tets(), gl);
}

}  // namespace nk::tri3
