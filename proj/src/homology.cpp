#include <algorithm>

#include "nk/tri3.hpp"

namespace nk::tri3 {

namespace {

Int abs_int(const Int& v) { return v < 0 ? Int(-v) : v; }

std::array<int, 3> facet_vertices(int f) {
    std::array<int, 3> r{};
    int n = 0;
    for (int v = 0; v < 4; ++v)
        if (v != f) r[n++] = v;
    return r;
}

int facet_map_sign(int f, const Perm4& perm) {
    auto src = facet_vertices(f);
    auto dst = facet_vertices(perm(std::uint8_t(f)));
    std::array<int, 3> image{};
    for (int i = 0; i < 3; ++i) {
        int w = perm(std::uint8_t(src[i]));
        image[i] = int(std::find(dst.begin(), dst.end(), w) - dst.begin());
    }
    int s = 1;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (image[i] > image[j]) s = -s;
    return s;
}

}  // namespace

std::vector<Int> smith_diagonal(std::vector<std::vector<Int>> A) {
    std::size_t rows = A.size();
    std::size_t cols = rows ? A[0].size() : 0;
    std::vector<Int> diag;
    std::size_t t = 0;
    while (t < rows && t < cols) {
        // Minimal nonzero entry of the trailing submatrix as pivot.
        std::size_t pi = t, pj = t;
        bool found = false;
        for (std::size_t i = t; i < rows; ++i)
            for (std::size_t j = t; j < cols; ++j)
                if (A[i][j] != 0 &&
                    (!found || abs_int(A[i][j]) < abs_int(A[pi][pj]))) {
                    pi = i, pj = j, found = true;
                }
        if (!found) break;
        std::swap(A[t], A[pi]);
        for (std::size_t i = t; i < rows; ++i) std::swap(A[i][t], A[i][pj]);

        bool clean = false;
        while (!clean) {
            clean = true;
            for (std::size_t i = t + 1; i < rows; ++i) {
                if (A[i][t] == 0) continue;
                Int q = A[i][t] / A[t][t];
                for (std::size_t j = t; j < cols; ++j) A[i][j] -= q * A[t][j];
                if (A[i][t] != 0) {
                    std::swap(A[t], A[i]);
                    clean = false;
                }
            }
            for (std::size_t j = t + 1; j < cols; ++j) {
                if (A[t][j] == 0) continue;
                Int q = A[t][j] / A[t][t];
                for (std::size_t i = t; i < rows; ++i) A[i][j] -= q * A[i][t];
                if (A[t][j] != 0) {
                    for (std::size_t i = t; i < rows; ++i) std::swap(A[i][t], A[i][j]);
                    clean = false;
                }
            }
            if (!clean) continue;
            // Pivot must divide the rest of the submatrix.
            for (std::size_t i = t + 1; i < rows && clean; ++i)
                for (std::size_t j = t + 1; j < cols && clean; ++j)
                    if (A[i][j] % A[t][t] != 0) {
                        for (std::size_t c = t; c < cols; ++c) A[t][c] += A[i][c];
                        clean = false;
                    }
        }
        if (A[t][t] < 0) A[t][t] = -A[t][t];
        diag.push_back(A[t][t]);
        ++t;
    }
    return diag;
}

std::vector<AbelianGroup> chain_homology(const std::vector<int>& dims,
                                         const std::vector<std::vector<std::vector<Int>>>& boundary) {
    std::size_t n = dims.size();
    // boundary[k] maps C_k -> C_{k-1}; boundary[0] is empty.
    std::vector<std::vector<Int>> factors(n + 1);
    std::vector<int> rank(n + 1, 0);
    for (std::size_t k = 1; k < n; ++k) {
        factors[k] = smith_diagonal(boundary[k]);
        rank[k] = int(factors[k].size());
    }
    std::vector<AbelianGroup> H(n);
    for (std::size_t k = 0; k < n; ++k) {
        AbelianGroup g;
        int rk1 = (k + 1 < n) ? rank[k + 1] : 0;
        g.rank = dims[k] - rank[k] - rk1;
        require(g.rank >= 0, "Internal", "chain complex ranks inconsistent");
        if (k + 1 < n)
            for (const Int& d : factors[k + 1])
                if (d > 1) g.torsion.push_back(d);
        std::sort(g.torsion.begin(), g.torsion.end());
        H[k] = std::move(g);
    }
    return H;
}

std::string AbelianGroup::str() const {
    if (is_trivial()) return "0";
    std::string s;
    if (rank == 1)
        s = "Z";
    else if (rank > 1)
        s = "Z^" + std::to_string(rank);
    for (const Int& d : torsion) {
        if (!s.empty()) s += " + ";
        s += "Z/" + d.str();
    }
    return s;
}

Summary summarize(const Triangulation3& T) {
    Summary s;
    s.orientable = T.orientable();
    s.closed = T.closed();
    s.euler = T.euler_characteristic();

    int V = T.num_vertices(), E = T.num_edges(), F = T.num_faces(), n = T.num_tets();

    std::vector<std::vector<std::vector<Int>>> d(4);
    d[1].assign(std::size_t(V), std::vector<Int>(std::size_t(E), 0));
    for (int e = 0; e < E; ++e) {
        auto [t, ei] = T.edge_rep(e);
        int a = kEdgeEnds[ei][0], b = kEdgeEnds[ei][1];
        d[1][std::size_t(T.vertex_class(t, b))][std::size_t(e)] += 1;
        d[1][std::size_t(T.vertex_class(t, a))][std::size_t(e)] -= 1;
    }
    d[2].assign(std::size_t(E), std::vector<Int>(std::size_t(F), 0));
    for (int f = 0; f < F; ++f) {
        auto [t, ft] = T.face_rep(f);
        auto xv = facet_vertices(ft);
        constexpr std::array<std::array<int, 3>, 3> pairs{{{1, 2, +1}, {0, 2, -1}, {0, 1, +1}}};
        for (const auto& p : pairs) {
            int e = edge_index(xv[p[0]], xv[p[1]]);
            d[2][std::size_t(T.edge_class(t, e))][std::size_t(f)] += p[2] * T.edge_sign(t, e);
        }
    }
    d[3].assign(std::size_t(F), std::vector<Int>(std::size_t(n), 0));
    for (int t = 0; t < n; ++t)
        for (int f = 0; f < 4; ++f) {
            int cls = T.face_class(t, f);
            auto [t0, f0] = T.face_rep(cls);
            int rel = (t0 == t && f0 == f) ? 1 : facet_map_sign(f0, T.gluing(t0, f0).perm);
            int sgn = (f % 2 == 0) ? 1 : -1;
            d[3][std::size_t(cls)][std::size_t(t)] += sgn * rel;
        }

    // d composed twice must vanish.
    for (int k = 2; k <= 3; ++k) {
        const auto& A = d[k - 1];
        const auto& B = d[k];
        if (A.empty() || B.empty()) continue;
        for (std::size_t i = 0; i < A.size(); ++i)
            for (std::size_t j = 0; j < B[0].size(); ++j) {
                Int acc = 0;
                for (std::size_t m = 0; m < B.size(); ++m) acc += A[i][m] * B[m][j];
                require(acc == 0, "Internal", "boundary composition not zero");
            }
    }

    auto H = chain_homology({V, E, F, n}, d);
    for (int k = 0; k < 4; ++k) s.homology[std::size_t(k)] = H[std::size_t(k)];
    return s;
}

}  // namespace nk::tri3
