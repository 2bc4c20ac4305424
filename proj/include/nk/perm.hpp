#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>

#include "nk/base.hpp"

namespace nk {

// Permutation of {0,1,2,3}, stored as the image array.
struct Perm4 {
    std::array<std::uint8_t, 4> img{0, 1, 2, 3};

    static Perm4 identity() { return Perm4{}; }

    static Perm4 from_images(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
        Perm4 p{{a, b, c, d}};
        std::uint8_t seen = 0;
        for (auto v : p.img) {
            require(v < 4, "ParseError", "permutation image out of range");
            seen |= std::uint8_t(1u << v);
        }
        require(seen == 0b1111, "ParseError", "permutation images not distinct");
        return p;
    }

    std::uint8_t operator()(std::uint8_t x) const { return img[x]; }

    // (p * q)(x) = p(q(x)).
    friend Perm4 operator*(const Perm4& p, const Perm4& q) {
        Perm4 r;
        for (int x = 0; x < 4; ++x) r.img[x] = p.img[q.img[x]];
        return r;
    }

    Perm4 inverse() const {
        Perm4 r;
        for (std::uint8_t x = 0; x < 4; ++x) r.img[img[x]] = x;
        return r;
    }

    // +1 for even, -1 for odd.
    int sign() const {
        int s = 1;
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                if (img[i] > img[j]) s = -s;
        return s;
    }

    bool is_identity() const { return img == std::array<std::uint8_t, 4>{0, 1, 2, 3}; }

    friend bool operator==(const Perm4&, const Perm4&) = default;
    friend auto operator<=>(const Perm4&, const Perm4&) = default;

    std::string str() const {
        std::string s = "[";
        for (int i = 0; i < 4; ++i) {
            if (i) s += ",";
            s += char('0' + img[i]);
        }
        return s + "]";
    }
};

// All 24 permutations in lexicographic image order.
inline const std::array<Perm4, 24>& all_perm4() {
    static const std::array<Perm4, 24> table = [] {
        std::array<Perm4, 24> t{};
        int n = 0;
        std::array<std::uint8_t, 4> v{0, 1, 2, 3};
        do {
            t[n++].img = v;
        } while (std::next_permutation(v.begin(), v.end()));
        return t;
    }();
    return table;
}

}  // namespace nk
