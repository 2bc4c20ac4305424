#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace nk {

// Exact arithmetic everywhere: solution coordinates and ordinates must never
// overflow or round.
using Int = boost::multiprecision::cpp_int;
using Rat = boost::rational<Int>;

inline std::string to_string(const Int& v) { return v.str(); }

inline std::string to_string(const Rat& v) {
    if (v.denominator() == 1) return v.numerator().str();
    return v.numerator().str() + "/" + v.denominator().str();
}

// Typed error with a stable machine-readable code; the CLI maps codes to JSON
// and exit status, tests assert on them.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool ok, const std::string& code, const std::string& message) {
    if (!ok) fail(code, message);
}

// Enumeration budget; 0 means unbounded. Exceeding a bound raises
// BudgetExceeded or marks the result incomplete, per operation contract.
struct Budget {
    long long max_coordinate = 0;
    long long max_solutions = 0;
    long long max_steps = 0;
};

// Union-find over 0..n-1 with an orientation parity bit per element relative to
// its root. merge() returns false on a parity contradiction (used to detect
// edges glued to themselves in reverse and non-orientable gluing cycles).
class SignedPartition {
public:
    explicit SignedPartition(std::size_t n) : parent_(n), sign_(n, 1) {
        for (std::size_t i = 0; i < n; ++i) parent_[i] = i;
    }

    std::size_t find(std::size_t x) {
        if (parent_[x] == x) return x;
        std::size_t root = find(parent_[x]);
        sign_[x] *= sign_[parent_[x]];
        parent_[x] = root;
        return root;
    }

    // Sign of x relative to its class root.
    int sign(std::size_t x) {
        find(x);
        return sign_[x];
    }

    // Declare x ~ y with relative sign rel; false iff this contradicts an
    // earlier declaration.
    bool merge(std::size_t x, std::size_t y, int rel) {
        std::size_t rx = find(x), ry = find(y);
        // find() compressed both, so their stored signs are relative to the
        // roots; read them before relinking mutates anything.
        int sx = sign_[x], sy = sign_[y];
        if (rx == ry) return sx * sy == rel;
        parent_[ry] = rx;
        sign_[ry] = sx * rel * sy;
        return true;
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<int> sign_;
};

// boost::rational's symmetric integer comparisons re-enter themselves as
// reversed candidates when the integer needs a conversion to Int, so mixed
// equality never terminates at runtime. Deleting it forces Rat on both sides.
bool operator==(const Rat&, int) = delete;
bool operator==(int, const Rat&) = delete;
bool operator!=(const Rat&, int) = delete;
bool operator!=(int, const Rat&) = delete;
bool operator==(const Rat&, const Int&) = delete;
bool operator==(const Int&, const Rat&) = delete;
bool operator!=(const Rat&, const Int&) = delete;
bool operator!=(const Int&, const Rat&) = delete;

}  // namespace nk
