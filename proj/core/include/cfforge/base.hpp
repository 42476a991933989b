#pragma once

#include <gmpxx.h>

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cf {

using Rational = mpq_class;
using BigInt = mpz_class;

enum class ErrorKind { Type, Usage, Validation, Resource, Precondition };

// Single exception type; `kind` drives CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind k, const std::string& msg) : std::runtime_error(msg), kind_(k) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind k, const std::string& msg) { throw Error(k, msg); }

// Overflow-checked int64 arithmetic; group coordinates never silently wrap.
inline int64_t add_ck(int64_t a, int64_t b) {
    int64_t r;
    if (__builtin_add_overflow(a, b, &r)) fail(ErrorKind::Resource, "integer overflow in group arithmetic");
    return r;
}
inline int64_t sub_ck(int64_t a, int64_t b) {
    int64_t r;
    if (__builtin_sub_overflow(a, b, &r)) fail(ErrorKind::Resource, "integer overflow in group arithmetic");
    return r;
}
inline int64_t mul_ck(int64_t a, int64_t b) {
    int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) fail(ErrorKind::Resource, "integer overflow in group arithmetic");
    return r;
}
inline int64_t floor_mod(int64_t a, int64_t m) {
    int64_t r = a % m;
    return r < 0 ? r + m : r;
}

// Canonical group element: a short tuple of integers. Its meaning is fixed by the GroupCtx.
struct Element {
    static constexpr int kMax = 4;
    std::array<int64_t, kMax> v{};
    uint8_t n = 0;

    Element() = default;
    Element(std::initializer_list<int64_t> xs) {
        if (xs.size() > kMax) fail(ErrorKind::Type, "element arity too large");
        for (int64_t x : xs) v[n++] = x;
    }
    static Element of(const std::vector<int64_t>& xs) {
        Element e;
        if (xs.size() > kMax) fail(ErrorKind::Type, "element arity too large");
        for (int64_t x : xs) e.v[e.n++] = x;
        return e;
    }
    int size() const { return n; }
    int64_t operator[](int i) const { return v[i]; }
    int64_t& operator[](int i) { return v[i]; }

    friend bool operator==(const Element& a, const Element& b) {
        if (a.n != b.n) return false;
        for (int i = 0; i < a.n; ++i)
            if (a.v[i] != b.v[i]) return false;
        return true;
    }
    friend std::strong_ordering operator<=>(const Element& a, const Element& b) {
        if (a.n != b.n) return a.n <=> b.n;
        for (int i = 0; i < a.n; ++i)
            if (a.v[i] != b.v[i]) return a.v[i] <=> b.v[i];
        return std::strong_ordering::equal;
    }
    std::string str() const;
};

struct ElementHash {
    size_t operator()(const Element& e) const noexcept {
        uint64_t h = 0x9e3779b97f4a7c15ull ^ e.n;
        for (int i = 0; i < e.n; ++i) {
            h ^= static_cast<uint64_t>(e.v[i]) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return h;
    }
};

using Key = std::vector<int64_t>;
struct KeyHash {
    size_t operator()(const Key& k) const noexcept {
        uint64_t h = 0xcbf29ce484222325ull ^ k.size();
        for (int64_t x : k) h = (h ^ static_cast<uint64_t>(x)) * 0x100000001b3ull + (h >> 29);
        return h;
    }
};

std::string rat_str(const Rational& q);
Rational parse_rational(const std::string& s);
Rational pow2(int k);  // 2^k for any integer k
Rational rpow(const Rational& base, int k);

}  // namespace cf
