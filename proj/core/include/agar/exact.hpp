#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace agar {

using u128 = unsigned __int128;

/* Non-negative dyadic rational num / 2^exp, kept normalized (num odd or zero).
 * Wide enough for every micro-universe quantity at L <= 24; comparisons and
 * the few products we need stay inside 128 bits. */
struct Dyadic {
    std::uint64_t num = 0;
    int exp = 0;

    Dyadic() = default;
    Dyadic(std::uint64_t n, int e) : num(n), exp(e) { normalize(); }

    void normalize() {
        if (num == 0) {
            exp = 0;
            return;
        }
        while ((num & 1) == 0 && exp > 0) {
            num >>= 1;
            --exp;
        }
    }

    double to_double() const {
        double v = static_cast<double>(num);
        for (int i = 0; i < exp; ++i) v /= 2.0;
        return v;
    }

    std::string to_string() const {
        return std::to_string(num) + "/2^" + std::to_string(exp);
    }
};

inline bool operator==(const Dyadic& a, const Dyadic& b) {
    return a.num == b.num && a.exp == b.exp;
}

inline bool operator<(const Dyadic& a, const Dyadic& b) {
    // a.num / 2^a.exp < b.num / 2^b.exp  <=>  a.num * 2^(b.exp - c) < b.num * 2^(a.exp - c)
    int common = a.exp < b.exp ? a.exp : b.exp;
    u128 lhs = static_cast<u128>(a.num) << (b.exp - common);
    u128 rhs = static_cast<u128>(b.num) << (a.exp - common);
    return lhs < rhs;
}

inline bool operator<=(const Dyadic& a, const Dyadic& b) { return !(b < a); }

/* Exact non-negative rational with 64-bit parts; only what the
 * posterior/tail checks need (comparison against dyadic bounds). */
struct Rational {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    Rational() = default;
    Rational(std::uint64_t n, std::uint64_t d) : num(n), den(d) {
        if (d == 0) throw std::invalid_argument("Rational: zero denominator");
        reduce();
    }

    void reduce() {
        std::uint64_t a = num, b = den;
        while (b) {
            std::uint64_t t = a % b;
            a = b;
            b = t;
        }
        if (a > 1) {
            num /= a;
            den /= a;
        }
    }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline bool operator==(const Rational& a, const Rational& b) {
    return static_cast<u128>(a.num) * b.den == static_cast<u128>(b.num) * a.den;
}

inline bool operator<(const Rational& a, const Rational& b) {
    return static_cast<u128>(a.num) * b.den < static_cast<u128>(b.num) * a.den;
}

inline bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }

}  // namespace agar
