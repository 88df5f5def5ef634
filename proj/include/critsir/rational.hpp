#pragma once

// Exact rational arithmetic for tests that pin piecewise identities without
// floating-point error. Intermediates run through 128-bit integers and
// results must narrow back to 64 bits; anything larger throws.

#include <cstdint>
#include <ostream>
#include <stdexcept>

#include "errors.hpp"

namespace critsir {

struct Rational {
    long long num = 0;
    long long den = 1; // always > 0, gcd(|num|, den) = 1

    Rational() = default;
    Rational(long long n) : num(n) {}
    Rational(long long n, long long d) { *this = make(n, d); }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make(w(a.num) * b.den + w(b.num) * a.den, w(a.den) * b.den);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return make(w(a.num) * b.den - w(b.num) * a.den, w(a.den) * b.den);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make(w(a.num) * b.num, w(a.den) * b.den);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num == 0) throw DomainError("Rational: division by zero");
        return make(w(a.num) * b.den, w(a.den) * b.num);
    }
    Rational operator-() const {
        Rational r;
        r.num = -num;
        r.den = den;
        return r;
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return w(a.num) * b.den < w(b.num) * a.den;
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
        os << r.num;
        if (r.den != 1) os << '/' << r.den;
        return os;
    }

  private:
    using wide = __int128;
    static wide w(long long v) { return static_cast<wide>(v); }

    static Rational make(wide n, wide d) {
        if (d == 0) throw DomainError("Rational: zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        wide a = n < 0 ? -n : n, b = d;
        while (b != 0) {
            const wide t = a % b;
            a = b;
            b = t;
        }
        if (a > 1) {
            n /= a;
            d /= a;
        }
        constexpr wide lo = static_cast<wide>(INT64_MIN), hi = static_cast<wide>(INT64_MAX);
        if (n < lo || n > hi || d > hi) throw std::overflow_error("Rational: value too large");
        Rational r;
        r.num = static_cast<long long>(n);
        r.den = static_cast<long long>(d);
        return r;
    }
};

} // namespace critsir
