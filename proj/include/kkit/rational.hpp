#pragma once

#include "kkit/base.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <vector>

namespace kkit {

// Exact rational scalar. cpp_rational keeps lowest terms and a positive
// denominator, which is exactly the invariant the file formats assume.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

using Vec = std::vector<Rational>;

inline Rational rat(long long n, long long d = 1) { return Rational(n, d); }

inline std::string rat_str(const Rational& r) {
    std::string n = numerator(r).str();
    if (denominator(r) == 1) return n;
    return n + "/" + denominator(r).str();
}

inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(BigInt(s));
        BigInt num(s.substr(0, slash));
        BigInt den(s.substr(slash + 1));
        require(den > 0, "ParseError", "denominator must be positive in '" + s + "'");
        return Rational(num, den);
    } catch (const Error&) {
        throw;
    } catch (...) {
        fail("ParseError", "not a rational: '" + s + "'");
    }
}

inline Rational rat_abs(const Rational& r) { return r < 0 ? Rational(-r) : r; }

inline bool is_integer(const Rational& r) { return denominator(r) == 1; }

inline BigInt floor_div(const BigInt& a, const BigInt& b) {
    // b > 0 assumed
    BigInt q = a / b, r = a % b;
    if (r != 0 && a < 0) q -= 1;
    return q;
}

inline BigInt rat_floor(const Rational& r) { return floor_div(numerator(r), denominator(r)); }

// gcd of positive rationals: gcd(a/b, c/d) = gcd(a*d, c*b)/(b*d)
inline Rational rat_gcd(const Rational& a, const Rational& b) {
    BigInt n = boost::multiprecision::gcd(numerator(a) * denominator(b),
                                          numerator(b) * denominator(a));
    return Rational(n, denominator(a) * denominator(b));
}

inline std::string vec_str(const Vec& v) {
    std::string s = "(";
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += rat_str(v[i]);
    }
    return s + ")";
}

inline bool vec_is_zero(const Vec& v) {
    for (const auto& x : v)
        if (x != 0) return false;
    return true;
}

// Extended distance value: a rational or +infinity (distance to the empty set).
struct ExtDist {
    std::optional<Rational> v; // nullopt = +inf

    static ExtDist inf() { return ExtDist{}; }
    static ExtDist of(Rational r) { return ExtDist{std::move(r)}; }
    bool is_inf() const { return !v.has_value(); }

    bool operator<(const ExtDist& o) const {
        if (is_inf()) return false;
        if (o.is_inf()) return true;
        return *v < *o.v;
    }
    bool operator<=(const ExtDist& o) const { return !(o < *this); }
    bool operator==(const ExtDist& o) const {
        if (is_inf() || o.is_inf()) return is_inf() == o.is_inf();
        return *v == *o.v;
    }
    std::string str() const { return is_inf() ? "inf" : rat_str(*v); }
};

// strict comparison "d < f" with f possibly infinite
inline bool lt(const Rational& d, const ExtDist& f) {
    return f.is_inf() || d < *f.v;
}

} // namespace kkit
