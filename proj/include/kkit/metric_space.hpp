#pragma once

#include "kkit/rational.hpp"

#include <boost/dynamic_bitset.hpp>

#include <memory>
#include <vector>

namespace kkit {

// Finite model of the compact metrizable space X: a point list with an exact
// pairwise distance table. One closure shell is a dilation by the minimal
// positive pairwise distance (for the circle/line presets that is the grid
// resolution of X).
struct FiniteMetricSpace {
    size_t npoints = 0;
    std::vector<Vec> coords; // optional labels; may be empty vectors
    std::vector<Rational> d; // npoints^2
    Rational shell;          // min positive distance

    FiniteMetricSpace() = default;
    FiniteMetricSpace(size_t n, std::vector<Rational> table, std::vector<Vec> cs = {})
        : npoints(n), coords(std::move(cs)), d(std::move(table)) {
        require(d.size() == n * n, "ShapeMismatch", "distance table size");
        validate();
        shell = 0;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j)
                if (shell == 0 || dist(i, j) < shell) shell = dist(i, j);
    }

    const Rational& dist(size_t i, size_t j) const { return d[i * npoints + j]; }

    void validate() const {
        for (size_t i = 0; i < npoints; ++i)
            require(dist(i, i) == 0, "MetricViolation", "d(p,p) != 0 at p=" + std::to_string(i));
        for (size_t i = 0; i < npoints; ++i)
            for (size_t j = 0; j < npoints; ++j) {
                require(dist(i, j) == dist(j, i), "MetricViolation",
                        "asymmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
                if (i != j)
                    require(dist(i, j) > 0, "MetricViolation",
                            "zero distance between distinct points " + std::to_string(i) + "," +
                                std::to_string(j));
            }
        for (size_t i = 0; i < npoints; ++i)
            for (size_t j = 0; j < npoints; ++j)
                for (size_t k = 0; k < npoints; ++k)
                    require(dist(i, k) <= dist(i, j) + dist(j, k), "MetricViolation",
                            "triangle fails at (" + std::to_string(i) + "," + std::to_string(j) +
                                "," + std::to_string(k) + ")");
    }

    // n points 0, 1/n, ..., (n-1)/n on R/Z with geodesic distance
    static FiniteMetricSpace circle(size_t n) {
        std::vector<Rational> t(n * n);
        std::vector<Vec> cs(n);
        for (size_t i = 0; i < n; ++i) cs[i] = Vec{Rational((long long)i, (long long)n)};
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) {
                long long k = (long long)(i > j ? i - j : j - i);
                long long alt = (long long)n - k;
                t[i * n + j] = Rational(std::min(k, alt), (long long)n);
            }
        return FiniteMetricSpace(n, std::move(t), std::move(cs));
    }

    // n evenly spaced points on [a,b]
    static FiniteMetricSpace line(const Rational& a, const Rational& b, size_t n) {
        require(n >= 2 && a < b, "BadGrid", "line preset needs n >= 2 and a < b");
        Rational step = (b - a) / Rational((long long)n - 1);
        std::vector<Rational> t(n * n);
        std::vector<Vec> cs(n);
        for (size_t i = 0; i < n; ++i) cs[i] = Vec{a + Rational((long long)i) * step};
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j)
                t[i * n + j] = rat_abs(cs[i][0] - cs[j][0]);
        return FiniteMetricSpace(n, std::move(t), std::move(cs));
    }

    std::optional<size_t> point_at(const Rational& x) const {
        for (size_t i = 0; i < npoints; ++i)
            if (!coords[i].empty() && coords[i][0] == x) return i;
        return std::nullopt;
    }

    bool operator==(const FiniteMetricSpace& o) const {
        return npoints == o.npoints && d == o.d;
    }
};

using SpacePtr = std::shared_ptr<const FiniteMetricSpace>;

// Subset of X.
struct PointSet {
    SpacePtr sp;
    boost::dynamic_bitset<> bits;

    PointSet() = default;
    explicit PointSet(SpacePtr s, bool full = false) : sp(std::move(s)) {
        bits.resize(sp->npoints, full);
    }
    static PointSet of(SpacePtr s, const std::vector<int>& pts) {
        PointSet p(s);
        for (int i : pts) p.bits.set(size_t(i));
        return p;
    }

    size_t count() const { return bits.count(); }
    bool empty() const { return !bits.any(); }
    bool test(size_t i) const { return bits.test(i); }
    void set(size_t i, bool v = true) { bits.set(i, v); }
    std::vector<size_t> members() const {
        std::vector<size_t> out;
        for (size_t i = bits.find_first(); i != boost::dynamic_bitset<>::npos;
             i = bits.find_next(i))
            out.push_back(i);
        return out;
    }
    bool subset_of(const PointSet& o) const { return bits.is_subset_of(o.bits); }
    bool operator==(const PointSet& o) const { return bits == o.bits; }
    bool operator!=(const PointSet& o) const { return bits != o.bits; }

    PointSet unite(const PointSet& o) const {
        PointSet r = *this;
        r.bits |= o.bits;
        return r;
    }
    PointSet intersect(const PointSet& o) const {
        PointSet r = *this;
        r.bits &= o.bits;
        return r;
    }
    PointSet minus(const PointSet& o) const {
        PointSet r = *this;
        r.bits -= o.bits;
        return r;
    }
    PointSet complement() const {
        PointSet r = *this;
        r.bits = ~r.bits;
        return r;
    }
};

inline ExtDist x_dist(size_t p, const PointSet& s) {
    if (s.empty()) return ExtDist::inf();
    Rational best;
    bool first = true;
    for (size_t i = s.bits.find_first(); i != boost::dynamic_bitset<>::npos; i = s.bits.find_next(i)) {
        const Rational& d = s.sp->dist(p, i);
        if (first || d < best) {
            best = d;
            first = false;
        }
    }
    return ExtDist::of(best);
}

// {y : d(y,A) <= shell} — one closure shell on X
inline PointSet x_closure(const PointSet& a) {
    PointSet r = a;
    for (size_t p = 0; p < a.sp->npoints; ++p) {
        if (r.test(p)) continue;
        ExtDist d = x_dist(p, a);
        if (!d.is_inf() && *d.v <= a.sp->shell) r.set(p);
    }
    return r;
}

// {y : d(y,A) < delta} ∪ A
inline PointSet x_dilate(const PointSet& a, const Rational& delta) {
    require(delta >= 0, "NegativeRadius", "dilate radius must be >= 0");
    PointSet r = a;
    if (a.empty() || delta == 0) return r;
    for (size_t p = 0; p < a.sp->npoints; ++p) {
        if (r.test(p)) continue;
        ExtDist d = x_dist(p, a);
        if (!d.is_inf() && *d.v < delta) r.set(p);
    }
    return r;
}

// {x in A : x_closure({x}) ⊆ A}
inline PointSet x_erode(const PointSet& a) {
    PointSet r(a.sp);
    for (size_t p = a.bits.find_first(); p != boost::dynamic_bitset<>::npos; p = a.bits.find_next(p)) {
        bool inside = true;
        for (size_t q = 0; q < a.sp->npoints && inside; ++q)
            if (!a.test(q) && a.sp->dist(p, q) <= a.sp->shell) inside = false;
        if (inside) r.set(p);
    }
    return r;
}

inline PointSet x_erode_iter(const PointSet& a, int times) {
    PointSet r = a;
    for (int i = 0; i < times; ++i) r = x_erode(r);
    return r;
}

// cl(A) ⊆ B on X
inline bool x_precompact_in(const PointSet& a, const PointSet& b) {
    return x_closure(a).subset_of(b);
}

} // namespace kkit
