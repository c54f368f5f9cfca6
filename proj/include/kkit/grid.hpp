#pragma once

#include "kkit/rational.hpp"

#include <boost/dynamic_bitset.hpp>

#include <memory>
#include <vector>

namespace kkit {

// Rational lattice in a closed box: samples are lo + k*h componentwise.
// Spacing may differ per axis (cobordism atlases put a time axis first whose
// spacing is independent of the space axes).
struct GridDomain {
    size_t dim = 0;
    std::vector<Rational> lo, hi, h;
    std::vector<size_t> n;      // samples per axis = (hi-lo)/h + 1
    std::vector<size_t> stride; // row-major strides
    size_t total = 0;

    // L-infinity distances are integers times `unit`: |dx_a| = k_a*h_a = (k_a*w_a)*unit.
    Rational unit;
    std::vector<long long> w;

    GridDomain() = default;
    GridDomain(std::vector<Rational> lo_, std::vector<Rational> hi_, std::vector<Rational> h_) {
        lo = std::move(lo_);
        hi = std::move(hi_);
        h = std::move(h_);
        dim = lo.size();
        require(hi.size() == dim && h.size() == dim, "ShapeMismatch", "grid axis data");
        n.resize(dim);
        for (size_t a = 0; a < dim; ++a) {
            require(lo[a] < hi[a], "BadGrid", "axis " + std::to_string(a) + " needs lo < hi");
            require(h[a] > 0, "BadGrid", "spacing must be positive");
            Rational steps = (hi[a] - lo[a]) / h[a];
            require(is_integer(steps), "BadGrid",
                    "(hi-lo) must be an integer multiple of h on axis " + std::to_string(a));
            n[a] = size_t(numerator(steps)) + 1;
        }
        stride.assign(dim, 1);
        for (size_t a = dim; a-- > 1;) stride[a - 1] = stride[a] * n[a];
        total = stride[0] * n[0];
        unit = h[0];
        for (size_t a = 1; a < dim; ++a) unit = rat_gcd(unit, h[a]);
        w.resize(dim);
        for (size_t a = 0; a < dim; ++a) {
            Rational q = h[a] / unit;
            w[a] = (long long)numerator(q);
        }
    }
    static GridDomain uniform(std::vector<Rational> lo, std::vector<Rational> hi, Rational hh) {
        std::vector<Rational> hs(lo.size(), hh);
        return GridDomain(std::move(lo), std::move(hi), hs);
    }

    bool operator==(const GridDomain& o) const {
        return lo == o.lo && hi == o.hi && h == o.h;
    }

    std::vector<long long> multi(size_t flat) const {
        std::vector<long long> k(dim);
        for (size_t a = 0; a < dim; ++a) {
            k[a] = (long long)(flat / stride[a]);
            flat %= stride[a];
        }
        return k;
    }
    size_t flat(const std::vector<long long>& k) const {
        size_t f = 0;
        for (size_t a = 0; a < dim; ++a) f += size_t(k[a]) * stride[a];
        return f;
    }
    Vec coord(size_t flat_idx) const {
        auto k = multi(flat_idx);
        Vec x(dim);
        for (size_t a = 0; a < dim; ++a) x[a] = lo[a] + Rational(k[a]) * h[a];
        return x;
    }
    std::optional<size_t> sample_at(const Vec& x) const {
        if (x.size() != dim) return std::nullopt;
        std::vector<long long> k(dim);
        for (size_t a = 0; a < dim; ++a) {
            Rational q = (x[a] - lo[a]) / h[a];
            if (!is_integer(q)) return std::nullopt;
            BigInt ki = numerator(q);
            if (ki < 0 || ki >= BigInt(n[a])) return std::nullopt;
            k[a] = (long long)ki;
        }
        return flat(k);
    }

    // scaled Chebyshev distance: actual distance = cheb(a,b) * unit
    long long cheb(size_t fa, size_t fb) const {
        long long best = 0;
        for (size_t a = 0; a < dim; ++a) {
            long long ka = (long long)(fa / stride[a]);
            long long kb = (long long)(fb / stride[a]);
            fa %= stride[a];
            fb %= stride[a];
            long long d = (ka > kb ? ka - kb : kb - ka) * w[a];
            if (d > best) best = d;
        }
        return best;
    }
    Rational dist(size_t a, size_t b) const { return Rational(cheb(a, b)) * unit; }

    std::string coord_str(size_t flat_idx) const { return vec_str(coord(flat_idx)); }
};

using GridPtr = std::shared_ptr<const GridDomain>;

// Subset of a grid's samples. The mask denotes the union of open h-cubes
// around its members; closure_h grows by one lattice shell.
struct RegionMask {
    GridPtr dom;
    boost::dynamic_bitset<> bits;

    RegionMask() = default;
    explicit RegionMask(GridPtr d, bool full = false) : dom(std::move(d)) {
        bits.resize(dom->total, full);
    }

    size_t count() const { return bits.count(); }
    bool empty() const { return !bits.any(); }
    bool test(size_t i) const { return bits.test(i); }
    void set(size_t i, bool v = true) { bits.set(i, v); }

    std::vector<size_t> members() const {
        std::vector<size_t> out;
        out.reserve(count());
        for (size_t i = bits.find_first(); i != boost::dynamic_bitset<>::npos;
             i = bits.find_next(i))
            out.push_back(i);
        return out;
    }
    template <class F> void for_each(F&& f) const {
        for (size_t i = bits.find_first(); i != boost::dynamic_bitset<>::npos;
             i = bits.find_next(i))
            f(i);
    }

    bool subset_of(const RegionMask& o) const { return bits.is_subset_of(o.bits); }
    bool operator==(const RegionMask& o) const { return *dom == *o.dom && bits == o.bits; }
    bool operator!=(const RegionMask& o) const { return !(*this == o); }
};

enum class BoolOp { Union, Intersect, Diff };

inline void check_same_domain(const RegionMask& a, const RegionMask& b) {
    require(a.dom && b.dom && *a.dom == *b.dom, "DomainMismatch",
            "region operands live on different grids");
}

inline RegionMask region_bool(const RegionMask& a, const RegionMask& b, BoolOp op) {
    check_same_domain(a, b);
    RegionMask r(a.dom);
    switch (op) {
    case BoolOp::Union: r.bits = a.bits | b.bits; break;
    case BoolOp::Intersect: r.bits = a.bits & b.bits; break;
    case BoolOp::Diff: r.bits = a.bits - b.bits; break;
    }
    return r;
}

inline RegionMask mask_union(const RegionMask& a, const RegionMask& b) {
    return region_bool(a, b, BoolOp::Union);
}
inline RegionMask mask_intersect(const RegionMask& a, const RegionMask& b) {
    return region_bool(a, b, BoolOp::Intersect);
}
inline RegionMask mask_diff(const RegionMask& a, const RegionMask& b) {
    return region_bool(a, b, BoolOp::Diff);
}
inline RegionMask mask_complement(const RegionMask& a) {
    RegionMask r(a.dom);
    r.bits = ~a.bits;
    return r;
}

namespace detail {

// visit every in-box sample within the per-axis step bounds around `center`
template <class F>
void for_box_offsets(const GridDomain& g, size_t center, const std::vector<long long>& bound, F&& f) {
    auto k = g.multi(center);
    std::vector<long long> off(g.dim, 0);
    for (size_t a = 0; a < g.dim; ++a) off[a] = -bound[a];
    while (true) {
        bool ok = true;
        size_t flat = 0;
        for (size_t a = 0; a < g.dim; ++a) {
            long long v = k[a] + off[a];
            if (v < 0 || v >= (long long)g.n[a]) {
                ok = false;
                break;
            }
            flat += size_t(v) * g.stride[a];
        }
        if (ok) f(flat);
        size_t a = g.dim;
        while (a-- > 0) {
            if (off[a] < bound[a]) {
                ++off[a];
                for (size_t b2 = a + 1; b2 < g.dim; ++b2) off[b2] = -bound[b2];
                break;
            }
            if (a == 0) return;
        }
    }
}

} // namespace detail

// one lattice shell: all samples within one step on every axis
inline RegionMask closure_h(const RegionMask& s) {
    RegionMask r(s.dom);
    const auto& g = *s.dom;
    std::vector<long long> one(g.dim, 1);
    s.for_each([&](size_t i) {
        detail::for_box_offsets(g, i, one, [&](size_t j) { r.bits.set(j); });
    });
    return r;
}

inline RegionMask closure_h_iter(const RegionMask& s, int times) {
    RegionMask r = s;
    for (int i = 0; i < times; ++i) r = closure_h(r);
    return r;
}

// {y : d_inf(y,s) < delta} ∪ s  (exact; dilate(s,0) = s)
inline RegionMask dilate(const RegionMask& s, const Rational& delta) {
    require(delta >= 0, "NegativeRadius", "dilate radius must be >= 0");
    if (delta == 0 || s.empty()) return s;
    const auto& g = *s.dom;
    std::vector<long long> bound(g.dim);
    for (size_t a = 0; a < g.dim; ++a) {
        // largest k >= 0 with k*h_a < delta
        Rational q = delta / g.h[a];
        BigInt fl = rat_floor(q);
        long long k = (long long)fl;
        if (is_integer(q)) k -= 1;
        bound[a] = k < 0 ? 0 : k;
    }
    RegionMask r(s.dom);
    s.for_each([&](size_t i) {
        detail::for_box_offsets(g, i, bound, [&](size_t j) { r.bits.set(j); });
    });
    r.bits |= s.bits;
    return r;
}

// {x in s : closure_h({x}) ⊆ s}
inline RegionMask erode_h(const RegionMask& s) {
    RegionMask r(s.dom);
    const auto& g = *s.dom;
    std::vector<long long> one(g.dim, 1);
    s.for_each([&](size_t i) {
        bool inside = true;
        detail::for_box_offsets(g, i, one, [&](size_t j) {
            if (!s.bits.test(j)) inside = false;
        });
        if (inside) r.bits.set(i);
    });
    return r;
}

inline RegionMask erode_h_iter(const RegionMask& s, int times) {
    RegionMask r = s;
    for (int i = 0; i < times; ++i) r = erode_h(r);
    return r;
}

// true iff closure_h(s) ⊆ t
inline bool precompact_in(const RegionMask& s, const RegionMask& t) {
    check_same_domain(s, t);
    return closure_h(s).subset_of(t);
}

struct DistResult {
    Rational dist;
    std::vector<size_t> argmin; // sorted flat indices
};

// min over members of d_inf(x, .) together with the exact argmin set
inline DistResult dist_and_argmin(size_t x, const RegionMask& s) {
    require(!s.empty(), "EmptyRegion", "distance to empty region");
    const auto& g = *s.dom;
    long long best = -1;
    std::vector<size_t> arg;
    s.for_each([&](size_t i) {
        long long d = g.cheb(x, i);
        if (best < 0 || d < best) {
            best = d;
            arg.clear();
            arg.push_back(i);
        } else if (d == best) {
            arg.push_back(i);
        }
    });
    return DistResult{Rational(best) * g.unit, std::move(arg)};
}

// scaled integer distance from x to mask, -1 when empty (callers treat as +inf)
inline long long cheb_to_mask(size_t x, const RegionMask& s) {
    long long best = -1;
    const auto& g = *s.dom;
    s.for_each([&](size_t i) {
        long long d = g.cheb(x, i);
        if (best < 0 || d < best) best = d;
    });
    return best;
}

inline ExtDist dist_to_mask(size_t x, const RegionMask& s) {
    long long d = cheb_to_mask(x, s);
    if (d < 0) return ExtDist::inf();
    return ExtDist::of(Rational(d) * s.dom->unit);
}

// min distance between two nonempty masks
inline Rational mask_distance(const RegionMask& a, const RegionMask& b) {
    check_same_domain(a, b);
    require(!a.empty() && !b.empty(), "EmptyRegion", "mask distance needs nonempty operands");
    long long best = -1;
    a.for_each([&](size_t i) {
        long long d = cheb_to_mask(i, b);
        if (best < 0 || d < best) best = d;
    });
    return Rational(best) * a.dom->unit;
}

// Refine every axis spacing by factor k. A mask denotes the union of the open
// radius-h boxes around its members, so a refined sample joins iff it lies
// strictly within radius h of some original member (componentwise).
inline std::pair<GridPtr, RegionMask> refine(const RegionMask& s, int k) {
    require(k >= 1, "BadGrid", "refinement factor must be >= 1");
    const auto& g = *s.dom;
    std::vector<Rational> h2(g.dim);
    for (size_t a = 0; a < g.dim; ++a) h2[a] = g.h[a] / k;
    auto g2 = std::make_shared<GridDomain>(g.lo, g.hi, h2);
    RegionMask r(g2);
    for (size_t j = 0; j < g2->total; ++j) {
        auto kj = g2->multi(j);
        // per-axis original candidates with |j - q*k| < k
        std::vector<std::vector<long long>> cand(g.dim);
        bool any = true;
        for (size_t a = 0; a < g.dim; ++a) {
            for (long long q = (kj[a] - (k - 1) + (k - 1)) / k - 1; q <= (kj[a] + (k - 1)) / k; ++q) {
                if (q < 0 || q >= (long long)g.n[a]) continue;
                long long rem = kj[a] - q * k;
                if (rem < 0) rem = -rem;
                if (rem < k) cand[a].push_back(q);
            }
            if (cand[a].empty()) any = false;
        }
        if (!any) continue;
        // does any candidate combination hit an original member?
        std::vector<size_t> pick(g.dim, 0);
        bool found = false;
        while (!found) {
            std::vector<long long> ko(g.dim);
            for (size_t a = 0; a < g.dim; ++a) ko[a] = cand[a][pick[a]];
            if (s.bits.test(g.flat(ko))) found = true;
            size_t a = g.dim;
            bool carried = false;
            while (a-- > 0) {
                if (pick[a] + 1 < cand[a].size()) {
                    ++pick[a];
                    for (size_t b2 = a + 1; b2 < g.dim; ++b2) pick[b2] = 0;
                    carried = true;
                    break;
                }
            }
            if (!carried) break;
        }
        if (found) r.bits.set(j);
    }
    return {g2, r};
}

} // namespace kkit
