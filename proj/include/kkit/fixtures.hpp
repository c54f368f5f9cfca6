#pragma once

#include "kkit/atlas.hpp"

namespace kkit {

// ---------------------------------------------------------------------------
// Fixture construction helpers
// ---------------------------------------------------------------------------

namespace fx {

inline GridPtr grid(std::vector<Rational> lo, std::vector<Rational> hi, Rational h) {
    return std::make_shared<GridDomain>(GridDomain::uniform(std::move(lo), std::move(hi), h));
}

inline RegionMask carrier_pred(GridPtr g, const std::string& pred) {
    RegionMask m(g);
    if (pred == "all") {
        m.bits.set();
        return m;
    }
    Predicate p = parse_predicate(pred, g->dim);
    for (size_t i = 0; i < g->total; ++i)
        if (p.eval(g->coord(i))) m.set(i);
    return m;
}

// open-box interior: strictly between lo and hi on every axis
inline std::string interior_pred(const GridDomain& g) {
    std::string s;
    for (size_t a = 0; a < g.dim; ++a) {
        if (a) s += " and ";
        std::string v = "x" + std::to_string(a + 1);
        s += v + " > " + rat_str(g.lo[a]) + " and " + v + " < " + rat_str(g.hi[a]);
    }
    return s;
}

// circle arc (lo,hi) taken mod 1; lo < hi, hi - lo <= 1
inline PointSet arc(SpacePtr sp, const Rational& lo, const Rational& hi) {
    PointSet f(sp);
    for (size_t i = 0; i < sp->npoints; ++i) {
        Rational x = sp->coords[i][0];
        for (int m = -1; m <= 1; ++m) {
            Rational xx = x + m;
            if (lo < xx && xx < hi) f.set(i);
        }
    }
    return f;
}

// line interval with open/closed ends
inline PointSet interval(SpacePtr sp, const Rational& lo, const Rational& hi, bool open_lo = true,
                         bool open_hi = true) {
    PointSet f(sp);
    for (size_t i = 0; i < sp->npoints; ++i) {
        Rational x = sp->coords[i][0];
        bool in_lo = open_lo ? (x > lo) : (x >= lo);
        bool in_hi = open_hi ? (x < hi) : (x <= hi);
        if (in_lo && in_hi) f.set(i);
    }
    return f;
}

inline Chart make_chart(IndexSet idx, GridPtr g, const std::string& carrier_expr,
                        std::vector<std::string> section_exprs, SpacePtr X, PointSet footprint,
                        const std::string& psi_expr, bool psi_mod1) {
    Chart c;
    c.index = idx;
    c.dom = g;
    c.carrier = carrier_pred(g, carrier_expr);
    c.fiber_dim = section_exprs.size();
    std::vector<Polynomial> ps;
    for (const auto& e : section_exprs) ps.push_back(parse_polynomial(e, g->dim));
    c.section = c.fiber_dim ? Section::of_polys(std::move(ps)) : Section::zero(g->dim, 0);
    c.footprint = std::move(footprint);
    c.psi_rule = PsiRule::of_expr(parse_polynomial(psi_expr, g->dim), psi_mod1);
    c.resolve_zero_set();
    auto errs = c.resolve_psi();
    require(errs.empty(), "BadFixture",
            "chart " + idx.str() + ": " + (errs.empty() ? "" : errs.front()));
    return c;
}

inline void add_change(Atlas& a, IndexSet i, IndexSet j, const std::string& domain_expr,
                       const Mat& m, const Vec& b, const Mat& fiber) {
    const Chart& ci = a.chart(i);
    CoordinateChange ch;
    ch.src = i;
    ch.dst = j;
    RegionMask dom = domain_expr == "all" ? ci.carrier
                                          : mask_intersect(ci.carrier, carrier_pred(ci.dom, domain_expr));
    ch.domain = std::move(dom);
    ch.base = AffineMap{m, b};
    ch.fiber = fiber;
    a.changes[pair_key(i, j)] = std::move(ch);
}

// embedding (x1..xd) -> target with slot map: target coord t gets source coord
// src_of[t] (or constant offset when src_of[t] < 0)
inline Mat embed_matrix(size_t d_src, const std::vector<int>& src_of) {
    Mat m(src_of.size(), d_src);
    for (size_t t = 0; t < src_of.size(); ++t)
        if (src_of[t] >= 0) m.at(t, size_t(src_of[t])) = 1;
    return m;
}

inline Mat col_matrix(const std::vector<Rational>& col_entries) {
    Mat m(col_entries.size(), 1);
    for (size_t i = 0; i < col_entries.size(); ++i) m.at(i, 0) = col_entries[i];
    return m;
}

} // namespace fx

// ---------------------------------------------------------------------------
// FIX-A: the basic coordinate-change example. Charts on X = {-1,0,1} with
// s_1(x) = (x^2-1)x^2 and the 2d transition chart s_12(x,y) = ((x^2-1)x^2, y).
// The second basic chart is 0-dimensional over the footprint {0,1}.
// ---------------------------------------------------------------------------

inline Atlas fix_a(const Rational& h = rat(1, 4)) {
    using namespace fx;
    Atlas a;
    a.X = std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::line(rat(-1), rat(1), 3));
    a.n_basic = 2;
    auto I1 = IndexSet::single(1), I2 = IndexSet::single(2), I12 = IndexSet::of({1, 2});

    auto g1 = grid({rat(-2)}, {rat(2)}, h);
    a.charts[I1] = make_chart(I1, g1, interior_pred(*g1), {"(x1^2-1)*x1^2"}, a.X,
                              interval(a.X, rat(-1), rat(1), false, false), "x1", false);

    auto g2 = grid({rat(0)}, {rat(1)}, h);
    a.charts[I2] = make_chart(I2, g2, "x1 == 0 or x1 == 1", {}, a.X,
                              interval(a.X, rat(0), rat(1), false, false), "x1", false);

    auto g12 = grid({rat(-1), rat(-1)}, {rat(2), rat(1)}, h);
    a.charts[I12] = make_chart(I12, g12, interior_pred(*g12), {"(x1^2-1)*x1^2", "x2"}, a.X,
                               interval(a.X, rat(0), rat(1), false, false), "x1", false);

    // phi_{1,12}: x -> (x,0) on (-1,2);   L: v -> (v,0)
    add_change(a, I1, I12, "x1 > -1 and x1 < 2", embed_matrix(1, {0, -1}), {rat(0), rat(0)},
               col_matrix({rat(1), rat(0)}));
    // phi_{2,12}: x -> (x,0);             L: Q^0 -> Q^2
    add_change(a, I2, I12, "all", embed_matrix(1, {0, -1}), {rat(0), rat(0)}, Mat(2, 0));

    Filtration f;
    f.set(I1, I12, Subspace::span({{rat(1), rat(0)}}, 2));
    f.set(I2, I12, Subspace::zero(2));
    a.filt = std::move(f);
    return a;
}

// ---------------------------------------------------------------------------
// FIX-B: the failure-of-injectivity example on the circle. Three arc charts;
// chart 3 lives on a two-period window (2/3,2) whose carrier wraps around,
// meeting the lift of U_1 ∩ U_2 in two strips V_3^1, V_3^2. All obstruction
// fibers equal R, so this atlas is weak but admits no filtration.
//
// `filtered` replaces the transition charts by additive ones (fiber R^2,
// 3d bases); that sibling is filtered weak, non-tame as given, and tames.
// ---------------------------------------------------------------------------

struct FixBOptions {
    Rational h = rat(1, 12);
    Rational yw = rat(1, 3); // half-width of the auxiliary fiber direction
    bool filtered = false;
};

inline Atlas fix_b(const FixBOptions& opt = {}) {
    using namespace fx;
    const Rational& h = opt.h;
    const Rational& yw = opt.yw;
    require(is_integer(Rational(1 / h)), "BadFixture", "FIX-B wants h = 1/n");
    require(is_integer(Rational(yw / h)), "BadFixture", "FIX-B wants yw to be a multiple of h");
    size_t n = size_t(numerator(Rational(1 / h)));
    require(n % 3 == 0, "BadFixture", "FIX-B wants 3 | 1/h");

    Atlas a;
    a.X = std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::circle(n));
    a.n_basic = 3;
    auto I1 = IndexSet::single(1), I2 = IndexSet::single(2), I3 = IndexSet::single(3);
    auto I12 = IndexSet::of({1, 2}), I13 = IndexSet::of({1, 3}), I23 = IndexSet::of({2, 3});
    std::string sy = rat_str(yw);

    // basic charts (common to both variants)
    auto g1 = grid({rat(4, 3), -yw}, {rat(2), yw}, h);
    a.charts[I1] = make_chart(I1, g1, interior_pred(*g1), {"x2"}, a.X, arc(a.X, rat(1, 3), rat(1)),
                              "x1 - 1", true);
    auto g2 = grid({rat(2, 3), -yw}, {rat(4, 3), yw}, h);
    a.charts[I2] = make_chart(I2, g2, interior_pred(*g2), {"x2"}, a.X, arc(a.X, rat(2, 3), rat(4, 3)),
                              "x1", true);
    auto g3 = grid({rat(2, 3), -yw}, {rat(2), yw}, h);
    // core (1,5/3) full height, plus the upper strip y > 0 across the window
    std::string carrier3 = "(" + interior_pred(*g3) + ") and ((x1 > 1 and x1 < 5/3) or x2 > 0)";
    a.charts[I3] = make_chart(I3, g3, carrier3, {"x2"}, a.X, arc(a.X, rat(0), rat(2, 3)), "x1", true);

    Mat L1 = Mat::identity(1);

    if (!opt.filtered) {
        // literal transition charts: restrictions of the ambient chart
        auto g12 = grid({rat(2, 3), -yw}, {rat(1), yw}, h);
        a.charts[I12] = make_chart(I12, g12, interior_pred(*g12), {"x2"}, a.X,
                                   arc(a.X, rat(2, 3), rat(1)), "x1", true);
        auto g13 = grid({rat(2, 3), -yw}, {rat(2), yw}, h);
        a.charts[I13] = make_chart(I13, g13,
                                   "(" + carrier3 + ") and ((x1 > 2/3 and x1 < 1) or (x1 > 4/3 and x1 < 2))",
                                   {"x2"}, a.X, arc(a.X, rat(1, 3), rat(2, 3)), "x1 - 1", true);
        auto g23 = grid({rat(2, 3), -yw}, {rat(2), yw}, h);
        a.charts[I23] = make_chart(I23, g23,
                                   "(" + carrier3 + ") and ((x1 < 4/3) or (x1 > 5/3))", {"x2"},
                                   a.X, arc(a.X, rat(0), rat(1, 3)), "x1", true);

        add_change(a, I1, I12, "x1 > 5/3", Mat::identity(2), {rat(-1), rat(0)}, L1);
        add_change(a, I2, I12, "x1 < 1", Mat::identity(2), {rat(0), rat(0)}, L1);
        add_change(a, I1, I13, "x1 < 5/3 or x2 > 0", Mat::identity(2), {rat(0), rat(0)}, L1);
        add_change(a, I3, I13, "(x1 > 2/3 and x1 < 1) or (x1 > 4/3 and x1 < 2)", Mat::identity(2),
                   {rat(0), rat(0)}, L1);
        add_change(a, I2, I23, "x1 > 1 or x2 > 0", Mat::identity(2), {rat(0), rat(0)}, L1);
        add_change(a, I3, I23, "x1 < 4/3 or x1 > 5/3", Mat::identity(2), {rat(0), rat(0)}, L1);
        return a;
    }

    // additive transition charts: base (x, u, v), section (u, v)
    Mat Lu = col_matrix({rat(1), rat(0)});
    Mat Lv = col_matrix({rat(0), rat(1)});
    auto g12 = grid({rat(2, 3), -yw, -yw}, {rat(1), yw, yw}, h);
    a.charts[I12] = make_chart(I12, g12, interior_pred(*g12), {"x2", "x3"}, a.X,
                               arc(a.X, rat(2, 3), rat(1)), "x1", true);
    auto g13 = grid({rat(4, 3), -yw, -yw}, {rat(2), yw, yw}, h);
    a.charts[I13] = make_chart(I13, g13,
                               "(" + interior_pred(*g13) + ") and (x1 < 5/3 or x2 > 0)",
                               {"x2", "x3"}, a.X, arc(a.X, rat(1, 3), rat(2, 3)), "x1 - 1", true);
    auto g23 = grid({rat(1), -yw, -yw}, {rat(4, 3), yw, yw}, h);
    a.charts[I23] = make_chart(I23, g23, interior_pred(*g23), {"x2", "x3"}, a.X,
                               arc(a.X, rat(0), rat(1, 3)), "x1", true);

    add_change(a, I1, I12, "x1 > 5/3", fx::embed_matrix(2, {0, 1, -1}), {rat(-1), rat(0), rat(0)}, Lu);
    add_change(a, I2, I12, "x1 < 1", fx::embed_matrix(2, {0, -1, 1}), {rat(0), rat(0), rat(0)}, Lv);
    // deliberately oversized: overlaps U_{1,12} in the strip x>5/3, y>0 (raw tame1 failure)
    add_change(a, I1, I13, "x1 < 5/3 or x2 > 0", fx::embed_matrix(2, {0, 1, -1}),
               {rat(0), rat(0), rat(0)}, Lu);
    add_change(a, I3, I13, "x1 > 4/3 and x1 < 5/3", fx::embed_matrix(2, {0, -1, 1}),
               {rat(0), rat(0), rat(0)}, Lv);
    add_change(a, I2, I23, "x1 > 1", fx::embed_matrix(2, {0, 1, -1}), {rat(0), rat(0), rat(0)}, Lu);
    add_change(a, I3, I23, "x1 > 1 and x1 < 4/3", fx::embed_matrix(2, {0, -1, 1}),
               {rat(0), rat(0), rat(0)}, Lv);

    Filtration f;
    f.set(I1, I12, Subspace::span({{rat(1), rat(0)}}, 2));
    f.set(I2, I12, Subspace::span({{rat(0), rat(1)}}, 2));
    f.set(I1, I13, Subspace::span({{rat(1), rat(0)}}, 2));
    f.set(I3, I13, Subspace::span({{rat(0), rat(1)}}, 2));
    f.set(I2, I23, Subspace::span({{rat(1), rat(0)}}, 2));
    f.set(I3, I23, Subspace::span({{rat(0), rat(1)}}, 2));
    a.filt = std::move(f);
    return a;
}

// ---------------------------------------------------------------------------
// FIX-C: the failure-of-Hausdorff example truncated to [-2,2]^2. Chart 2 has
// the wedge domain {-y < x <= 0} ∪ {x > 0}. The literal atlas is weak and
// unfilterable; the filtered sibling replaces the transition chart by an
// additive one (and trims the auxiliary height to yw).
// ---------------------------------------------------------------------------

struct FixCOptions {
    Rational h = rat(1, 8);
    bool filtered = false;
    Rational yw = rat(1, 2); // fiber-aux half-width of the filtered sibling
};

inline Atlas fix_c(const FixCOptions& opt = {}) {
    using namespace fx;
    const Rational& h = opt.h;
    size_t nx = size_t(numerator(Rational(rat(4) / h))) + 1;
    Atlas a;
    a.X = std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::line(rat(-2), rat(2), nx));
    a.n_basic = 2;
    auto I1 = IndexSet::single(1), I2 = IndexSet::single(2), I12 = IndexSet::of({1, 2});
    const std::string wedge = "(0 - x2 < x1 and x1 <= 0) or x1 > 0";

    Rational yh = opt.filtered ? opt.yw : rat(2);
    auto g1 = grid({rat(-2), -yh}, {rat(2), yh}, h);
    a.charts[I1] = make_chart(I1, g1, "all", {"x2"}, a.X, PointSet(a.X, true), "x1", false);
    auto g2 = grid({rat(-2), -yh}, {rat(2), yh}, h);
    a.charts[I2] = make_chart(I2, g2, wedge, {"x2"}, a.X, interval(a.X, rat(0), rat(2), true, false),
                              "x1", false);

    if (!opt.filtered) {
        auto g12 = grid({rat(0), rat(-2)}, {rat(2), rat(2)}, h);
        a.charts[I12] = make_chart(I12, g12, "x1 > 0", {"x2"}, a.X,
                                   interval(a.X, rat(0), rat(2), true, false), "x1", false);
        add_change(a, I1, I12, "x1 > 0", Mat::identity(2), {rat(0), rat(0)}, Mat::identity(1));
        add_change(a, I2, I12, "x1 > 0", Mat::identity(2), {rat(0), rat(0)}, Mat::identity(1));
        return a;
    }

    auto g12 = grid({rat(0), -yh, -yh}, {rat(2), yh, yh}, h);
    a.charts[I12] = make_chart(I12, g12, "x1 > 0", {"x2", "x3"}, a.X,
                               interval(a.X, rat(0), rat(2), true, false), "x1", false);
    add_change(a, I1, I12, "x1 > 0", fx::embed_matrix(2, {0, 1, -1}), {rat(0), rat(0), rat(0)},
               fx::col_matrix({rat(1), rat(0)}));
    add_change(a, I2, I12, "x1 > 0", fx::embed_matrix(2, {0, -1, 1}), {rat(0), rat(0), rat(0)},
               fx::col_matrix({rat(0), rat(1)}));
    Filtration f;
    f.set(I1, I12, Subspace::span({{rat(1), rat(0)}}, 2));
    f.set(I2, I12, Subspace::span({{rat(0), rat(1)}}, 2));
    a.filt = std::move(f);
    return a;
}

// ---------------------------------------------------------------------------
// FIX-D: the failure-of-metrizability example truncated to [-1,1] x [-2,2].
// Chart 1 is the bare line (no obstruction), chart 2 the half strip.
// ---------------------------------------------------------------------------

inline Atlas fix_d(const Rational& h = rat(1, 8)) {
    using namespace fx;
    size_t nx = size_t(numerator(Rational(rat(2) / h))) + 1;
    Atlas a;
    a.X = std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::line(rat(-1), rat(1), nx));
    a.n_basic = 2;
    auto I1 = IndexSet::single(1), I2 = IndexSet::single(2), I12 = IndexSet::of({1, 2});

    auto g1 = grid({rat(-1)}, {rat(1)}, h);
    a.charts[I1] = make_chart(I1, g1, "all", {}, a.X, PointSet(a.X, true), "x1", false);
    auto g2 = grid({rat(0), rat(-2)}, {rat(1), rat(2)}, h);
    a.charts[I2] = make_chart(I2, g2, "x1 > 0", {"x2"}, a.X,
                              interval(a.X, rat(0), rat(1), true, false), "x1", false);
    auto g12 = grid({rat(0), rat(-2)}, {rat(1), rat(2)}, h);
    a.charts[I12] = make_chart(I12, g12, "x1 > 0", {"x2"}, a.X,
                               interval(a.X, rat(0), rat(1), true, false), "x1", false);

    add_change(a, I1, I12, "x1 > 0", fx::embed_matrix(1, {0, -1}), {rat(0), rat(0)}, Mat(1, 0));
    add_change(a, I2, I12, "x1 > 0", Mat::identity(2), {rat(0), rat(0)}, Mat::identity(1));
    return a;
}

// ---------------------------------------------------------------------------
// Identity tower over a two-point space: every subset of {1..m} is a chart,
// all footprints equal X, every map is the identity (no obstruction anywhere).
// Exercises composition and the strong cocycle condition on real triples.
// ---------------------------------------------------------------------------

inline Atlas fix_tower(int m = 3) {
    using namespace fx;
    Atlas a;
    a.X = std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::line(rat(0), rat(1), 2));
    a.n_basic = m;
    auto g = grid({rat(0)}, {rat(1)}, rat(1, 2));
    for (std::uint32_t bits = 1; bits < (1u << m); ++bits) {
        IndexSet i(bits);
        a.charts[i] = make_chart(i, g, "x1 == 0 or x1 == 1", {}, a.X, PointSet(a.X, true), "x1", false);
    }
    for (std::uint32_t b1 = 1; b1 < (1u << m); ++b1)
        for (std::uint32_t b2 = 1; b2 < (1u << m); ++b2) {
            IndexSet i(b1), j(b2);
            if (i.proper_subset_of(j))
                add_change(a, i, j, "all", Mat::identity(1), {rat(0)}, Mat(0, 0));
        }
    a.filt = Filtration{};
    return a;
}

// Named fixture dispatch used by the CLI.
struct FixtureRequest {
    std::string name;      // FIX-A | FIX-B | FIX-C | FIX-D
    Rational h = 0;        // 0: per-fixture default
    bool filtered = false;
};

inline Atlas make_fixture(const FixtureRequest& rq) {
    if (rq.name == "FIX-A") return fix_a(rq.h == 0 ? rat(1, 4) : rq.h);
    if (rq.name == "FIX-B") {
        FixBOptions o;
        if (rq.h != 0) o.h = rq.h;
        o.filtered = rq.filtered;
        return fix_b(o);
    }
    if (rq.name == "FIX-C") {
        FixCOptions o;
        if (rq.h != 0) o.h = rq.h;
        o.filtered = rq.filtered;
        return fix_c(o);
    }
    if (rq.name == "FIX-D") return fix_d(rq.h == 0 ? rat(1, 8) : rq.h);
    fail("WrongFixture", "unknown fixture '" + rq.name + "'");
}

} // namespace kkit
