#include <catch2/catch_amalgamated.hpp>

#include "kkit/grid.hpp"
#include "kkit/linalg.hpp"
#include "kkit/metric_space.hpp"
#include "kkit/polynomial.hpp"

using namespace kkit;

namespace {

GridPtr line01() {
    return std::make_shared<GridDomain>(GridDomain::uniform({rat(0)}, {rat(1)}, rat(1, 4)));
}

RegionMask mask_of(GridPtr g, std::initializer_list<Rational> xs) {
    RegionMask m(g);
    for (const auto& x : xs) {
        auto i = g->sample_at({x});
        REQUIRE(i.has_value());
        m.set(*i);
    }
    return m;
}

RegionMask random_mask(GridPtr g, Rng& rng, int density_pct = 40) {
    RegionMask m(g);
    for (size_t i = 0; i < g->total; ++i)
        if (rng.chance(density_pct, 100)) m.set(i);
    return m;
}

} // namespace

TEST_CASE("rational parse/format round trips") {
    CHECK(rat_str(parse_rational("3/6")) == "1/2");
    CHECK(rat_str(parse_rational("-8/4")) == "-2");
    CHECK(rat_str(parse_rational("7")) == "7");
    CHECK_THROWS_AS(parse_rational("x"), Error);
    CHECK(rat_gcd(rat(1, 12), rat(1, 8)) == rat(1, 24));
    CHECK(rat_gcd(rat(1, 2), rat(3, 2)) == rat(1, 2));
}

TEST_CASE("grid basics") {
    auto g = line01();
    CHECK(g->total == 5);
    CHECK(g->coord(2)[0] == rat(1, 2));
    CHECK(g->sample_at({rat(3, 4)}).value() == 3);
    CHECK_FALSE(g->sample_at({rat(1, 3)}).has_value());
    CHECK(g->dist(0, 4) == rat(1));

    // mixed spacings: distance unit is the gcd
    GridDomain g2({rat(0), rat(0)}, {rat(1), rat(1)}, {rat(1, 2), rat(1, 3)});
    CHECK(g2.unit == rat(1, 6));
    auto a = g2.sample_at({rat(0), rat(0)}).value();
    auto b = g2.sample_at({rat(1, 2), rat(1, 3)}).value();
    CHECK(g2.dist(a, b) == rat(1, 2));
}

TEST_CASE("region_bool identities") {
    auto g = line01();
    auto S = mask_of(g, {rat(0), rat(1, 4)});
    auto T = mask_of(g, {rat(1, 2)});
    CHECK(region_bool(S, S, BoolOp::Intersect) == S);
    CHECK(region_bool(S, RegionMask(g), BoolOp::Diff) == S);
    auto U = region_bool(S, T, BoolOp::Union);
    CHECK(U == mask_of(g, {rat(0), rat(1, 4), rat(1, 2)}));

    auto other = std::make_shared<GridDomain>(GridDomain::uniform({rat(0)}, {rat(2)}, rat(1, 4)));
    CHECK_THROWS_AS(region_bool(S, RegionMask(other), BoolOp::Union), Error);
}

TEST_CASE("region_bool De Morgan on random masks") {
    auto g = std::make_shared<GridDomain>(
        GridDomain::uniform({rat(0), rat(0)}, {rat(1), rat(1)}, rat(1, 6)));
    Rng rng(env_seed() ^ 0x11);
    for (int t = 0; t < 50; ++t) {
        auto A = random_mask(g, rng);
        auto B = random_mask(g, rng);
        auto lhs = mask_complement(mask_union(A, B));
        auto rhs = mask_intersect(mask_complement(A), mask_complement(B));
        CHECK(lhs == rhs);
        auto lhs2 = mask_complement(mask_intersect(A, B));
        auto rhs2 = mask_union(mask_complement(A), mask_complement(B));
        CHECK(lhs2 == rhs2);
    }
}

TEST_CASE("closure_h") {
    auto g = line01();
    CHECK(closure_h(RegionMask(g)).empty());
    CHECK(closure_h(mask_of(g, {rat(1, 2)})) == mask_of(g, {rat(1, 4), rat(1, 2), rat(3, 4)}));
    RegionMask full(g, true);
    CHECK(closure_h(full) == full);
}

TEST_CASE("closure_h monotone on random masks") {
    auto g = std::make_shared<GridDomain>(
        GridDomain::uniform({rat(0), rat(0)}, {rat(1), rat(1)}, rat(1, 5)));
    Rng rng(env_seed() ^ 0x22);
    for (int t = 0; t < 50; ++t) {
        auto A = random_mask(g, rng, 30);
        auto B = mask_union(A, random_mask(g, rng, 30));
        CHECK(closure_h(A).subset_of(closure_h(B)));
        CHECK(A.subset_of(closure_h(A))); // extensive
    }
}

TEST_CASE("dilate") {
    auto g = line01();
    auto S = mask_of(g, {rat(1, 2)});
    CHECK(dilate(S, rat(0)) == S);
    CHECK(dilate(S, rat(3, 8)) == mask_of(g, {rat(1, 4), rat(1, 2), rat(3, 4)}));
    CHECK(dilate(S, rat(1, 4)) == S); // strict ball: exactly h away is excluded
    CHECK(dilate(RegionMask(g), rat(1)).empty());
    CHECK_THROWS_AS(dilate(S, rat(-1)), Error);
}

TEST_CASE("dilate monotone in radius") {
    auto g = std::make_shared<GridDomain>(
        GridDomain::uniform({rat(0), rat(0)}, {rat(1), rat(1)}, rat(1, 6)));
    Rng rng(env_seed() ^ 0x33);
    for (int t = 0; t < 30; ++t) {
        auto A = random_mask(g, rng, 20);
        Rational d1 = Rational(rng.range(0, 4)) / 6;
        Rational d2 = d1 + Rational(rng.range(0, 3)) / 6;
        CHECK(dilate(A, d1).subset_of(dilate(A, d2)));
    }
}

TEST_CASE("precompact_in") {
    auto g = line01();
    RegionMask e(g);
    CHECK(precompact_in(e, e));
    CHECK(precompact_in(mask_of(g, {rat(1, 2)}), mask_of(g, {rat(1, 4), rat(1, 2), rat(3, 4)})));
    auto S = mask_of(g, {rat(1, 4), rat(1, 2)}); // proper subset with a boundary sample
    CHECK_FALSE(precompact_in(S, S));
}

TEST_CASE("dist_and_argmin") {
    auto g = line01();
    auto S = mask_of(g, {rat(0), rat(1)});
    size_t x = g->sample_at({rat(1, 2)}).value();
    auto r = dist_and_argmin(x, S);
    CHECK(r.dist == rat(1, 2));
    CHECK(r.argmin == std::vector<size_t>{0, 4});

    size_t y = 0;
    auto r2 = dist_and_argmin(y, S);
    CHECK(r2.dist == 0);
    CHECK(r2.argmin == std::vector<size_t>{0});

    CHECK_THROWS_AS(dist_and_argmin(x, RegionMask(g)), Error);
}

TEST_CASE("dist_and_argmin agrees with brute recomputation on random instances") {
    auto g = std::make_shared<GridDomain>(
        GridDomain::uniform({rat(-1), rat(-1)}, {rat(1), rat(1)}, rat(1, 4)));
    Rng rng(env_seed() ^ 0x44);
    for (int t = 0; t < 40; ++t) {
        auto S = random_mask(g, rng, 25);
        if (S.empty()) continue;
        size_t x = rng.below(g->total);
        auto got = dist_and_argmin(x, S);
        // independent oracle: rational arithmetic over coordinates
        Rational best;
        bool first = true;
        std::vector<size_t> arg;
        for (size_t i : S.members()) {
            Vec cx = g->coord(x), ci = g->coord(i);
            Rational d = 0;
            for (size_t a = 0; a < g->dim; ++a) d = std::max(d, rat_abs(cx[a] - ci[a]));
            if (first || d < best) {
                best = d;
                arg = {i};
                first = false;
            } else if (d == best)
                arg.push_back(i);
        }
        CHECK(got.dist == best);
        CHECK(got.argmin == arg);
    }
}

TEST_CASE("erode and refine") {
    auto g = line01();
    RegionMask full(g, true);
    CHECK(erode_h(full) == full); // box boundary clips the shell
    auto S = mask_of(g, {rat(1, 4), rat(1, 2), rat(3, 4)});
    CHECK(erode_h(S) == mask_of(g, {rat(1, 2)}));

    // S denotes the open interval (0,1); refinement resamples it
    auto [g2, r] = refine(S, 2);
    CHECK(g2->h[0] == rat(1, 8));
    CHECK(r.test(g2->sample_at({rat(1, 2)}).value()));
    CHECK(r.test(g2->sample_at({rat(5, 8)}).value()));
    CHECK(r.test(g2->sample_at({rat(7, 8)}).value()));
    CHECK_FALSE(r.test(g2->sample_at({rat(0)}).value()));
    CHECK_FALSE(r.test(g2->sample_at({rat(1)}).value()));
    CHECK(r.count() == 7);
}

TEST_CASE("finite metric space validates and rejects") {
    auto c = FiniteMetricSpace::circle(6);
    CHECK(c.shell == rat(1, 6));
    CHECK(c.dist(0, 3) == rat(1, 2));
    CHECK(c.dist(1, 5) == rat(1, 3));

    auto l = FiniteMetricSpace::line(rat(-2), rat(2), 5);
    CHECK(l.dist(0, 4) == rat(4));
    CHECK(l.shell == rat(1));

    // triangle violation rejected (exhaustive validator)
    std::vector<Rational> bad = {rat(0), rat(1), rat(3), rat(1), rat(0), rat(1),
                                 rat(3), rat(1), rat(0)};
    CHECK_THROWS_AS(FiniteMetricSpace(3, bad), Error);
    // asymmetry rejected
    std::vector<Rational> bad2 = {rat(0), rat(1), rat(2), rat(0)};
    CHECK_THROWS_AS(FiniteMetricSpace(2, bad2), Error);
}

TEST_CASE("point set operations") {
    auto sp = std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::circle(12));
    auto F1 = PointSet::of(sp, {5, 6, 7, 8, 9, 10, 11});
    CHECK(x_closure(PointSet::of(sp, {8})) == PointSet::of(sp, {7, 8, 9}));
    CHECK(x_erode(F1) == PointSet::of(sp, {6, 7, 8, 9, 10}));
    CHECK(x_dilate(PointSet::of(sp, {0}), rat(1, 4)) == PointSet::of(sp, {0, 1, 2, 10, 11}));
    CHECK(x_precompact_in(PointSet::of(sp, {7}), PointSet::of(sp, {6, 7, 8})));
    CHECK_FALSE(x_precompact_in(F1, F1));
    CHECK(x_dist(0, F1) == ExtDist::of(rat(1, 12)));
    CHECK(x_dist(0, PointSet(sp)).is_inf());
}

TEST_CASE("linalg: rref, solve, subspaces") {
    Mat m = Mat::from_rows({{rat(1), rat(2)}, {rat(2), rat(4)}});
    CHECK(rank(m) == 1);
    CHECK_FALSE(is_injective(m));
    CHECK(is_injective(Mat::from_rows({{rat(1)}, {rat(0)}}))); // v -> (v,0)

    auto sol = solve(Mat::from_rows({{rat(2), rat(0)}, {rat(0), rat(3)}}), {rat(1), rat(1)});
    REQUIRE(sol.has_value());
    CHECK(*sol == Vec{rat(1, 2), rat(1, 3)});
    CHECK_FALSE(solve(Mat::from_rows({{rat(1)}, {rat(1)}}), {rat(0), rat(1)}).has_value());

    auto e1 = Subspace::span({{rat(1), rat(0)}}, 2);
    auto e2 = Subspace::span({{rat(0), rat(1)}}, 2);
    auto diag = Subspace::span({{rat(1), rat(1)}}, 2);
    CHECK(e1.intersect(e2) == Subspace::zero(2));
    CHECK(e1.intersect(Subspace::full(2)) == e1);
    CHECK(diag.intersect(e1) == Subspace::zero(2));
    auto sum = Subspace::span({{rat(1), rat(0)}, {rat(1), rat(1)}}, 2);
    CHECK(sum == Subspace::full(2));
    CHECK(e1.contains({rat(5), rat(0)}));
    CHECK_FALSE(e1.contains({rat(5), rat(1)}));

    // image under a map
    Mat L = Mat::from_rows({{rat(1)}, {rat(1)}}); // v -> (v,v)
    CHECK(Subspace::full(1).image(L) == diag);

    // dim-0 ambient space: zero == full
    CHECK(Subspace::zero(0) == Subspace::full(0));
    CHECK(Subspace::zero(0).contains(Vec{}));
}

TEST_CASE("polynomial parse and eval") {
    auto p = parse_polynomial("(x1^2-1)*x1^2", 1);
    CHECK(p.eval({rat(1)}) == 0);
    CHECK(p.eval({rat(0)}) == 0);
    CHECK(p.eval({rat(-1)}) == 0);
    CHECK(p.eval({rat(1, 2)}) == rat(-3, 16));
    CHECK(p.eval({rat(2)}) == rat(12));

    auto q = parse_polynomial("x2 - 1/2*x1", 2);
    CHECK(q.eval({rat(1), rat(1, 2)}) == 0);

    auto r = parse_polynomial("-x1 + 3", 1);
    CHECK(r.eval({rat(3)}) == 0);

    // substitution: (x1^2-1)*x2 with x1 := 1 becomes 0
    auto s = parse_polynomial("(x1^2-1)*x2", 2);
    auto s1 = s.substitute(0, rat(1));
    CHECK(s1.nvars == 1);
    CHECK(s1.eval({rat(7)}) == 0);

    CHECK(parse_polynomial("0", 1).str() == "0");
    CHECK_THROWS_AS(parse_polynomial("x3", 2), Error);
    CHECK_THROWS_AS(parse_polynomial("x1 +", 1), Error);
}

TEST_CASE("predicate parse and eval") {
    auto pr = parse_predicate("(0 - x2 < x1 and x1 <= 0) or x1 > 0", 2);
    CHECK(pr.eval({rat(1, 8), rat(-1)}));        // x > 0
    CHECK(pr.eval({rat(0), rat(1, 8)}));         // -y < x <= 0 with y > 0
    CHECK_FALSE(pr.eval({rat(0), rat(0)}));      // -0 < 0 fails
    CHECK_FALSE(pr.eval({rat(-1, 8), rat(0)}));  // left half, y = 0
    CHECK(pr.eval({rat(-1, 8), rat(1, 4)}));     // -1/4 < -1/8 <= 0

    auto notp = parse_predicate("not x1 == 0", 1);
    CHECK(notp.eval({rat(1)}));
    CHECK_FALSE(notp.eval({rat(0)}));
}
