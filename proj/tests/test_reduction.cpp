#include <catch2/catch_amalgamated.hpp>

#include "kkit/fixtures.hpp"
#include "kkit/reduction.hpp"
#include "kkit/taming.hpp"

using namespace kkit;

namespace {

Atlas roomy_single_chart() {
    using namespace fx;
    Atlas a;
    a.X = std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::line(rat(0), rat(1), 5));
    a.n_basic = 1;
    auto I1 = IndexSet::single(1);
    auto g = grid({rat(-2), rat(-2)}, {rat(3), rat(2)}, rat(1, 4));
    a.charts[I1] = make_chart(I1, g, "all", {"x2"}, a.X, PointSet(a.X, true), "x1", false);
    a.filt = Filtration{};
    return a;
}

Atlas tamed_fix_b48() {
    FixBOptions o;
    o.filtered = true;
    o.h = rat(1, 48);
    o.yw = rat(1, 6);
    return tame_shrink(fix_b(o));
}

std::vector<PointSet> arcs_on_circle(SpacePtr sp, const std::vector<std::pair<long, long>>& se) {
    std::vector<PointSet> basics(se.size() + 1, PointSet(sp));
    for (size_t i = 0; i < se.size(); ++i) {
        PointSet f(sp);
        long n = long(sp->npoints);
        for (long k = 0; k < se[i].second; ++k) f.set(size_t((se[i].first + k) % n));
        basics[i + 1] = f;
    }
    return basics;
}

} // namespace

TEST_CASE("nested_cover_sequence") {
    SECTION("single full set: every level equals X") {
        auto sp = std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::circle(12));
        std::vector<PointSet> basics{PointSet(sp), PointSet(sp, true)};
        NestedCovers nc = nested_cover_sequence(sp, basics, 2);
        for (int k = 0; k <= 2; ++k) CHECK(nc.f[1][size_t(k)] == PointSet(sp, true));
    }
    SECTION("FIX-B 3-arc cover: depth scales with the circle resolution") {
        auto sp48 = std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::circle(48));
        auto b48 = arcs_on_circle(sp48, {{17, 31}, {33, 31}, {1, 31}});
        CHECK_NOTHROW(nested_cover_sequence(sp48, b48, 3));
        CHECK_THROWS_AS(nested_cover_sequence(sp48, b48, 6), Error);
        auto sp96 = std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::circle(96));
        auto b96 = arcs_on_circle(sp96, {{33, 63}, {65, 63}, {1, 63}});
        CHECK_NOTHROW(nested_cover_sequence(sp96, b96, 6));
    }
    SECTION("thin two-set overlap forces GridTooCoarse") {
        auto sp = std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::line(rat(0), rat(1), 17));
        std::vector<PointSet> basics(3, PointSet(sp));
        for (size_t p = 0; p <= 9; ++p) basics[1].set(p);
        for (size_t p = 7; p <= 16; ++p) basics[2].set(p);
        CHECK_THROWS_AS(nested_cover_sequence(sp, basics, 4), Error);
    }
}

TEST_CASE("cover_reduce") {
    SECTION("one-set cover: Z_1 = X") {
        auto sp = std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::circle(12));
        std::vector<PointSet> basics{PointSet(sp), PointSet(sp, true)};
        CoverReduction cr = cover_reduce(sp, basics);
        CHECK(cr.z.size() == 1);
        CHECK(cr.get(IndexSet::single(1)) == PointSet(sp, true));
    }
    SECTION("FIX-B 3-arc cover on a 48-point circle: the Fig. 1 pattern") {
        auto sp = std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::circle(48));
        auto basics = arcs_on_circle(sp, {{17, 31}, {33, 31}, {1, 31}});
        CoverReduction cr = cover_reduce(sp, basics);
        CHECK(cr.z.size() == 6);
        for (const auto& [i, zi] : cr.z) CHECK_FALSE(zi.empty());
        auto z12 = cr.get(IndexSet::of({1, 2}));
        auto z13 = cr.get(IndexSet::of({1, 3}));
        REQUIRE_FALSE(z12.empty());
        REQUIRE_FALSE(z13.empty());
        CHECK(x_closure(z12).intersect(x_closure(z13)).empty());
        CHECK(nerve_report(cr).ok());
    }
    SECTION("random covers of random finite metric spaces") {
        Rng rng(env_seed() ^ 0xabcd);
        int trials = 0, attempts = 0;
        while (trials < 30 && attempts < 3000) {
            ++attempts;
            size_t n = size_t(rng.range(40, 60));
            SpacePtr sp;
            if (rng.chance(1, 2))
                sp = std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::circle(n));
            else
                sp = std::make_shared<FiniteMetricSpace>(
                    FiniteMetricSpace::line(rat(0), rat(1), n));
            int nsets = rng.range(2, 4);
            std::vector<PointSet> basics(size_t(nsets) + 1, PointSet(sp));
            PointSet cover(sp);
            for (int i = 1; i <= nsets; ++i) {
                long start = long(rng.below(n));
                long len = long(n) * rng.range(40, 60) / 100;
                PointSet f(sp);
                for (long k = 0; k < len; ++k) {
                    size_t p = size_t((start + k) % long(n));
                    f.set(p);
                }
                basics[size_t(i)] = f;
                cover = cover.unite(f);
            }
            if (cover != PointSet(sp, true)) continue;
            try {
                CoverReduction cr = cover_reduce(sp, basics);
                Report rep = check_cover_reduction(basics, cr);
                CHECK(rep.ok());
                ++trials;
            } catch (const Error& e) {
                if (std::string(e.code()) != "GridTooCoarse") throw;
            }
        }
        CHECK(trials == 30);
    }
}

TEST_CASE("build_reduction on a single chart: V = W") {
    Atlas a = roomy_single_chart();
    QuotientSpace q = build_quotient(a);
    CoverReduction cr;
    cr.X = a.X;
    cr.z[IndexSet::single(1)] = PointSet(a.X, true);
    Reduction r = build_reduction(a, q, cr);
    CHECK(check_reduction(a, q, r).ok());
    CHECK(r.has(IndexSet::single(1)));
}

TEST_CASE("reduction pipeline on the tamed filtered FIX-B") {
    Atlas t = tamed_fix_b48();
    QuotientSpace q = build_quotient(t);
    CoverReduction cr = cover_reduce(t);
    Reduction red = build_reduction(t, q, cr);

    SECTION("Def. vicin certificates") {
        Report rep = check_reduction(t, q, red);
        CAPTURE(rep.failures());
        CHECK(rep.ok());
        auto s12 = q.classes_of_mask(IndexSet::of({1, 2}), red.get(t, IndexSet::of({1, 2})));
        auto s13 = q.classes_of_mask(IndexSet::of({1, 3}), red.get(t, IndexSet::of({1, 3})));
        for (long c : s12) CHECK_FALSE(s13.count(c));
    }

    SECTION("check_reduction flags V_I = U_I (clause ii) and the empty family (clause iii)") {
        Reduction full;
        for (IndexSet i : t.index_sets()) full.v[i] = t.chart(i).carrier;
        Report rep = check_reduction(t, q, full);
        bool ii = false;
        for (const auto& cl : rep.clauses)
            if (!cl.pass && cl.name.rfind("(ii)", 0) == 0) ii = true;
        CHECK(ii);

        Reduction empty;
        Report rep2 = check_reduction(t, q, empty);
        bool iii = false;
        for (const auto& cl : rep2.clauses)
            if (!cl.pass && cl.name.rfind("(iii)", 0) == 0) iii = true;
        CHECK(iii);
    }

    SECTION("nested_reduction with and without w") {
        Reduction c1 = nested_reduction(t, q, red);
        for (const auto& [i, ci] : c1.v) CHECK(rel_precompact_in(ci, red.get(t, i), t.chart(i).carrier));

        std::set<long> everything;
        for (size_t c = 0; c < q.n_classes; ++c) everything.insert(long(c));
        Reduction c2 = nested_reduction(t, q, red, &everything);
        for (IndexSet i : t.index_sets()) CHECK(c1.get(t, i) == c2.get(t, i));

        std::set<long> w;
        for (IndexSet i : t.index_sets()) {
            RegionMask z = t.chart(i).zero_set;
            RegionMask near = mask_intersect(closure_h(closure_h(z)), t.chart(i).carrier);
            auto cs = q.classes_of_mask(i, near);
            w.insert(cs.begin(), cs.end());
        }
        Reduction c3 = nested_reduction(t, q, red, &w);
        std::set<long> c3c = reduction_classes(t, q, c3);
        for (long c : c3c) CHECK(w.count(c));
    }

    SECTION("delta_enlarge returns delta >= h with both delred(a) conclusions") {
        QuotientMetric m = QuotientMetric::prepare(q);
        DeltaEnlargement de = delta_enlarge(t, q, m, red);
        CHECK(de.delta >= rat(1, 48));
        CHECK(check_reduction(t, q, de.enlarged).ok());
    }

    SECTION("metric refinement: disjoint Z closures give disjoint V images") {
        QuotientMetric m = QuotientMetric::prepare(q);
        BuildReductionOptions opt;
        opt.metric = &m;
        Reduction red2 = build_reduction(t, q, cr, opt);
        for (const auto& [i, zi] : cr.z)
            for (const auto& [j, zj] : cr.z) {
                if (i.bits >= j.bits) continue;
                if (!x_closure(zi).intersect(x_closure(zj)).empty()) continue;
                auto si = q.classes_of_mask(i, mask_intersect(closure_h(red2.get(t, i)),
                                                              t.chart(i).carrier));
                auto sj = q.classes_of_mask(j, mask_intersect(closure_h(red2.get(t, j)),
                                                              t.chart(j).carrier));
                for (long c : si) CHECK_FALSE(sj.count(c));
            }
    }
}

TEST_CASE("delta_enlarge corner cases") {
    SECTION("single chart with four shells of slack: delta >= 2h") {
        Atlas a = roomy_single_chart();
        QuotientSpace q = build_quotient(a);
        QuotientMetric m = QuotientMetric::prepare(q);
        const Chart& c = a.chart(IndexSet::single(1));
        Reduction v;
        RegionMask small(c.dom);
        c.carrier.for_each([&](size_t x) {
            Vec co = c.dom->coord(x);
            if (rat_abs(co[0] - rat(1, 2)) <= rat(1, 4) && rat_abs(co[1]) <= rat(1, 4))
                small.set(x);
        });
        v.v[IndexSet::single(1)] = small;
        DeltaEnlargement de = delta_enlarge(a, q, m, v);
        CHECK(de.delta >= rat(1, 2));
    }
    SECTION("reduction touching the boundary: NoSlack") {
        Atlas a = roomy_single_chart();
        QuotientSpace q = build_quotient(a);
        QuotientMetric m = QuotientMetric::prepare(q);
        Reduction v;
        v.v[IndexSet::single(1)] = a.chart(IndexSet::single(1)).carrier;
        CHECK_THROWS_AS(delta_enlarge(a, q, m, v), Error);
    }
}
