#include <catch2/catch_amalgamated.hpp>

#include "kkit/fixtures.hpp"
#include "kkit/realization.hpp"

using namespace kkit;

namespace {

Atlas single_chart_atlas() {
    using namespace fx;
    Atlas a;
    a.X = std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::line(rat(0), rat(1), 2));
    a.n_basic = 1;
    auto I1 = IndexSet::single(1);
    auto g = grid({rat(0)}, {rat(1)}, rat(1, 4));
    a.charts[I1] = make_chart(I1, g, "x1 == 0 or x1 == 1", {"x1*(x1-1)"}, a.X, PointSet(a.X, true),
                              "x1", false);
    return a;
}

// independent oracle: brute-force transitive closure of the generator pairs
std::vector<long> brute_force_classes(const Atlas& a, const ObjectSpace& objs) {
    std::vector<std::vector<size_t>> adj(objs.total);
    for (const auto& [key, ch] : a.changes) {
        size_t pi = objs.pos.at(ch.src), pj = objs.pos.at(ch.dst);
        const Chart& ci = a.chart(ch.src);
        const Chart& cj = a.chart(ch.dst);
        ch.domain.for_each([&](size_t x) {
            auto y = ch.base.apply(*ci.dom, *cj.dom, x);
            REQUIRE(y.has_value());
            adj[objs.gid(pi, x)].push_back(objs.gid(pj, *y));
            adj[objs.gid(pj, *y)].push_back(objs.gid(pi, x));
        });
    }
    std::vector<long> comp(objs.total, -1);
    long next = 0;
    for (size_t p = 0; p < objs.order.size(); ++p) {
        const Chart& c = a.chart(objs.order[p]);
        c.carrier.for_each([&](size_t x) {
            size_t start = objs.gid(p, x);
            if (comp[start] >= 0) return;
            std::vector<size_t> stack{start};
            comp[start] = next;
            while (!stack.empty()) {
                size_t u = stack.back();
                stack.pop_back();
                for (size_t v : adj[u])
                    if (comp[v] < 0) {
                        comp[v] = next;
                        stack.push_back(v);
                    }
            }
            ++next;
        });
    }
    return comp;
}

void check_same_partition(const Atlas& a, const QuotientSpace& q) {
    auto oracle = brute_force_classes(a, q.objs);
    std::map<long, long> fwd, bwd;
    for (size_t g = 0; g < q.objs.total; ++g) {
        if (q.cls[g] < 0) {
            CHECK(oracle[g] < 0);
            continue;
        }
        auto [itf, f1] = fwd.emplace(q.cls[g], oracle[g]);
        CHECK(itf->second == oracle[g]);
        auto [itb, f2] = bwd.emplace(oracle[g], q.cls[g]);
        CHECK(itb->second == q.cls[g]);
    }
}

} // namespace

TEST_CASE("build_quotient: identity partition on a single chart") {
    Atlas a = single_chart_atlas();
    QuotientSpace q = build_quotient(a);
    CHECK(q.n_classes == a.chart(IndexSet::single(1)).carrier.count());
    check_same_partition(a, q);
}

TEST_CASE("build_quotient matches brute-force transitive closure on all fixtures") {
    for (Atlas a : {fix_a(), fix_b(), fix_c(), fix_d(), fix_tower(3)}) {
        QuotientSpace q = build_quotient(a);
        check_same_partition(a, q);
    }
    FixBOptions o;
    o.filtered = true;
    Atlas bf = fix_b(o);
    check_same_partition(bf, build_quotient(bf));
}

TEST_CASE("FIX-B: the wrap-around identification and the 6-generator chain") {
    Atlas b = fix_b(); // h = 1/12
    QuotientSpace q = build_quotient(b);
    auto I3 = IndexSet::single(3);
    const Chart& c3 = b.chart(I3);

    // x_3^1 in V_3^1 and x_3^2 in V_3^2 share a class
    auto x31 = c3.dom->sample_at({rat(3, 4), rat(1, 12)});
    auto x32 = c3.dom->sample_at({rat(3, 4) + 1, rat(1, 12)});
    REQUIRE(x31.has_value());
    REQUIRE(x32.has_value());
    REQUIRE(c3.carrier.test(*x31));
    REQUIRE(c3.carrier.test(*x32));
    CHECK(q.class_of(I3, *x31) == q.class_of(I3, *x32));

    // eq:equiv123: connected by a chain of at most 6 generators
    size_t p3 = q.objs.pos.at(I3);
    auto chain = generator_chain(q, q.objs.gid(p3, *x31), q.objs.gid(p3, *x32));
    REQUIRE(!chain.empty());
    CHECK(chain.size() - 1 <= 6);

    // and pi_K fails to be injective exactly on U_3
    Report rep = check_injectivity(b, q);
    CHECK_FALSE(rep.ok());
    for (const auto& cl : rep.clauses) {
        if (cl.name.find("U_{3}") != std::string::npos) CHECK_FALSE(cl.pass);
        if (cl.name.find("U_{1}") != std::string::npos) CHECK(cl.pass);
        if (cl.name.find("U_{2}") != std::string::npos) CHECK(cl.pass);
    }
}

TEST_CASE("check_injectivity passes on tame atlases and single charts") {
    CHECK(check_injectivity(single_chart_atlas(), build_quotient(single_chart_atlas())).ok());
    Atlas a = fix_a();
    CHECK(check_injectivity(a, build_quotient(a)).ok());
}

TEST_CASE("eq:useful2: zero-set injectivity holds even on pathological atlases") {
    for (Atlas a : {fix_b(), fix_c(), fix_d()}) {
        QuotientSpace q = build_quotient(a);
        CHECK(zero_set_injective(a, q));
    }
}

TEST_CASE("equivalent_maxmin agrees with union-find on tame fixtures") {
    for (Atlas a : {fix_a(), fix_tower(3)}) {
        REQUIRE(check_tame(a).ok());
        QuotientSpace q = build_quotient(a);
        std::vector<TaggedSample> all;
        for (IndexSet i : a.index_sets())
            a.chart(i).carrier.for_each([&](size_t x) { all.push_back({i, x}); });
        for (const auto& p : all)
            for (const auto& r : all) {
                bool dsu = q.same(p, r);
                bool mm = equivalent_maxmin(a, p, r);
                if (dsu != mm) { CAPTURE(q.sample_str(p), q.sample_str(r)); }
                REQUIRE(dsu == mm);
            }
    }
}

TEST_CASE("epsilon_set") {
    Atlas a = fix_a();
    QuotientSpace q = build_quotient(a);
    auto I1 = IndexSet::single(1), I2 = IndexSet::single(2), I12 = IndexSet::of({1, 2});

    SECTION("J = I returns S") {
        RegionMask s(a.chart(I1).dom);
        s.set(3);
        CHECK(epsilon_set(a, I1, I1, s) == s);
    }
    SECTION("matches the union-find preimage on every chart pair") {
        for (IndexSet i : a.index_sets())
            for (IndexSet j : a.index_sets()) {
                RegionMask s = a.chart(i).carrier;
                RegionMask eps = epsilon_set(a, j, i, s);
                auto cs = q.classes_of_mask(i, s);
                RegionMask expect = q.mask_of_classes(j, cs);
                CHECK(eps == expect);
            }
    }
    SECTION("closed form eps_J(U_I) = U_{J(IuJ)} ∩ s^{-1}(E_{(I∩J)J})") {
        RegionMask eps = epsilon_set(a, I2, I1, a.chart(I1).carrier);
        RegionMask expect = mask_intersect(
            a.domain_mask(I2, I12), a.section_preimage(I2, a.filtration_subspace(IndexSet{}, I2)));
        CHECK(eps == expect);
    }
    SECTION("FormulaMismatch on a non-tame input") {
        Atlas b = fix_b(); // weak but not tame
        CHECK_THROWS_AS(epsilon_set(b, IndexSet::single(2), IndexSet::single(1),
                                    b.chart(IndexSet::single(1)).carrier),
                        Error);
    }
}

TEST_CASE("embed_footprint") {
    SECTION("FIX-A: three distinct classes equal to the zero classes") {
        Atlas a = fix_a();
        QuotientSpace q = build_quotient(a);
        FootprintEmbedding e = embed_footprint(a, q);
        CHECK(e.report.ok());
        std::set<long> img(e.class_of_point.begin(), e.class_of_point.end());
        CHECK(img.size() == 3);
    }
    SECTION("single chart over a single point") {
        using namespace fx;
        Atlas a;
        a.X = std::make_shared<FiniteMetricSpace>(
            FiniteMetricSpace(1, std::vector<Rational>{rat(0)}, {Vec{rat(0)}}));
        a.n_basic = 1;
        auto g = grid({rat(0)}, {rat(1)}, rat(1));
        a.charts[IndexSet::single(1)] =
            make_chart(IndexSet::single(1), g, "x1 == 0", {}, a.X, PointSet(a.X, true), "x1", false);
        QuotientSpace q = build_quotient(a);
        CHECK(q.n_classes == 1);
        FootprintEmbedding e = embed_footprint(a, q);
        CHECK(e.report.ok());
    }
    SECTION("FIX-B: |X| zero classes, bijective") {
        Atlas b = fix_b();
        QuotientSpace q = build_quotient(b);
        FootprintEmbedding e = embed_footprint(b, q);
        CHECK(e.report.ok());
        std::set<long> img;
        for (long c : e.class_of_point) img.insert(c);
        CHECK(img.size() == b.X->npoints);
    }
}

TEST_CASE("check_closed_relation") {
    SECTION("single chart: empty violation set") {
        Atlas a = single_chart_atlas();
        CHECK(check_closed_relation(a, build_quotient(a)).ok());
    }
    SECTION("FIX-A (tame): empty violation set") {
        Atlas a = fix_a();
        CHECK(check_closed_relation(a, build_quotient(a)).ok());
    }
    SECTION("FIX-C at h = 1/8: violations of the form ((1,(0,y)),(2,(0,y))), y > 0") {
        Atlas c = fix_c();
        QuotientSpace q = build_quotient(c);
        Report rep = check_closed_relation(c, q);
        REQUIRE_FALSE(rep.ok());
        const auto& witnesses = rep.clauses.front().witnesses;
        bool shape = false;
        for (const auto& w : witnesses) {
            for (int k = 1; k <= 15; ++k) {
                std::string y = rat_str(rat(k, 8));
                if (w == "(({1},(0," + y + ")),({2},(0," + y + ")))") shape = true;
            }
        }
        CHECK(shape);
        for (const auto& w : witnesses) CHECK(w.find("({1},(0,") != std::string::npos);
    }
}

TEST_CASE("bundle quotient on FIX-A") {
    Atlas a = fix_a();
    a.charts[IndexSet::single(1)].fiber_window =
        GridDomain::uniform({rat(-1)}, {rat(1)}, rat(1, 4));
    a.charts[IndexSet::of({1, 2})].fiber_window =
        GridDomain::uniform({rat(-1), rat(-1)}, {rat(1), rat(1)}, rat(1, 4));
    BundleQuotient bq = build_bundle_quotient(a);
    CHECK(bq.n_classes > 0);

    // fiber objects over identified base points are identified
    auto I1 = IndexSet::single(1);
    auto I12 = IndexSet::of({1, 2});
    const auto& ch = a.change(I1, I12);
    size_t p1 = 0, p12 = 0;
    for (size_t i = 0; i < bq.order.size(); ++i) {
        if (bq.order[i] == I1) p1 = i;
        if (bq.order[i] == I12) p12 = i;
    }
    size_t z1 = bq.fiber_grids[p1]->sample_at({rat(0)}).value();
    size_t z12 = bq.fiber_grids[p12]->sample_at({rat(0), rat(0)}).value();
    ch.domain.for_each([&](size_t x) {
        auto y = ch.base.apply(*a.chart(I1).dom, *a.chart(I12).dom, x);
        REQUIRE(y.has_value());
        CHECK(bq.class_at(p1, x, z1) == bq.class_at(p12, *y, z12));
    });
}

TEST_CASE("quotient metric: exactness and chart isometries") {
    Atlas a = fix_a();
    QuotientSpace q = build_quotient(a);
    QuotientMetric m = QuotientMetric::prepare(q);
    m.build_full();

    for (size_t c1 = 0; c1 < q.n_classes; ++c1)
        for (size_t c2 = 0; c2 < q.n_classes; ++c2) {
            CHECK(m.table[c1][c2] == m.table[c2][c1]);
            if (c1 != c2) CHECK(m.table[c1][c2] > 0);
        }
    for (size_t c1 = 0; c1 < q.n_classes; ++c1)
        for (size_t c2 = 0; c2 < q.n_classes; ++c2)
            for (size_t c3 = 0; c3 < q.n_classes; ++c3)
                CHECK(m.table[c1][c3] <= m.table[c1][c2] + m.table[c2][c3]);

    // pullback along any coordinate change is an exact isometry (classes agree)
    for (const auto& [key, ch] : a.changes) {
        const Chart& ci = a.chart(ch.src);
        const Chart& cj = a.chart(ch.dst);
        auto mem = ch.domain.members();
        for (size_t u : mem)
            for (size_t v : mem) {
                auto yu = ch.base.apply(*ci.dom, *cj.dom, u);
                auto yv = ch.base.apply(*ci.dom, *cj.dom, v);
                REQUIRE((yu && yv));
                CHECK(m.table[size_t(q.class_of(ch.src, u))][size_t(q.class_of(ch.src, v))] ==
                      m.table[size_t(q.class_of(ch.dst, *yu))][size_t(q.class_of(ch.dst, *yv))]);
            }
    }
}

TEST_CASE("FIX-D neighbourhood basis witness") {
    Atlas d = fix_d();
    QuotientSpace q = build_quotient(d);
    QuotientMetric m = QuotientMetric::prepare(q);
    m.build_full();

    SECTION("delta = 1/2 with f(x) = x/4: witness found") {
        auto res = neighbourhood_basis_witness(d, q, m, {rat(1, 2)}, rat(1, 4), false, rat(1, 2));
        REQUIRE(res.report.clauses.size() == 1);
        CHECK(res.report.clauses[0].witnesses.front().rfind("witness found", 0) == 0);
    }
    SECTION("delta beyond the diameter: degenerate") {
        auto res = neighbourhood_basis_witness(d, q, m, {rat(10)}, rat(1, 4), false, rat(1, 2));
        CHECK(res.report.clauses[0].witnesses.front().rfind("degenerate", 0) == 0);
    }
    SECTION("constant f at the fiber height: containment scan still decides") {
        auto res = neighbourhood_basis_witness(d, q, m, {rat(1, 4)}, rat(2), true, rat(2));
        CHECK(res.report.clauses[0].witnesses.front().rfind("contained", 0) == 0);
    }
}
