#pragma once

#include "kkit/realization.hpp"

namespace kkit {

// ---------------------------------------------------------------------------
// Nested covers (eq:FGI) and cover reductions (eq:ZGI) on X.
// ---------------------------------------------------------------------------

struct NestedCovers {
    // per basic chart id (1-indexed): F[k] for k = 0..depth, G[k] for k = 1..depth
    std::vector<std::vector<PointSet>> f, g;
    int depth = 0;
};

inline NestedCovers nested_cover_sequence(SpacePtr X, const std::vector<PointSet>& basics,
                                          int depth) {
    size_t n = basics.size() - 1; // 1-indexed
    NestedCovers nc;
    nc.depth = depth;
    nc.f.assign(n + 1, {});
    nc.g.assign(n + 1, {});
    for (size_t i = 1; i <= n; ++i) {
        nc.f[i].assign(size_t(depth) + 1, PointSet(X));
        nc.g[i].assign(size_t(depth) + 1, PointSet(X));
        nc.f[i][size_t(depth)] = basics[i];
        for (int k = depth; k >= 1; --k) {
            nc.g[i][size_t(k)] = x_erode(nc.f[i][size_t(k)]);
            if (k >= 1) nc.f[i][size_t(k) - 1] = x_erode(nc.g[i][size_t(k)]);
        }
    }
    // every level must still cover X
    for (int k = 0; k <= depth; ++k) {
        PointSet cover(X);
        for (size_t i = 1; i <= n; ++i) cover = cover.unite(nc.f[i][size_t(k)]);
        require(cover == PointSet(X, true), "GridTooCoarse",
                "nested cover level F^" + std::to_string(k) + " fails to cover X");
        if (k >= 1) {
            PointSet gcover(X);
            for (size_t i = 1; i <= n; ++i) gcover = gcover.unite(nc.g[i][size_t(k)]);
            require(gcover == PointSet(X, true), "GridTooCoarse",
                    "nested cover level G^" + std::to_string(k) + " fails to cover X");
        }
    }
    return nc;
}

struct CoverReduction {
    SpacePtr X;
    std::map<IndexSet, PointSet> z; // nonempty Z_I only

    PointSet get(IndexSet i) const {
        auto it = z.find(i);
        return it == z.end() ? PointSet(X) : it->second;
    }
};

inline Report check_cover_reduction(const std::vector<PointSet>& basics, const CoverReduction& cr) {
    Report rep;
    {
        auto& cl = rep.add("(i) Z_I precompact in F_I");
        for (const auto& [i, zi] : cr.z) {
            PointSet fi(cr.X, true);
            for (int m : i.members()) fi = fi.intersect(basics[size_t(m)]);
            if (!x_precompact_in(zi, fi)) {
                cl.pass = false;
                cl.witnesses.push_back("Z_" + i.str());
            }
        }
    }
    {
        auto& cl = rep.add("(ii) incomparable closures disjoint");
        for (const auto& [i, zi] : cr.z)
            for (const auto& [j, zj] : cr.z) {
                if (i.bits >= j.bits) continue;
                if (i.subset_of(j) || j.subset_of(i)) continue;
                if (!x_closure(zi).intersect(x_closure(zj)).empty()) {
                    cl.pass = false;
                    cl.witnesses.push_back("cl Z_" + i.str() + " meets cl Z_" + j.str());
                }
            }
    }
    {
        auto& cl = rep.add("(iii) the Z_I cover X");
        PointSet cover(cr.X);
        for (const auto& [i, zi] : cr.z) cover = cover.unite(zi);
        if (cover != PointSet(cr.X, true)) cl.pass = false;
    }
    return rep;
}

// Lemma cov0 via eq:ZGI. The ladder depth adapts to the deepest nonempty
// intersection (plus one level for the covering argument).
inline CoverReduction cover_reduce(SpacePtr X, const std::vector<PointSet>& basics) {
    size_t n = basics.size() - 1;
    int deepest = 0;
    for (std::uint32_t bits = 1; bits < (1u << n); ++bits) {
        IndexSet I(bits);
        PointSet f(X, true);
        for (int m : I.members()) f = f.intersect(basics[size_t(m)]);
        if (!f.empty()) deepest = std::max(deepest, I.size());
    }
    NestedCovers nc = nested_cover_sequence(X, basics, deepest + 1);

    CoverReduction cr;
    cr.X = X;
    for (std::uint32_t bits = 1; bits < (1u << n); ++bits) {
        IndexSet I(bits);
        int k = I.size();
        PointSet zi(X, true);
        for (int m : I.members()) zi = zi.intersect(nc.g[size_t(m)][size_t(k)]);
        for (size_t j = 1; j <= n; ++j) {
            if (I.contains(int(j))) continue;
            zi = zi.minus(x_closure(nc.f[j][size_t(k)]));
        }
        if (!zi.empty()) cr.z[I] = std::move(zi);
    }
    Report rep = check_cover_reduction(basics, cr);
    require(rep.ok(), "GridTooCoarse",
            "cover reduction invariants fail: " +
                (rep.failures().empty() ? "?" : rep.failures().front()));
    return cr;
}

inline CoverReduction cover_reduce(const Atlas& a) {
    std::vector<PointSet> basics(size_t(a.n_basic) + 1, PointSet(a.X));
    for (int i = 1; i <= a.n_basic; ++i) basics[size_t(i)] = a.chart(IndexSet::single(i)).footprint;
    return cover_reduce(a.X, basics);
}

// Rmk. nerve (read-only diagnostics): the nerve of the closures of a cover
// reduction consists of chains in the inclusion poset.
inline Report nerve_report(const CoverReduction& cr) {
    Report rep;
    auto& cl = rep.add("nerve simplices of the closures are inclusion chains");
    std::vector<std::pair<IndexSet, PointSet>> closures;
    for (const auto& [i, zi] : cr.z) closures.emplace_back(i, x_closure(zi));
    for (std::uint32_t s = 1; s < (1u << closures.size()); ++s) {
        PointSet inter(cr.X, true);
        std::vector<IndexSet> verts;
        for (size_t p = 0; p < closures.size(); ++p)
            if ((s >> p) & 1) {
                inter = inter.intersect(closures[p].second);
                verts.push_back(closures[p].first);
            }
        if (inter.empty()) continue;
        for (size_t u = 0; u < verts.size(); ++u)
            for (size_t v = u + 1; v < verts.size(); ++v)
                if (!verts[u].subset_of(verts[v]) && !verts[v].subset_of(verts[u])) {
                    cl.pass = false;
                    cl.witnesses.push_back(verts[u].str() + " vs " + verts[v].str());
                }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Atlas reductions (Def. vicin) and their construction (Prop. cov2(a)).
// ---------------------------------------------------------------------------

struct Reduction {
    std::map<IndexSet, RegionMask> v;

    RegionMask get(const Atlas& a, IndexSet i) const {
        auto it = v.find(i);
        return it == v.end() ? RegionMask(a.chart(i).dom) : it->second;
    }
    bool has(IndexSet i) const { return v.count(i) && !v.at(i).empty(); }
};

inline std::set<long> reduction_classes(const Atlas& a, const QuotientSpace& q, const Reduction& r) {
    std::set<long> out;
    for (const auto& [i, vi] : r.v) {
        auto cs = q.classes_of_mask(i, vi);
        out.insert(cs.begin(), cs.end());
    }
    return out;
}

// closure taken relative to the chart carrier (the carrier is the whole chart
// space, so absolute precompactness is automatic on finite models)
inline bool rel_precompact_in(const RegionMask& s, const RegionMask& t, const RegionMask& carrier) {
    return mask_intersect(closure_h(s), carrier).subset_of(t);
}

inline Report check_reduction(const Atlas& a, const QuotientSpace& q, const Reduction& r) {
    Report rep;
    {
        auto& cl = rep.add("(i) V_I inside U_I and meets the zero set when nonempty");
        for (IndexSet i : a.index_sets()) {
            RegionMask vi = r.get(a, i);
            if (vi.empty()) continue;
            if (!vi.subset_of(a.chart(i).carrier)) {
                cl.pass = false;
                cl.witnesses.push_back("V_" + i.str() + " escapes U_" + i.str());
            }
            if (mask_intersect(vi, a.chart(i).zero_set).empty()) {
                cl.pass = false;
                cl.witnesses.push_back("V_" + i.str() + " misses the zero set");
            }
        }
    }
    {
        auto& cl = rep.add("(ii) incomparable quotient closures disjoint");
        for (IndexSet i : a.index_sets())
            for (IndexSet j : a.index_sets()) {
                if (i.bits >= j.bits || i.subset_of(j) || j.subset_of(i)) continue;
                RegionMask ci = mask_intersect(closure_h(r.get(a, i)), a.chart(i).carrier);
                RegionMask cj = mask_intersect(closure_h(r.get(a, j)), a.chart(j).carrier);
                auto si = q.classes_of_mask(i, ci);
                auto sj = q.classes_of_mask(j, cj);
                for (long c : si)
                    if (sj.count(c)) {
                        cl.pass = false;
                        cl.witnesses.push_back("pi(cl V_" + i.str() + ") meets pi(cl V_" + j.str() +
                                               ")");
                        break;
                    }
            }
    }
    {
        auto& cl = rep.add("(iii) iota_K(X) covered by pi_K(V)");
        std::set<long> vc = reduction_classes(a, q, r);
        FootprintEmbedding e = embed_footprint(a, q);
        for (long c : e.class_of_point)
            if (c >= 0 && !vc.count(c)) {
                cl.pass = false;
                cl.witnesses.push_back("zero class " + std::to_string(c) + " uncovered");
            }
    }
    return rep;
}

struct BuildReductionOptions {
    const QuotientMetric* metric = nullptr; // optional Rmk. disjoint refinement
    int margin_shells = 1;                  // interior margin of the W_I
};

// Prop. cov2(a): W_I by chart restriction to Z_I (eq:wwI), separation
// neighborhoods N(Y_IJ) (eq:QIVI), then V_I := W_I minus those.
inline Reduction build_reduction(const Atlas& a, const QuotientSpace& q, const CoverReduction& cr,
                                 const BuildReductionOptions& opt = {}) {
    Reduction red;
    std::map<IndexSet, RegionMask> w;

    // optional metric refinement radius (Rmk. disjoint)
    ExtDist delta = ExtDist::inf();
    if (opt.metric) {
        FootprintEmbedding e = embed_footprint(a, q);
        for (const auto& [i, zi] : cr.z)
            for (const auto& [j, zj] : cr.z) {
                if (i.bits >= j.bits) continue;
                if (!x_closure(zi).intersect(x_closure(zj)).empty()) continue;
                std::set<long> ci, cj;
                for (size_t p : x_closure(zi).members()) ci.insert(e.class_of_point[p]);
                for (size_t p : x_closure(zj).members()) cj.insert(e.class_of_point[p]);
                ExtDist d = opt.metric->set_distance(ci, cj);
                if (d < delta) delta = d;
            }
    }

    for (IndexSet i : a.index_sets()) {
        PointSet zi = cr.get(i);
        if (zi.empty()) continue;
        const Chart& c = a.chart(i);
        // eq:wwI: restrict-chart distance formula, within an interior margin
        RegionMask margin = erode_h_iter(c.carrier, opt.margin_shells);
        RegionMask near = c.psi_preimage(zi);
        RegionMask far = c.psi_preimage(c.footprint.minus(zi));
        RegionMask wi(c.dom);
        margin.for_each([&](size_t x) {
            if (dist_to_mask(x, near) < dist_to_mask(x, far)) wi.set(x);
        });
        wi = mask_union(wi, near); // zero trace survives the margin
        // one-sided second closure condition: cl(W) meets the zero set only
        // over cl_X(Z_I)
        RegionMask bad_zeros = mask_diff(c.zero_set, c.psi_preimage(x_closure(zi)));
        wi = mask_diff(wi, closure_h(bad_zeros));
        if (opt.metric && !delta.is_inf()) wi = mask_intersect(wi, dilate(near, *delta.v / 2));
        require(mask_intersect(wi, c.zero_set) == near, "GridTooCoarse",
                "eq:wwI zero trace fails for " + i.str());
        w[i] = std::move(wi);
    }

    for (const auto& [i, wi] : w) {
        const Chart& c = a.chart(i);
        RegionMask vi = wi;
        RegionMask cl_wi = mask_intersect(closure_h(wi), c.carrier);
        for (const auto& [j, wj] : w) {
            if (i.subset_of(j) || j.subset_of(i)) continue; // J in C(I)
            RegionMask cl_wj = mask_intersect(closure_h(wj), a.chart(j).carrier);
            RegionMask y = mask_intersect(cl_wi, q.mask_of_classes(i, q.classes_of_mask(j, cl_wj)));
            if (y.empty()) continue;
            RegionMask anchor = c.psi_preimage(x_closure(cr.get(i)));
            require(mask_intersect(y, anchor).empty(), "SeparationImpossible",
                    "Y_" + i.str() + j.str() + " touches the anchored zero preimage");
            Rational r_ij = mask_distance(y, anchor) / 2;
            require(r_ij > c.dom->unit, "SeparationImpossible",
                    "r_" + i.str() + j.str() + " <= h: grid too coarse to insert N(Y_IJ)");
            vi = mask_diff(vi, dilate(y, r_ij));
        }
        require(mask_intersect(vi, c.zero_set) == mask_intersect(wi, c.zero_set),
                "SeparationImpossible", "N(Y_IJ) removal touched the zero trace of " + i.str());
        red.v[i] = std::move(vi);
    }

    Report rep = check_reduction(a, q, red);
    require(rep.ok(), "SeparationImpossible",
            "Def. vicin certificate fails: " +
                (rep.failures().empty() ? "?" : rep.failures().front()));
    return red;
}

// ---------------------------------------------------------------------------
// Nested reductions (Lemma delred(b), Thm. red(iii)(a)).
// ---------------------------------------------------------------------------

inline Reduction nested_reduction(const Atlas& a, const QuotientSpace& q, const Reduction& v,
                                  const std::set<long>* w_classes = nullptr) {
    // shrink the footprint family of v one shell, keeping the cover
    std::vector<std::pair<IndexSet, PointSet>> zs;
    for (IndexSet i : a.index_sets()) {
        RegionMask vi = v.get(a, i);
        if (vi.empty()) continue;
        zs.emplace_back(i, a.chart(i).psi_image(mask_intersect(vi, a.chart(i).zero_set)));
    }
    std::map<IndexSet, PointSet> zprime;
    for (size_t pos = 0; pos < zs.size(); ++pos) {
        auto [i, zi] = zs[pos];
        PointSet others(a.X);
        for (size_t p2 = 0; p2 < zs.size(); ++p2) {
            if (p2 == pos) continue;
            others = others.unite(p2 < pos ? zprime[zs[p2].first] : zs[p2].second);
        }
        PointSet core = others.complement();
        PointSet zp = x_erode(zi).unite(core);
        require(x_precompact_in(zp, zi), "GridTooCoarse",
                "footprint of V_" + i.str() + " cannot shrink one shell");
        zprime[i] = std::move(zp);
    }

    Reduction c;
    for (auto& [i, zi] : zs) {
        const Chart& ch = a.chart(i);
        PointSet zp = zprime[i];
        RegionMask vi = v.get(a, i);
        if (zp.empty()) {
            continue; // dropped: no zero trace left
        }
        RegionMask near = ch.psi_preimage(zp);
        RegionMask far = ch.psi_preimage(zi.minus(zp));
        RegionMask ci(ch.dom);
        erode_h(vi).for_each([&](size_t x) {
            if (dist_to_mask(x, near) < dist_to_mask(x, far)) ci.set(x);
        });
        ci = mask_union(ci, near);
        require(rel_precompact_in(ci, vi, ch.carrier), "GridTooCoarse",
                "C_" + i.str() + " not precompact in V_" + i.str());
        if (w_classes) ci = mask_intersect(ci, q.mask_of_classes(i, *w_classes));
        if (mask_intersect(ci, ch.zero_set).empty()) continue; // drop component
        c.v[i] = std::move(ci);
    }

    Report rep = check_reduction(a, q, c);
    require(rep.ok(), "GridTooCoarse",
            "nested reduction certificate fails: " +
                (rep.failures().empty() ? "?" : rep.failures().front()));
    for (const auto& [i, ci] : c.v)
        require(rel_precompact_in(ci, v.get(a, i), a.chart(i).carrier), "GridTooCoarse",
                "C not nested in V at " + i.str());
    if (w_classes) {
        std::set<long> cc = reduction_classes(a, q, c);
        for (long cl0 : cc)
            require(w_classes->count(cl0), "InvariantViolation", "pi(C) escapes w");
    }
    return c;
}

// ---------------------------------------------------------------------------
// Lemma delred(a): the exact delta-enlargement of a reduction.
// ---------------------------------------------------------------------------

struct DeltaEnlargement {
    Rational delta;
    Reduction enlarged;
};

inline DeltaEnlargement delta_enlarge(const Atlas& a, const QuotientSpace& q,
                                      const QuotientMetric& metric, const Reduction& v) {
    // (II) quarter of the minimal quotient distance between incomparable pairs
    ExtDist min_pair = ExtDist::inf();
    for (IndexSet i : a.index_sets())
        for (IndexSet j : a.index_sets()) {
            if (i.bits >= j.bits || i.subset_of(j) || j.subset_of(i)) continue;
            RegionMask ci = mask_intersect(closure_h(v.get(a, i)), a.chart(i).carrier);
            RegionMask cj = mask_intersect(closure_h(v.get(a, j)), a.chart(j).carrier);
            if (ci.empty() || cj.empty()) continue;
            ExtDist d = metric.set_distance(q.classes_of_mask(i, ci), q.classes_of_mask(j, cj));
            if (d < min_pair) min_pair = d;
        }

    // (I) largest rho with B_{2 rho}(V_I) ⋐ the chart's box universe: the
    // closed 2 rho-ball around every member must fit strictly inside the grid
    // box (balls themselves are taken within the chart, Def. metric style).
    auto ball_fits = [&](IndexSet i, const RegionMask& vi, const Rational& rho2) {
        const GridDomain& g = *a.chart(i).dom;
        bool ok = true;
        vi.for_each([&](size_t x) {
            if (!ok) return;
            auto k = g.multi(x);
            for (size_t ax = 0; ax < g.dim; ++ax) {
                Rational q = rho2 / g.h[ax];
                BigInt steps = rat_floor(q);
                if (!is_integer(q)) steps += 1; // ceil(2 rho / h): closed-ball reach
                long long edge = std::min(k[ax], (long long)g.n[ax] - 1 - k[ax]);
                if (BigInt(edge) < steps) ok = false;
            }
        });
        return ok;
    };
    ExtDist slack = ExtDist::inf();
    for (IndexSet i : a.index_sets()) {
        RegionMask vi = v.get(a, i);
        if (vi.empty()) continue;
        const GridDomain& g = *a.chart(i).dom;
        long long e = -1;
        vi.for_each([&](size_t x) {
            auto k = g.multi(x);
            for (size_t ax = 0; ax < g.dim; ++ax) {
                long long edge = std::min(k[ax], (long long)g.n[ax] - 1 - k[ax]);
                if (e < 0 || edge < e) e = edge;
            }
        });
        ExtDist cap = ExtDist::of(Rational(e) * g.unit / 2);
        if (cap < slack) slack = cap;
    }

    ExtDist raw = ExtDist::inf();
    if (min_pair < raw) raw = ExtDist::of(*min_pair.v / 4);
    if (slack < raw) raw = slack;
    require(!raw.is_inf(), "NoSlack", "no finite bound for delta");
    // floor to the grid-representable lattice G = unit/4
    Rational G = metric.unit / 4;
    Rational delta = Rational(rat_floor(Rational(*raw.v / G))) * G;
    auto conditions_hold = [&](const Rational& d) {
        for (IndexSet i : a.index_sets()) {
            RegionMask vi = v.get(a, i);
            if (!vi.empty() && !ball_fits(i, vi, d * 2)) return false;
        }
        return true;
    };
    while (delta >= metric.unit && !conditions_hold(delta)) delta -= G;
    require(delta >= metric.unit, "NoSlack", "delta < h: no room to enlarge");

    DeltaEnlargement out;
    out.delta = delta;
    for (IndexSet i : a.index_sets()) {
        RegionMask vi = v.get(a, i);
        if (vi.empty()) continue;
        // in-chart ball (Def. metric)
        out.enlarged.v[i] = mask_intersect(dilate(vi, delta), a.chart(i).carrier);
    }

    // Lemma delred(a) conclusions, exactly
    for (const auto& [i, bi] : out.enlarged.v) {
        require(ball_fits(i, v.get(a, i), delta * 2), "NoSlack",
                "B_{2delta}(V_" + i.str() + ") escapes the chart box");
        require(rel_precompact_in(v.get(a, i), bi, a.chart(i).carrier), "NoSlack",
                "V not nested in B_delta(V)");
    }
    for (IndexSet i : a.index_sets())
        for (IndexSet j : a.index_sets()) {
            if (i.bits >= j.bits || i.subset_of(j) || j.subset_of(i)) continue;
            if (v.get(a, i).empty() || v.get(a, j).empty()) continue;
            ExtDist d = metric.set_distance(q.classes_of_mask(i, v.get(a, i)),
                                            q.classes_of_mask(j, v.get(a, j)));
            require(ExtDist::of(delta * 4) <= d, "NoSlack",
                    "2delta-balls of incomparable images intersect");
        }
    Report rep = check_reduction(a, q, out.enlarged);
    require(rep.ok(), "NoSlack", "delta-enlarged family is not a reduction");
    return out;
}

} // namespace kkit
