#pragma once

#include "kkit/chart.hpp"

#include <map>

namespace kkit {

enum class CocycleLevel { Weak, Standard, Strong };

inline const char* cocycle_name(CocycleLevel l) {
    switch (l) {
    case CocycleLevel::Weak: return "weak";
    case CocycleLevel::Standard: return "standard";
    default: return "strong";
    }
}

// The Kuranishi data: basic and transition charts indexed by subsets of
// {1..N}, one coordinate change per proper inclusion, optional filtration.
struct Atlas {
    SpacePtr X;
    int n_basic = 0;
    std::map<IndexSet, Chart> charts;
    std::map<std::uint64_t, CoordinateChange> changes;
    std::optional<Filtration> filt;

    bool has_chart(IndexSet i) const { return charts.count(i) != 0; }
    const Chart& chart(IndexSet i) const {
        auto it = charts.find(i);
        require(it != charts.end(), "MissingChart", "no chart " + i.str());
        return it->second;
    }
    bool has_change(IndexSet i, IndexSet j) const { return changes.count(pair_key(i, j)) != 0; }
    const CoordinateChange& change(IndexSet i, IndexSet j) const {
        auto it = changes.find(pair_key(i, j));
        require(it != changes.end(), "MissingChange",
                "no coordinate change " + i.str() + " -> " + j.str());
        return it->second;
    }

    std::vector<IndexSet> index_sets() const {
        std::vector<IndexSet> out;
        for (const auto& [k, c] : charts) out.push_back(k);
        return out;
    }

    // U_IJ with the conventions U_II = U_I and U_IJ = empty for J outside the
    // index set.
    RegionMask domain_mask(IndexSet i, IndexSet j) const {
        const Chart& ci = chart(i);
        if (i == j) return ci.carrier;
        if (!has_chart(j) || !has_change(i, j)) return RegionMask(ci.dom);
        return change(i, j).domain;
    }

    // phi_IJ applied to a mask in U_I; identity when I == J
    RegionMask push_mask(IndexSet i, IndexSet j, const RegionMask& m) const {
        if (i == j) return m;
        const auto& ch = change(i, j);
        const Chart& cj = chart(j);
        RegionMask out(cj.dom);
        m.for_each([&](size_t x) {
            auto y = ch.base.apply(*ch.domain.dom, *cj.dom, x);
            require(y.has_value(), "LatticeViolation",
                    "phi" + i.str() + j.str() + " leaves the lattice at " +
                        ch.domain.dom->coord_str(x));
            out.set(*y);
        });
        return out;
    }

    // phi_IJ^{-1}(mask in U_J) intersected with U_IJ
    RegionMask pull_mask(IndexSet i, IndexSet j, const RegionMask& m) const {
        if (i == j) return m;
        const auto& ch = change(i, j);
        const Chart& cj = chart(j);
        RegionMask out(ch.domain.dom);
        ch.domain.for_each([&](size_t x) {
            auto y = ch.base.apply(*ch.domain.dom, *cj.dom, x);
            if (y && m.test(*y)) out.set(x);
        });
        return out;
    }

    RegionMask im_phi(IndexSet i, IndexSet j) const {
        if (i == j) return chart(i).carrier;
        return push_mask(i, j, change(i, j).domain);
    }

    // {x in carrier_J : s_J(x) in S}
    RegionMask section_preimage(IndexSet j, const Subspace& s) const {
        const Chart& cj = chart(j);
        RegionMask out(cj.dom);
        cj.carrier.for_each([&](size_t x) {
            if (s.contains(cj.section.eval(*cj.dom, x))) out.set(x);
        });
        return out;
    }

    // S_IJ, derived as im L_IJ when not declared (the filtration axioms force
    // that value anyway).
    Subspace filtration_subspace(IndexSet i, IndexSet j) const {
        size_t kj = chart(j).fiber_dim;
        if (i == j) return Subspace::full(kj);
        if (i.empty()) return Subspace::zero(kj);
        if (filt && filt->has(i, j)) return filt->get(i, j, kj);
        require(has_change(i, j), "NoFiltration",
                "cannot derive subspace for " + i.str() + " ⊆ " + j.str());
        return Subspace::full(chart(i).fiber_dim).image(change(i, j).fiber);
    }

    PointSet footprint(IndexSet i) const {
        if (has_chart(i)) return chart(i).footprint;
        if (i.empty()) return PointSet(X, true);
        // intersection of basic footprints; empty for indices outside the atlas
        PointSet f(X, true);
        for (int b : i.members()) {
            if (!has_chart(IndexSet::single(b))) return PointSet(X);
            f = f.intersect(chart(IndexSet::single(b)).footprint);
        }
        return f;
    }
};

// ---------------------------------------------------------------------------
// Chart validation and restriction (Def. tchart / Lemma restr0)
// ---------------------------------------------------------------------------

inline Report validate_chart(const Chart& c) {
    Report rep;
    {
        auto& cl = rep.add("carrier nonempty and inside grid");
        if (c.carrier.empty()) {
            cl.pass = false;
            cl.witnesses.push_back("empty carrier for chart " + c.index.str());
        }
    }
    {
        auto& cl = rep.add("section arity matches fiber dimension");
        if (c.section.fiber_dim != c.fiber_dim) {
            cl.pass = false;
            cl.witnesses.push_back("section has " + std::to_string(c.section.fiber_dim) +
                                   " coordinates, fiber dim " + std::to_string(c.fiber_dim));
        }
    }
    {
        Chart tmp = c;
        tmp.resolve_zero_set();
        auto& cl = rep.add("zero set matches stored zero set");
        if (tmp.zero_set != c.zero_set) {
            cl.pass = false;
            cl.witnesses.push_back("stored zero set is stale");
        }
    }
    {
        auto& cl = rep.add("footprint map bijective onto footprint");
        // every zero sample maps, injectively, onto exactly the footprint
        if (c.psi.size() != c.zero_set.count()) {
            cl.pass = false;
            cl.witnesses.push_back("unmapped zero samples");
        }
        if (c.psi_inv.size() != c.psi.size()) {
            cl.pass = false;
            cl.witnesses.push_back("footprint map not bijective");
        }
        PointSet img(c.footprint.sp);
        for (const auto& [s, p] : c.psi) img.set(p);
        if (img != c.footprint) {
            cl.pass = false;
            cl.witnesses.push_back("psi image differs from declared footprint");
        }
    }
    return rep;
}

// Lemma restr0 discretized: domain {x in V : d(x, psi^{-1}(F')) < d(x, psi^{-1}(F\F'))}.
// V defaults to the full carrier.
inline Chart restrict_chart(const Chart& c, const PointSet& fprime,
                            const RegionMask* V = nullptr) {
    require(!fprime.empty(), "EmptyFootprint", "restriction to empty footprint");
    require(fprime.subset_of(c.footprint), "BadRestriction", "F' must sit inside F");
    RegionMask near = c.psi_preimage(fprime);
    RegionMask far = c.psi_preimage(c.footprint.minus(fprime));
    const RegionMask& v = V ? *V : c.carrier;
    RegionMask dom(c.dom);
    v.for_each([&](size_t x) {
        ExtDist dn = dist_to_mask(x, near);
        ExtDist df = dist_to_mask(x, far);
        if (dn < df) dom.set(x);
    });
    Chart out = c;
    out.carrier = mask_intersect(dom, c.carrier);
    out.footprint = fprime;
    out.resolve_zero_set();
    // psi restricted
    std::map<size_t, size_t> psi2, psiinv2;
    out.zero_set.for_each([&](size_t s) {
        auto it = c.psi.find(s);
        require(it != c.psi.end(), "BadRestriction", "restricted zero sample lost its X image");
        psi2[s] = it->second;
        psiinv2[it->second] = s;
    });
    out.psi = std::move(psi2);
    out.psi_inv = std::move(psiinv2);
    return out;
}

// ---------------------------------------------------------------------------
// Coordinate change validation, composition, cocycle conditions
// ---------------------------------------------------------------------------

inline Report validate_coordinate_change(const Atlas& a, IndexSet i, IndexSet j) {
    Report rep;
    require(a.has_change(i, j), "MissingChange", "no change " + i.str() + " -> " + j.str());
    const auto& ch = a.change(i, j);
    const Chart& ci = a.chart(i);
    const Chart& cj = a.chart(j);

    {
        auto& cl = rep.add("domain inside source carrier");
        if (!ch.domain.subset_of(ci.carrier)) {
            cl.pass = false;
            cl.witnesses.push_back("U_" + i.str() + j.str() + " not contained in U_" + i.str());
        }
    }
    {
        auto& cl = rep.add("base map lattice-compatible and into target carrier");
        std::map<size_t, size_t> seen;
        ch.domain.for_each([&](size_t x) {
            auto y = ch.base.apply(*ci.dom, *cj.dom, x);
            if (!y) {
                cl.pass = false;
                cl.witnesses.push_back("image of " + ci.dom->coord_str(x) + " off the lattice");
                return;
            }
            if (!cj.carrier.test(*y)) {
                cl.pass = false;
                cl.witnesses.push_back("image of " + ci.dom->coord_str(x) + " outside U_" + j.str());
            }
            auto [it, fresh] = seen.emplace(*y, x);
            if (!fresh) {
                cl.pass = false;
                cl.witnesses.push_back("base map not injective at " + cj.dom->coord_str(*y));
            }
        });
    }
    {
        auto& cl = rep.add("fiber map injective");
        if (ch.fiber.rows != cj.fiber_dim || ch.fiber.cols != ci.fiber_dim) {
            cl.pass = false;
            cl.witnesses.push_back("fiber map has wrong shape");
        } else if (!is_injective(ch.fiber)) {
            cl.pass = false;
            cl.witnesses.push_back("fiber map not injective");
        }
    }
    {
        auto& cl = rep.add("zero-set condition U_IJ ∩ zero = psi^{-1}(F_I ∩ F_J)");
        RegionMask lhs = mask_intersect(ch.domain, ci.zero_set);
        RegionMask rhs = ci.psi_preimage(ci.footprint.intersect(cj.footprint));
        if (lhs != rhs) {
            cl.pass = false;
            RegionMask d1 = mask_diff(lhs, rhs), d2 = mask_diff(rhs, lhs);
            d1.for_each([&](size_t x) {
                cl.witnesses.push_back("extra zero sample " + ci.dom->coord_str(x));
            });
            d2.for_each([&](size_t x) {
                cl.witnesses.push_back("missing zero sample " + ci.dom->coord_str(x));
            });
        }
    }
    {
        auto& cl = rep.add("sections intertwined: s_J ∘ phi = L ∘ s_I");
        ch.domain.for_each([&](size_t x) {
            auto y = ch.base.apply(*ci.dom, *cj.dom, x);
            if (!y) return;
            Vec lhs = cj.section.eval(*cj.dom, *y);
            Vec rhs = ch.fiber.apply(ci.section.eval(*ci.dom, x));
            if (lhs != rhs) {
                cl.pass = false;
                cl.witnesses.push_back("at " + ci.dom->coord_str(x) + ": s_J(phi x)=" +
                                       vec_str(lhs) + " vs L(s_I x)=" + vec_str(rhs));
            }
        });
    }
    {
        auto& cl = rep.add("footprint maps intertwined on the zero set");
        mask_intersect(ch.domain, ci.zero_set).for_each([&](size_t x) {
            auto y = ch.base.apply(*ci.dom, *cj.dom, x);
            if (!y) return;
            auto pi = ci.psi.find(x);
            auto pj = cj.psi.find(*y);
            if (pi == ci.psi.end() || pj == cj.psi.end() || pi->second != pj->second) {
                cl.pass = false;
                cl.witnesses.push_back("psi mismatch at " + ci.dom->coord_str(x));
            }
        });
    }
    return rep;
}

// Lemma cccomp: composite coordinate change with domain phi_IJ^{-1}(U_JK) ∩ U_IJ.
inline CoordinateChange compose_changes(const Atlas& a, IndexSet i, IndexSet j, IndexSet k) {
    require(i.proper_subset_of(j) && j.proper_subset_of(k), "BadComposition",
            "need I ⊊ J ⊊ K");
    const auto& cij = a.change(i, j);
    const auto& cjk = a.change(j, k);
    CoordinateChange out;
    out.src = i;
    out.dst = k;
    out.domain = a.pull_mask(i, j, cjk.domain);
    out.base = cjk.base.compose_after(cij.base);
    out.fiber = cjk.fiber.mul(cij.fiber);
    return out;
}

inline Report check_cocycle(const Atlas& a, CocycleLevel level) {
    Report rep;
    auto idx = a.index_sets();
    bool any = false;
    for (IndexSet i : idx)
        for (IndexSet j : idx) {
            if (!i.proper_subset_of(j)) continue;
            for (IndexSet k : idx) {
                if (!j.proper_subset_of(k)) continue;
                any = true;
                std::string tag = i.str() + " ⊊ " + j.str() + " ⊊ " + k.str();
                CoordinateChange comp = compose_changes(a, i, j, k);
                const auto& dir = a.change(i, k);
                const Chart& ci = a.chart(i);
                const Chart& ck = a.chart(k);
                {
                    auto& cl = rep.add("eq:wc overlap equality for " + tag);
                    RegionMask ov = mask_intersect(comp.domain, dir.domain);
                    ov.for_each([&](size_t x) {
                        auto y1 = comp.base.apply(*ci.dom, *ck.dom, x);
                        auto y2 = dir.base.apply(*ci.dom, *ck.dom, x);
                        if (y1 != y2) {
                            cl.pass = false;
                            cl.witnesses.push_back("base maps disagree at " + ci.dom->coord_str(x));
                        }
                    });
                    if (!ov.empty() && !(comp.fiber == dir.fiber)) {
                        cl.pass = false;
                        cl.witnesses.push_back("fiber maps disagree on overlap");
                    }
                }
                if (level != CocycleLevel::Weak) {
                    auto& cl = rep.add(std::string("domain ") +
                                       (level == CocycleLevel::Strong ? "equality" : "inclusion") +
                                       " for " + tag);
                    bool incl = comp.domain.subset_of(dir.domain);
                    if (!incl) {
                        cl.pass = false;
                        mask_diff(comp.domain, dir.domain).for_each([&](size_t x) {
                            cl.witnesses.push_back("composite domain exceeds U_IK at " +
                                                   ci.dom->coord_str(x));
                        });
                    }
                    if (level == CocycleLevel::Strong && !dir.domain.subset_of(comp.domain)) {
                        cl.pass = false;
                        mask_diff(dir.domain, comp.domain).for_each([&](size_t x) {
                            cl.witnesses.push_back("U_IK exceeds composite domain at " +
                                                   ci.dom->coord_str(x));
                        });
                    }
                }
            }
        }
    if (!any) rep.add("cocycle condition vacuous (no triples)");
    return rep;
}

// ---------------------------------------------------------------------------
// Filtration axioms (Def. Ku3, discrete rel-open surrogate for (iv))
// ---------------------------------------------------------------------------

inline Report check_filtration(const Atlas& a) {
    Report rep;
    require(a.filt.has_value() || true, "NoFiltration", "");
    auto idx = a.index_sets();

    rep.add("(i) S_JJ full and S_∅J zero (by construction)");

    for (IndexSet j : idx)
        for (IndexSet k : idx) {
            if (!j.proper_subset_of(k)) continue;
            const auto& cjk = a.change(j, k);
            for (IndexSet i : subsets_of(j)) {
                auto& cl = rep.add("(ii) L_" + j.str() + k.str() + "(S_" + i.str() + j.str() +
                                   ") = S_" + i.str() + k.str());
                Subspace lhs = a.filtration_subspace(i, j).image(cjk.fiber);
                Subspace rhs = a.filtration_subspace(i, k);
                if (lhs != rhs) {
                    cl.pass = false;
                    cl.witnesses.push_back(lhs.str() + " vs " + rhs.str());
                }
            }
        }

    for (IndexSet j : idx) {
        auto subs = subsets_of(j);
        for (IndexSet i : subs)
            for (IndexSet h : subs) {
                if (h.bits < i.bits) continue;
                auto& cl = rep.add("(iii) S_" + i.str() + j.str() + " ∩ S_" + h.str() + j.str() +
                                   " = S_" + i.intersect(h).str() + j.str());
                Subspace lhs = a.filtration_subspace(i, j).intersect(a.filtration_subspace(h, j));
                Subspace rhs = a.filtration_subspace(i.intersect(h), j);
                if (lhs != rhs) {
                    cl.pass = false;
                    cl.witnesses.push_back(lhs.str() + " vs " + rhs.str());
                }
            }
    }

    for (IndexSet i : idx)
        for (IndexSet j : idx) {
            if (!i.proper_subset_of(j)) continue;
            auto& cl = rep.add("(iv) im phi_" + i.str() + j.str() + " rel-open(h) in s^{-1}(S_" +
                               i.str() + j.str() + ")");
            RegionMask im = a.im_phi(i, j);
            RegionMask pre = a.section_preimage(j, a.filtration_subspace(i, j));
            if (!im.subset_of(pre)) {
                cl.pass = false;
                cl.witnesses.push_back("image escapes s^{-1}(E_IJ)");
                continue;
            }
            RegionMask bad = mask_intersect(closure_h(mask_diff(pre, im)), im);
            if (!bad.empty()) {
                cl.pass = false;
                bad.for_each([&](size_t x) {
                    cl.witnesses.push_back("not rel-open at " + a.chart(j).dom->coord_str(x));
                });
            }
        }
    return rep;
}

// ---------------------------------------------------------------------------
// Tameness (Def. tame): eq:tame1, eq:tame2, plus the derived identities
// eq:tame3 / eq:tame5 as redundant cross-checks.
// ---------------------------------------------------------------------------

inline Report check_tame(const Atlas& a) {
    Report rep;
    auto idx = a.index_sets();

    // eq:tame1, I = ∅ convention: footprint intersections
    for (IndexSet j : idx)
        for (IndexSet k : idx) {
            if (k.bits < j.bits) continue;
            auto& cl = rep.add("eq:tame1[∅] F_" + j.str() + " ∩ F_" + k.str() + " = F_" +
                               j.unite(k).str());
            PointSet lhs = a.footprint(j).intersect(a.footprint(k));
            PointSet rhs = a.footprint(j.unite(k));
            if (lhs != rhs) {
                cl.pass = false;
                cl.witnesses.push_back("footprint identity fails");
            }
        }

    for (IndexSet i : idx) {
        for (IndexSet j : idx) {
            if (!i.subset_of(j)) continue;
            for (IndexSet k : idx) {
                if (!i.subset_of(k) || k.bits < j.bits) continue;
                auto& cl = rep.add("eq:tame1 U_" + i.str() + j.str() + " ∩ U_" + i.str() + k.str() +
                                   " = U_" + i.str() + j.unite(k).str());
                RegionMask lhs = mask_intersect(a.domain_mask(i, j), a.domain_mask(i, k));
                IndexSet u = j.unite(k);
                RegionMask rhs = a.has_chart(u) ? a.domain_mask(i, u) : RegionMask(a.chart(i).dom);
                if (lhs != rhs) {
                    cl.pass = false;
                    mask_diff(lhs, rhs).for_each([&](size_t x) {
                        cl.witnesses.push_back("extra " + a.chart(i).dom->coord_str(x));
                    });
                    mask_diff(rhs, lhs).for_each([&](size_t x) {
                        cl.witnesses.push_back("missing " + a.chart(i).dom->coord_str(x));
                    });
                }
            }
        }
    }

    // eq:tame2 with I = ∅: psi_J^{-1}(F_K) = U_JK ∩ zero(s_J)
    for (IndexSet j : idx)
        for (IndexSet k : idx) {
            if (!j.subset_of(k)) continue;
            auto& cl = rep.add("eq:tame2[∅] psi_" + j.str() + "^{-1}(F_" + k.str() + ") = U_" +
                               j.str() + k.str() + " ∩ zero");
            RegionMask lhs = a.chart(j).psi_preimage(a.footprint(k));
            RegionMask rhs = mask_intersect(a.domain_mask(j, k), a.chart(j).zero_set);
            if (lhs != rhs) {
                cl.pass = false;
                mask_diff(lhs, rhs).for_each([&](size_t x) {
                    cl.witnesses.push_back("extra " + a.chart(j).dom->coord_str(x));
                });
                mask_diff(rhs, lhs).for_each([&](size_t x) {
                    cl.witnesses.push_back("missing " + a.chart(j).dom->coord_str(x));
                });
            }
        }

    for (IndexSet i : idx)
        for (IndexSet j : idx) {
            if (!i.subset_of(j)) continue;
            for (IndexSet k : idx) {
                if (!j.subset_of(k)) continue;
                auto& cl = rep.add("eq:tame2 phi_" + i.str() + j.str() + "(U_" + i.str() + k.str() +
                                   ") = U_" + j.str() + k.str() + " ∩ s^{-1}(E_" + i.str() +
                                   j.str() + ")");
                RegionMask lhs = a.push_mask(i, j, mask_intersect(a.domain_mask(i, k), a.domain_mask(i, j)));
                RegionMask rhs = mask_intersect(a.domain_mask(j, k),
                                                a.section_preimage(j, a.filtration_subspace(i, j)));
                if (lhs != rhs) {
                    cl.pass = false;
                    mask_diff(lhs, rhs).for_each([&](size_t x) {
                        cl.witnesses.push_back("extra image " + a.chart(j).dom->coord_str(x));
                    });
                    mask_diff(rhs, lhs).for_each([&](size_t x) {
                        cl.witnesses.push_back("missing image " + a.chart(j).dom->coord_str(x));
                    });
                }
            }
        }

    // eq:tame3 cross-check: im phi_IJ closed-form identity
    for (IndexSet i : idx)
        for (IndexSet j : idx) {
            if (!i.proper_subset_of(j)) continue;
            auto& cl = rep.add("eq:tame3 im phi_" + i.str() + j.str() + " = s^{-1}(E_" + i.str() +
                               j.str() + ")");
            if (a.im_phi(i, j) != a.section_preimage(j, a.filtration_subspace(i, j)))
                cl.pass = false;
        }

    // eq:tame5 cross-check
    for (IndexSet j : idx) {
        auto subs = subsets_of(j);
        for (IndexSet h : subs)
            for (IndexSet i : subs) {
                if (i.bits < h.bits || h.empty() || i.empty()) continue;
                if (!a.has_chart(h) || !a.has_chart(i)) continue;
                RegionMask lhs = mask_intersect(a.im_phi(h, j), a.im_phi(i, j));
                IndexSet m = h.intersect(i);
                auto& cl = rep.add("eq:tame5 im phi_" + h.str() + j.str() + " ∩ im phi_" + i.str() +
                                   j.str() + (m.empty() ? " = zero set" : " = im phi_" + m.str() + j.str()));
                RegionMask rhs = m.empty() ? a.chart(j).zero_set
                                           : (a.has_chart(m) ? a.im_phi(m, j)
                                                             : RegionMask(a.chart(j).dom));
                if (lhs != rhs) cl.pass = false;
            }
    }
    return rep;
}

// Structural sanity of the atlas as a covering family with transition data.
inline Report validate_atlas(const Atlas& a) {
    Report rep;
    {
        auto& cl = rep.add("basic footprints cover X");
        PointSet cover(a.X);
        for (int b = 1; b <= a.n_basic; ++b)
            if (a.has_chart(IndexSet::single(b)))
                cover = cover.unite(a.chart(IndexSet::single(b)).footprint);
        if (cover != PointSet(a.X, true)) {
            cl.pass = false;
            cl.witnesses.push_back("uncovered X points exist");
        }
    }
    {
        auto& cl = rep.add("index set matches nonempty footprint intersections");
        for (std::uint32_t bits = 1; bits < (1u << a.n_basic); ++bits) {
            IndexSet i(bits);
            bool nonempty = !a.footprint(i).empty();
            if (nonempty != a.has_chart(i)) {
                cl.pass = false;
                cl.witnesses.push_back(i.str() + (nonempty ? " missing" : " should be absent"));
            }
        }
    }
    {
        auto& cl = rep.add("transition footprints are intersections of basics");
        for (const auto& [i, c] : a.charts) {
            if (c.footprint != a.footprint(i)) {
                // footprint(i) recomputes the basic intersection for |i| >= 2
                PointSet expect(a.X, true);
                for (int b : i.members()) expect = expect.intersect(a.chart(IndexSet::single(b)).footprint);
                if (c.footprint != expect) {
                    cl.pass = false;
                    cl.witnesses.push_back("chart " + i.str());
                }
            }
        }
    }
    {
        auto& cl = rep.add("coordinate changes present for every proper inclusion");
        for (const auto& [i, ci] : a.charts)
            for (const auto& [j, cj] : a.charts)
                if (i.proper_subset_of(j) && !a.has_change(i, j)) {
                    cl.pass = false;
                    cl.witnesses.push_back(i.str() + " -> " + j.str());
                }
    }
    for (const auto& [i, c] : a.charts) {
        Report r = validate_chart(c);
        for (auto& clause : r.clauses) clause.name = "chart " + i.str() + ": " + clause.name;
        rep.merge(r);
    }
    for (const auto& [k, ch] : a.changes) {
        Report r = validate_coordinate_change(a, ch.src, ch.dst);
        for (auto& clause : r.clauses)
            clause.name = "change " + ch.src.str() + "->" + ch.dst.str() + ": " + clause.name;
        rep.merge(r);
    }
    return rep;
}

} // namespace kkit
