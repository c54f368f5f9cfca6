#pragma once

#include "kkit/realization.hpp"

namespace kkit {

// ---------------------------------------------------------------------------
// Footprint shrinking (Def. shr0). Deterministic: compact cores from the
// greedy covering argument plus one erosion of each footprint; ball centers
// are the deepest points of the F_I, ties broken by point id; `seed` rotates
// the greedy order so independently seeded shrinkings differ.
// ---------------------------------------------------------------------------

inline std::vector<PointSet> shrink_footprints(const Atlas& a, std::uint64_t seed = 0) {
    const auto& X = *a.X;
    auto idx = a.index_sets();

    // deepest point and covering margin per footprint; among equally deep
    // points the seed picks the representative (seeded shrinkings differ)
    std::map<IndexSet, size_t> center;
    ExtDist min_margin = ExtDist::inf();
    for (IndexSet i : idx) {
        PointSet f = a.footprint(i);
        PointSet comp = f.complement();
        Rational best = -1;
        std::vector<size_t> args;
        for (size_t p : f.members()) {
            ExtDist d = x_dist(p, comp);
            Rational dv = d.is_inf() ? Rational(0) : *d.v; // F_I = X: any center works
            if (best < 0 || dv > best) {
                best = dv;
                args.assign(1, p);
            } else if (dv == best)
                args.push_back(p);
        }
        center[i] = args[size_t(seed % args.size())];
        if (!comp.empty()) {
            ExtDist m = x_dist(center[i], comp);
            if (m < min_margin) min_margin = m;
        }
    }
    Rational delta = min_margin.is_inf() ? X.shell : Rational(*min_margin.v / 2);
    require(delta > 0, "GridTooCoarse", "no covering margin at this spacing");

    // closed delta/2 balls around the chosen centers
    std::map<IndexSet, PointSet> ball;
    for (IndexSet i : idx) {
        PointSet b(a.X);
        for (size_t p = 0; p < X.npoints; ++p)
            if (X.dist(p, center[i]) <= delta / 2) b.set(p);
        ball[i] = b;
    }

    std::vector<PointSet> fp(size_t(a.n_basic) + 1, PointSet(a.X));
    std::vector<int> order;
    for (int i = 1; i <= a.n_basic; ++i) order.push_back(i);
    std::rotate(order.begin(), order.begin() + long(seed % std::uint64_t(a.n_basic)), order.end());

    std::vector<bool> done(size_t(a.n_basic) + 1, false);
    for (int i : order) {
        PointSet f = a.chart(IndexSet::single(i)).footprint;
        // core: points covered by nothing else (processed get F', rest get F)
        PointSet others(a.X);
        for (int j = 1; j <= a.n_basic; ++j) {
            if (j == i) continue;
            others = others.unite(done[size_t(j)] ? fp[size_t(j)]
                                                  : a.chart(IndexSet::single(j)).footprint);
        }
        PointSet core = others.complement();
        for (IndexSet I : idx)
            if (I.contains(i)) core = core.unite(ball[I]);
        PointSet shrunk = x_erode(f).unite(core);
        require(x_precompact_in(shrunk, f), "GridTooCoarse",
                "footprint " + std::to_string(i) + " cannot shrink at this spacing");
        fp[size_t(i)] = shrunk;
        done[size_t(i)] = true;
    }

    // covering and eq (same FI)
    PointSet cover(a.X);
    for (int i = 1; i <= a.n_basic; ++i) cover = cover.unite(fp[size_t(i)]);
    require(cover == PointSet(a.X, true), "GridTooCoarse", "shrunk footprints fail to cover X");
    for (IndexSet I : idx) {
        PointSet fi(a.X, true);
        for (int i : I.members()) fi = fi.intersect(fp[size_t(i)]);
        require(!fi.empty(), "GridTooCoarse", "shrunk footprint F'_" + I.str() + " empty");
    }
    return fp;
}

// ---------------------------------------------------------------------------
// TamingState: the U^{(k)}_{IJ} masks of the Prop. proper iteration.
// ---------------------------------------------------------------------------

struct TamingState {
    const Atlas* a = nullptr;
    int level = 0;
    std::vector<PointSet> fprime; // indexed by basic chart id
    std::map<std::uint64_t, RegionMask> u;

    PointSet fprime_of(IndexSet i) const {
        PointSet f(a->X, true);
        for (int b : i.members()) f = f.intersect(fprime[size_t(b)]);
        return f;
    }
    const RegionMask& get(IndexSet i, IndexSet j) const {
        auto it = u.find(pair_key(i, j));
        require(it != u.end(), "InvariantViolation",
                "taming state missing U_" + i.str() + j.str());
        return it->second;
    }
    void set(IndexSet i, IndexSet j, RegionMask m) { u[pair_key(i, j)] = std::move(m); }
};

// eq:U(0) and eq:UIJ(0). The shrinking domains are non-canonical; seed bits
// erode selected charts one extra shell away from the zero set, so that
// independently seeded runs produce genuinely different (still valid) states.
inline TamingState init_domains(const Atlas& a, const std::vector<PointSet>& fprime,
                                std::uint64_t seed = 0) {
    TamingState st;
    st.a = &a;
    st.level = 0;
    st.fprime = fprime;
    auto idx = a.index_sets();

    size_t chart_no = 0;
    for (IndexSet i : idx) {
        const Chart& c = a.chart(i);
        PointSet fp = st.fprime_of(i);
        // Lemma restr0 restriction. Relative precompactness U^(0) ⊏ U_I is
        // automatic on a finite chart (the carrier is the whole chart space).
        Chart r = restrict_chart(c, fp);
        RegionMask u0 = r.carrier;
        if ((seed >> (chart_no % 48)) & 1) {
            RegionMask zt = c.psi_preimage(fp);
            u0 = mask_union(erode_h(u0), mask_intersect(closure_h(zt), u0));
        }
        ++chart_no;
        require(mask_intersect(u0, c.zero_set) == c.psi_preimage(fp), "GridTooCoarse",
                "zero-set condition eq:U(0) fails for " + i.str());
        st.set(i, i, std::move(u0));
    }
    for (IndexSet i : idx)
        for (IndexSet j : idx) {
            if (!i.proper_subset_of(j)) continue;
            RegionMask m = mask_intersect(a.change(i, j).domain,
                                          mask_intersect(st.get(i, i), a.pull_mask(i, j, st.get(j, j))));
            require(mask_intersect(m, a.chart(i).zero_set) == a.chart(i).psi_preimage(st.fprime_of(j)),
                    "GridTooCoarse", "zero-set condition eq:UIJ(0) fails for " + i.str() + j.str());
            st.set(i, j, std::move(m));
        }
    return st;
}

// ---------------------------------------------------------------------------
// Lemma le:set. Exact distances; distance to the empty set is +infinity.
// The relative-closedness hypothesis of the continuum statement is not
// enforced: on finite models the construction and its postconditions go
// through for arbitrary Z (all infima are attained minima).
// ---------------------------------------------------------------------------

struct LemmaSetInput {
    RegionMask uprime;
    RegionMask z;
    std::vector<int> ids;                   // ambient index names
    std::map<int, RegionMask> z_i;          // relatively open pieces of z
    std::map<std::uint32_t, RegionMask> w;  // W_K per nonempty K (bitmask over ids positions)
};

inline std::uint32_t ids_mask(const std::vector<int>& ids, const std::vector<int>& subset) {
    std::uint32_t m = 0;
    for (int s : subset)
        for (size_t p = 0; p < ids.size(); ++p)
            if (ids[p] == s) m |= (1u << p);
    return m;
}

inline std::map<std::uint32_t, RegionMask> lemma_set_construct(const LemmaSetInput& in) {
    const auto& g = *in.uprime.dom;
    size_t nids = in.ids.size();
    require(nids <= 16, "Unsupported", "lemma_set_construct limited to 16 indices");
    require(in.z.subset_of(in.uprime), "PostconditionViolation", "Z must sit inside U'");

    auto getw = [&](std::uint32_t k) -> const RegionMask& {
        auto it = in.w.find(k);
        require(it != in.w.end(), "PostconditionViolation", "missing W_K");
        return it->second;
    };
    auto z_k = [&](std::uint32_t k) {
        RegionMask m = in.z;
        for (size_t p = 0; p < nids; ++p)
            if ((k >> p) & 1) m = mask_intersect(m, in.z_i.at(in.ids[p]));
        return m;
    };

    std::map<std::uint32_t, RegionMask> out;
    auto zm = in.z.members();
    if (zm.empty()) {
        for (std::uint32_t k = 1; k < (1u << nids); ++k) out[k] = RegionMask(in.uprime.dom);
        return out;
    }

    // per z: d(z, U'\W_K) and d(z, Z\Z_i), scaled integers with -1 = infinity
    std::vector<RegionMask> out_w(1u << nids, RegionMask(in.uprime.dom));
    for (std::uint32_t k = 1; k < (1u << nids); ++k) out_w[k] = mask_diff(in.uprime, getw(k));
    std::vector<std::vector<long long>> d_out(zm.size(), std::vector<long long>(1u << nids, -1));
    std::vector<std::vector<long long>> d_zi(zm.size(), std::vector<long long>(nids, -1));
    for (size_t zi = 0; zi < zm.size(); ++zi) {
        for (std::uint32_t k = 1; k < (1u << nids); ++k)
            d_out[zi][k] = cheb_to_mask(zm[zi], out_w[k]);
        for (size_t p = 0; p < nids; ++p)
            d_zi[zi][p] = cheb_to_mask(zm[zi], mask_diff(in.z, in.z_i.at(in.ids[p])));
    }

    // f_i(z) = min { d(z, U'\W_J) : i in J, d(z, Z\Z_i) = d(z, Z\Z_J) }
    auto le_inf = [](long long x, long long y) { // x <= y with -1 = inf
        if (y < 0) return true;
        if (x < 0) return false;
        return x <= y;
    };
    std::vector<std::vector<long long>> f(zm.size(), std::vector<long long>(nids, -1));
    for (size_t zi = 0; zi < zm.size(); ++zi)
        for (size_t p = 0; p < nids; ++p) {
            long long best = -2; // unset
            for (std::uint32_t J = 1; J < (1u << nids); ++J) {
                if (!((J >> p) & 1)) continue;
                // d(z, Z\Z_J) = min over members of J of d(z, Z\Z_j)
                long long dzj = -1;
                for (size_t p2 = 0; p2 < nids; ++p2)
                    if ((J >> p2) & 1) {
                        long long v = d_zi[zi][p2];
                        if (dzj < 0 || (v >= 0 && v < dzj)) dzj = v;
                    }
                if (!(d_zi[zi][p] == dzj)) continue;
                long long cand = d_out[zi][J];
                if (best == -2)
                    best = cand;
                else if (!le_inf(best, cand))
                    best = cand;
            }
            f[zi][p] = best == -2 ? -1 : best;
        }

    // U_{f_i} per index, then U_K as intersections
    std::vector<RegionMask> uf(nids, RegionMask(in.uprime.dom));
    in.uprime.for_each([&](size_t x) {
        long long dxz = -1;
        std::vector<size_t> argmin;
        for (size_t zi = 0; zi < zm.size(); ++zi) {
            long long d = g.cheb(x, zm[zi]);
            if (dxz < 0 || d < dxz) {
                dxz = d;
                argmin.assign(1, zi);
            } else if (d == dxz)
                argmin.push_back(zi);
        }
        for (size_t p = 0; p < nids; ++p) {
            long long inf_f = -2;
            for (size_t zi : argmin) {
                long long v = f[zi][p];
                if (inf_f == -2)
                    inf_f = v;
                else if (!le_inf(inf_f, v))
                    inf_f = v;
            }
            bool strict_less = (inf_f == -2) ? false : (inf_f < 0 ? true : dxz < inf_f);
            if (strict_less) uf[p].set(x);
        }
    });

    for (std::uint32_t k = 1; k < (1u << nids); ++k) {
        RegionMask m = in.uprime;
        for (size_t p = 0; p < nids; ++p)
            if ((k >> p) & 1) m = mask_intersect(m, uf[p]);
        out[k] = std::move(m);
    }

    // postconditions, exactly
    for (std::uint32_t k = 1; k < (1u << nids); ++k) {
        RegionMask zk = z_k(k);
        require(mask_intersect(out[k], in.z) == zk, "PostconditionViolation",
                "U_K ∩ Z != Z_K for K mask " + std::to_string(k));
        require(out[k].subset_of(getw(k)), "PostconditionViolation",
                "U_K not inside W_K for K mask " + std::to_string(k));
        require(zk.subset_of(out[k]), "PostconditionViolation", "Z_K not inside U_K");
    }
    for (std::uint32_t k1 = 1; k1 < (1u << nids); ++k1)
        for (std::uint32_t k2 = k1; k2 < (1u << nids); ++k2)
            require(mask_intersect(out[k1], out[k2]) == out[k1 | k2], "PostconditionViolation",
                    "U_J ∩ U_K != U_{J∪K}");
    return out;
}

// ---------------------------------------------------------------------------
// One level of the Prop. proper iteration (Steps A and B), with the state
// invariants (i)-(iii) and eq (kclaim) re-verified by exhaustive scan.
// ---------------------------------------------------------------------------

inline Report verify_taming_state(const TamingState& st) {
    Report rep;
    const Atlas& a = *st.a;
    auto idx = a.index_sets();
    int k = st.level;

    for (IndexSet i : idx)
        for (IndexSet j : idx) {
            if (!i.subset_of(j)) continue;
            auto& cl = rep.add("(i) zero condition for U_" + i.str() + j.str());
            if (mask_intersect(st.get(i, j), a.chart(i).zero_set) !=
                a.chart(i).psi_preimage(st.fprime_of(j)))
                cl.pass = false;
        }
    for (IndexSet i : idx) {
        if (i.size() > k) continue;
        for (IndexSet j : idx) {
            if (!i.subset_of(j)) continue;
            for (IndexSet kk : idx) {
                if (!i.subset_of(kk) || kk.bits < j.bits) continue;
                auto& cl = rep.add("(ii) eq:tame1 at level for " + i.str() + "," + j.str() + "," +
                                   kk.str());
                IndexSet un = j.unite(kk);
                RegionMask rhs = a.has_chart(un) ? st.get(i, un) : RegionMask(a.chart(i).dom);
                if (mask_intersect(st.get(i, j), st.get(i, kk)) != rhs) cl.pass = false;
            }
        }
    }
    for (IndexSet i : idx) {
        if (i.size() > k) continue;
        for (IndexSet j : idx) {
            if (!i.proper_subset_of(j)) continue;
            for (IndexSet kk : idx) {
                if (!j.subset_of(kk)) continue;
                auto& cl = rep.add("(iii) eq:tame2 at level for " + i.str() + "," + j.str() + "," +
                                   kk.str());
                RegionMask lhs = a.push_mask(i, j, st.get(i, kk));
                RegionMask rhs = mask_intersect(st.get(j, kk),
                                                a.section_preimage(j, a.filtration_subspace(i, j)));
                if (lhs != rhs) cl.pass = false;
            }
        }
    }
    for (IndexSet i : idx) {
        if (i.size() > k) continue;
        for (IndexSet j : idx) {
            if (!i.proper_subset_of(j)) continue;
            auto& cl = rep.add("(kclaim) U_" + i.str() + j.str() + " = U_I ∩ phi^{-1}(U_J)");
            if (st.get(i, j) !=
                mask_intersect(st.get(i, i), a.pull_mask(i, j, st.get(j, j))))
                cl.pass = false;
        }
    }
    return rep;
}

inline TamingState tame_step(const Atlas& a, const TamingState& st0) {
    TamingState st = st0;
    int k = st0.level + 1;
    st.level = k;
    auto idx = a.index_sets();

    // monotonicity bookkeeping happens via direct construction below

    // Step A
    for (IndexSet I : idx) {
        if (I.size() != k) continue;
        const Chart& ci = a.chart(I);
        RegionMask uprime = st0.get(I, I);

        RegionMask z(ci.dom);
        for (IndexSet h : subsets_of(I)) {
            if (h == I) continue;
            z = mask_union(z, mask_intersect(uprime, a.section_preimage(I, a.filtration_subspace(h, I))));
        }
        // cross-check: Z equals the union of the phi_HI images (eq:ZzK form)
        {
            RegionMask z2 = mask_intersect(uprime, ci.zero_set);
            for (IndexSet h : subsets_of(I)) {
                if (h.empty() || h == I) continue;
                z2 = mask_union(z2, a.push_mask(h, I, st0.get(h, I)));
            }
            require(z == z2, "InvariantViolation",
                    "Z identity eq:ZzK fails at level " + std::to_string(k) + " for " + I.str());
        }

        LemmaSetInput in;
        in.uprime = uprime;
        in.z = z;
        IndexSet rest = IndexSet((std::uint32_t(1) << a.n_basic) - 1).minus(I);
        in.ids = rest.members();
        for (int i2 : in.ids) {
            IndexSet ii = I.unite(IndexSet::single(i2));
            RegionMask zi = a.has_chart(ii) ? mask_intersect(st0.get(I, ii), z) : RegionMask(ci.dom);
            in.z_i[i2] = std::move(zi);
        }
        for (std::uint32_t kb = 1; kb < (1u << in.ids.size()); ++kb) {
            IndexSet kprime;
            for (size_t p = 0; p < in.ids.size(); ++p)
                if ((kb >> p) & 1) kprime = kprime.unite(IndexSet::single(in.ids[p]));
            IndexSet K = I.unite(kprime);
            // W_{K'} = ∩_{I ⊆ J ⊆ K} phi_IJ^{-1}(U_{JK}) ∩ U_{IJ}
            RegionMask w = uprime;
            for (IndexSet J : subsets_of(K)) {
                if (!I.subset_of(J)) continue;
                if (!a.has_chart(J)) {
                    w = RegionMask(ci.dom);
                    break;
                }
                RegionMask ujk = a.has_chart(K) ? st0.get(J, K) : RegionMask(a.chart(J).dom);
                RegionMask term = J == I ? ujk : a.pull_mask(I, J, ujk);
                w = mask_intersect(w, mask_intersect(term, st0.get(I, J)));
            }
            // hypothesis of Lemma le:set
            RegionMask zk = z;
            for (size_t p = 0; p < in.ids.size(); ++p)
                if ((kb >> p) & 1) zk = mask_intersect(zk, in.z_i.at(in.ids[p]));
            require(mask_intersect(w, z) == zk, "HypothesisViolation",
                    "W_{K'} ∩ Z != Z_{K'} at level " + std::to_string(k) + " for I=" + I.str() +
                        " K=" + K.str());
            in.w[kb] = std::move(w);
        }

        auto u_k = lemma_set_construct(in);
        for (std::uint32_t kb = 1; kb < (1u << in.ids.size()); ++kb) {
            IndexSet kprime;
            for (size_t p = 0; p < in.ids.size(); ++p)
                if ((kb >> p) & 1) kprime = kprime.unite(IndexSet::single(in.ids[p]));
            IndexSet K = I.unite(kprime);
            if (a.has_chart(K))
                st.set(I, K, u_k.at(kb));
            else
                require(u_k.at(kb).empty(), "InvariantViolation",
                        "lemma output nonempty outside the index set");
        }
    }

    // Step B: for |J| > k shrink U_{JK} by eq:UJK(k)
    for (IndexSet J : idx) {
        if (J.size() <= k) continue;
        const Chart& cj = a.chart(J);
        RegionMask removal(cj.dom);
        for (IndexSet I : subsets_of(J)) {
            if (I.size() != k) continue;
            RegionMask pre = a.section_preimage(J, a.filtration_subspace(I, J));
            RegionMask im = a.push_mask(I, J, st.get(I, J));
            removal = mask_union(removal, mask_diff(pre, im));
        }
        for (IndexSet K : idx) {
            if (!J.subset_of(K)) continue;
            RegionMask next = mask_diff(st0.get(J, K), removal);
            // (i'): no zero-set or lower-filtration points removed
            for (IndexSet H : subsets_of(J)) {
                if (H.size() >= k) continue;
                RegionMask keep = mask_intersect(st0.get(J, K),
                                                 a.section_preimage(J, a.filtration_subspace(H, J)));
                require(keep.subset_of(next), "InvariantViolation",
                        "Step B removed protected points (i') for J=" + J.str() + " K=" + K.str());
            }
            st.set(J, K, std::move(next));
        }
    }

    // monotonicity and full invariant scan
    for (const auto& [key, mask] : st.u) {
        auto it = st0.u.find(key);
        require(it != st0.u.end() && mask.subset_of(it->second), "InvariantViolation",
                "taming masks must shrink monotonically");
    }
    Report rep = verify_taming_state(st);
    require(rep.ok(), "InvariantViolation",
            "taming invariants fail at level " + std::to_string(k) + ": " +
                (rep.failures().empty() ? "?" : rep.failures().front()));
    return st;
}

// ---------------------------------------------------------------------------
// Prop. proper end to end: shrink footprints, initial domains, k levels,
// then assemble the restricted atlas with its canonical filtration.
// ---------------------------------------------------------------------------

struct TameShrinkOptions {
    std::uint64_t seed = 0;
};

inline Atlas restrict_atlas_to_state(const Atlas& a, const TamingState& st) {
    Atlas out;
    out.X = a.X;
    out.n_basic = a.n_basic;
    out.filt = a.filt; // canonical restriction keeps the subspaces (Lemma filter)
    for (const auto& [i, c] : a.charts) {
        Chart nc = c;
        nc.carrier = st.get(i, i);
        nc.footprint = st.fprime_of(i);
        nc.resolve_zero_set();
        std::map<size_t, size_t> psi2, psiinv2;
        nc.zero_set.for_each([&](size_t s) {
            auto it = c.psi.find(s);
            require(it != c.psi.end(), "InvariantViolation", "lost psi entry in restriction");
            psi2[s] = it->second;
            psiinv2[it->second] = s;
        });
        nc.psi = std::move(psi2);
        nc.psi_inv = std::move(psiinv2);
        out.charts[i] = std::move(nc);
    }
    for (const auto& [key, ch] : a.changes) {
        CoordinateChange nc = ch;
        nc.domain = st.get(ch.src, ch.dst);
        out.changes[key] = std::move(nc);
    }
    return out;
}

inline Atlas tame_shrink(const Atlas& a, const TameShrinkOptions& opt = {}) {
    {
        Report r = check_cocycle(a, CocycleLevel::Weak);
        require(r.ok(), "NotWeak", "tame_shrink needs the weak cocycle condition");
        Report f = check_filtration(a);
        require(f.ok(), "NoFiltration", "tame_shrink needs a valid filtration: " +
                                            (f.failures().empty() ? "?" : f.failures().front()));
    }
    auto fprime = shrink_footprints(a, opt.seed);
    TamingState st = init_domains(a, fprime, opt.seed);
    int max_level = 0;
    for (IndexSet i : a.index_sets()) max_level = std::max(max_level, i.size());
    for (int k = 1; k <= max_level; ++k) st = tame_step(a, st);

    Atlas out = restrict_atlas_to_state(a, st);
    {
        Report v = validate_atlas(out);
        require(v.ok(), "InvariantViolation", "tame shrinking is not a valid atlas: " +
                                                  (v.failures().empty() ? "?" : v.failures().front()));
        Report t = check_tame(out);
        require(t.ok(), "InvariantViolation", "tame shrinking fails check_tame: " +
                                                  (t.failures().empty() ? "?" : t.failures().front()));
        Report c = check_cocycle(out, CocycleLevel::Strong);
        require(c.ok(), "InvariantViolation", "tame shrinking fails the strong cocycle condition");
        // Def. shr: domains restrict (relative precompactness is free on finite charts)
        for (const auto& [i, c2] : out.charts)
            require(c2.carrier.subset_of(a.chart(i).carrier), "InvariantViolation",
                    "U'_" + i.str() + " escapes U_" + i.str());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Prop. metric: tame-shrink twice, pull the quotient metric of the
// intermediate atlas back along the injection |K_sh| -> |K'|.
// ---------------------------------------------------------------------------

struct MetrizedAtlas {
    Atlas kprime;
    Atlas ksh;
    std::unique_ptr<QuotientSpace> q;      // quotient of ksh
    std::unique_ptr<QuotientMetric> metric; // full table on ksh classes
};

inline MetrizedAtlas preshrunk_metrize(const Atlas& a, const TameShrinkOptions& opt = {}) {
    MetrizedAtlas out;
    out.kprime = tame_shrink(a, opt);
    out.ksh = tame_shrink(out.kprime, opt);

    QuotientSpace qprime = build_quotient(out.kprime);
    out.q = std::make_unique<QuotientSpace>(build_quotient(out.ksh));

    // Lemma injtameshr: |K_sh| -> |K'| is injective
    std::vector<long> to_prime(out.q->n_classes, -1);
    std::map<long, long> seen;
    for (size_t p = 0; p < out.q->objs.order.size(); ++p) {
        IndexSet i = out.q->objs.order[p];
        out.ksh.chart(i).carrier.for_each([&](size_t x) {
            long csh = out.q->cls[out.q->objs.gid(p, x)];
            long cpr = qprime.class_of(i, x);
            if (to_prime[size_t(csh)] == -1) {
                to_prime[size_t(csh)] = cpr;
                auto [it, fresh] = seen.emplace(cpr, csh);
                require(fresh || it->second == csh, "InvariantViolation",
                        "Lemma injtameshr fails: |K_sh| -> |K'| not injective");
            } else {
                require(to_prime[size_t(csh)] == cpr, "InvariantViolation",
                        "class map ill-defined");
            }
        });
    }

    QuotientMetric mp = QuotientMetric::prepare(qprime);
    mp.build_full();
    out.metric = std::make_unique<QuotientMetric>();
    out.metric->q = out.q.get();
    out.metric->unit = mp.unit;
    out.metric->table.assign(out.q->n_classes, std::vector<long long>(out.q->n_classes, 0));
    for (size_t c1 = 0; c1 < out.q->n_classes; ++c1)
        for (size_t c2 = 0; c2 < out.q->n_classes; ++c2)
            out.metric->table[c1][c2] = mp.table[size_t(to_prime[c1])][size_t(to_prime[c2])];
    out.metric->full = true;
    return out;
}

} // namespace kkit
