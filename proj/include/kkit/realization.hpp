#pragma once

#include "kkit/atlas.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <unordered_map>

namespace kkit {

namespace detail {

struct Dsu {
    std::vector<size_t> parent;
    explicit Dsu(size_t n) : parent(n) {
        for (size_t i = 0; i < n; ++i) parent[i] = i;
    }
    size_t find(size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(size_t a, size_t b) { parent[find(a)] = find(b); }
};

} // namespace detail

// Global indexing of Obj_{B_K} = ⊔_I U_I (flat grid indices, carrier-guarded).
struct ObjectSpace {
    std::vector<IndexSet> order;
    std::map<IndexSet, size_t> pos;
    std::vector<size_t> offset;
    size_t total = 0;

    void init(const Atlas& a) {
        order = a.index_sets();
        for (size_t i = 0; i < order.size(); ++i) {
            pos[order[i]] = i;
            offset.push_back(total);
            total += a.chart(order[i]).dom->total;
        }
    }
    size_t gid(size_t chart_pos, size_t flat) const { return offset[chart_pos] + flat; }
    std::pair<size_t, size_t> decode(size_t g) const {
        size_t lo = 0, hi = order.size() - 1;
        while (lo < hi) {
            size_t mid = (lo + hi + 1) / 2;
            if (offset[mid] <= g) lo = mid;
            else hi = mid - 1;
        }
        return {lo, g - offset[lo]};
    }
};

struct TaggedSample {
    IndexSet chart;
    size_t flat;
    bool operator==(const TaggedSample& o) const { return chart == o.chart && flat == o.flat; }
    bool operator<(const TaggedSample& o) const {
        return chart.bits != o.chart.bits ? chart.bits < o.chart.bits : flat < o.flat;
    }
};

// |K| as a union-find partition of the object space, together with the
// generator edges (morphisms) used to produce it.
struct QuotientSpace {
    const Atlas* atlas = nullptr;
    ObjectSpace objs;
    std::vector<long> cls;                 // per gid: class id, -1 off-carrier
    size_t n_classes = 0;
    std::vector<std::vector<TaggedSample>> members; // per class, sorted
    std::vector<std::pair<size_t, size_t>> edges;   // generator gid pairs
    std::vector<std::uint64_t> chart_sets;          // per class: bitset over chart positions

    long class_of(IndexSet chart, size_t flat) const {
        auto it = objs.pos.find(chart);
        require(it != objs.pos.end(), "MissingChart", "class_of: " + chart.str());
        return cls[objs.gid(it->second, flat)];
    }
    bool same(const TaggedSample& p, const TaggedSample& q) const {
        return class_of(p.chart, p.flat) == class_of(q.chart, q.flat);
    }
    std::string sample_str(const TaggedSample& p) const {
        return "(" + p.chart.str() + "," + atlas->chart(p.chart).dom->coord_str(p.flat) + ")";
    }
    // classes meeting a mask within chart I
    std::set<long> classes_of_mask(IndexSet i, const RegionMask& m) const {
        std::set<long> out;
        size_t p = objs.pos.at(i);
        m.for_each([&](size_t x) {
            long c = cls[objs.gid(p, x)];
            if (c >= 0) out.insert(c);
        });
        return out;
    }
    // chart-I samples whose class lies in the given set: U_I ∩ pi^{-1}(C)
    RegionMask mask_of_classes(IndexSet i, const std::set<long>& cs) const {
        const Chart& c = atlas->chart(i);
        RegionMask out(c.dom);
        size_t p = objs.pos.at(i);
        c.carrier.for_each([&](size_t x) {
            long cl0 = cls[objs.gid(p, x)];
            if (cl0 >= 0 && cs.count(cl0)) out.set(x);
        });
        return out;
    }
};

enum class QuotientTarget { Base, Bundle };

// Def. Knbhd: union-find over the generators (I,x) ~ (J, phi_IJ(x)).
inline QuotientSpace build_quotient(const Atlas& a, QuotientTarget target = QuotientTarget::Base) {
    {
        Report c = check_cocycle(a, CocycleLevel::Standard);
        require(c.ok(), "CocycleViolation",
                "build_quotient needs the standard cocycle condition; first failure: " +
                    (c.failures().empty() ? "?" : c.failures().front()));
    }
    require(target == QuotientTarget::Base, "Unsupported", "use build_bundle_quotient");

    QuotientSpace q;
    q.atlas = &a;
    q.objs.init(a);
    detail::Dsu dsu(q.objs.total);

    for (const auto& [key, ch] : a.changes) {
        size_t pi = q.objs.pos.at(ch.src), pj = q.objs.pos.at(ch.dst);
        const Chart& ci = a.chart(ch.src);
        const Chart& cj = a.chart(ch.dst);
        ch.domain.for_each([&](size_t x) {
            auto y = ch.base.apply(*ci.dom, *cj.dom, x);
            require(y.has_value() && cj.carrier.test(*y), "LatticeViolation",
                    "generator image invalid at " + ci.dom->coord_str(x));
            // |s_K| descends: sections are identified along every generator
            require(cj.section.eval(*cj.dom, *y) == ch.fiber.apply(ci.section.eval(*ci.dom, x)),
                    "SectionDescent", "sections not identified along a generator");
            size_t ga = q.objs.gid(pi, x), gb = q.objs.gid(pj, *y);
            dsu.unite(ga, gb);
            q.edges.emplace_back(ga, gb);
        });
    }

    q.cls.assign(q.objs.total, -1);
    std::unordered_map<size_t, long> root_to_class;
    for (size_t p = 0; p < q.objs.order.size(); ++p) {
        const Chart& c = a.chart(q.objs.order[p]);
        c.carrier.for_each([&](size_t x) {
            size_t g = q.objs.gid(p, x);
            size_t r = dsu.find(g);
            auto [it, fresh] = root_to_class.emplace(r, long(q.n_classes));
            if (fresh) ++q.n_classes;
            q.cls[g] = it->second;
        });
    }
    q.members.assign(q.n_classes, {});
    q.chart_sets.assign(q.n_classes, 0);
    for (size_t p = 0; p < q.objs.order.size(); ++p) {
        const Chart& c = a.chart(q.objs.order[p]);
        c.carrier.for_each([&](size_t x) {
            long cl0 = q.cls[q.objs.gid(p, x)];
            q.members[size_t(cl0)].push_back(TaggedSample{q.objs.order[p], x});
            q.chart_sets[size_t(cl0)] |= (1ull << p);
        });
    }
    for (auto& m : q.members) std::sort(m.begin(), m.end());
    return q;
}

// ---------------------------------------------------------------------------
// Bundle realization |E_K|: fibers discretized over each chart's declared
// window. Pairs outside a window are truncated away.
// ---------------------------------------------------------------------------

struct BundleQuotient {
    const Atlas* atlas = nullptr;
    std::vector<IndexSet> order;
    std::vector<GridPtr> fiber_grids; // per chart (dim = fiber_dim; may be dim 0)
    std::vector<size_t> offset;       // per chart: offset of (base,fiber) block
    size_t total = 0;
    std::vector<long> cls;
    size_t n_classes = 0;

    size_t gid(size_t pos_, size_t base_flat, size_t fiber_flat) const {
        size_t nf = fiber_grids[pos_] ? fiber_grids[pos_]->total : 1;
        return offset[pos_] + base_flat * nf + fiber_flat;
    }
    long class_at(size_t pos_, size_t base_flat, size_t fiber_flat) const {
        return cls[gid(pos_, base_flat, fiber_flat)];
    }
};

inline BundleQuotient build_bundle_quotient(const Atlas& a) {
    {
        Report c = check_cocycle(a, CocycleLevel::Standard);
        require(c.ok(), "CocycleViolation", "bundle quotient needs the standard cocycle condition");
    }
    BundleQuotient q;
    q.atlas = &a;
    q.order = a.index_sets();
    std::map<IndexSet, size_t> pos;
    for (size_t i = 0; i < q.order.size(); ++i) {
        pos[q.order[i]] = i;
        const Chart& c = a.chart(q.order[i]);
        GridPtr fg;
        if (c.fiber_dim > 0) {
            require(c.fiber_window.has_value(), "BundleWindowMissing",
                    "chart " + q.order[i].str() + " has no fiber window");
            fg = std::make_shared<GridDomain>(*c.fiber_window);
            require(fg->dim == c.fiber_dim, "BundleWindowMissing", "fiber window dim mismatch");
            require(fg->sample_at(Vec(c.fiber_dim, Rational(0))).has_value(), "BundleWindowMissing",
                    "fiber window must contain 0");
        }
        q.fiber_grids.push_back(fg);
        q.offset.push_back(q.total);
        q.total += c.dom->total * (fg ? fg->total : 1);
    }
    detail::Dsu dsu(q.total);
    for (const auto& [key, ch] : a.changes) {
        size_t pi = pos.at(ch.src), pj = pos.at(ch.dst);
        const Chart& ci = a.chart(ch.src);
        const Chart& cj = a.chart(ch.dst);
        GridPtr fi = q.fiber_grids[pi], fj = q.fiber_grids[pj];
        size_t nfi = fi ? fi->total : 1;
        ch.domain.for_each([&](size_t x) {
            auto y = ch.base.apply(*ci.dom, *cj.dom, x);
            if (!y) return;
            for (size_t e = 0; e < nfi; ++e) {
                Vec ev = fi ? fi->coord(e) : Vec{};
                Vec fv = ch.fiber.apply(ev);
                std::optional<size_t> f =
                    fj ? fj->sample_at(fv) : (fv.empty() ? std::optional<size_t>(0) : std::nullopt);
                if (!f) continue; // truncated by the window
                dsu.unite(q.gid(pi, x, e), q.gid(pj, *y, *f));
            }
        });
    }
    q.cls.assign(q.total, -1);
    std::unordered_map<size_t, long> roots;
    for (size_t p = 0; p < q.order.size(); ++p) {
        const Chart& c = a.chart(q.order[p]);
        size_t nf = q.fiber_grids[p] ? q.fiber_grids[p]->total : 1;
        c.carrier.for_each([&](size_t x) {
            for (size_t e = 0; e < nf; ++e) {
                size_t g = q.gid(p, x, e);
                auto [it, fresh] = roots.emplace(dsu.find(g), long(q.n_classes));
                if (fresh) ++q.n_classes;
                q.cls[g] = it->second;
            }
        });
    }
    return q;
}

// ---------------------------------------------------------------------------
// Lemma Ku2(a): direct characterization of ~ on a tame atlas, no union-find.
// ---------------------------------------------------------------------------

inline bool equivalent_maxmin(const Atlas& a, const TaggedSample& p, const TaggedSample& q) {
    if (p == q) return true;
    IndexSet I = p.chart, J = q.chart;
    const Chart& ci = a.chart(I);
    const Chart& cj = a.chart(J);

    // pattern (ii): common image in U_{I ∪ J}
    IndexSet U = I.unite(J);
    if (a.has_chart(U)) {
        std::optional<size_t> zi, zj;
        if (I == U) zi = p.flat;
        else if (a.has_change(I, U) && a.change(I, U).domain.test(p.flat))
            zi = a.change(I, U).base.apply(*ci.dom, *a.chart(U).dom, p.flat);
        if (J == U) zj = q.flat;
        else if (a.has_change(J, U) && a.change(J, U).domain.test(q.flat))
            zj = a.change(J, U).base.apply(*cj.dom, *a.chart(U).dom, q.flat);
        if (zi && zj && *zi == *zj) return true;
    }

    // pattern (iii): common preimage in U_{I ∩ J}, or the zero-set clause
    IndexSet H = I.intersect(J);
    if (!H.empty() && a.has_chart(H)) {
        std::optional<size_t> w;
        if (H == I) w = p.flat;
        else if (a.has_change(H, I)) {
            const auto& ch = a.change(H, I);
            w = ch.base.preimage(*ch.domain.dom, *ci.dom, p.flat);
            if (w && !ch.domain.test(*w)) w.reset();
        }
        if (w) {
            std::optional<size_t> y;
            if (H == J) y = *w;
            else if (a.has_change(H, J) && a.change(H, J).domain.test(*w))
                y = a.change(H, J).base.apply(*a.chart(H).dom, *cj.dom, *w);
            if (y && *y == q.flat) return true;
        }
    }
    if (H.empty()) {
        auto it = ci.psi.find(p.flat);
        auto jt = cj.psi.find(q.flat);
        if (it != ci.psi.end() && jt != cj.psi.end() && it->second == jt->second) return true;
    }
    return false;
}

// Lemma Ku2(d): eps_J(S_I) by the (I ∪ J) formula, cross-checked against the
// (I ∩ J) formula. Both must agree on a tame atlas.
inline RegionMask epsilon_set(const Atlas& a, IndexSet J, IndexSet I, const RegionMask& S) {
    const Chart& cj = a.chart(J);
    if (I == J) return S;

    RegionMask viaU(cj.dom);
    IndexSet U = I.unite(J);
    if (a.has_chart(U)) {
        RegionMask up = a.push_mask(I, U, mask_intersect(a.domain_mask(I, U), S));
        viaU = a.pull_mask(J, U, up);
    }

    RegionMask viaH(cj.dom);
    IndexSet H = I.intersect(J);
    if (H.empty()) {
        PointSet img = a.chart(I).psi_image(mask_intersect(S, a.chart(I).zero_set));
        viaH = cj.psi_preimage(img);
    } else if (a.has_chart(H)) {
        RegionMask down = mask_intersect(a.domain_mask(H, J), a.pull_mask(H, I, S));
        viaH = a.push_mask(H, J, down);
    }

    require(viaU == viaH, "FormulaMismatch",
            "Lemma Ku2(d) formulas disagree for eps_" + J.str() + "(S_" + I.str() + ")");
    return viaU;
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

// shortest generator chain between two objects (for witness reporting)
inline std::vector<size_t> generator_chain(const QuotientSpace& q, size_t ga, size_t gb) {
    std::unordered_map<size_t, std::vector<size_t>> adj;
    for (auto [x, y] : q.edges) {
        adj[x].push_back(y);
        adj[y].push_back(x);
    }
    std::unordered_map<size_t, size_t> prev;
    std::queue<size_t> bfs;
    bfs.push(ga);
    prev[ga] = ga;
    while (!bfs.empty()) {
        size_t u = bfs.front();
        bfs.pop();
        if (u == gb) break;
        for (size_t v : adj[u])
            if (!prev.count(v)) {
                prev[v] = u;
                bfs.push(v);
            }
    }
    std::vector<size_t> path;
    if (!prev.count(gb)) return path;
    for (size_t u = gb;; u = prev[u]) {
        path.push_back(u);
        if (u == ga) break;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

// Lemma Ku2(c) diagnostics: is pi_K injective on each chart domain?
inline Report check_injectivity(const Atlas& a, const QuotientSpace& q) {
    Report rep;
    for (size_t p = 0; p < q.objs.order.size(); ++p) {
        IndexSet I = q.objs.order[p];
        auto& cl = rep.add("pi_K injective on U_" + I.str());
        const Chart& c = a.chart(I);
        std::unordered_map<long, size_t> seen;
        c.carrier.for_each([&](size_t x) {
            long cc = q.cls[q.objs.gid(p, x)];
            auto [it, fresh] = seen.emplace(cc, x);
            if (!fresh) {
                cl.pass = false;
                size_t ga = q.objs.gid(p, it->second), gb = q.objs.gid(p, x);
                auto chain = generator_chain(q, ga, gb);
                cl.witnesses.push_back("(" + I.str() + "," + c.dom->coord_str(it->second) + ") ~ (" +
                                       I.str() + "," + c.dom->coord_str(x) + ") via " +
                                       std::to_string(chain.empty() ? 0 : chain.size() - 1) +
                                       " generators");
            }
        });
    }
    return rep;
}

// eq:useful2 diagnostic: pi_K restricted to the zero set is injective even on
// non-tame atlases.
inline bool zero_set_injective(const Atlas& a, const QuotientSpace& q) {
    std::unordered_map<long, size_t> seen; // class -> X point
    bool ok = true;
    for (size_t p = 0; p < q.objs.order.size(); ++p) {
        const Chart& c = a.chart(q.objs.order[p]);
        for (const auto& [s, pt] : c.psi) {
            long cc = q.cls[q.objs.gid(p, s)];
            auto [it, fresh] = seen.emplace(cc, pt);
            if (!fresh && it->second != pt) ok = false;
        }
    }
    return ok;
}

// Lemma Knbhd1: iota_K embeds X onto the zero classes.
struct FootprintEmbedding {
    std::vector<long> class_of_point;
    Report report;
};

inline FootprintEmbedding embed_footprint(const Atlas& a, const QuotientSpace& q) {
    FootprintEmbedding out;
    out.class_of_point.assign(a.X->npoints, -1);
    auto& consistent = out.report.add("iota_K independent of the chart choice");
    auto& injective = out.report.add("iota_K injective");
    auto& image = out.report.add("iota_K image equals the zero classes");

    for (size_t pt = 0; pt < a.X->npoints; ++pt) {
        long got = -1;
        for (size_t p = 0; p < q.objs.order.size(); ++p) {
            const Chart& c = a.chart(q.objs.order[p]);
            auto it = c.psi_inv.find(pt);
            if (it == c.psi_inv.end()) continue;
            long cc = q.cls[q.objs.gid(p, it->second)];
            if (got == -1) got = cc;
            else if (got != cc) {
                consistent.pass = false;
                consistent.witnesses.push_back("X point " + std::to_string(pt) +
                                               " lands in two classes (violates eq:useful1)");
            }
        }
        if (got == -1) {
            image.pass = false;
            image.witnesses.push_back("X point " + std::to_string(pt) + " not covered");
        }
        out.class_of_point[pt] = got;
    }
    require(consistent.pass, "InconsistentFootprint", "two chart choices disagree");

    std::set<long> img;
    for (long c : out.class_of_point)
        if (c >= 0) {
            if (img.count(c)) {
                injective.pass = false;
                injective.witnesses.push_back("class hit twice");
            }
            img.insert(c);
        }
    std::set<long> zero_classes;
    for (size_t p = 0; p < q.objs.order.size(); ++p) {
        const Chart& c = a.chart(q.objs.order[p]);
        c.zero_set.for_each([&](size_t x) { zero_classes.insert(q.cls[q.objs.gid(p, x)]); });
    }
    if (img != zero_classes) {
        image.pass = false;
        image.witnesses.push_back("zero classes differ from iota_K(X)");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Closed-relation diagnostic (the discrete surrogate of Prop. Khomeo's
// closedness of R).
//
// The raw one-shell closure of R flags benign lattice adjacency on every
// atlas, so the check works sheet-wise: R_IJ is split into its jointly
// connected sheets (both coordinates move by at most one shell), and a
// non-related pair (p,q) is a violation iff some sheet approaches it
// coherently from both sides:
//   (c0) some sheet pair lies within one shell of (p,q),
//   (c1) every sheet pair with x' adjacent to p has y' adjacent to q,
//   (c2) symmetrically,
//   (ray) the sheet contains a collinear approach: (p+d, q+e) and
//         (p+2d, q+2e) are sheet pairs for some one-shell offsets (d,e) —
//         the discrete shadow of a sequence converging to (p,q),
// and the classes of p and q share no chart (pairs comparable inside a
// common chart are ordinary metric separations, not Hausdorff defects).
// ---------------------------------------------------------------------------

namespace detail {

inline bool grid_adjacent(const GridDomain& g, size_t fa, size_t fb) {
    for (size_t a = 0; a < g.dim; ++a) {
        long long ka = (long long)(fa / g.stride[a]);
        long long kb = (long long)(fb / g.stride[a]);
        fa %= g.stride[a];
        fb %= g.stride[a];
        long long d = ka > kb ? ka - kb : kb - ka;
        if (d > 1) return false;
    }
    return true;
}

} // namespace detail

inline Report check_closed_relation(const Atlas& a, const QuotientSpace& q) {
    Report rep;
    auto idx = a.index_sets();
    std::vector<std::string> violations;

    for (size_t pi = 0; pi < idx.size(); ++pi)
        for (size_t pj = pi + 1; pj < idx.size(); ++pj) {
            IndexSet I = idx[pi], J = idx[pj];
            const Chart& ci = a.chart(I);
            const Chart& cj = a.chart(J);
            // R_IJ from the classes
            std::vector<std::pair<size_t, size_t>> R;
            for (size_t c = 0; c < q.n_classes; ++c) {
                if (!((q.chart_sets[c] >> pi) & 1) || !((q.chart_sets[c] >> pj) & 1)) continue;
                std::vector<size_t> xs, ys;
                for (const auto& m : q.members[c]) {
                    if (m.chart == I) xs.push_back(m.flat);
                    if (m.chart == J) ys.push_back(m.flat);
                }
                for (size_t x : xs)
                    for (size_t y : ys) R.emplace_back(x, y);
            }
            if (R.empty()) continue;

            // sheets: joint adjacency components
            detail::Dsu sheets(R.size());
            for (size_t u = 0; u < R.size(); ++u)
                for (size_t v = u + 1; v < R.size(); ++v)
                    if (detail::grid_adjacent(*ci.dom, R[u].first, R[v].first) &&
                        detail::grid_adjacent(*cj.dom, R[u].second, R[v].second))
                        sheets.unite(u, v);
            std::unordered_map<size_t, std::vector<size_t>> sheet_of;
            for (size_t u = 0; u < R.size(); ++u) sheet_of[sheets.find(u)].push_back(u);

            std::set<std::pair<size_t, size_t>> flagged;
            for (const auto& [root, pairs] : sheet_of) {
                std::set<std::pair<size_t, size_t>> members;
                for (size_t u : pairs) members.insert(R[u]);
                // candidates: shell neighborhood of the sheet
                std::set<std::pair<size_t, size_t>> cands;
                std::vector<long long> one_i(ci.dom->dim, 1), one_j(cj.dom->dim, 1);
                for (size_t u : pairs) {
                    std::vector<size_t> ps, qs;
                    detail::for_box_offsets(*ci.dom, R[u].first, one_i, [&](size_t p) {
                        if (ci.carrier.test(p)) ps.push_back(p);
                    });
                    detail::for_box_offsets(*cj.dom, R[u].second, one_j, [&](size_t s) {
                        if (cj.carrier.test(s)) qs.push_back(s);
                    });
                    for (size_t p : ps)
                        for (size_t s : qs) cands.insert({p, s});
                }
                auto shifted = [](const GridDomain& g, size_t base, size_t towards)
                    -> std::optional<size_t> {
                    // base + 2*(towards - base) in multi-index space
                    auto kb = g.multi(base), kt = g.multi(towards);
                    std::vector<long long> k2(g.dim);
                    for (size_t a = 0; a < g.dim; ++a) {
                        k2[a] = kb[a] + 2 * (kt[a] - kb[a]);
                        if (k2[a] < 0 || k2[a] >= (long long)g.n[a]) return std::nullopt;
                    }
                    return g.flat(k2);
                };
                for (auto [p, s] : cands) {
                    long cp = q.cls[q.objs.gid(pi, p)];
                    long cq = q.cls[q.objs.gid(pj, s)];
                    if (cp == cq) continue;
                    if (q.chart_sets[size_t(cp)] & q.chart_sets[size_t(cq)]) continue; // common chart
                    bool c0 = false, c1 = true, c2 = true, ray = false;
                    for (size_t u : pairs) {
                        bool ax = detail::grid_adjacent(*ci.dom, p, R[u].first);
                        bool ay = detail::grid_adjacent(*cj.dom, s, R[u].second);
                        if (ax && ay) {
                            c0 = true;
                            if (!ray) {
                                auto p2 = shifted(*ci.dom, p, R[u].first);
                                auto s2 = shifted(*cj.dom, s, R[u].second);
                                if (p2 && s2 && members.count({*p2, *s2})) ray = true;
                            }
                        }
                        if (ax && !ay) c1 = false;
                        if (ay && !ax) c2 = false;
                    }
                    if (c0 && c1 && c2 && ray) flagged.insert({p, s});
                }
            }
            for (auto [p, s] : flagged)
                violations.push_back("((" + I.str() + "," + ci.dom->coord_str(p) + "),(" + J.str() +
                                     "," + cj.dom->coord_str(s) + "))");
        }

    auto& cl = rep.add("relation cl_h-closed (no coherent boundary escape)");
    if (!violations.empty()) {
        cl.pass = false;
        std::sort(violations.begin(), violations.end());
        cl.witnesses = std::move(violations);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Quotient metric: shortest paths in the class graph whose edges are the
// intra-chart distances. All chart distances are integer multiples of a
// common unit, so Dijkstra runs on int64 weights.
// ---------------------------------------------------------------------------

struct QuotientMetric {
    const QuotientSpace* q = nullptr;
    Rational unit;
    std::vector<long long> scale;                    // per chart: unit_I / unit
    std::vector<std::vector<long long>> table;       // full table when built
    bool full = false;

    static QuotientMetric prepare(const QuotientSpace& qs) {
        QuotientMetric m;
        m.q = &qs;
        const Atlas& a = *qs.atlas;
        for (IndexSet i : qs.objs.order) {
            const Rational& u = a.chart(i).dom->unit;
            m.unit = m.unit == 0 ? u : rat_gcd(m.unit, u);
        }
        for (IndexSet i : qs.objs.order)
            m.scale.push_back((long long)numerator(Rational(a.chart(i).dom->unit / m.unit)));
        return m;
    }

    // single-source (or multi-source) Dijkstra over classes
    std::vector<long long> distances(const std::set<long>& sources) const {
        const QuotientSpace& qs = *q;
        const Atlas& a = *qs.atlas;
        const long long INF = -1;
        std::vector<long long> dist(qs.n_classes, INF);
        using Item = std::pair<long long, long>;
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
        for (long s : sources) {
            dist[size_t(s)] = 0;
            pq.push({0, s});
        }
        // per-chart member lists of classes
        while (!pq.empty()) {
            auto [d, c] = pq.top();
            pq.pop();
            if (dist[size_t(c)] != d) continue;
            for (const auto& mem : qs.members[size_t(c)]) {
                size_t p = qs.objs.pos.at(mem.chart);
                const Chart& ch = a.chart(mem.chart);
                ch.carrier.for_each([&](size_t x) {
                    long c2 = qs.cls[qs.objs.gid(p, x)];
                    if (c2 < 0) return;
                    long long w = ch.dom->cheb(mem.flat, x) * scale[p];
                    long long nd = d + w;
                    if (dist[size_t(c2)] == INF || nd < dist[size_t(c2)]) {
                        dist[size_t(c2)] = nd;
                        pq.push({nd, c2});
                    }
                });
            }
        }
        return dist;
    }

    void build_full() {
        table.assign(q->n_classes, {});
        for (size_t c = 0; c < q->n_classes; ++c) table[c] = distances({long(c)});
        full = true;
    }

    Rational dist(long c1, long c2) const {
        require(full, "MetricNotBuilt", "full quotient metric table not built");
        long long d = table[size_t(c1)][size_t(c2)];
        require(d >= 0, "MetricNotBuilt", "disconnected classes have no finite distance");
        return Rational(d) * unit;
    }

    // exact min distance between two class sets
    ExtDist set_distance(const std::set<long>& a, const std::set<long>& b) const {
        if (a.empty() || b.empty()) return ExtDist::inf();
        auto d = distances(a);
        long long best = -1;
        for (long c : b)
            if (d[size_t(c)] >= 0 && (best < 0 || d[size_t(c)] < best)) best = d[size_t(c)];
        if (best < 0) return ExtDist::inf();
        return ExtDist::of(Rational(best) * unit);
    }
};

// ---------------------------------------------------------------------------
// FIX-D witness: quotient-open sets U_{f,eps} around [(0,0)] that contain no
// metric ball (the discrete shadow of non-metrizability).
// ---------------------------------------------------------------------------

struct BasisWitnessResult {
    Report report;
};

// f is the linear bound y -> slope * x (or a constant when slope_is_const)
inline BasisWitnessResult neighbourhood_basis_witness(const Atlas& a, const QuotientSpace& q,
                                                      const QuotientMetric& m,
                                                      const std::vector<Rational>& deltas,
                                                      const Rational& slope, bool slope_is_const,
                                                      const Rational& eps) {
    BasisWitnessResult out;
    auto I1 = IndexSet::single(1), I2 = IndexSet::single(2);
    require(a.has_chart(I1) && a.has_chart(I2) && a.chart(I1).dom->dim == 1 &&
                a.chart(I2).dom->dim == 2,
            "WrongFixture", "neighbourhood_basis_witness expects the FIX-D shape");
    const Chart& c1 = a.chart(I1);
    const Chart& c2 = a.chart(I2);
    auto zero1 = c1.dom->sample_at({rat(0)});
    require(zero1.has_value() && c1.carrier.test(*zero1), "WrongFixture", "chart 1 must contain 0");
    long c0 = q.class_of(I1, *zero1);

    // U_{f,eps} classes
    std::set<long> ufe;
    c1.carrier.for_each([&](size_t x) {
        Vec v = c1.dom->coord(x);
        if (rat_abs(v[0]) < eps) ufe.insert(q.class_of(I1, x));
    });
    c2.carrier.for_each([&](size_t x) {
        Vec v = c2.dom->coord(x);
        Rational bound = slope_is_const ? slope : Rational(slope * v[0]);
        if (rat_abs(v[0]) < eps && rat_abs(v[1]) < bound) ufe.insert(q.class_of(I2, x));
    });

    size_t p2 = q.objs.pos.at(I2);
    auto d0 = m.distances({c0});
    Rational diam = 0;
    for (long long d : d0)
        if (d >= 0) diam = std::max(diam, Rational(Rational(d) * m.unit));

    for (const Rational& delta : deltas) {
        auto& cl = out.report.add("delta = " + rat_str(delta));
        if (delta > diam) {
            cl.witnesses.push_back("degenerate: no ball of this radius fits inside the chart");
            continue;
        }
        bool witness = false;
        std::string wtext;
        c2.carrier.for_each([&](size_t x) {
            if (witness) return;
            long cc = q.cls[q.objs.gid(p2, x)];
            if (cc < 0 || d0[size_t(cc)] < 0) return;
            if (Rational(Rational(d0[size_t(cc)]) * m.unit) < delta && !ufe.count(cc)) {
                witness = true;
                wtext = "ball class at " + c2.dom->coord_str(x) + " escapes U_{f,eps}";
            }
        });
        // the clause records the decision; callers assert the outcome they expect
        cl.witnesses.push_back(witness ? "witness found: " + wtext
                                       : "contained: every ball class lies inside U_{f,eps}");
    }
    return out;
}

} // namespace kkit
