#pragma once

#include "kkit/grid.hpp"
#include "kkit/linalg.hpp"
#include "kkit/metric_space.hpp"
#include "kkit/polynomial.hpp"

#include <map>
#include <unordered_map>

namespace kkit {

// Exact section of the trivialized bundle U x Q^k: per fiber coordinate either
// a polynomial in the base coordinates or a table of exact values (tables show
// up when concatenating cobordisms, where the glued map is only piecewise
// polynomial in time).
struct Section {
    size_t fiber_dim = 0;
    std::vector<Polynomial> polys;              // size fiber_dim when polynomial-backed
    std::unordered_map<size_t, Vec> table;      // flat sample -> fiber value
    bool is_table = false;

    static Section zero(size_t base_dim, size_t k) {
        Section s;
        s.fiber_dim = k;
        for (size_t i = 0; i < k; ++i) s.polys.push_back(Polynomial::constant(base_dim, 0));
        return s;
    }
    static Section of_polys(std::vector<Polynomial> ps) {
        Section s;
        s.fiber_dim = ps.size();
        s.polys = std::move(ps);
        return s;
    }
    static Section of_table(size_t k, std::unordered_map<size_t, Vec> t) {
        Section s;
        s.fiber_dim = k;
        s.table = std::move(t);
        s.is_table = true;
        return s;
    }

    Vec eval(const GridDomain& g, size_t flat) const {
        if (is_table) {
            auto it = table.find(flat);
            require(it != table.end(), "SectionUndefined",
                    "no table value at sample " + g.coord_str(flat));
            return it->second;
        }
        Vec x = g.coord(flat);
        Vec v(fiber_dim);
        for (size_t i = 0; i < fiber_dim; ++i) v[i] = polys[i].eval(x);
        return v;
    }
};

// psi rule: how zero-set samples map to points of X. Either an explicit table
// or a 1d coordinate formula (optionally reduced mod 1 for circle models).
struct PsiRule {
    enum Kind { Table, Expr } kind = Table;
    std::map<size_t, size_t> table; // flat zero sample -> X point id
    Polynomial expr;                // X coordinate as a function of base coords
    bool mod1 = false;

    static PsiRule of_expr(Polynomial p, bool mod1_) {
        PsiRule r;
        r.kind = Expr;
        r.expr = std::move(p);
        r.mod1 = mod1_;
        return r;
    }
    static PsiRule of_table(std::map<size_t, size_t> t) {
        PsiRule r;
        r.kind = Table;
        r.table = std::move(t);
        return r;
    }
};

struct Chart {
    IndexSet index;
    GridPtr dom;
    RegionMask carrier; // U_I
    size_t fiber_dim = 0;
    Section section;
    PsiRule psi_rule;
    PointSet footprint;                    // F_I ⊆ X
    std::map<size_t, size_t> psi;          // resolved: zero sample -> X point
    std::map<size_t, size_t> psi_inv;      // X point -> zero sample
    RegionMask zero_set;
    std::optional<GridDomain> fiber_window; // for the bundle realization

    void resolve_zero_set() {
        zero_set = RegionMask(dom);
        carrier.for_each([&](size_t i) {
            if (vec_is_zero(section.eval(*dom, i))) zero_set.set(i);
        });
    }

    // fill psi / psi_inv from the rule; returns per-sample failures
    std::vector<std::string> resolve_psi() {
        std::vector<std::string> errs;
        psi.clear();
        psi_inv.clear();
        const auto& X = *footprint.sp;
        zero_set.for_each([&](size_t i) {
            std::optional<size_t> pid;
            if (psi_rule.kind == PsiRule::Table) {
                auto it = psi_rule.table.find(i);
                if (it != psi_rule.table.end()) pid = it->second;
            } else {
                Rational x = psi_rule.expr.eval(dom->coord(i));
                if (psi_rule.mod1) {
                    x -= Rational(rat_floor(x));
                }
                pid = X.point_at(x);
            }
            if (!pid) {
                errs.push_back("zero sample " + dom->coord_str(i) + " has no X image");
                return;
            }
            psi[i] = *pid;
            if (psi_inv.count(*pid))
                errs.push_back("footprint map not injective at X point " + std::to_string(*pid));
            else
                psi_inv[*pid] = i;
        });
        return errs;
    }

    // mask of psi^{-1}(A) for A ⊆ X (only zero samples can map)
    RegionMask psi_preimage(const PointSet& a) const {
        RegionMask r(dom);
        for (const auto& [s, p] : psi)
            if (a.test(p)) r.set(s);
        return r;
    }

    PointSet psi_image(const RegionMask& m) const {
        PointSet out(footprint.sp);
        for (const auto& [s, p] : psi)
            if (m.test(s)) out.set(p);
        return out;
    }
};

// Affine lattice map x -> M x + b between chart grids.
struct AffineMap {
    Mat m;  // d_target x d_source
    Vec b;  // d_target

    static AffineMap identity(size_t d) { return AffineMap{Mat::identity(d), Vec(d, Rational(0))}; }

    Vec apply_coords(const Vec& x) const {
        Vec y = m.apply(x);
        for (size_t i = 0; i < y.size(); ++i) y[i] += b[i];
        return y;
    }
    // flat-to-flat; nullopt when the image is off the target lattice/box
    std::optional<size_t> apply(const GridDomain& src, const GridDomain& dst, size_t flat) const {
        return dst.sample_at(apply_coords(src.coord(flat)));
    }
    // exact preimage of a target sample (m injective); nullopt if none on the lattice
    std::optional<size_t> preimage(const GridDomain& src, const GridDomain& dst, size_t flat) const {
        Vec y = dst.coord(flat);
        for (size_t i = 0; i < y.size(); ++i) y[i] -= b[i];
        auto x = solve(m, y);
        if (!x) return std::nullopt;
        // verify (solve returns some solution; for injective m it is the unique one)
        Vec chk = m.apply(*x);
        for (size_t i = 0; i < chk.size(); ++i)
            if (chk[i] != y[i]) return std::nullopt;
        return src.sample_at(*x);
    }
    AffineMap compose_after(const AffineMap& first) const {
        // this ∘ first
        AffineMap r;
        r.m = m.mul(first.m);
        r.b = m.apply(first.b);
        for (size_t i = 0; i < r.b.size(); ++i) r.b[i] += b[i];
        return r;
    }
};

struct CoordinateChange {
    IndexSet src, dst; // I ⊊ J
    RegionMask domain; // U_IJ on the source grid
    AffineMap base;    // phi_IJ
    Mat fiber;         // L_IJ : Q^{k_I} -> Q^{k_J}
};

// Filtration subspaces S_IJ ⊆ Q^{k_J} for I ⊆ J; S_JJ is full, S_{∅J} is zero.
struct Filtration {
    std::map<std::uint64_t, Subspace> sub; // key pair_key(I,J), I proper nonempty

    void set(IndexSet i, IndexSet j, Subspace s) { sub[pair_key(i, j)] = std::move(s); }
    bool has(IndexSet i, IndexSet j) const { return sub.count(pair_key(i, j)) != 0; }
    Subspace get(IndexSet i, IndexSet j, size_t fiber_dim_j) const {
        if (i == j) return Subspace::full(fiber_dim_j);
        if (i.empty()) return Subspace::zero(fiber_dim_j);
        auto it = sub.find(pair_key(i, j));
        require(it != sub.end(), "NoFiltration",
                "missing filtration subspace for " + i.str() + " ⊆ " + j.str());
        return it->second;
    }
};

} // namespace kkit
