#pragma once

#include "kkit/rational.hpp"

#include <vector>

namespace kkit {

// Dense rational matrix, rows x cols.
struct Mat {
    size_t rows = 0, cols = 0;
    std::vector<Rational> a;

    Mat() = default;
    Mat(size_t r, size_t c) : rows(r), cols(c), a(r * c) {}
    static Mat identity(size_t n) {
        Mat m(n, n);
        for (size_t i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }
    static Mat from_rows(const std::vector<Vec>& rs, size_t cols_hint = 0) {
        size_t c = rs.empty() ? cols_hint : rs[0].size();
        Mat m(rs.size(), c);
        for (size_t i = 0; i < rs.size(); ++i) {
            require(rs[i].size() == c, "ShapeMismatch", "ragged matrix rows");
            for (size_t j = 0; j < c; ++j) m.at(i, j) = rs[i][j];
        }
        return m;
    }

    Rational& at(size_t i, size_t j) { return a[i * cols + j]; }
    const Rational& at(size_t i, size_t j) const { return a[i * cols + j]; }

    Vec row(size_t i) const { return Vec(a.begin() + i * cols, a.begin() + (i + 1) * cols); }

    Vec apply(const Vec& x) const {
        require(x.size() == cols, "ShapeMismatch", "matrix-vector size");
        Vec y(rows, Rational(0));
        for (size_t i = 0; i < rows; ++i)
            for (size_t j = 0; j < cols; ++j)
                if (at(i, j) != 0 && x[j] != 0) y[i] += at(i, j) * x[j];
        return y;
    }

    Mat mul(const Mat& o) const {
        require(cols == o.rows, "ShapeMismatch", "matrix product");
        Mat m(rows, o.cols);
        for (size_t i = 0; i < rows; ++i)
            for (size_t k = 0; k < cols; ++k) {
                if (at(i, k) == 0) continue;
                for (size_t j = 0; j < o.cols; ++j)
                    if (o.at(k, j) != 0) m.at(i, j) += at(i, k) * o.at(k, j);
            }
        return m;
    }

    bool operator==(const Mat& o) const { return rows == o.rows && cols == o.cols && a == o.a; }
};

// In-place reduced row echelon form; returns rank.
inline size_t rref(Mat& m) {
    size_t r = 0;
    for (size_t c = 0; c < m.cols && r < m.rows; ++c) {
        size_t piv = r;
        while (piv < m.rows && m.at(piv, c) == 0) ++piv;
        if (piv == m.rows) continue;
        if (piv != r)
            for (size_t j = 0; j < m.cols; ++j) std::swap(m.at(piv, j), m.at(r, j));
        Rational d = m.at(r, c);
        for (size_t j = 0; j < m.cols; ++j) m.at(r, j) /= d;
        for (size_t i = 0; i < m.rows; ++i) {
            if (i == r || m.at(i, c) == 0) continue;
            Rational f = m.at(i, c);
            for (size_t j = 0; j < m.cols; ++j) m.at(i, j) -= f * m.at(r, j);
        }
        ++r;
    }
    return r;
}

inline size_t rank(Mat m) { return rref(m); }

inline bool is_injective(const Mat& m) { return rank(m) == m.cols; }

// Solve m x = y exactly; nullopt if inconsistent. If the kernel is nontrivial an
// arbitrary solution is returned (callers here only use it for injective m).
inline std::optional<Vec> solve(const Mat& m, const Vec& y) {
    require(y.size() == m.rows, "ShapeMismatch", "solve rhs");
    Mat aug(m.rows, m.cols + 1);
    for (size_t i = 0; i < m.rows; ++i) {
        for (size_t j = 0; j < m.cols; ++j) aug.at(i, j) = m.at(i, j);
        aug.at(i, m.cols) = y[i];
    }
    rref(aug);
    Vec x(m.cols, Rational(0));
    for (size_t i = 0; i < m.rows; ++i) {
        size_t lead = m.cols + 1;
        for (size_t j = 0; j <= m.cols; ++j)
            if (aug.at(i, j) != 0) {
                lead = j;
                break;
            }
        if (lead == m.cols + 1) continue;
        if (lead == m.cols) return std::nullopt; // 0 = nonzero
        x[lead] = aug.at(i, m.cols);
    }
    return x;
}

// Linear subspace of Q^n held as an RREF basis (canonical form: two subspaces
// are equal iff their basis matrices are equal).
struct Subspace {
    size_t ambient = 0;
    Mat basis; // rref, basis.rows = dim

    static Subspace zero(size_t n) {
        Subspace s;
        s.ambient = n;
        s.basis = Mat(0, n);
        return s;
    }
    static Subspace full(size_t n) {
        Subspace s;
        s.ambient = n;
        s.basis = Mat::identity(n);
        return s;
    }
    static Subspace span(const std::vector<Vec>& rows, size_t n) {
        Mat m = Mat::from_rows(rows, n);
        require(m.cols == n, "ShapeMismatch", "span rows must have ambient length");
        size_t r = rref(m);
        Subspace s;
        s.ambient = n;
        s.basis = Mat(r, n);
        for (size_t i = 0; i < r; ++i)
            for (size_t j = 0; j < n; ++j) s.basis.at(i, j) = m.at(i, j);
        return s;
    }

    size_t dim() const { return basis.rows; }

    bool contains(const Vec& v) const {
        require(v.size() == ambient, "ShapeMismatch", "membership test");
        Vec w = v;
        // reduce w against the rref basis
        for (size_t i = 0; i < basis.rows; ++i) {
            size_t lead = ambient;
            for (size_t j = 0; j < ambient; ++j)
                if (basis.at(i, j) != 0) {
                    lead = j;
                    break;
                }
            if (lead == ambient) continue;
            if (w[lead] != 0) {
                Rational f = w[lead];
                for (size_t j = 0; j < ambient; ++j) w[j] -= f * basis.at(i, j);
            }
        }
        return vec_is_zero(w);
    }

    bool operator==(const Subspace& o) const {
        return ambient == o.ambient && basis == o.basis;
    }
    bool operator!=(const Subspace& o) const { return !(*this == o); }

    // image of this subspace under m : Q^ambient -> Q^rows(m)
    Subspace image(const Mat& m) const {
        require(m.cols == ambient, "ShapeMismatch", "image");
        std::vector<Vec> rows;
        for (size_t i = 0; i < basis.rows; ++i) rows.push_back(m.apply(basis.row(i)));
        return span(rows, m.rows);
    }

    Subspace intersect(const Subspace& o) const {
        require(ambient == o.ambient, "ShapeMismatch", "intersect");
        // Zassenhaus-free approach: v in both iff v in span(A) and reduces to 0 by B.
        // Solve: rows x of A-coeff space with x*A in span(B). Stack kernel computation:
        // kernel of [A; B] pairing. Use: v = a*A = b*B -> find null space of [A^T | -B^T].
        size_t da = dim(), db = o.dim();
        if (da == 0 || db == 0) return zero(ambient);
        Mat sys(ambient, da + db);
        for (size_t j = 0; j < da; ++j)
            for (size_t i = 0; i < ambient; ++i) sys.at(i, j) = basis.at(j, i);
        for (size_t j = 0; j < db; ++j)
            for (size_t i = 0; i < ambient; ++i) sys.at(i, da + j) = -o.basis.at(j, i);
        // kernel of sys
        Mat m = sys;
        rref(m);
        // identify pivot columns
        std::vector<long> pivot_of_col(m.cols, -1);
        size_t r = 0;
        for (size_t i = 0; i < m.rows; ++i) {
            size_t lead = m.cols;
            for (size_t j = 0; j < m.cols; ++j)
                if (m.at(i, j) != 0) {
                    lead = j;
                    break;
                }
            if (lead == m.cols) break;
            pivot_of_col[lead] = long(i);
            ++r;
        }
        std::vector<Vec> rows;
        for (size_t free = 0; free < m.cols; ++free) {
            if (pivot_of_col[free] >= 0) continue;
            // kernel vector with 1 at free column
            Vec k(m.cols, Rational(0));
            k[free] = 1;
            for (size_t j = 0; j < m.cols; ++j) {
                if (pivot_of_col[j] >= 0) {
                    k[j] = -m.at(size_t(pivot_of_col[j]), free);
                }
            }
            // project to subspace vector via the A part
            Vec v(ambient, Rational(0));
            for (size_t j = 0; j < da; ++j)
                if (k[j] != 0)
                    for (size_t i = 0; i < ambient; ++i) v[i] += k[j] * basis.at(j, i);
            if (!vec_is_zero(v)) rows.push_back(v);
        }
        return span(rows, ambient);
    }

    bool subset_of(const Subspace& o) const {
        for (size_t i = 0; i < basis.rows; ++i)
            if (!o.contains(basis.row(i))) return false;
        return true;
    }

    std::string str() const {
        std::string s = "span{";
        for (size_t i = 0; i < basis.rows; ++i) {
            if (i) s += ",";
            s += vec_str(basis.row(i));
        }
        return s + "}";
    }
};

} // namespace kkit
