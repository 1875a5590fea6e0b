#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "matrix.hpp"

namespace entl {

/// Row-echelon (Hermite) basis of the row module of a matrix: pivots normalised by
/// the ring, entries above each pivot reduced to canonical residues. Equal row
/// modules produce identical bases.
template <class R>
struct Echelon {
    using E = typename R::Element;
    Matrix<E> basis;
    std::vector<std::size_t> pivots;

    std::size_t rank() const { return pivots.size(); }
    std::size_t width() const { return basis.cols(); }
};

namespace detail {

template <class R>
void row_sub_mul(Matrix<typename R::Element>& m, std::size_t target, const typename R::Element& q,
                 std::size_t src, std::size_t from_col = 0) {
    if (R::is_zero(q)) return;
    for (std::size_t j = from_col; j < m.cols(); ++j) {
        const auto& s = m(src, j);
        if (R::is_zero(s)) continue;
        R::sub_mul(m(target, j), q, s);
    }
}

/// m[target] = s*m[target] - q*m[src], from column `from_col` on.
template <class R>
void row_combine(Matrix<typename R::Element>& m, std::size_t target, const typename R::Element& s,
                 const typename R::Element& q, std::size_t src, std::size_t from_col = 0) {
    if (!R::is_one(s))
        for (std::size_t j = from_col; j < m.cols(); ++j)
            if (!R::is_zero(m(target, j))) m(target, j) = R::mul(s, m(target, j));
    row_sub_mul<R>(m, target, q, src, from_col);
}

template <class R>
void col_combine(Matrix<typename R::Element>& m, std::size_t target, const typename R::Element& s,
                 const typename R::Element& q, std::size_t src, std::size_t from_row = 0) {
    if (!R::is_one(s))
        for (std::size_t i = from_row; i < m.rows(); ++i)
            if (!R::is_zero(m(i, target))) m(i, target) = R::mul(s, m(i, target));
    col_sub_mul<R>(m, target, q, src, from_row);
}

template <class R>
void strip_row(Matrix<typename R::Element>& a, std::size_t i, Matrix<typename R::Element>* t) {
    if constexpr (R::kStripContent) {
        std::vector<typename R::Element*> xs;
        for (std::size_t j = 0; j < a.cols(); ++j) xs.push_back(&a(i, j));
        if (t)
            for (std::size_t j = 0; j < t->cols(); ++j) xs.push_back(&(*t)(i, j));
        R::strip_unit_content(xs);
    }
}

template <class R>
void strip_col(Matrix<typename R::Element>& a, std::size_t j, Matrix<typename R::Element>* t) {
    if constexpr (R::kStripContent) {
        std::vector<typename R::Element*> xs;
        for (std::size_t i = 0; i < a.rows(); ++i) xs.push_back(&a(i, j));
        if (t)
            for (std::size_t i = 0; i < t->rows(); ++i) xs.push_back(&(*t)(i, j));
        R::strip_unit_content(xs);
    }
}

template <class R>
void row_scale(Matrix<typename R::Element>& m, std::size_t target, const typename R::Element& u) {
    if (R::is_one(u)) return;
    for (std::size_t j = 0; j < m.cols(); ++j)
        if (!R::is_zero(m(target, j))) m(target, j) = R::mul(u, m(target, j));
}

template <class R>
void col_sub_mul(Matrix<typename R::Element>& m, std::size_t target, const typename R::Element& q,
                 std::size_t src, std::size_t from_row = 0) {
    if (R::is_zero(q)) return;
    for (std::size_t i = from_row; i < m.rows(); ++i) {
        const auto& s = m(i, src);
        if (R::is_zero(s)) continue;
        R::sub_mul(m(i, target), q, s);
    }
}

template <class R>
void col_scale(Matrix<typename R::Element>& m, std::size_t target, const typename R::Element& u) {
    if (R::is_one(u)) return;
    for (std::size_t i = 0; i < m.rows(); ++i)
        if (!R::is_zero(m(i, target))) m(i, target) = R::mul(u, m(i, target));
}

} // namespace detail

/// Row-echelon form of A. When `transform` is given it receives an invertible U with
/// U*A = [basis; 0].
template <class R>
Echelon<R> echelon(Matrix<typename R::Element> a, Matrix<typename R::Element>* transform = nullptr) {
    using E = typename R::Element;
    const std::size_t m = a.rows(), n = a.cols();
    if (transform) *transform = Matrix<E>::identity(m, R::zero(), R::one());
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < n && r < m; ++c) {
        bool found = false;
        for (;;) {
            std::size_t best = m;
            for (std::size_t i = r; i < m; ++i) {
                if (R::is_zero(a(i, c))) continue;
                if (best == m || R::norm_less(a(i, c), a(best, c))) best = i;
            }
            if (best == m) break;
            found = true;
            a.swap_rows(r, best);
            if (transform) transform->swap_rows(r, best);
            bool clean = true;
            for (std::size_t i = r + 1; i < m; ++i) {
                if (R::is_zero(a(i, c))) continue;
                auto [f, q] = R::cofactors(a(i, c), a(r, c));
                detail::row_combine<R>(a, i, f, q, r, c);
                if (transform) detail::row_combine<R>(*transform, i, f, q, r);
                if (!R::is_one(f)) detail::strip_row<R>(a, i, transform);
                if (!R::is_zero(a(i, c))) clean = false;
            }
            if (clean) break;
        }
        if (!found) continue;
        E u = R::unit_normalizer(a(r, c));
        detail::row_scale<R>(a, r, u);
        if (transform) detail::row_scale<R>(*transform, r, u);
        for (std::size_t i = 0; i < r; ++i) {
            if (R::is_zero(a(i, c))) continue;
            auto [q, rem] = R::reduce_mod(a(i, c), a(r, c));
            detail::row_sub_mul<R>(a, i, q, r, c);
            if (transform) detail::row_sub_mul<R>(*transform, i, q, r);
        }
        pivots.push_back(c);
        ++r;
    }
    a.truncate_rows(r);
    a.set_cols_if_empty(n);
    return {std::move(a), std::move(pivots)};
}

/// Reduces v modulo the row module of an echelon basis. Returns the canonical
/// remainder; `coeffs`, when given, receives q with v = q*basis + remainder.
template <class R>
std::vector<typename R::Element> reduce_vector(const Echelon<R>& h, std::vector<typename R::Element> v,
                                               std::vector<typename R::Element>* coeffs = nullptr) {
    if (coeffs) coeffs->assign(h.rank(), R::zero());
    for (std::size_t k = 0; k < h.rank(); ++k) {
        std::size_t c = h.pivots[k];
        if (R::is_zero(v[c])) continue;
        auto [q, rem] = R::reduce_mod(v[c], h.basis(k, c));
        if (R::is_zero(q)) continue;
        for (std::size_t j = c; j < v.size(); ++j) {
            const auto& s = h.basis(k, j);
            if (!R::is_zero(s)) R::sub_mul(v[j], q, s);
        }
        if (coeffs) (*coeffs)[k] = q;
    }
    return v;
}

template <class R>
bool is_zero_vector(std::span<const typename R::Element> v) {
    for (const auto& x : v)
        if (!R::is_zero(x)) return false;
    return true;
}

template <class R>
bool contains(const Echelon<R>& h, std::span<const typename R::Element> v) {
    auto rem = reduce_vector<R>(h, std::vector<typename R::Element>(v.begin(), v.end()));
    return is_zero_vector<R>(rem);
}

/// Coefficients C with C*basis = rows, for rows lying in the echelon module.
template <class R>
Matrix<typename R::Element> coordinates(const Echelon<R>& h, const Matrix<typename R::Element>& rows) {
    using E = typename R::Element;
    Matrix<E> c(rows.rows(), h.rank(), R::zero());
    std::vector<E> q;
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        auto rem = reduce_vector<R>(h, std::vector<E>(rows.row(i).begin(), rows.row(i).end()), &q);
        require(is_zero_vector<R>(rem), ErrorKind::InvalidInput, "row outside the echelon module");
        for (std::size_t k = 0; k < q.size(); ++k) c(i, k) = q[k];
    }
    return c;
}

/// Basis of {y : y*A = 0}.
template <class R>
Matrix<typename R::Element> left_nullspace(const Matrix<typename R::Element>& a) {
    using E = typename R::Element;
    Matrix<E> u;
    auto h = echelon<R>(a, &u);
    Matrix<E> out;
    out.set_cols_if_empty(a.rows());
    for (std::size_t i = h.rank(); i < a.rows(); ++i) out.append_row(u.row(i));
    return out;
}

template <class R>
struct SmithResult {
    using E = typename R::Element;
    std::vector<E> invariants; // non-zero diagonal entries, normalised
    std::size_t rank = 0;
    Matrix<E> left, right;     // left * A * right = diag(invariants), when requested
};

/// Smith normal form by Euclidean row and column elimination. Over Z the invariants
/// form a divisibility chain; over the valuation ring their valuations are
/// non-decreasing.
template <class R>
SmithResult<R> smith(Matrix<typename R::Element> d, bool want_transforms = false) {
    using E = typename R::Element;
    const std::size_t m = d.rows(), n = d.cols();
    SmithResult<R> out;
    Matrix<E> u, v;
    if (want_transforms) {
        u = Matrix<E>::identity(m, R::zero(), R::one());
        v = Matrix<E>::identity(n, R::zero(), R::one());
    }
    std::size_t t = 0;
    while (t < m && t < n) {
        std::size_t bi = m, bj = n;
        for (std::size_t i = t; i < m; ++i)
            for (std::size_t j = t; j < n; ++j) {
                if (R::is_zero(d(i, j))) continue;
                if (bi == m || R::norm_less(d(i, j), d(bi, bj))) bi = i, bj = j;
            }
        if (bi == m) break;
        d.swap_rows(t, bi);
        d.swap_cols(t, bj);
        if (want_transforms) {
            u.swap_rows(t, bi);
            v.swap_cols(t, bj);
        }
        for (;;) {
            bool dirty = false;
            for (std::size_t i = t + 1; i < m; ++i) {
                if (R::is_zero(d(i, t))) continue;
                auto [f, q] = R::cofactors(d(i, t), d(t, t));
                detail::row_combine<R>(d, i, f, q, t, t);
                if (want_transforms) detail::row_combine<R>(u, i, f, q, t);
                if (!R::is_one(f)) detail::strip_row<R>(d, i, want_transforms ? &u : nullptr);
                if (!R::is_zero(d(i, t))) dirty = true;
            }
            for (std::size_t j = t + 1; j < n; ++j) {
                if (R::is_zero(d(t, j))) continue;
                auto [f, q] = R::cofactors(d(t, j), d(t, t));
                detail::col_combine<R>(d, j, f, q, t, t);
                if (want_transforms) detail::col_combine<R>(v, j, f, q, t);
                if (!R::is_one(f)) detail::strip_col<R>(d, j, want_transforms ? &v : nullptr);
                if (!R::is_zero(d(t, j))) dirty = true;
            }
            if (dirty) {
                // Move the smallest remaining entry of row/column t onto the diagonal.
                std::size_t bi2 = t, bj2 = t;
                for (std::size_t i = t + 1; i < m; ++i)
                    if (!R::is_zero(d(i, t)) && R::norm_less(d(i, t), d(bi2, bj2))) bi2 = i, bj2 = t;
                for (std::size_t j = t + 1; j < n; ++j)
                    if (!R::is_zero(d(t, j)) && R::norm_less(d(t, j), d(bi2, bj2))) bi2 = t, bj2 = j;
                d.swap_rows(t, bi2);
                d.swap_cols(t, bj2);
                if (want_transforms) {
                    u.swap_rows(t, bi2);
                    v.swap_cols(t, bj2);
                }
                continue;
            }
            // Pivot must divide the whole trailing block.
            std::size_t bad = m;
            for (std::size_t i = t + 1; i < m && bad == m; ++i)
                for (std::size_t j = t + 1; j < n; ++j)
                    if (!R::is_zero(d(i, j)) && !R::divides(d(t, t), d(i, j))) {
                        bad = i;
                        break;
                    }
            if (bad == m) break;
            E minus_one = R::neg(R::one());
            detail::row_sub_mul<R>(d, t, minus_one, bad, t);
            if (want_transforms) detail::row_sub_mul<R>(u, t, minus_one, bad);
        }
        if constexpr (R::kScalePivots) {
            E un = R::unit_normalizer(d(t, t));
            detail::row_scale<R>(d, t, un);
            if (want_transforms) detail::row_scale<R>(u, t, un);
        }
        out.invariants.push_back(R::canonical_associate(d(t, t)));
        ++t;
    }
    out.rank = t;
    if (want_transforms) {
        out.left = std::move(u);
        out.right = std::move(v);
    }
    return out;
}

template <class R>
Matrix<typename R::Element> multiply(const Matrix<typename R::Element>& a,
                                     const Matrix<typename R::Element>& b) {
    using E = typename R::Element;
    require(a.cols() == b.rows(), ErrorKind::InvalidInput, "matrix product shape mismatch");
    Matrix<E> c(a.rows(), b.cols(), R::zero());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const auto& x = a(i, k);
            if (R::is_zero(x)) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                const auto& y = b(k, j);
                if (R::is_zero(y)) continue;
                c(i, j) = R::add(c(i, j), R::mul(x, y));
            }
        }
    return c;
}

} // namespace entl
