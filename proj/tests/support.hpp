#pragma once

#include <random>

#include <entl/dynamics.hpp>

namespace entl::testing {

using Z = IntegerRing;
using V = ValuationRing;

inline ValElement xq(const Rational& e, const Rational& c = 1) { return ValElement::monomial(c, e); }

inline ModPtr<Z> zmod(long n, const Engine& e = Engine::integers()) { return share(FPModule<Z>::cyclic(e, Integer(n))); }

inline ModPtr<V> rmod(const Rational& g) { return share(FPModule<V>::cyclic(Engine::valuation(), xq(g))); }

template <class R>
Matrix<typename R::Element> rows_of(std::initializer_list<std::vector<typename R::Element>> rs, std::size_t width) {
    Matrix<typename R::Element> m(0, width);
    for (auto& r : rs) m.append_row(r);
    return m;
}

/// Laplace expansion, independent of the elimination code.
template <class R>
typename R::Element laplace_det(const Matrix<typename R::Element>& a) {
    const std::size_t n = a.rows();
    if (n == 0) return R::one();
    if (n == 1) return a(0, 0);
    typename R::Element acc = R::zero();
    for (std::size_t c = 0; c < n; ++c) {
        Matrix<typename R::Element> minor(n - 1, n - 1);
        for (std::size_t r = 1; r < n; ++r)
            for (std::size_t k = 0, t = 0; k < n; ++k)
                if (k != c) minor(r - 1, t++) = a(r, k);
        auto term = R::mul(a(0, c), laplace_det<R>(minor));
        acc = c % 2 == 0 ? R::add(acc, term) : R::sub(acc, term);
    }
    return acc;
}

struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}
    long uni(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }
    Rational q(long max_num, long max_den) { return make_rational(uni(0, max_num), uni(1, max_den)); }

    Integer z(long bound) { return Integer(uni(-bound, bound)); }

    /// Mostly monomials, sometimes a binomial, with small rational exponents.
    ValElement val(long max_den = 4) {
        if (uni(0, 5) == 0) return ValElement::zero();
        ValElement e = xq(q(3 * max_den, max_den), Rational(uni(1, 4)) * (uni(0, 1) ? 1 : -1));
        if (uni(0, 5) == 0) e = e + xq(q(3 * max_den, max_den), Rational(uni(1, 3)));
        return e;
    }

    Matrix<Integer> zmat(std::size_t r, std::size_t c, long bound) {
        Matrix<Integer> m(r, c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) m(i, j) = z(bound);
        return m;
    }
    Matrix<ValElement> vmat(std::size_t r, std::size_t c) {
        Matrix<ValElement> m(r, c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) m(i, j) = val();
        return m;
    }

    LengthValue lv() {
        switch (uni(0, 3)) {
        case 0: return LengthValue::rational(q(20, 12));
        case 1: return lv_scale(LengthValue::log_of(Integer(uni(2, 30))), make_rational(uni(1, 5), uni(1, 4)));
        case 2: return lv_add(LengthValue::rational(q(10, 6)), LengthValue::log_of(Integer(uni(2, 12))));
        default: return uni(0, 9) == 0 ? LengthValue::infinity() : LengthValue::rational(Rational(uni(0, 5)));
        }
    }
};

} // namespace entl::testing
