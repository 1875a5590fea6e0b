#include <gtest/gtest.h>

#include "support.hpp"

using namespace entl;
using namespace entl::testing;

TEST(Valuation, MinimumExponent) {
    EXPECT_EQ((xq(Rational(1, 2)) - xq(Rational(13, 6))).valuation(), Rational(1, 2));
    EXPECT_TRUE(ValElement::zero().is_zero());
    EXPECT_EQ((xq(0, 3) + xq(5)).valuation(), 0);
}

TEST(Valuation, ArithmeticStaysExact) {
    auto a = xq(Rational(1, 3)) + xq(1);
    auto b = xq(Rational(1, 2));
    EXPECT_EQ((a * b).to_string(), (xq(Rational(5, 6)) + xq(Rational(3, 2))).to_string());
    EXPECT_TRUE((a - a).is_zero());
    EXPECT_EQ((a * b).valuation(), Rational(5, 6));
}

TEST(Smith, IntegerExample) {
    Matrix<Integer> a{{2, 1}, {0, 3}};
    auto s = smith_reduce<Z>(Engine::integers(), a);
    ASSERT_EQ(s.invariants.size(), 2u);
    EXPECT_EQ(s.invariants[0], 1);
    EXPECT_EQ(s.invariants[1], 6);
    EXPECT_EQ(s.free_rank, 0u);
    EXPECT_EQ(multiply<Z>(multiply<Z>(s.left, a), s.right), s.diagonal);
}

TEST(Smith, ValuationExample) {
    Matrix<ValElement> a{{xq(Rational(1, 2)), xq(1)}, {xq(Rational(3, 2)), xq(Rational(1, 3))}};
    auto s = smith_reduce<V>(Engine::valuation(), a);
    ASSERT_EQ(s.invariants.size(), 2u);
    EXPECT_EQ((s.invariants[0]).valuation(), Rational(1, 3));
    EXPECT_EQ((s.invariants[1]).valuation(), Rational(1, 2));
    EXPECT_EQ((laplace_det<V>(a)).valuation(), Rational(5, 6));
}

TEST(Smith, PrimeFieldZeroMatrix) {
    Matrix<Integer> a{{0}};
    auto s = smith_reduce<Z>(Engine::prime_field(5), a);
    EXPECT_TRUE(s.invariants.empty());
    EXPECT_EQ(s.free_rank, 1u);
}

TEST(CyclicLength, Examples) {
    EXPECT_EQ(cyclic_length(LengthId::Lv, Engine::valuation(), IdealCut::cut(Rational(3, 2))), LengthValue::rational(Rational(3, 2)));
    EXPECT_EQ(cyclic_length(LengthId::LogCard, Engine::integers(), IntIdeal{6}), LengthValue::log_of(6));
    EXPECT_TRUE(cyclic_length(LengthId::Lv, Engine::valuation(), IdealCut::zero()).is_infinite());
    EXPECT_TRUE(cyclic_length(LengthId::LogCard, Engine::integers(), IntIdeal{0}).is_infinite());
    EXPECT_EQ(cyclic_length(LengthId::Rank, Engine::integers(), IntIdeal{0}), LengthValue::rational(1));
    EXPECT_EQ(cyclic_length(LengthId::Dim, Engine::prime_field(5), IntIdeal{0}), LengthValue::rational(1));
    // Over Z/12 the ideal 8Z/12 is 4Z/12.
    EXPECT_EQ(cyclic_length(LengthId::LogCard, Engine::modular(12), IntIdeal{8}), LengthValue::log_of(4));
    // The open cut has the same length as the closed one.
    EXPECT_EQ(cyclic_length(LengthId::Lv, Engine::valuation(), IdealCut::cut(1, IdealCut::Boundary::Open)), LengthValue::rational(1));
}

TEST(CyclicLength, UnsupportedPairs) {
    EXPECT_THROW(check_pair(LengthId::Lv, Engine::integers()), Error);
    EXPECT_THROW(check_pair(LengthId::Dim, Engine::modular(6)), Error);
    EXPECT_THROW(check_pair(LengthId::LogCard, Engine::valuation()), Error);
    EXPECT_NO_THROW(check_pair(LengthId::Rank, Engine::integers()));
    EXPECT_THROW(check_pair(LengthId::LogCard, Engine::prime_field(7)), Error);
}

TEST(Engine, PrimeFieldRejectsComposite) { EXPECT_THROW(Engine::prime_field(6), Error); }

namespace {

template <class R>
bool is_diagonal(const Matrix<typename R::Element>& d) {
    for (std::size_t i = 0; i < d.rows(); ++i)
        for (std::size_t j = 0; j < d.cols(); ++j)
            if (i != j && !R::is_zero(d(i, j))) return false;
    return true;
}

} // namespace

TEST(SmithProperty, IntegersRandom) {
    Gen g(11);
    for (int t = 0; t < 200; ++t) {
        std::size_t r = static_cast<std::size_t>(g.uni(1, 5)), c = static_cast<std::size_t>(g.uni(1, 5));
        if (t % 2 == 0) c = r;
        auto a = g.zmat(r, c, 9);
        auto s = smith_reduce<Z>(Engine::integers(), a);
        ASSERT_EQ(multiply<Z>(multiply<Z>(s.left, a), s.right), s.diagonal);
        ASSERT_TRUE(is_diagonal<Z>(s.diagonal));
        Integer du = laplace_det<Z>(s.left), dv = laplace_det<Z>(s.right);
        EXPECT_TRUE(abs(du) == 1 && abs(dv) == 1);
        for (std::size_t i = 0; i + 1 < s.invariants.size(); ++i) EXPECT_EQ(s.invariants[i + 1] % s.invariants[i], 0);
        if (r == c) {
            Integer det = abs(laplace_det<Z>(a));
            if (det != 0) {
                LengthValue sum;
                for (auto& d : s.invariants) sum = lv_add(sum, cyclic_length(LengthId::LogCard, Engine::integers(), Z::ideal_of(d)));
                EXPECT_EQ(sum, LengthValue::log_of(det));
            }
        }
        // Reversed rows give the same invariant factors.
        Matrix<Integer> rev(0, c);
        for (std::size_t i = r; i-- > 0;) rev.append_row(a.row(i));
        auto s2 = smith_reduce<Z>(Engine::integers(), rev);
        EXPECT_EQ(s.invariants, s2.invariants);
        EXPECT_EQ(s.free_rank, s2.free_rank);
    }
}

TEST(SmithProperty, ModularRandom) {
    Gen g(12);
    for (long m : {12L, 8L, 7L}) {
        for (int t = 0; t < 200; ++t) {
            std::size_t r = static_cast<std::size_t>(g.uni(1, 4)), c = static_cast<std::size_t>(g.uni(1, 4));
            Matrix<Integer> a = g.zmat(r, c, 20);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j) a(i, j) = floor_mod(a(i, j), m);
            Engine e = m == 7 ? Engine::prime_field(7) : Engine::modular(m);
            auto s = smith_reduce<Z>(e, a);
            auto d = multiply<Z>(multiply<Z>(s.left, a), s.right);
            for (std::size_t i = 0; i < d.rows(); ++i)
                for (std::size_t j = 0; j < d.cols(); ++j) d(i, j) = floor_mod(d(i, j), m);
            ASSERT_EQ(d, s.diagonal);
            ASSERT_TRUE(is_diagonal<Z>(d));
            EXPECT_EQ(gcd(laplace_det<Z>(s.left), Integer(m)), 1);
            EXPECT_EQ(gcd(laplace_det<Z>(s.right), Integer(m)), 1);
        }
    }
}

TEST(SmithProperty, ValuationRandom) {
    Gen g(13);
    for (int t = 0; t < 200; ++t) {
        std::size_t n = static_cast<std::size_t>(g.uni(1, 5));
        std::size_t c = t % 3 == 0 ? static_cast<std::size_t>(g.uni(1, 5)) : n;
        auto a = g.vmat(n, c);
        auto s = smith_reduce<V>(Engine::valuation(), a);
        ASSERT_EQ(multiply<V>(multiply<V>(s.left, a), s.right), s.diagonal);
        ASSERT_TRUE(is_diagonal<V>(s.diagonal));
        EXPECT_EQ((laplace_det<V>(s.left)).valuation(), 0);
        EXPECT_EQ((laplace_det<V>(s.right)).valuation(), 0);
        for (std::size_t i = 0; i + 1 < s.invariants.size(); ++i)
            EXPECT_LE((s.invariants[i]).valuation(), s.invariants[i + 1].valuation());
        if (n == c) {
            auto det = laplace_det<V>(a);
            if (!det.is_zero()) {
                Rational sum = 0;
                for (auto& d : s.invariants) sum += d.valuation();
                EXPECT_EQ(sum, det.valuation());
            }
        }
        Matrix<ValElement> rev(0, c);
        for (std::size_t i = n; i-- > 0;) rev.append_row(a.row(i));
        auto s2 = smith_reduce<V>(Engine::valuation(), rev);
        ASSERT_EQ(s.invariants.size(), s2.invariants.size());
        for (std::size_t i = 0; i < s.invariants.size(); ++i) EXPECT_EQ((s.invariants[i]).valuation(), s2.invariants[i].valuation());
    }
}
