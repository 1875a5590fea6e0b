#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace entl;
using namespace entl::testing;

namespace {

LengthValue lg(long p, const Rational& c = 1) { return lv_scale(LengthValue::log_of(Integer(p)), c); }
LengthValue q(long a, long b = 1) { return LengthValue::rational(Rational(a, b)); }

} // namespace

TEST(Rational, ParsesAndCanonicalizes) {
    EXPECT_EQ(to_string(parse_rational("6/4")), "3/2");
    EXPECT_EQ(to_string(parse_rational("-0/7")), "0");
    EXPECT_EQ(parse_rational("3").get_den(), 1);
    EXPECT_EQ(to_string(parse_rational("2/-6")), "-1/3");
    EXPECT_THROW(parse_rational("1/0"), Error);
    EXPECT_THROW(parse_rational("abc"), Error);
}

TEST(LengthValue, AddExamples) {
    EXPECT_EQ(lv_add(q(1, 2), q(1, 3)), q(5, 6));
    EXPECT_EQ(lv_add(lg(2), lg(3)), LengthValue::log_of(6));
    EXPECT_TRUE(lv_add(LengthValue::infinity(), q(1)).is_infinite());
}

TEST(LengthValue, LogOfFactorsComposites) {
    EXPECT_EQ(LengthValue::log_of(12), lv_add(lg(2, 2), lg(3)));
    EXPECT_EQ(LengthValue::log_of(1), LengthValue::zero());
    EXPECT_EQ(LengthValue::log_of(6).to_string(), "log(2)+log(3)");
}

TEST(LengthValue, CompareExamples) {
    EXPECT_EQ(lv_compare(LengthValue::log_of(6), q(7, 4)), std::strong_ordering::greater);
    EXPECT_EQ(lv_compare(lg(2, 2), lg(2, 2)), std::strong_ordering::equal);
    EXPECT_EQ(lv_compare(q(5, 6), LengthValue::infinity()), std::strong_ordering::less);
    // log 4 = 2 log 2 in canonical form.
    EXPECT_EQ(lv_compare(LengthValue::log_of(4), lg(2, 2)), std::strong_ordering::equal);
    // log 3 vs log 2 + 1/2: 1.0986 < 1.1931
    EXPECT_EQ(lv_compare(lg(3), lv_add(lg(2), q(1, 2))), std::strong_ordering::less);
}

TEST(LengthValue, ScaleExamples) {
    EXPECT_EQ(lv_scale(lg(2, 4), Rational(1, 4)), lg(2));
    EXPECT_EQ(lv_scale(q(3, 2), Rational(1, 3)), q(1, 2));
    EXPECT_TRUE(lv_scale(LengthValue::infinity(), Rational(1, 7)).is_infinite());
}

TEST(LengthValue, Rendering) {
    EXPECT_EQ(q(5, 6).to_string(), "5/6");
    EXPECT_EQ(lv_add(q(5, 6), lg(2, 2)).to_string(), "5/6+2*log(2)");
    EXPECT_EQ(LengthValue::infinity().to_string(), "inf");
    EXPECT_EQ(LengthValue::zero().to_string(), "0");
}

TEST(LengthValue, SubtractionAndNegatives) {
    EXPECT_EQ(lv_sub(LengthValue::log_of(12), lg(3)), lg(2, 2));
    EXPECT_THROW(lv_sub(lg(2), lg(3)), Error);
    EXPECT_TRUE(lv_sub(LengthValue::infinity(), q(3)).is_infinite());
}

TEST(LengthValue, CanonicalFormIdempotent) {
    Gen g(7);
    for (int i = 0; i < 500; ++i) {
        auto a = g.lv();
        if (a.is_infinite()) continue;
        auto [r, logs] = lv_signed_diff(a, LengthValue::zero());
        auto b = LengthValue::from_parts(r, logs);
        EXPECT_EQ(a, b);
        EXPECT_EQ(a.to_string(), b.to_string());
    }
}

TEST(LengthValue, PrecisionBudgetIsReported) {
    // log 2 against a 16-digit rational approximation needs more than 16 bits.
    auto close = LengthValue::rational(parse_rational("6931471805599453/10000000000000000"));
    EXPECT_THROW(lv_compare(lg(2), close, 16), Error);
    EXPECT_EQ(lv_compare(lg(2), close, 256), std::strong_ordering::greater);
}

TEST(LengthValueProperty, TotalOrderOnRandomCorpus) {
    Gen g(2024);
    std::vector<LengthValue> vals;
    for (int i = 0; i < 10000; ++i) vals.push_back(g.lv());
    for (int t = 0; t < 10000; ++t) {
        const auto& a = vals[static_cast<std::size_t>(g.uni(0, 9999))];
        const auto& b = vals[static_cast<std::size_t>(g.uni(0, 9999))];
        const auto& c = vals[static_cast<std::size_t>(g.uni(0, 9999))];
        auto ab = lv_compare(a, b), ba = lv_compare(b, a);
        // antisymmetry
        EXPECT_EQ(ab == std::strong_ordering::less, ba == std::strong_ordering::greater);
        EXPECT_EQ(ab == std::strong_ordering::equal, ba == std::strong_ordering::equal);
        EXPECT_EQ(ab == std::strong_ordering::equal, a == b);
        // transitivity
        if (ab <= 0 && lv_compare(b, c) <= 0) {
            EXPECT_TRUE(lv_compare(a, c) <= 0);
        }
        // order compatibility with addition
        if (ab <= 0) {
            EXPECT_TRUE(lv_compare(lv_add(a, c), lv_add(b, c)) <= 0);
        }
    }
}

TEST(LengthValueProperty, FloatShadowAgrees) {
    Gen g(99);
    for (int t = 0; t < 10000; ++t) {
        auto a = g.lv(), b = g.lv();
        if (a.is_infinite() || b.is_infinite()) continue;
        double da = a.to_double(), db = b.to_double();
        if (std::abs(da - db) <= 1e-9) continue;
        EXPECT_EQ(lv_compare(a, b) < 0, da < db) << a.to_string() << " vs " << b.to_string();
    }
}
