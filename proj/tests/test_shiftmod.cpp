#include <gtest/gtest.h>

#include <entl/oracle.hpp>

#include "support.hpp"

using namespace entl;
using namespace entl::testing;

namespace {

LengthValue q(long a, long b = 1) { return LengthValue::rational(make_rational(a, b)); }

template <class R>
EndoSystem<R> sys(const FamilySystem<R>& fs, LengthId l) {
    return EndoSystem<R>::family(fs, l);
}

template <class R>
SeedArg<R> at_grade(long i) {
    return SeedArg<R>(Seed<R>::component({i, 0}));
}

} // namespace

TEST(Bernoulli, Constructors) {
    auto fs = bernoulli(*zmod(6));
    EXPECT_EQ(fs.family.kind(), FamilyKind::Bernoulli);
    EXPECT_EQ(fs.family.index(), IndexKind::Nat);
    ASSERT_NE(fs.family.constant_tail(), nullptr);
    EXPECT_EQ(length(LengthId::LogCard, fs.family.component({17, 0})), LengthValue::log_of(6));
    EXPECT_EQ(fs.endo.forward_width(), 1);
    EXPECT_EQ(fs.endo.backward_width(), 0);
    validate_endo(fs.family, fs.endo);

    auto zero = bernoulli(FPModule<Z>::free(Engine::integers(), 0));
    auto r = entropy(sys(zero, LengthId::Rank), 16);
    ASSERT_TRUE(r.exact);
    EXPECT_TRUE(r.exact->is_zero());

    auto free = bernoulli(FPModule<Z>::free(Engine::integers(), 1));
    auto rr = entropy(sys(free, LengthId::Rank), 16);
    ASSERT_TRUE(rr.exact);
    EXPECT_EQ(*rr.exact, q(1));
    auto a = alpha_seq(sys(free, LengthId::Rank), at_grade<Z>(0), 8);
    for (auto& v : a.alpha) EXPECT_EQ(v, q(1));
}

TEST(BernoulliSigma, Components) {
    auto fs = bernoulli_sigma("1 + 1/n");
    EXPECT_EQ(fs.family.first(), 1);
    for (long n = 1; n <= 6; ++n)
        EXPECT_EQ(length(LengthId::Lv, fs.family.component({n, 0})), q(n + 1, n));
    EXPECT_EQ(fs.family.component_sup(LengthId::Lv), q(2));

    auto flat = bernoulli_sigma("2");
    auto r = entropy(sys(flat, LengthId::Lv), 16);
    ASSERT_TRUE(r.exact);
    EXPECT_EQ(*r.exact, q(2));

    auto harmonic = bernoulli_sigma("1/n");
    EXPECT_EQ(length(LengthId::Lv, harmonic.family.component({4, 0})), q(1, 4));
}

TEST(BernoulliSigma, RejectsDescendingChains) {
    try {
        bernoulli_sigma("n");
        FAIL() << "increasing cuts accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotAscending);
    }
    try {
        bernoulli_sigma({Rational(1), Rational(2)}, CutSequence::parse("2", 3), 1);
        FAIL() << "increasing prefix accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotAscending);
    }
    // A prefix may sit above the tail.
    EXPECT_NO_THROW(bernoulli_sigma({Rational(5), Rational(3)}, CutSequence::parse("1 + 1/n", 3), 1));
}

TEST(TwoSided, Constructors) {
    auto fs = two_sided(*zmod(3, Engine::modular(3)));
    EXPECT_EQ(fs.family.index(), IndexKind::Int);
    EXPECT_EQ(length(LengthId::LogCard, fs.family.component({-5, 0})), LengthValue::log_of(3));
    auto rec = recognize(fs.family, fs.endo);
    ASSERT_TRUE(rec);
    EXPECT_EQ(rec->kind, FamilyKind::TwoSided);
    auto h = hyperkernel_reduce(sys(fs, LengthId::LogCard), 16);
    EXPECT_TRUE(h.kernel_length.is_zero());

    auto zero = two_sided(FPModule<Z>::free(Engine::modular(3), 0));
    auto r = entropy(sys(zero, LengthId::LogCard), 8);
    ASSERT_TRUE(r.exact);
    EXPECT_TRUE(r.exact->is_zero());
}

TEST(Truncation, Examples) {
    auto fs = bernoulli(*zmod(2, Engine::modular(2)));
    auto w = window_range(fs.family, 0, 4);
    EXPECT_EQ(w.module->generators(), 5u);
    EXPECT_EQ(length(LengthId::LogCard, *w.module), lv_scale(LengthValue::log_of(2), 5));

    auto sg = bernoulli_sigma("1 + 1/n");
    auto ws = window_range(sg.family, 1, 3);
    EXPECT_EQ(length(LengthId::Lv, *ws.module), q(29, 6));
    // Grades below the index set are skipped.
    EXPECT_EQ(window_range(sg.family, -2, 1).positions.size(), 1u);

    auto [lo, hi] = window_bounds(fs.family, {&fs.endo}, {0, 0}, {0, 0}, 3);
    EXPECT_EQ(lo.i, 0);
    EXPECT_EQ(hi.i, 3);
    EXPECT_TRUE(w.covers(hi) && w.covers(lo));
}

TEST(Truncation, WindowTooSmall) {
    auto fs = bernoulli(*zmod(2, Engine::modular(2)));
    auto w = window_range(fs.family, 0, 2);
    try {
        w.embed({5, 0}, std::vector<Integer>{1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::WindowTooSmall);
    }
    EXPECT_THROW(w.component_rows({3, 0}), Error);
}

TEST(Truncation, EndoAgreesInsideTheWindow) {
    auto fs = bernoulli(*zmod(4, Engine::modular(4)));
    auto w = window_range(fs.family, 0, 3);
    auto phi = truncate_endo(w, fs.family, fs.endo);
    auto img = phi.apply(w.embed({1, 0}, std::vector<Integer>{3}));
    EXPECT_EQ(img, w.embed({2, 0}, std::vector<Integer>{3}));
    // The top grade's image leaves the window and is dropped.
    EXPECT_TRUE(w.module->is_zero_element(phi.apply(w.embed({3, 0}, std::vector<Integer>{1}))));
}

TEST(ClosedForm, Examples) {
    auto b4 = entropy(sys(bernoulli(*zmod(4, Engine::modular(4))), LengthId::LogCard), 32);
    ASSERT_TRUE(b4.exact);
    EXPECT_EQ(*b4.exact, LengthValue::log_of(4));
    EXPECT_EQ(b4.certificate, Certificate::ClosedForm);

    auto s1 = entropy(sys(bernoulli_sigma("1 + 1/n"), LengthId::Lv), 32);
    ASSERT_TRUE(s1.exact);
    EXPECT_EQ(*s1.exact, q(1));

    auto harmonic = sys(bernoulli_sigma("1/n"), LengthId::Lv);
    auto s0 = entropy(harmonic, 32);
    ASSERT_TRUE(s0.exact);
    EXPECT_TRUE(s0.exact->is_zero());
    auto a = alpha_seq(harmonic, at_grade<V>(1), 63);
    ASSERT_EQ(a.lengths.size(), 64u);
    Rational h64 = 0;
    for (long k = 1; k <= 64; ++k) h64 += make_rational(1, k);
    EXPECT_EQ(a.lengths.back(), LengthValue::rational(h64));
    EXPECT_GT(h64, 4);
}

TEST(ClosedForm, NotRecognizedFallsBackToBounds) {
    // Shift plus a backward band: not a Bernoulli shape.
    auto base = bernoulli(*zmod(2, Engine::modular(2)));
    auto endo = base.endo;
    endo.bands.push_back(Band<Z>{{-1, 0}, {Matrix<Integer>{{0}}}, {Matrix<Integer>{{1}}}});
    validate_endo(base.family, endo);
    EXPECT_FALSE(recognize(base.family, endo));
    auto r = entropy(sys(FamilySystem<Z>{base.family, endo}, LengthId::LogCard), 12);
    EXPECT_FALSE(r.is_exact());
    EXPECT_EQ(r.certificate, Certificate::BoundsOnly);
    EXPECT_TRUE(lv_compare(r.lower, r.upper) <= 0);
    EXPECT_EQ(r.upper, lv_scale(LengthValue::log_of(2), 2));
}

TEST(ShiftProperty, TruncationMatchesClosedFormForBernoulli) {
    std::vector<std::pair<EndoSystem<Z>, LengthValue>> cases;
    for (long m : {2L, 3L, 6L, 12L}) {
        auto e = Engine::modular(m);
        cases.push_back({sys(bernoulli(*zmod(m, e)), LengthId::LogCard), LengthValue::log_of(m)});
    }
    cases.push_back({sys(bernoulli(FPModule<Z>::free(Engine::modular(2), 3)), LengthId::LogCard), LengthValue::log_of(8)});
    cases.push_back({sys(bernoulli(FPModule<Z>::free(Engine::prime_field(5), 2)), LengthId::Dim), q(2)});
    for (auto& [s, expected] : cases) {
        auto a = alpha_seq(s, at_grade<Z>(0), 32);
        ASSERT_EQ(a.alpha.size(), 32u);
        for (auto& v : a.alpha) EXPECT_EQ(v, expected);
        EXPECT_EQ(*entropy(s, 32).exact, expected);
    }
    auto rv = sys(bernoulli(*rmod(make_rational(3, 2))), LengthId::Lv);
    for (auto& v : alpha_seq(rv, at_grade<V>(0), 32).alpha) EXPECT_EQ(v, q(3, 2));
}

TEST(ShiftProperty, TruncationMatchesClosedFormForSigma) {
    std::mt19937_64 rng(5);
    std::vector<std::string> rules = {"1 + 1/n", "1/n", "2", "3/2 + 2/(n + 1)"};
    for (int k = 0; k < 6; ++k) rules.push_back(oracle::gen_cut_rule(rng));
    for (auto& rule : rules) {
        auto fs = bernoulli_sigma(rule);
        auto cs = *fs.family.cut_tail();
        auto a = alpha_seq(sys(fs, LengthId::Lv), at_grade<V>(1), 32);
        for (long n = 1; n <= 32; ++n) EXPECT_EQ(a.alpha[n - 1], LengthValue::rational(cs.at(n + 1))) << rule << " n=" << n;
        auto r = entropy(sys(fs, LengthId::Lv), 32);
        ASSERT_TRUE(r.exact) << rule;
        EXPECT_EQ(*r.exact, LengthValue::rational(cs.limit())) << rule;
    }
}

TEST(ShiftProperty, SupportConfinement) {
    auto base = bernoulli(*zmod(3, Engine::modular(3)));
    auto wide = base.endo;
    wide.bands.push_back(Band<Z>{{-1, 0}, {Matrix<Integer>{{0}}}, {Matrix<Integer>{{1}}}});
    auto two = two_sided(*zmod(2, Engine::modular(2)));
    struct Case {
        FamilySystem<Z> fs;
        long fwd, back;
    };
    std::vector<Case> cases = {{base, 1, 0}, {{base.family, wide}, 1, 1}, {two, 1, 0}};
    for (auto& c : cases)
        for (long s : {2L, 5L})
            for (std::size_t n : {1u, 4u, 9u}) {
                auto es = sys(c.fs, LengthId::LogCard);
                auto& t = access_tracker();
                t.reset();
                alpha_seq(es, at_grade<Z>(s), n);
                t.active = false;
                EXPECT_LE(t.max_i, s + static_cast<long>(n) * c.fwd);
                long floor_i = c.fs.family.index() == IndexKind::Nat ? std::max(0L, s - static_cast<long>(n) * c.back)
                                                                     : s - static_cast<long>(n) * c.back;
                EXPECT_GE(t.min_i, floor_i);
            }
}

TEST(ShiftProperty, BernoulliIsExact) {
    Gen g(77);
    for (int t = 0; t < 40; ++t) {
        const long m = 12;
        auto e = Engine::modular(m);
        const std::size_t n = static_cast<std::size_t>(g.uni(1, 2));
        auto mod = share(FPModule<Z>(e, n, g.zmat(static_cast<std::size_t>(g.uni(0, 1)), n, 11)));
        Matrix<Integer> gens(0, n);
        std::vector<Integer> v;
        for (std::size_t j = 0; j < n; ++j) v.push_back(g.z(11));
        gens.append_row(v);
        auto s = Submodule<Z>::generated(mod, gens);
        auto sm = as_module(s).first;
        auto qm = quotient(*mod, s);
        auto es = entropy(sys(bernoulli(sm), LengthId::LogCard), 8);
        auto em = entropy(sys(bernoulli(*mod), LengthId::LogCard), 8);
        auto eq = entropy(sys(bernoulli(qm), LengthId::LogCard), 8);
        ASSERT_TRUE(es.exact && em.exact && eq.exact);
        EXPECT_EQ(*em.exact, lv_add(*es.exact, *eq.exact));
    }
}
