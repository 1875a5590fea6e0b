#include <gtest/gtest.h>

#include "support.hpp"

using namespace entl;
using namespace entl::testing;

namespace {

LengthValue q(long a, long b = 1) { return LengthValue::rational(make_rational(a, b)); }

template <class R>
Submodule<R> gen(const ModPtr<R>& m, std::initializer_list<std::vector<typename R::Element>> rows) {
    Matrix<typename R::Element> g(0, m->generators());
    for (auto& r : rows) g.append_row(r);
    return Submodule<R>::generated(m, g);
}

} // namespace

TEST(FPModule, LengthExamples) {
    FPModule<Z> m(Engine::integers(), 2, Matrix<Integer>{{2, 1}, {0, 3}});
    EXPECT_EQ(length(LengthId::LogCard, m), LengthValue::log_of(6));
    FPModule<V> d(Engine::valuation(), 2, Matrix<ValElement>{{xq(make_rational(1, 3)), {}}, {{}, xq(make_rational(1, 2))}});
    EXPECT_EQ(length(LengthId::Lv, d), q(5, 6));
    EXPECT_EQ(length(LengthId::Rank, FPModule<Z>::free(Engine::integers(), 2)), q(2));
    EXPECT_THROW(length(LengthId::Lv, m), Error);
}

TEST(FPModule, ZeroModuleAndEmptyGenerators) {
    auto z = share(FPModule<Z>::free(Engine::integers(), 0));
    EXPECT_EQ(length(LengthId::Rank, *z), q(0));
    auto s = Submodule<Z>::whole(z);
    EXPECT_TRUE(s.is_zero());
    EXPECT_EQ(s.generators().rows(), 0u);
    auto f = Morphism<Z>::zero(z, z);
    EXPECT_TRUE(kernel(f).is_zero());
}

TEST(Submodule, SumExamples) {
    auto z2 = share(FPModule<Z>::free(Engine::integers(), 2));
    auto a = gen(z2, {{2, 0}}), b = gen(z2, {{0, 3}});
    EXPECT_EQ(sub_sum(a, a), a);
    auto s = sub_sum(a, b);
    EXPECT_EQ(s, gen(z2, {{0, 3}, {2, 0}}));
    EXPECT_EQ(s.lattice().basis, (Matrix<Integer>{{2, 0}, {0, 3}}));

    auto r = rmod(2);
    auto half = gen(r, {{xq(make_rational(1, 2))}}), third = gen(r, {{xq(make_rational(1, 3))}});
    EXPECT_EQ(sub_sum(half, third), third);
}

TEST(Submodule, SumAmbientMismatch) {
    auto a = Submodule<Z>::whole(zmod(4)), b = Submodule<Z>::whole(zmod(6));
    EXPECT_THROW(sub_sum(a, b), Error);
}

TEST(Morphism, ImageExamples) {
    auto m = zmod(4);
    auto whole = Submodule<Z>::whole(m);
    EXPECT_EQ(image(Morphism<Z>::identity(m), whole), whole);
    auto im = image(Morphism<Z>::scalar(m, 2), whole);
    EXPECT_EQ(im, gen(m, {{2}}));
    EXPECT_EQ(length(LengthId::LogCard, im), LengthValue::log_of(2));

    auto f2 = share(FPModule<Z>::free(Engine::modular(2), 3));
    Morphism<Z> shift(f2, f2, Matrix<Integer>{{0, 1, 0}, {0, 0, 1}, {0, 0, 0}});
    EXPECT_EQ(image(shift, gen(f2, {{1, 0, 0}})), gen(f2, {{0, 1, 0}}));
}

TEST(Morphism, KernelExamples) {
    auto m = zmod(4);
    EXPECT_EQ(kernel(Morphism<Z>::scalar(m, 2)), gen(m, {{2}}));
    auto r = rmod(make_rational(3, 2));
    auto k = kernel(Morphism<V>::scalar(r, xq(1)));
    EXPECT_EQ(k, gen(r, {{xq(make_rational(1, 2))}}));
    EXPECT_TRUE(kernel(Morphism<Z>::scalar(zmod(7), 3)).is_zero());
}

TEST(Morphism, RejectsMapsThatBreakRelations) {
    auto src = zmod(4), tgt = share(FPModule<Z>::free(Engine::integers(), 1));
    EXPECT_THROW(Morphism<Z>(src, tgt, Matrix<Integer>{{1}}), Error);
}

TEST(Quotient, Examples) {
    auto m = zmod(6);
    auto q0 = quotient(*m, Submodule<Z>::zero(m));
    EXPECT_EQ(length(LengthId::LogCard, q0), length(LengthId::LogCard, *m));
    auto zz = share(FPModule<Z>::free(Engine::integers(), 1));
    auto q6 = quotient(*zz, gen(zz, {{6}}));
    EXPECT_EQ(length(LengthId::LogCard, q6), LengthValue::log_of(6));
    auto r = rmod(2);
    auto qr = quotient(*r, gen(r, {{xq(make_rational(1, 3))}}));
    EXPECT_EQ(length(LengthId::Lv, qr), q(1, 3));
}

TEST(Submodule, CompareAndMembership) {
    auto m = zmod(4);
    auto s = gen(m, {{2}}), one = gen(m, {{1}});
    EXPECT_EQ(sub_compare(s, s), SubOrder::Equal);
    EXPECT_EQ(sub_compare(s, one), SubOrder::Less);
    EXPECT_EQ(sub_compare(one, s), SubOrder::Greater);
    EXPECT_TRUE(membership<Z>(std::vector<Integer>{6}, s));
    EXPECT_FALSE(membership<Z>(std::vector<Integer>{3}, s));

    auto r = rmod(2);
    auto h = gen(r, {{xq(make_rational(1, 2))}}), t = gen(r, {{xq(make_rational(1, 3))}});
    EXPECT_EQ(sub_compare(h, t), SubOrder::Less);

    auto z2 = share(FPModule<Z>::free(Engine::integers(), 2));
    EXPECT_EQ(sub_compare(gen(z2, {{1, 0}}), gen(z2, {{0, 1}})), SubOrder::Incomparable);
}

TEST(Annihilator, Examples) {
    auto m = zmod(6);
    EXPECT_EQ(annihilator<Z>(*m, std::vector<Integer>{1}).gen, 6);
    auto r = rmod(make_rational(3, 2));
    EXPECT_EQ(annihilator<V>(*r, std::vector<ValElement>{xq(make_rational(1, 2))}), IdealCut::cut(1));
    auto f = FPModule<Z>::free(Engine::integers(), 2);
    EXPECT_EQ(annihilator<Z>(f, std::vector<Integer>{1, 3}).gen, 0);
}

TEST(LocalFiniteness, Examples) {
    EXPECT_FALSE(is_locally_L_finite(LengthId::LogCard, FPModule<Z>::free(Engine::integers(), 1)));
    EXPECT_TRUE(is_locally_L_finite(LengthId::LogCard, *zmod(6, Engine::modular(6))));
    EXPECT_TRUE(is_locally_L_finite(LengthId::Rank, FPModule<Z>::free(Engine::integers(), 1)));
    EXPECT_THROW(is_locally_L_finite(LengthId::Dim, FPModule<Z>::free(Engine::integers(), 1)), Error);
}

TEST(Torsion, SaturationOfRelations) {
    FPModule<Z> m(Engine::integers(), 2, Matrix<Integer>{{2, 0}});
    auto p = share(m);
    auto t = torsion_submodule(LengthId::LogCard, p);
    EXPECT_EQ(length(LengthId::LogCard, t), LengthValue::log_of(2));
    EXPECT_EQ(torsion_length(LengthId::LogCard, m), LengthValue::log_of(2));
}

namespace {

template <class R>
struct RandomModule {
    ModPtr<R> m;
    LengthId l;
};

RandomModule<Z> random_int_module(Gen& g, int which) {
    const std::size_t n = static_cast<std::size_t>(g.uni(1, 3));
    switch (which) {
    case 0: {
        auto rel = g.zmat(static_cast<std::size_t>(g.uni(0, 3)), n, 6);
        return {share(FPModule<Z>(Engine::integers(), n, rel)), LengthId::Rank};
    }
    case 1: {
        auto rel = g.zmat(static_cast<std::size_t>(g.uni(0, 3)), n, 12);
        return {share(FPModule<Z>(Engine::modular(12), n, rel)), LengthId::LogCard};
    }
    default: {
        auto rel = g.zmat(static_cast<std::size_t>(g.uni(0, 2)), n, 4);
        return {share(FPModule<Z>(Engine::prime_field(5), n, rel)), LengthId::Dim};
    }
    }
}

RandomModule<V> random_val_module(Gen& g) {
    const std::size_t n = static_cast<std::size_t>(g.uni(1, 3));
    auto rel = g.vmat(static_cast<std::size_t>(g.uni(1, 3)), n);
    return {share(FPModule<V>(Engine::valuation(), n, rel)), LengthId::Lv};
}

template <class R>
Matrix<typename R::Element> random_elements(Gen& g, std::size_t n) {
    Matrix<typename R::Element> out(0, n);
    const long k = g.uni(1, 2);
    for (long i = 0; i < k; ++i) {
        std::vector<typename R::Element> v;
        for (std::size_t j = 0; j < n; ++j) {
            if constexpr (std::is_same_v<R, V>) v.push_back(g.val());
            else v.push_back(g.z(5));
        }
        out.append_row(v);
    }
    return out;
}

template <class R>
void check_triple(const RandomModule<R>& rm, const Submodule<R>& s) {
    auto lm = length(rm.l, *rm.m);
    auto ls = length(rm.l, s);
    auto [as_mod, inc] = as_module(s);
    EXPECT_EQ(length(rm.l, as_mod), ls);
    auto lq = length(rm.l, quotient(*rm.m, s));
    EXPECT_EQ(lm, lv_add(ls, lq)) << rm.m->to_string();
    EXPECT_TRUE(lv_compare(ls, lm) <= 0);
}

} // namespace

TEST(FPModuleProperty, AdditivityAndMonotonicity) {
    Gen g(301);
    for (int t = 0; t < 300; ++t) {
        int which = t % 4;
        if (which < 3) {
            auto rm = random_int_module(g, which);
            check_triple(rm, Submodule<Z>::generated(rm.m, random_elements<Z>(g, rm.m->generators())));
        } else {
            auto rm = random_val_module(g);
            check_triple(rm, Submodule<V>::generated(rm.m, random_elements<V>(g, rm.m->generators())));
        }
    }
}

TEST(FPModuleProperty, CanonicalForms) {
    Gen g(302);
    for (int t = 0; t < 200; ++t) {
        auto rm = random_int_module(g, t % 3);
        const std::size_t n = rm.m->generators();
        auto a = random_elements<Z>(g, n);
        // Same span written differently: add the first row to the others, scale by a unit, reverse.
        Matrix<Integer> b(0, n);
        for (std::size_t i = a.rows(); i-- > 0;) {
            std::vector<Integer> r(a.row(i).begin(), a.row(i).end());
            if (i > 0)
                for (std::size_t j = 0; j < n; ++j) r[j] += 3 * a(0, j);
            else
                for (auto& x : r) x = -x;
            b.append_row(r);
        }
        auto s1 = Submodule<Z>::generated(rm.m, a), s2 = Submodule<Z>::generated(rm.m, b);
        EXPECT_EQ(sub_compare(s1, s2), SubOrder::Equal);
        EXPECT_EQ(s1.lattice().basis, s2.lattice().basis);
        for (std::size_t i = 0; i < a.rows(); ++i) EXPECT_TRUE(membership<Z>(a.row(i), s1));
        auto gens = s1.generators();
        for (std::size_t i = 0; i < gens.rows(); ++i) EXPECT_TRUE(membership<Z>(gens.row(i), s1));
    }
    for (int t = 0; t < 60; ++t) {
        auto rm = random_val_module(g);
        const std::size_t n = rm.m->generators();
        auto a = random_elements<V>(g, n);
        Matrix<ValElement> b(0, n);
        for (std::size_t i = a.rows(); i-- > 0;) {
            std::vector<ValElement> r(a.row(i).begin(), a.row(i).end());
            // Multiply by the unit 1 + x^{1/2}.
            for (auto& x : r) x = x * (ValElement::one() + xq(make_rational(1, 2)));
            b.append_row(r);
        }
        auto s1 = Submodule<V>::generated(rm.m, a), s2 = Submodule<V>::generated(rm.m, b);
        EXPECT_EQ(sub_compare(s1, s2), SubOrder::Equal);
        EXPECT_TRUE(s1 == s2);
    }
}

TEST(FPModuleProperty, ChainLengthsClimbToTheModule) {
    Gen g(303);
    for (int t = 0; t < 100; ++t) {
        auto rm = random_int_module(g, t % 3);
        const std::size_t n = rm.m->generators();
        auto s = Submodule<Z>::zero(rm.m);
        LengthValue prev = length(rm.l, s);
        EXPECT_TRUE(prev.is_zero());
        for (std::size_t i = 0; i < n; ++i) {
            Matrix<Integer> e(0, n);
            e.append_row(rm.m->basis_vector(i));
            s = sub_sum(s, Submodule<Z>::generated(rm.m, e));
            auto cur = length(rm.l, s);
            EXPECT_TRUE(lv_compare(prev, cur) <= 0);
            prev = cur;
        }
        EXPECT_EQ(prev, length(rm.l, *rm.m));
    }
}
