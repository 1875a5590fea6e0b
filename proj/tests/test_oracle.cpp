#include <gtest/gtest.h>

#include <entl/oracle.hpp>

#include "support.hpp"

using namespace entl;
using namespace entl::testing;

namespace {

LengthValue lg(long n) { return LengthValue::log_of(Integer(n)); }

oracle::InstanceSpec spec_for(std::uint64_t seed) {
    oracle::InstanceSpec s;
    s.seed = seed;
    s.engine = seed % 4 == 0 ? EngineKind::Integers : EngineKind::Modular;
    static const oracle::i64 moduli[] = {12, 8, 6, 9, 2, 30};
    s.modulus = moduli[seed % 6];
    s.max_gens = seed % 3 == 0 ? 3 : 4;
    return s;
}

oracle::Mat seed_rows(const oracle::Instance& in) { return in.seed; }

} // namespace

TEST(Count, Examples) {
    EXPECT_EQ(oracle::count_length(*zmod(6)), lg(6));
    EXPECT_TRUE(oracle::count_length(FPModule<Z>::free(Engine::integers(), 1)).is_infinite());
    EXPECT_EQ(oracle::count_length(FPModule<Z>::free(Engine::integers(), 0)), lg(1));

    const Engine e4 = Engine::modular(Integer(4));
    FPModule<Z> m(e4, 2, rows_of<Z>({{2, 0}}, 2));
    EXPECT_EQ(oracle::count_length(m), lg(8));

    FPModule<Z> f(Engine::prime_field(Integer(5)), 2, Matrix<Integer>(0, 2));
    EXPECT_EQ(oracle::count_length(f), lg(25));

    // Z^2 / <(2, 4), (6, 3)> has order |det| = 18.
    FPModule<Z> d(Engine::integers(), 2, rows_of<Z>({{2, 4}, {6, 3}}, 2));
    EXPECT_EQ(oracle::count_length(d), lg(18));
}

TEST(Count, SpanClosure) {
    oracle::Span s(6, 2);
    s.add_generators({{2, 0}});
    EXPECT_EQ(s.size(), 3u);
    s.add_generators({{0, 3}});
    EXPECT_EQ(s.size(), 6u);
    EXPECT_TRUE(s.contains({4, 3}));
    EXPECT_FALSE(s.contains({1, 0}));
    EXPECT_EQ(s.decode(s.encode({5, 4})), (oracle::Vec{5, 4}));
}

TEST(Agreement, ModuleLengths) {
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 400; ++seed) {
        auto in = oracle::gen_system(spec_for(seed));
        auto m = in.module();
        auto sub = in.seed_submodule(m);
        auto q = quotient(*m, sub);
        LengthValue cm, cq;
        try {
            cm = oracle::count_length(*m);
            cq = oracle::count_length(q);
        } catch (const Error& e) {
            ASSERT_EQ(e.kind(), ErrorKind::TooLarge);
            continue;
        }
        EXPECT_EQ(length(LengthId::LogCard, *m), cm) << in.serialize();
        EXPECT_EQ(length(LengthId::LogCard, q), cq) << in.serialize();
        ++checked;
    }
    EXPECT_GE(checked, 100);
}

TEST(Agreement, Trajectories) {
    int checked = 0;
    for (std::uint64_t seed = 1; checked < 150; ++seed) {
        auto spec = spec_for(seed);
        spec.engine = EngineKind::Modular;
        auto in = oracle::gen_system(spec);
        auto sys = in.system();
        SeedArg<Z> s = in.seed_submodule(sys.module());
        auto a = alpha_seq(sys, s, 6);
        for (std::size_t n = 1; n <= 7; ++n) {
            auto brute = oracle::brute_trajectory(in.relations, in.phi, seed_rows(in), in.gens(), in.modulus, n);
            auto [t, w] = trajectory(sys, s, n);
            ASSERT_TRUE(oracle::matches(brute, t)) << in.serialize() << " n=" << n;
            // |T_n| as a subgroup of the quotient: |lift| / |relation lattice|.
            auto rel = oracle::brute_trajectory(in.relations, in.phi, {}, in.gens(), in.modulus, 0);
            long size = static_cast<long>(brute.size() / rel.size());
            EXPECT_EQ(a.lengths[n - 1], lg(size)) << in.serialize() << " n=" << n;
        }
        ++checked;
    }
}

TEST(Agreement, SmithAgainstCounting) {
    Gen g(5);
    int checked = 0;
    for (int t = 0; t < 200; ++t) {
        std::size_t r = static_cast<std::size_t>(g.uni(0, 4)), c = static_cast<std::size_t>(g.uni(1, 3));
        auto a = g.zmat(r, c, 6);
        FPModule<Z> m(Engine::integers(), c, a);
        auto sf = smith_reduce<Z>(Engine::integers(), a);
        LengthValue counted;
        try {
            counted = oracle::count_length(m);
        } catch (const Error& e) {
            ASSERT_EQ(e.kind(), ErrorKind::TooLarge);
            continue;
        }
        ++checked;
        if (counted.is_infinite()) {
            EXPECT_TRUE(length(LengthId::LogCard, m).is_infinite());
            continue;
        }
        Integer prod = 1;
        for (auto& d : sf.invariants) prod *= d;
        EXPECT_EQ(LengthValue::log_of(abs(prod)), counted);
    }
    EXPECT_GE(checked, 100);
}

TEST(Determinism, Generators) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        auto a = oracle::gen_system(spec_for(seed)), b = oracle::gen_system(spec_for(seed));
        EXPECT_EQ(a.serialize(), b.serialize());
    }
    std::mt19937_64 r1(3), r2(3);
    for (int t = 0; t < 20; ++t) EXPECT_EQ(oracle::gen_cut_rule(r1), oracle::gen_cut_rule(r2));
    auto n1 = oracle::gen_bernoulli_nilpotent(9), n2 = oracle::gen_bernoulli_nilpotent(9);
    EXPECT_EQ(n1.endo.bands.size(), n2.endo.bands.size());
    for (std::size_t i = 0; i < n1.endo.bands.size(); ++i) {
        EXPECT_TRUE(n1.endo.bands[i].prefix == n2.endo.bands[i].prefix);
        EXPECT_TRUE(n1.endo.bands[i].periodic == n2.endo.bands[i].periodic);
    }
}

TEST(Determinism, Results) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto at = oracle::gen_at_bernoulli(seed);
        auto s1 = EndoSystem<Z>::family(at.amb, LengthId::LogCard);
        auto s2 = EndoSystem<Z>::family(oracle::gen_at_bernoulli(seed).amb, LengthId::LogCard);
        auto r1 = entropy(s1, 16), r2 = entropy(s2, 16);
        EXPECT_EQ(r1.lower, r2.lower);
        EXPECT_EQ(r1.upper, r2.upper);
        EXPECT_EQ(r1.certificate, r2.certificate);
        EXPECT_EQ(r1.steps_used, r2.steps_used);
    }
}
