#pragma once

// Brute-force ground truth on small instances. The counting routines below use
// plain int64 vectors and set closure; they share nothing with the echelon and
// Smith code they are meant to check.

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dynamics.hpp"

namespace entl::oracle {

using i64 = std::int64_t;
using Vec = std::vector<i64>;
using Mat = std::vector<Vec>;

inline constexpr i64 kMaxElements = 1'000'000;

inline i64 mod(i64 a, i64 m) {
    i64 r = a % m;
    return r < 0 ? r + m : r;
}

inline i64 to_i64(const Integer& z) {
    require(z.fits_slong_p(), ErrorKind::TooLarge, "entry does not fit in 64 bits");
    return z.get_si();
}

inline Mat to_mat(const Matrix<Integer>& a) {
    Mat out(a.rows(), Vec(a.cols()));
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[i][j] = to_i64(a(i, j));
    return out;
}

/// Subgroup of (Z/q)^g generated by `gens`, as a membership bitmap over base-q codes.
class Span {
public:
    Span(i64 q, std::size_t g) : q_(q), g_(g) {
        i64 total = 1;
        for (std::size_t i = 0; i < g; ++i) {
            require(total <= kMaxElements / q, ErrorKind::TooLarge, "ambient too large to enumerate");
            total *= q;
        }
        seen_.assign(static_cast<std::size_t>(total), 0);
        seen_[0] = 1;
        members_.push_back(0);
    }

    i64 modulus() const { return q_; }
    std::size_t width() const { return g_; }
    std::size_t size() const { return members_.size(); }
    i64 ambient_size() const { return static_cast<i64>(seen_.size()); }

    i64 encode(const Vec& v) const {
        i64 c = 0;
        for (std::size_t i = g_; i-- > 0;) c = c * q_ + mod(v[i], q_);
        return c;
    }
    Vec decode(i64 c) const {
        Vec v(g_);
        for (std::size_t i = 0; i < g_; ++i) {
            v[i] = c % q_;
            c /= q_;
        }
        return v;
    }
    bool contains(const Vec& v) const { return seen_[static_cast<std::size_t>(encode(v))] != 0; }

    /// Closes the set under adding every generator (a finite group is reached).
    void add_generators(const Mat& gens) {
        std::size_t head = 0;
        // Re-scan old members too: new generators combine with everything.
        std::vector<i64> queue = members_;
        while (head < queue.size()) {
            Vec cur = decode(queue[head++]);
            for (auto& gv : gens) {
                Vec nx(g_);
                for (std::size_t i = 0; i < g_; ++i) nx[i] = mod(cur[i] + gv[i], q_);
                i64 c = encode(nx);
                if (!seen_[static_cast<std::size_t>(c)]) {
                    seen_[static_cast<std::size_t>(c)] = 1;
                    members_.push_back(c);
                    queue.push_back(c);
                }
            }
        }
    }

    const std::vector<i64>& members() const { return members_; }

private:
    i64 q_;
    std::size_t g_;
    std::vector<char> seen_;
    std::vector<i64> members_;
};

/// Determinant by cofactor expansion over __int128 (tiny matrices only).
inline __int128 det(const Mat& a) {
    std::size_t n = a.size();
    if (n == 0) return 1;
    if (n == 1) return a[0][0];
    __int128 acc = 0;
    for (std::size_t c = 0; c < n; ++c) {
        Mat minor;
        for (std::size_t r = 1; r < n; ++r) {
            Vec row;
            for (std::size_t k = 0; k < n; ++k)
                if (k != c) row.push_back(a[r][k]);
            minor.push_back(row);
        }
        __int128 t = static_cast<__int128>(a[0][c]) * det(minor);
        acc += (c % 2 == 0) ? t : -t;
    }
    return acc;
}

/// Smallest |nonzero g x g minor| among row subsets, or 0 if the rows have rank < g.
inline i64 some_full_minor(const Mat& rows, std::size_t g) {
    const std::size_t r = rows.size();
    if (r < g) return 0;
    require(r <= 12, ErrorKind::TooLarge, "too many relations to search minors");
    i64 best = 0;
    std::vector<std::size_t> pick(g);
    for (std::size_t i = 0; i < g; ++i) pick[i] = i;
    while (true) {
        Mat sq;
        for (auto k : pick) sq.push_back(rows[k]);
        __int128 d = det(sq);
        if (d < 0) d = -d;
        if (d != 0 && d < static_cast<__int128>(kMaxElements) && (best == 0 || d < best)) best = static_cast<i64>(d);
        std::size_t k = g;
        while (k > 0 && pick[k - 1] == r - g + k - 1) --k;
        if (k == 0) break;
        ++pick[k - 1];
        for (std::size_t t = k; t < g; ++t) pick[t] = pick[t - 1] + 1;
    }
    return best;
}

struct Counted {
    bool infinite = false;
    i64 card = 1;
};

/// |Z^g / rows| (modulus 0) or |(Z/m)^g / rows|, by literal enumeration.
inline Counted count(const Mat& rows, std::size_t g, i64 modulus) {
    Counted out;
    i64 q = modulus;
    if (q == 0) {
        q = some_full_minor(rows, g);
        if (q == 0) {
            out.infinite = true;
            return out;
        }
    }
    if (q == 1 || g == 0) return out;
    Span s(q, g);
    s.add_generators(rows);
    out.card = s.ambient_size() / static_cast<i64>(s.size());
    return out;
}

/// log |M| by enumeration; modules over Z, Z/m or F_p.
inline LengthValue count_length(const FPModule<IntegerRing>& m) {
    const Engine& e = m.engine();
    i64 modulus = e.has_modulus() ? to_i64(e.modulus) : 0;
    // Only the presentation is reused: the relation rows as given.
    auto c = count(to_mat(m.relations().basis), m.generators(), modulus);
    if (c.infinite) return LengthValue::infinity();
    return LengthValue::log_of(Integer(static_cast<long>(c.card)));
}

/// Row-vector times matrix mod q.
inline Vec apply(const Vec& v, const Mat& f, i64 q) {
    Vec out(f.empty() ? v.size() : f[0].size(), 0);
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = mod(out[j] + v[i] * f[i][j], q);
    return out;
}

/// T_n(phi, S) lifted to (Z/m)^g: the subgroup spanned by the relations and
/// phi^i(s) for i < n, by naive closure.
inline Span brute_trajectory(const Mat& relations, const Mat& phi, const Mat& seed, std::size_t g, i64 m, std::size_t n) {
    Span s(m, g);
    s.add_generators(relations);
    Mat frontier = seed;
    for (std::size_t k = 0; k < n; ++k) {
        s.add_generators(frontier);
        for (auto& v : frontier) v = apply(v, phi, m);
    }
    return s;
}

/// Same submodule: every engine basis row is a member and the sizes agree.
inline bool matches(const Span& brute, const Submodule<IntegerRing>& t) {
    const auto& b = t.lattice().basis;
    for (std::size_t i = 0; i < b.rows(); ++i) {
        Vec v(b.cols());
        for (std::size_t j = 0; j < b.cols(); ++j) v[j] = to_i64(b(i, j));
        if (!brute.contains(v)) return false;
    }
    auto c = count(to_mat(b), b.cols(), brute.modulus());
    return brute.ambient_size() / c.card == static_cast<i64>(brute.size());
}

// ---- instance generation ----

enum class GenKind { Plain, Bernoulli, Embedding };

struct InstanceSpec {
    std::uint64_t seed = 0;
    EngineKind engine = EngineKind::Modular;
    i64 modulus = 12;
    std::size_t max_gens = 4;
    i64 max_entry = 9;
    i64 max_den = 12;
    GenKind kind = GenKind::Plain;
};

/// Plain data for a random endo of a diagonal-then-scrambled module.
struct Instance {
    EngineKind engine = EngineKind::Modular;
    i64 modulus = 0;     // 0 over Z
    std::vector<i64> d;  // diagonal orders (0 = free)
    Mat relations;       // rows after the basis change
    Mat phi;             // row convention, after the basis change
    Mat seed;

    std::string serialize() const {
        std::ostringstream os;
        auto put = [&](const Mat& a) {
            os << '[';
            for (auto& r : a) {
                os << '[';
                for (auto x : r) os << x << ',';
                os << ']';
            }
            os << ']';
        };
        os << static_cast<int>(engine) << ';' << modulus << ';';
        for (auto x : d) os << x << ',';
        os << ';';
        put(relations);
        put(phi);
        put(seed);
        return os.str();
    }

    Engine engine_value() const {
        return engine == EngineKind::Integers ? Engine::integers() : Engine::modular(Integer(static_cast<long>(modulus)));
    }
    std::size_t gens() const { return d.size(); }

    ModPtr<IntegerRing> module() const {
        Matrix<Integer> rel(0, gens());
        for (auto& r : relations) {
            std::vector<Integer> row(r.begin(), r.end());
            rel.append_row(row);
        }
        return share(FPModule<IntegerRing>(engine_value(), gens(), rel));
    }
    Morphism<IntegerRing> endo(const ModPtr<IntegerRing>& m) const {
        Matrix<Integer> f(gens(), gens());
        for (std::size_t i = 0; i < gens(); ++i)
            for (std::size_t j = 0; j < gens(); ++j) f(i, j) = static_cast<long>(phi[i][j]);
        return Morphism<IntegerRing>(m, m, f);
    }
    EndoSystem<IntegerRing> system(LengthId l = LengthId::LogCard) const {
        auto m = module();
        return EndoSystem<IntegerRing>::fp(endo(m), l);
    }
    Submodule<IntegerRing> seed_submodule(const ModPtr<IntegerRing>& m) const {
        Matrix<Integer> s(0, gens());
        for (auto& r : seed) {
            std::vector<Integer> row(r.begin(), r.end());
            s.append_row(row);
        }
        return Submodule<IntegerRing>::generated(m, s);
    }
};

inline i64 gcd64(i64 a, i64 b) {
    a = a < 0 ? -a : a;
    b = b < 0 ? -b : b;
    while (b) {
        a %= b;
        std::swap(a, b);
    }
    return a;
}

/// Deterministic random endo system over Z/m (or Z with small torsion and free parts).
inline Instance gen_system(const InstanceSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    auto uni = [&](i64 lo, i64 hi) { return std::uniform_int_distribution<i64>(lo, hi)(rng); };
    Instance in;
    in.engine = spec.engine == EngineKind::Integers ? EngineKind::Integers : EngineKind::Modular;
    in.modulus = in.engine == EngineKind::Integers ? 0 : spec.modulus;
    const std::size_t g = static_cast<std::size_t>(uni(1, static_cast<i64>(spec.max_gens)));
    std::vector<i64> divisors;
    if (in.modulus > 0) {
        for (i64 k = 1; k <= in.modulus; ++k)
            if (in.modulus % k == 0) divisors.push_back(k);
    } else {
        divisors = {0, 2, 3, 4, 5, 6, 8, 9};
    }
    for (std::size_t i = 0; i < g; ++i) in.d.push_back(divisors[static_cast<std::size_t>(uni(0, static_cast<i64>(divisors.size()) - 1))]);
    // Entries compatible with the orders: e_i has order d_i, so d_j | d_i * F_ij.
    Mat f(g, Vec(g, 0));
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j) {
            i64 step;
            if (in.d[j] == 0) step = in.d[i] == 0 ? 1 : 0;
            else step = in.d[j] / gcd64(in.d[i], in.d[j]);
            f[i][j] = step == 0 ? 0 : step * uni(-spec.max_entry / std::max<i64>(step, 1), spec.max_entry / std::max<i64>(step, 1));
        }
    // Basis change x -> xV with V unimodular: relations D V, map V^-1 F V.
    Mat v(g, Vec(g, 0)), vinv(g, Vec(g, 0));
    for (std::size_t i = 0; i < g; ++i) v[i][i] = vinv[i][i] = 1;
    if (g > 1) {
        for (int t = 0; t < 3; ++t) {
            std::size_t a = static_cast<std::size_t>(uni(0, static_cast<i64>(g) - 1));
            std::size_t b = static_cast<std::size_t>(uni(0, static_cast<i64>(g) - 2));
            if (b >= a) ++b;
            i64 c = uni(-2, 2);
            // V <- V E with E = I + c e_ab (column a added c times to column b).
            for (std::size_t r = 0; r < g; ++r) v[r][b] += c * v[r][a];
            // V^-1 <- E^-1 V^-1: row b gets -c times row... row a gets -c row b.
            for (std::size_t k = 0; k < g; ++k) vinv[a][k] -= c * vinv[b][k];
        }
    }
    auto mul = [&](const Mat& x, const Mat& y) {
        Mat z(x.size(), Vec(y[0].size(), 0));
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t k = 0; k < y.size(); ++k)
                for (std::size_t j = 0; j < y[0].size(); ++j) z[i][j] += x[i][k] * y[k][j];
        return z;
    };
    Mat dm(g, Vec(g, 0));
    for (std::size_t i = 0; i < g; ++i) dm[i][i] = in.d[i];
    in.relations = mul(dm, v);
    in.phi = mul(mul(vinv, f), v);
    if (in.modulus > 0) {
        for (auto& r : in.relations)
            for (auto& x : r) x = mod(x, in.modulus);
        for (auto& r : in.phi)
            for (auto& x : r) x = mod(x, in.modulus);
    }
    in.relations.erase(std::remove_if(in.relations.begin(), in.relations.end(),
                                      [](const Vec& r) { return std::all_of(r.begin(), r.end(), [](i64 x) { return x == 0; }); }),
                       in.relations.end());
    const i64 seeds = uni(1, 2);
    for (i64 s = 0; s < seeds; ++s) {
        Vec r(g);
        for (auto& x : r) x = in.modulus > 0 ? uni(0, in.modulus - 1) : uni(-spec.max_entry, spec.max_entry);
        in.seed.push_back(r);
    }
    return in;
}

/// Bernoulli of a diagonal finite module with a nilpotent block glued at grade 0:
/// C = (+) Z/d_i on every grade, grade 0 additionally carries Z/m^k with a
/// strictly upper-triangular map that may leak into grade 1.
inline FamilySystem<IntegerRing> gen_bernoulli_nilpotent(std::uint64_t seed, i64 m = 4) {
    std::mt19937_64 rng(seed);
    auto uni = [&](i64 lo, i64 hi) { return std::uniform_int_distribution<i64>(lo, hi)(rng); };
    const Engine e = Engine::modular(Integer(static_cast<long>(m)));
    std::vector<i64> divs;
    for (i64 k = 2; k <= m; ++k)
        if (m % k == 0) divs.push_back(k);
    const std::size_t c = static_cast<std::size_t>(uni(1, 2));
    const std::size_t k = static_cast<std::size_t>(uni(1, 3));
    std::vector<i64> d;
    for (std::size_t i = 0; i < c; ++i) d.push_back(divs[static_cast<std::size_t>(uni(0, static_cast<i64>(divs.size()) - 1))]);
    auto diag_module = [&](const std::vector<i64>& orders) {
        Matrix<Integer> rel(0, orders.size());
        for (std::size_t i = 0; i < orders.size(); ++i) {
            std::vector<Integer> row(orders.size(), 0);
            row[i] = static_cast<long>(orders[i]);
            rel.append_row(row);
        }
        return FPModule<IntegerRing>(e, orders.size(), rel);
    };
    std::vector<i64> head_orders = d;
    for (std::size_t i = 0; i < k; ++i) head_orders.push_back(m);
    FPModule<IntegerRing> tail = diag_module(d), head = diag_module(head_orders);
    const std::size_t hg = c + k;
    // Offset +1: C part by identity, nilpotent part leaks with small probability.
    Matrix<Integer> up(hg, c, Integer(0));
    for (std::size_t i = 0; i < c; ++i) up(i, i) = 1;
    for (std::size_t i = c; i < hg; ++i)
        for (std::size_t j = 0; j < c; ++j)
            if (uni(0, 3) == 0) up(i, j) = static_cast<long>(uni(0, m - 1) * (d[j] / gcd64(m, d[j])));
    // Offset 0: strictly upper-triangular on the nilpotent block.
    Matrix<Integer> here(hg, hg, Integer(0));
    for (std::size_t i = c; i < hg; ++i)
        for (std::size_t j = i + 1; j < hg; ++j) here(i, j) = static_cast<long>(uni(0, m - 1));
    Matrix<Integer> tail_up = Matrix<Integer>::identity(c, 0, 1);
    Matrix<Integer> tail_here(c, c, Integer(0));
    ShiftFamily<IntegerRing> fam(e, IndexKind::Nat, 0, {head}, tail, FamilyKind::Custom);
    BandedEndo<IntegerRing> endo{{Band<IntegerRing>{Pos{1, 0}, {up}, {tail_up}}, Band<IntegerRing>{Pos{0, 0}, {here}, {tail_here}}}};
    validate_endo(fam, endo);
    return {fam, endo};
}

/// Random non-increasing cut rule "a + b/(n + c)" with a <= 3, b <= 4, small c.
inline std::string gen_cut_rule(std::mt19937_64& rng, i64 max_den = 12) {
    auto uni = [&](i64 lo, i64 hi) { return std::uniform_int_distribution<i64>(lo, hi)(rng); };
    i64 an = uni(0, 3 * max_den), ad = uni(1, max_den);
    i64 b = uni(0, 4), c = uni(0, 3);
    std::ostringstream os;
    os << an << "/" << ad << " + " << b << "/(n + " << c << ")";
    return os.str();
}

/// A locally finite short exact sequence of shift families for the addition check.
template <class R>
struct ATInstance {
    FamilySystem<R> sub, amb;
    FamilyEmbedding<R> iota;
    LengthId length;
};

/// B(C') -> B(C) over Z/m: C = (+) Z/d_i, C' = (+) Z/(d_i/e_i) embedded by e_i,
/// both shifted with the same unit multipliers.
inline ATInstance<IntegerRing> gen_at_bernoulli(std::uint64_t seed, i64 m = 12) {
    std::mt19937_64 rng(seed);
    auto uni = [&](i64 lo, i64 hi) { return std::uniform_int_distribution<i64>(lo, hi)(rng); };
    const Engine e = Engine::modular(Integer(static_cast<long>(m)));
    std::vector<i64> divs;
    for (i64 k = 1; k <= m; ++k)
        if (m % k == 0) divs.push_back(k);
    const std::size_t g = static_cast<std::size_t>(uni(1, 3));
    std::vector<i64> d, sub_d, emb, units;
    for (std::size_t i = 0; i < g; ++i) {
        i64 di = divs[static_cast<std::size_t>(uni(1, static_cast<i64>(divs.size()) - 1))];
        std::vector<i64> ds;
        for (i64 k = 1; k <= di; ++k)
            if (di % k == 0) ds.push_back(k);
        i64 ei = ds[static_cast<std::size_t>(uni(0, static_cast<i64>(ds.size()) - 1))];
        i64 u;
        do u = uni(1, m - 1);
        while (gcd64(u, m) != 1);
        d.push_back(di);
        sub_d.push_back(di / ei);
        emb.push_back(ei);
        units.push_back(u);
    }
    auto diag = [&](const std::vector<i64>& o) {
        Matrix<Integer> rel(0, o.size());
        for (std::size_t i = 0; i < o.size(); ++i) {
            std::vector<Integer> row(o.size(), 0);
            row[i] = static_cast<long>(o[i]);
            rel.append_row(row);
        }
        return FPModule<IntegerRing>(e, o.size(), rel);
    };
    Matrix<Integer> u(g, g, Integer(0)), iota(g, g, Integer(0));
    for (std::size_t i = 0; i < g; ++i) {
        u(i, i) = static_cast<long>(units[i]);
        iota(i, i) = static_cast<long>(emb[i]);
    }
    BandedEndo<IntegerRing> shift{{Band<IntegerRing>{Pos{1, 0}, {}, {u}}}};
    ShiftFamily<IntegerRing> fm(e, IndexKind::Nat, 0, {}, diag(d), FamilyKind::Bernoulli);
    ShiftFamily<IntegerRing> fn(e, IndexKind::Nat, 0, {}, diag(sub_d), FamilyKind::Bernoulli);
    return {{fn, shift}, {fm, shift}, {{}, {iota}}, LengthId::LogCard};
}

/// B_sigma nest over the valuation engine: cuts gamma - delta embedded by x^delta.
inline ATInstance<ValuationRing> gen_at_sigma(std::uint64_t seed, i64 max_den = 12) {
    std::mt19937_64 rng(seed);
    auto uni = [&](i64 lo, i64 hi) { return std::uniform_int_distribution<i64>(lo, hi)(rng); };
    CutSequence gamma;
    Rational lim;
    do {
        gamma = CutSequence::parse(gen_cut_rule(rng, max_den), 1);
        lim = gamma.limit();
    } while (lim == 0 && uni(0, 1) == 0);
    Rational delta = lim * make_rational(uni(0, max_den), max_den);
    auto fm = bernoulli_sigma({}, gamma, 1);
    auto fn = bernoulli_sigma({}, gamma.minus(delta), 1);
    Matrix<ValElement> iota{{ValElement::monomial(1, delta)}};
    return {fn, fm, {{}, {iota}}, LengthId::Lv};
}

} // namespace entl::oracle
