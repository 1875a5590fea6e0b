#pragma once

#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "errors.hpp"
#include "integer_ring.hpp"
#include "length_value.hpp"
#include "linalg.hpp"
#include "valuation_ring.hpp"

namespace entl {

enum class EngineKind { Integers, Modular, PrimeField, Valuation };

/// Base ring descriptor. Modular(m) and PrimeField(p) are handled as Z-lattices with
/// the implicit relations m*e_i, so they share the integer arithmetic.
struct Engine {
    EngineKind kind = EngineKind::Integers;
    Integer modulus = 0;

    static Engine integers() { return {}; }
    static Engine modular(const Integer& m) {
        require(m >= 2, ErrorKind::InvalidInput, "modulus must be >= 2");
        return {EngineKind::Modular, m};
    }
    static Engine prime_field(const Integer& p) {
        require(p >= 2 && mpz_probab_prime_p(p.get_mpz_t(), 40) > 0, ErrorKind::InvalidInput,
                "prime field needs a prime");
        return {EngineKind::PrimeField, p};
    }
    static Engine valuation() { return {EngineKind::Valuation, 0}; }

    bool has_modulus() const { return kind == EngineKind::Modular || kind == EngineKind::PrimeField; }

    std::string name() const {
        switch (kind) {
        case EngineKind::Integers: return "Z";
        case EngineKind::Modular: return "Z/" + modulus.get_str();
        case EngineKind::PrimeField: return "F_" + modulus.get_str();
        case EngineKind::Valuation: return "V";
        }
        return "?";
    }

    friend bool operator==(const Engine&, const Engine&) = default;
};

/// Which arithmetic engine realises a ring kind.
template <class R>
bool engine_fits(EngineKind k) {
    if constexpr (std::is_same_v<R, ValuationRing>) return k == EngineKind::Valuation;
    else return k != EngineKind::Valuation;
}

enum class LengthId { LogCard, Rank, Dim, Lv };

inline std::string_view to_string(LengthId l) {
    switch (l) {
    case LengthId::LogCard: return "logCard";
    case LengthId::Rank: return "rank";
    case LengthId::Dim: return "dim";
    case LengthId::Lv: return "L_v";
    }
    return "?";
}

inline LengthId parse_length_id(std::string_view s) {
    if (s == "logCard" || s == "logcard") return LengthId::LogCard;
    if (s == "rank") return LengthId::Rank;
    if (s == "dim") return LengthId::Dim;
    if (s == "L_v" || s == "Lv" || s == "lv") return LengthId::Lv;
    fail(ErrorKind::InvalidInput, "unknown length function '" + std::string(s) + "'");
}

inline bool supports(LengthId l, EngineKind k) {
    switch (l) {
    case LengthId::LogCard: return k == EngineKind::Integers || k == EngineKind::Modular;
    case LengthId::Rank: return k == EngineKind::Integers;
    case LengthId::Dim: return k == EngineKind::PrimeField;
    case LengthId::Lv: return k == EngineKind::Valuation;
    }
    return false;
}

inline void check_pair(LengthId l, const Engine& e) {
    require(supports(l, e.kind), ErrorKind::UnsupportedPair,
            std::string(to_string(l)) + " is not defined over " + e.name());
}

/// L(R/I) for an ideal of Z, read inside Z/m when the engine has a modulus.
inline LengthValue cyclic_length(LengthId l, const Engine& e, const IntIdeal& ideal) {
    check_pair(l, e);
    Integer d = ideal.gen;
    if (e.has_modulus()) d = gcd(d, e.modulus);
    switch (l) {
    case LengthId::LogCard: return d == 0 ? LengthValue::infinity() : LengthValue::log_of(d);
    case LengthId::Rank: return LengthValue::rational(d == 0 ? 1 : 0);
    case LengthId::Dim: return LengthValue::rational(d == e.modulus ? 1 : 0);
    case LengthId::Lv: break;
    }
    fail(ErrorKind::UnsupportedPair, "integer ideal under L_v");
}

/// L_v(R/I) = inf{v(a) : a in I}; L_v(R) = inf.
inline LengthValue cyclic_length(LengthId l, const Engine& e, const IdealCut& ideal) {
    check_pair(l, e);
    switch (ideal.kind) {
    case IdealCut::Kind::Zero: return LengthValue::infinity();
    case IdealCut::Kind::Unit: return LengthValue::zero();
    case IdealCut::Kind::Cut: return LengthValue::rational(ideal.gamma);
    }
    return LengthValue::zero();
}

/// L(R) for the engine.
template <class R>
LengthValue ring_length(LengthId l, const Engine& e) {
    return cyclic_length(l, e, typename R::Ideal{});
}

/// Ideal as seen by the engine: generators of Z-ideals are reduced to divisors of m.
template <class R>
typename R::Ideal engine_ideal(const Engine& e, const typename R::Ideal& i) {
    if constexpr (std::is_same_v<R, IntegerRing>) {
        if (e.has_modulus()) return {gcd(i.gen, e.modulus)};
    }
    return i;
}

template <class R>
struct SmithForm {
    using E = typename R::Element;
    std::vector<E> invariants;
    std::size_t free_rank = 0;
    Matrix<E> left, right;
    Matrix<E> diagonal; // left * A * right (mod m when the engine has one); entries are associates of the invariants
};

namespace detail {

inline Integer inverse_mod(const Integer& a, const Integer& m) {
    Integer r;
    require(mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) != 0, ErrorKind::InvalidInput,
            "not a unit modulo m");
    return r;
}

/// Unit u modulo m with u * gcd(d, m) == d (mod m).
inline Integer associate_unit(const Integer& d, const Integer& m) {
    Integer g = gcd(d, m);
    Integer step = m / g;
    Integer base = floor_mod(Integer(d / g), step);
    for (Integer u = base;; u += step)
        if (gcd(u, m) == 1) return u;
}

} // namespace detail

/// Smith reduction U*A*V = D of a matrix over the engine; free_rank = rows - rank.
template <class R>
SmithForm<R> smith_reduce(const Engine& e, const Matrix<typename R::Element>& a) {
    using E = typename R::Element;
    require(engine_fits<R>(e.kind), ErrorKind::InvalidInput, "engine does not match element type");
    Matrix<E> lifted = a;
    if constexpr (std::is_same_v<R, IntegerRing>) {
        if (e.has_modulus())
            for (std::size_t i = 0; i < lifted.rows(); ++i)
                for (std::size_t j = 0; j < lifted.cols(); ++j) lifted(i, j) = floor_mod(lifted(i, j), e.modulus);
    }
    auto s = smith<R>(lifted, true);
    SmithForm<R> out;
    out.left = std::move(s.left);
    out.right = std::move(s.right);
    if constexpr (std::is_same_v<R, IntegerRing>) {
        if (e.has_modulus()) {
            const Integer& m = e.modulus;
            for (std::size_t t = 0; t < s.invariants.size(); ++t) {
                Integer g = gcd(s.invariants[t], m);
                if (g == m) continue; // zero in Z/m; divisibility puts these last
                Integer u = detail::associate_unit(s.invariants[t], m);
                Integer uinv = detail::inverse_mod(u, m);
                detail::col_scale<R>(out.right, t, uinv);
                out.invariants.push_back(g);
            }
            for (std::size_t i = 0; i < out.left.rows(); ++i)
                for (std::size_t j = 0; j < out.left.cols(); ++j) out.left(i, j) = floor_mod(out.left(i, j), m);
            for (std::size_t i = 0; i < out.right.rows(); ++i)
                for (std::size_t j = 0; j < out.right.cols(); ++j) out.right(i, j) = floor_mod(out.right(i, j), m);
            out.free_rank = a.rows() - out.invariants.size();
            out.diagonal = multiply<R>(multiply<R>(out.left, a), out.right);
            for (std::size_t i = 0; i < out.diagonal.rows(); ++i)
                for (std::size_t j = 0; j < out.diagonal.cols(); ++j)
                    out.diagonal(i, j) = floor_mod(out.diagonal(i, j), m);
            return out;
        }
    }
    out.invariants = std::move(s.invariants);
    out.free_rank = a.rows() - out.invariants.size();
    out.diagonal = multiply<R>(multiply<R>(out.left, a), out.right);
    return out;
}

/// L(big / small) for row lattices small <= big of the same width. `torsion_only`
/// drops the free part (the largest L-finite piece of the quotient).
template <class R>
LengthValue quotient_length(LengthId l, const Engine& e, const Echelon<R>& big, const Echelon<R>& small,
                            bool torsion_only = false) {
    check_pair(l, e);
    require(big.width() == small.width(), ErrorKind::AmbientMismatch, "lattice widths differ");
    const std::size_t rank_gap = big.rank() - small.rank();
    if (l == LengthId::Rank) return LengthValue::rational(torsion_only ? 0 : static_cast<long>(rank_gap));
    if (big.pivots == small.pivots) {
        // Equal spans over the fraction field: the index is a ratio of pivot products.
        if constexpr (std::is_same_v<R, IntegerRing>) {
            Integer num = 1, den = 1;
            for (std::size_t k = 0; k < small.rank(); ++k) {
                num *= small.basis(k, small.pivots[k]);
                den *= big.basis(k, big.pivots[k]);
            }
            Integer ratio = num / den;
            if (l == LengthId::Dim) {
                long k = 0;
                while (ratio > 1) {
                    ratio /= e.modulus;
                    ++k;
                }
                return LengthValue::rational(k);
            }
            return LengthValue::log_of(ratio);
        } else {
            Rational total = 0;
            for (std::size_t k = 0; k < small.rank(); ++k)
                total += small.basis(k, small.pivots[k]).valuation() - big.basis(k, big.pivots[k]).valuation();
            return LengthValue::rational(total);
        }
    }
    auto coords = coordinates<R>(big, small.basis);
    auto s = smith<R>(coords);
    LengthValue total;
    for (auto& d : s.invariants) total = lv_add(total, cyclic_length(l, e, engine_ideal<R>(e, R::ideal_of(d))));
    if (!torsion_only && big.rank() > s.rank) total = LengthValue::infinity();
    return total;
}

} // namespace entl
