#pragma once

#include <string>
#include <utility>

#include "rational.hpp"

namespace entl {

/// Ideal d*Z of the integers, d >= 0 (d = 0 is the zero ideal).
struct IntIdeal {
    Integer gen = 0;

    bool is_zero() const { return gen == 0; }
    bool is_unit() const { return gen == 1; }
    friend bool operator==(const IntIdeal&, const IntIdeal&) = default;
    std::string to_string() const { return gen == 1 ? "(1)" : gen.get_str() + "Z"; }
};

/// Euclidean structure of Z used by the generic echelon and Smith routines.
struct IntegerRing {
    using Element = Integer;
    using Ideal = IntIdeal;

    static Element zero() { return 0; }
    static Element one() { return 1; }
    static Element from_integer(const Integer& k) { return k; }
    static bool is_zero(const Element& a) { return sgn(a) == 0; }
    static bool is_one(const Element& a) { return a == 1; }

    static Element add(const Element& a, const Element& b) { return a + b; }
    static Element sub(const Element& a, const Element& b) { return a - b; }
    static Element mul(const Element& a, const Element& b) { return a * b; }
    static Element neg(const Element& a) { return -a; }
    /// acc -= q * b
    static void sub_mul(Element& acc, const Element& q, const Element& b) {
        mpz_submul(acc.get_mpz_t(), q.get_mpz_t(), b.get_mpz_t());
    }

    /// True when a is a strictly better pivot than b (smaller absolute value).
    static bool norm_less(const Element& a, const Element& b) { return mpz_cmpabs(a.get_mpz_t(), b.get_mpz_t()) < 0; }

    /// a = q*p + r with |r| < |p|.
    static std::pair<Element, Element> divmod(const Element& a, const Element& p) {
        Element q, r;
        mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), a.get_mpz_t(), p.get_mpz_t());
        return {q, r};
    }

    static Element unit_normalizer(const Element& p) { return sgn(p) < 0 ? -1 : 1; }

    /// (s, q) with s a unit and s*a - q*p the division remainder.
    static std::pair<Element, Element> cofactors(const Element& a, const Element& p) {
        return {1, divmod(a, p).first};
    }

    /// Pivot rows are scaled to their canonical associate during Smith reduction.
    static constexpr bool kScalePivots = true;
    static constexpr bool kStripContent = false;
    static void strip_unit_content(const std::vector<Element*>&) {}
    static Element canonical_associate(const Element& p) { return p < 0 ? Element(-p) : p; }

    /// For canonical p > 0: a = q*p + r with 0 <= r < p.
    static std::pair<Element, Element> reduce_mod(const Element& a, const Element& p) {
        return divmod(a, p);
    }

    static bool divides(const Element& p, const Element& a) {
        if (is_zero(p)) return is_zero(a);
        return mpz_divisible_p(a.get_mpz_t(), p.get_mpz_t()) != 0;
    }

    static Element exact_div(const Element& a, const Element& p) {
        Element q;
        mpz_divexact(q.get_mpz_t(), a.get_mpz_t(), p.get_mpz_t());
        return q;
    }

    static Ideal ideal_of(const Element& g) { return {g < 0 ? Element(-g) : g}; }

    static Ideal ideal_sum(const Ideal& a, const Ideal& b) { return {gcd(a.gen, b.gen)}; }

    static std::string to_string(const Element& a) { return a.get_str(); }
};

} // namespace entl
