#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace entl {

/// Finite sum of c_i x^{q_i} with rational exponents, sorted by exponent, no zero
/// coefficients.
class GenPoly {
public:
    struct Term {
        Rational exp;
        Rational coeff;
        friend bool operator==(const Term&, const Term&) = default;
    };

    GenPoly() = default;

    static GenPoly monomial(const Rational& coeff, const Rational& exp) {
        GenPoly p;
        if (coeff != 0) p.terms_.push_back({exp, coeff});
        return p;
    }

    /// Accepts unsorted terms with possible repeats; merges and drops zeros.
    static GenPoly from_terms(std::vector<Term> terms) {
        std::sort(terms.begin(), terms.end(),
                  [](const Term& a, const Term& b) { return a.exp < b.exp; });
        GenPoly p;
        for (auto& t : terms) {
            if (!p.terms_.empty() && p.terms_.back().exp == t.exp)
                p.terms_.back().coeff += t.coeff;
            else
                p.terms_.push_back(t);
            if (p.terms_.back().coeff == 0) p.terms_.pop_back();
        }
        return p;
    }

    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    const std::vector<Term>& terms() const { return terms_; }
    const Rational& valuation() const { return terms_.front().exp; }
    const Rational& lowest_coeff() const { return terms_.front().coeff; }
    bool is_monomial() const { return terms_.size() == 1; }

    friend bool operator==(const GenPoly&, const GenPoly&) = default;

    friend GenPoly operator+(const GenPoly& a, const GenPoly& b) { return merge(a, b, 1); }
    friend GenPoly operator-(const GenPoly& a, const GenPoly& b) { return merge(a, b, -1); }

    GenPoly operator-() const {
        GenPoly r = *this;
        for (auto& t : r.terms_) t.coeff = -t.coeff;
        return r;
    }

    friend GenPoly operator*(const GenPoly& a, const GenPoly& b) {
        if (a.empty() || b.empty()) return {};
        if (a.is_monomial()) return b.times_monomial(a.terms_[0].coeff, a.terms_[0].exp);
        if (b.is_monomial()) return a.times_monomial(b.terms_[0].coeff, b.terms_[0].exp);
        std::vector<Term> out;
        out.reserve(a.size() * b.size());
        for (auto& s : a.terms_)
            for (auto& t : b.terms_) out.push_back({s.exp + t.exp, s.coeff * t.coeff});
        return from_terms(std::move(out));
    }

    GenPoly times_monomial(const Rational& c, const Rational& e) const {
        if (c == 0) return {};
        GenPoly r = *this;
        for (auto& t : r.terms_) {
            t.exp += e;
            t.coeff *= c;
        }
        return r;
    }

    /// Keeps the terms with exponent strictly below `bound`.
    GenPoly truncated_below(const Rational& bound) const {
        GenPoly r;
        for (auto& t : terms_)
            if (t.exp < bound) r.terms_.push_back(t);
        return r;
    }

    /// Least common denominator of all exponents.
    Integer exponent_denominator() const {
        Integer d = 1;
        for (auto& t : terms_) d = lcm(d, t.exp.get_den());
        return d;
    }

    /// Dense coefficients in t = x^(1/d); requires all exponents >= 0.
    std::vector<Rational> to_dense(const Integer& d) const {
        if (terms_.empty()) return {};
        Rational top = terms_.back().exp * d;
        std::vector<Rational> v(top.get_num().get_ui() + 1, Rational(0));
        for (auto& t : terms_) v[Rational(t.exp * d).get_num().get_ui()] = t.coeff;
        return v;
    }

    static GenPoly from_dense(const std::vector<Rational>& v, const Integer& d) {
        GenPoly p;
        for (std::size_t k = 0; k < v.size(); ++k)
            if (v[k] != 0) p.terms_.push_back({make_rational(Integer(static_cast<unsigned long>(k)), d), v[k]});
        return p;
    }

    std::string to_string() const {
        if (terms_.empty()) return "0";
        std::string out;
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            const auto& t = terms_[i];
            Rational mag = t.coeff < 0 ? Rational(-t.coeff) : t.coeff;
            if (i > 0) out += t.coeff < 0 ? " - " : " + ";
            else if (t.coeff < 0) out += "-";
            bool unit = mag == 1 && t.exp != 0;
            if (!unit) out += entl::to_string(mag);
            if (t.exp != 0) {
                if (!unit) out += "*";
                out += "x";
                if (t.exp != 1) out += "^(" + entl::to_string(t.exp) + ")";
            }
        }
        return out;
    }

private:
    static GenPoly merge(const GenPoly& a, const GenPoly& b, int sign) {
        GenPoly r;
        r.terms_.reserve(a.size() + b.size());
        std::size_t i = 0, j = 0;
        while (i < a.size() || j < b.size()) {
            if (j == b.size() || (i < a.size() && a.terms_[i].exp < b.terms_[j].exp)) {
                r.terms_.push_back(a.terms_[i++]);
            } else if (i == a.size() || b.terms_[j].exp < a.terms_[i].exp) {
                Term t = b.terms_[j++];
                if (sign < 0) t.coeff = -t.coeff;
                r.terms_.push_back(std::move(t));
            } else {
                Rational c = sign > 0 ? Rational(a.terms_[i].coeff + b.terms_[j].coeff)
                                      : Rational(a.terms_[i].coeff - b.terms_[j].coeff);
                if (c != 0) r.terms_.push_back({a.terms_[i].exp, c});
                ++i;
                ++j;
            }
        }
        return r;
    }

    std::vector<Term> terms_;
};

namespace detail {

using Dense = std::vector<Rational>;

inline void trim(Dense& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

/// Long division in Q[t]; b must be non-zero.
inline std::pair<Dense, Dense> dense_divmod(Dense a, const Dense& b) {
    trim(a);
    if (a.size() < b.size()) return {{}, a};
    Dense q(a.size() - b.size() + 1, Rational(0));
    const std::size_t shift = b.size() - 1;
    for (std::size_t k = a.size() - 1;; --k) {
        if (a[k] != 0) {
            Rational c = a[k] / b.back();
            q[k - shift] = c;
            for (std::size_t j = 0; j < b.size(); ++j) a[k - shift + j] -= c * b[j];
        }
        if (k == shift) break;
    }
    trim(a);
    trim(q);
    return {q, a};
}

namespace modp {

inline constexpr std::uint64_t kP = (std::uint64_t{1} << 61) - 1;

inline std::uint64_t mul(std::uint64_t a, std::uint64_t b) {
    unsigned __int128 r = static_cast<unsigned __int128>(a) * b;
    std::uint64_t lo = static_cast<std::uint64_t>(r & kP), hi = static_cast<std::uint64_t>(r >> 61);
    std::uint64_t s = lo + hi;
    return s >= kP ? s - kP : s;
}
inline std::uint64_t sub(std::uint64_t a, std::uint64_t b) { return a >= b ? a - b : a + kP - b; }
inline std::uint64_t pow(std::uint64_t a, std::uint64_t e) {
    std::uint64_t r = 1;
    for (; e; e >>= 1, a = mul(a, a))
        if (e & 1) r = mul(r, a);
    return r;
}
inline std::uint64_t inv(std::uint64_t a) { return pow(a, kP - 2); }

inline std::optional<std::uint64_t> reduce(const Rational& q) {
    static const Integer P(std::to_string(kP));
    Integer n = q.get_num() % P, d = q.get_den() % P;
    if (n < 0) n += P;
    if (d == 0) return std::nullopt;
    return mul(static_cast<std::uint64_t>(mpz_get_ui(n.get_mpz_t())), inv(static_cast<std::uint64_t>(mpz_get_ui(d.get_mpz_t()))));
}

using Poly = std::vector<std::uint64_t>;

inline void trim(Poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

/// Monic gcd in F_P[t].
inline Poly gcd(Poly a, Poly b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        std::uint64_t li = inv(b.back());
        while (a.size() >= b.size()) {
            std::uint64_t c = mul(a.back(), li);
            std::size_t shift = a.size() - b.size();
            for (std::size_t j = 0; j < b.size(); ++j) a[shift + j] = sub(a[shift + j], mul(c, b[j]));
            trim(a);
            if (a.empty()) break;
        }
        std::swap(a, b);
    }
    if (!a.empty()) {
        std::uint64_t li = inv(a.back());
        for (auto& c : a) c = mul(c, li);
    }
    return a;
}

/// Smallest-height fraction congruent to r mod P, when one exists.
inline std::optional<Rational> reconstruct(std::uint64_t r) {
    static const Integer P(std::to_string(kP));
    Integer bound = sqrt(Integer(P / 2));
    Integer r0 = P, r1 = r, t0 = 0, t1 = 1;
    while (r1 > bound) {
        Integer q = r0 / r1;
        Integer r2 = r0 - q * r1, t2 = t0 - q * t1;
        r0 = r1, r1 = r2, t0 = t1, t1 = t2;
    }
    if (t1 == 0 || abs(t1) > bound) return std::nullopt;
    return make_rational(r1, t1);
}

} // namespace modp

inline Dense dense_gcd_euclid(Dense a, Dense b);

/// Monic gcd in Q[t]. The degree is read off modulo a large prime first; a trivial
/// modular gcd is conclusive, otherwise the modular gcd is lifted by rational
/// reconstruction and confirmed by exact division.
inline Dense dense_gcd(Dense a, Dense b) {
    trim(a);
    trim(b);
    if (a.empty() || b.empty()) return dense_gcd_euclid(std::move(a), std::move(b));
    modp::Poly pa, pb;
    bool ok = true;
    for (auto& c : a) {
        auto r = modp::reduce(c);
        ok = ok && r.has_value();
        pa.push_back(r.value_or(0));
    }
    for (auto& c : b) {
        auto r = modp::reduce(c);
        ok = ok && r.has_value();
        pb.push_back(r.value_or(0));
    }
    // Leading coefficients must survive reduction for the degree bound to hold.
    if (ok && pa.back() != 0 && pb.back() != 0) {
        auto g = modp::gcd(pa, pb);
        if (g.size() == 1) return {Rational(1)};
        Dense cand;
        for (auto c : g) {
            auto q = modp::reconstruct(c);
            if (!q) {
                cand.clear();
                break;
            }
            cand.push_back(*q);
        }
        if (!cand.empty() && dense_divmod(a, cand).second.empty() && dense_divmod(b, cand).second.empty())
            return cand;
    }
    return dense_gcd_euclid(std::move(a), std::move(b));
}

inline Dense dense_gcd_euclid(Dense a, Dense b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        auto r = dense_divmod(a, b).second;
        if (!r.empty()) {
            Rational lead = r.back();
            for (auto& c : r) c /= lead;
        }
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) {
        Rational lead = a.back();
        for (auto& c : a) c /= lead;
    }
    return a;
}

inline constexpr unsigned long kMaxDenseDegree = 200000;

} // namespace detail

/// Element of the valuation ring {f/u : u(0) != 0} of generalized polynomials with
/// rational exponents; v(f/u) is the least exponent of f. Stored reduced, with the
/// denominator's constant term equal to 1 (an empty denominator means 1).
class ValElement {
public:
    ValElement() = default;

    static ValElement zero() { return {}; }
    static ValElement one() { return from_poly(GenPoly::monomial(1, 0)); }
    static ValElement monomial(const Rational& coeff, const Rational& exp) {
        require(exp >= 0, ErrorKind::InvalidInput, "valuation-ring exponents must be >= 0");
        return from_poly(GenPoly::monomial(coeff, exp));
    }
    static ValElement from_poly(GenPoly p) {
        require(p.empty() || p.valuation() >= 0, ErrorKind::InvalidInput,
                "valuation-ring exponents must be >= 0");
        ValElement e;
        e.num_ = std::move(p);
        return e;
    }
    /// num/den with v(num) >= v(den); reduced to canonical form.
    static ValElement fraction(GenPoly num, GenPoly den) {
        require(!den.empty(), ErrorKind::InvalidInput, "zero denominator");
        ValElement e;
        if (num.empty()) return e;
        Rational shift = den.valuation();
        if (shift != 0) {
            num = num.times_monomial(1, -shift);
            den = den.times_monomial(1, -shift);
        }
        require(num.valuation() >= 0, ErrorKind::InvalidInput, "fraction is not in the valuation ring");
        if (den.is_monomial()) {
            e.num_ = num.times_monomial(1 / den.lowest_coeff(), 0);
            return e;
        }
        Integer d = lcm(num.exponent_denominator(), den.exponent_denominator());
        Rational top = std::max(num.terms().back().exp, den.terms().back().exp) * d;
        if (top.get_num() <= detail::kMaxDenseDegree) {
            auto nd = num.to_dense(d);
            auto dd = den.to_dense(d);
            auto g = detail::dense_gcd(nd, dd);
            if (g.size() > 1) {
                num = GenPoly::from_dense(detail::dense_divmod(nd, g).first, d);
                den = GenPoly::from_dense(detail::dense_divmod(dd, g).first, d);
            }
        }
        Rational c0 = den.lowest_coeff();
        if (den.is_monomial()) {
            e.num_ = num.times_monomial(1 / c0, 0);
            return e;
        }
        e.num_ = num.times_monomial(1 / c0, 0);
        e.den_ = den.times_monomial(1 / c0, 0);
        return e;
    }

    bool is_zero() const { return num_.empty(); }
    bool is_polynomial() const { return den_.empty(); }
    const GenPoly& num() const { return num_; }
    /// Denominator polynomial; 1 when the element is a polynomial.
    GenPoly den() const { return den_.empty() ? GenPoly::monomial(1, 0) : den_; }
    /// Minimum exponent; precondition: non-zero.
    const Rational& valuation() const { return num_.valuation(); }
    /// Coefficient of x^{v}: the leading term of the expansion.
    const Rational& lowest_coeff() const { return num_.lowest_coeff(); }
    bool is_one() const { return den_.empty() && num_.is_monomial() && num_.valuation() == 0 && num_.lowest_coeff() == 1; }

    friend bool operator==(const ValElement&, const ValElement&) = default;

    friend ValElement operator+(const ValElement& a, const ValElement& b) {
        if (a.den_.empty() && b.den_.empty()) return from_poly(a.num_ + b.num_);
        return fraction(a.num_ * b.den() + b.num_ * a.den(), a.den() * b.den());
    }
    friend ValElement operator-(const ValElement& a, const ValElement& b) {
        if (a.den_.empty() && b.den_.empty()) return from_poly(a.num_ - b.num_);
        return fraction(a.num_ * b.den() - b.num_ * a.den(), a.den() * b.den());
    }
    ValElement operator-() const {
        ValElement r = *this;
        r.num_ = -r.num_;
        return r;
    }
    friend ValElement operator*(const ValElement& a, const ValElement& b) {
        if (a.is_zero() || b.is_zero()) return {};
        if (a.den_.empty() && b.den_.empty()) return from_poly(a.num_ * b.num_);
        return fraction(a.num_ * b.num_, a.den() * b.den());
    }

    /// Exact quotient a/b; requires b != 0 and v(a) >= v(b).
    friend ValElement divide(const ValElement& a, const ValElement& b) {
        require(!b.is_zero(), ErrorKind::InvalidInput, "division by zero");
        if (a.is_zero()) return {};
        require(a.valuation() >= b.valuation(), ErrorKind::InvalidInput,
                "quotient leaves the valuation ring");
        if (b.den_.empty() && b.num_.is_monomial()) {
            ValElement r = a;
            r.num_ = a.num_.times_monomial(1 / b.lowest_coeff(), -b.valuation());
            return r;
        }
        return fraction(a.num_ * b.den(), a.den() * b.num_);
    }

    /// Canonical representative of this element modulo x^bound: the expansion
    /// truncated to exponents < bound.
    GenPoly residue_below(const Rational& bound) const {
        if (den_.empty()) return num_.truncated_below(bound);
        Integer d = lcm(lcm(num_.exponent_denominator(), den_.exponent_denominator()),
                        bound.get_den());
        Rational nq = ceil(Rational(bound * d));
        require(nq.get_num() <= detail::kMaxDenseDegree, ErrorKind::TooLarge,
                "series expansion too long");
        std::size_t n = nq.get_num().get_ui();
        // 1/den as a power series in t = x^(1/d), den(0) = 1.
        std::vector<Rational> inv(n, Rational(0));
        std::vector<std::pair<std::size_t, Rational>> dterms;
        for (auto& t : den_.terms()) dterms.push_back({Rational(t.exp * d).get_num().get_ui(), t.coeff});
        if (n > 0) inv[0] = 1;
        for (std::size_t k = 1; k < n; ++k) {
            Rational acc = 0;
            for (auto& [j, c] : dterms) {
                if (j == 0 || j > k) continue;
                acc += c * inv[k - j];
            }
            inv[k] = -acc;
        }
        std::vector<Rational> out(n, Rational(0));
        for (auto& t : num_.terms()) {
            Rational kq = t.exp * d;
            if (kq >= Rational(static_cast<unsigned long>(n))) continue;
            std::size_t k = kq.get_num().get_ui();
            for (std::size_t j = 0; j + k < n; ++j)
                if (inv[j] != 0) out[j + k] += t.coeff * inv[j];
        }
        return GenPoly::from_dense(out, d);
    }

    std::string to_string() const {
        if (den_.empty()) return num_.to_string();
        return "(" + num_.to_string() + ")/(" + den_.to_string() + ")";
    }

private:
    GenPoly num_;
    GenPoly den_;
};

/// Ideals of the valuation ring, identified by their cut: Zero, the unit ideal,
/// the principal ideal x^g R (Closed) or the union of x^{g'} R for g' > g (Open).
struct IdealCut {
    enum class Kind { Zero, Unit, Cut };
    enum class Boundary { Closed, Open };

    Kind kind = Kind::Zero;
    Rational gamma = 0;
    Boundary boundary = Boundary::Closed;

    static IdealCut zero() { return {}; }
    static IdealCut unit() { return {Kind::Unit, 0, Boundary::Closed}; }
    static IdealCut cut(const Rational& g, Boundary b = Boundary::Closed) {
        require(g >= 0, ErrorKind::InvalidInput, "cut value must be >= 0");
        if (g == 0 && b == Boundary::Closed) return unit();
        return {Kind::Cut, g, b};
    }

    bool is_zero() const { return kind == Kind::Zero; }
    bool is_unit() const { return kind == Kind::Unit; }
    friend bool operator==(const IdealCut&, const IdealCut&) = default;

    std::string to_string() const {
        switch (kind) {
        case Kind::Zero: return "0";
        case Kind::Unit: return "(1)";
        case Kind::Cut:
            return std::string(boundary == Boundary::Closed ? "Cut(" : "OpenCut(") +
                   entl::to_string(gamma) + ")";
        }
        return "?";
    }
};

/// Euclidean-style interface of the valuation ring: the norm is the valuation and
/// every element of minimal valuation divides the others.
struct ValuationRing {
    using Element = ValElement;
    using Ideal = IdealCut;

    static Element zero() { return {}; }
    static Element one() { return ValElement::one(); }
    static Element from_integer(const Integer& k) { return ValElement::monomial(Rational(k), 0); }
    static bool is_zero(const Element& a) { return a.is_zero(); }
    static bool is_one(const Element& a) { return a.is_one(); }

    static Element add(const Element& a, const Element& b) { return a + b; }
    static Element sub(const Element& a, const Element& b) { return a - b; }
    static Element mul(const Element& a, const Element& b) { return a * b; }
    static Element neg(const Element& a) { return -a; }
    static void sub_mul(Element& acc, const Element& q, const Element& b) {
        acc = acc - q * b;
    }

    static bool norm_less(const Element& a, const Element& b) {
        if (b.is_zero()) return !a.is_zero();
        if (a.is_zero()) return false;
        return a.valuation() < b.valuation();
    }

    static std::pair<Element, Element> divmod(const Element& a, const Element& p) {
        if (a.is_zero()) return {zero(), zero()};
        if (a.valuation() < p.valuation()) return {zero(), a};
        return {divide(a, p), zero()};
    }

    /// (s, q) with s a unit and s*a - q*p = 0 when v(a) >= v(p). s is the unit part of
    /// p's numerator, so elimination over polynomial entries creates no fractions.
    static std::pair<Element, Element> cofactors(const Element& a, const Element& p) {
        if (a.is_zero() || a.valuation() < p.valuation()) return {one(), zero()};
        const Rational& v = p.valuation();
        ValElement s = ValElement::from_poly(p.num().times_monomial(1, -v));
        if (p.is_polynomial() && a.is_polynomial()) return {s, ValElement::from_poly(a.num().times_monomial(1, -v))};
        return {s, ValElement::fraction(a.num() * p.den(), a.den().times_monomial(1, v))};
    }

    /// Divides polynomial entries by their common unit factor (a polynomial with
    /// non-zero constant term). Keeps entry growth in check during elimination.
    static constexpr bool kStripContent = true;
    static void strip_unit_content(const std::vector<Element*>& xs) {
        Integer d = 1;
        bool any = false;
        for (auto* x : xs) {
            if (x->is_zero()) continue;
            if (!x->is_polynomial()) return;
            d = lcm(d, x->num().exponent_denominator());
            any = true;
        }
        if (!any) return;
        detail::Dense g;
        for (auto* x : xs) {
            if (x->is_zero()) continue;
            auto v = x->num().to_dense(d);
            v.erase(v.begin(), std::find_if(v.begin(), v.end(), [](const Rational& c) { return c != 0; }));
            g = g.empty() ? std::move(v) : detail::dense_gcd(std::move(g), std::move(v));
            if (g.size() <= 1) return;
        }
        for (auto* x : xs) {
            if (x->is_zero()) continue;
            auto [q, r] = detail::dense_divmod(x->num().to_dense(d), g);
            require(r.empty(), ErrorKind::InvalidInput, "content division left a remainder");
            *x = ValElement::from_poly(GenPoly::from_dense(q, d));
        }
    }

    /// Smith pivots keep their unit part; invariants are reported as x^{v}.
    static constexpr bool kScalePivots = false;
    static Element canonical_associate(const Element& p) {
        if (p.is_zero()) return p;
        return ValElement::monomial(1, p.valuation());
    }

    /// Inverse of the unit part of p, so that unit_normalizer(p) * p = x^{v(p)}.
    static Element unit_normalizer(const Element& p) {
        GenPoly unit_num = p.num().times_monomial(1, -p.valuation());
        return ValElement::fraction(p.den(), unit_num);
    }

    /// For canonical p = x^g: r is the expansion of a truncated below g.
    static std::pair<Element, Element> reduce_mod(const Element& a, const Element& p) {
        if (a.is_zero()) return {zero(), zero()};
        const Rational& g = p.valuation();
        if (a.valuation() >= g) return {divide(a, p), zero()};
        ValElement r = ValElement::from_poly(a.residue_below(g));
        ValElement diff = a - r;
        return {divide(diff, p), r};
    }

    static bool divides(const Element& p, const Element& a) {
        if (a.is_zero()) return true;
        if (p.is_zero()) return false;
        return p.valuation() <= a.valuation();
    }

    static Element exact_div(const Element& a, const Element& p) { return divide(a, p); }

    static Ideal ideal_of(const Element& g) {
        if (g.is_zero()) return IdealCut::zero();
        return IdealCut::cut(g.valuation());
    }

    static Ideal ideal_sum(const Ideal& a, const Ideal& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        if (a.is_unit() || b.is_unit()) return IdealCut::unit();
        if (a.gamma != b.gamma) return a.gamma < b.gamma ? a : b;
        return a.boundary == IdealCut::Boundary::Closed ? a : b;
    }

    static std::string to_string(const Element& a) { return a.to_string(); }
};

/// Valuation v: R -> Q u {inf}; nullopt encodes infinity.
inline std::optional<Rational> valuation(const ValElement& e) {
    if (e.is_zero()) return std::nullopt;
    return e.valuation();
}

} // namespace entl
