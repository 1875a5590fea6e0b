#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"
#include "valuation_ring.hpp"

namespace entl {

/// Polynomial in n with rational coefficients, lowest degree first, no trailing zeros.
class RatPoly {
public:
    RatPoly() = default;
    explicit RatPoly(std::vector<Rational> c) : c_(std::move(c)) { detail::trim(c_); }
    static RatPoly constant(const Rational& q) { return RatPoly({q}); }
    static RatPoly variable() { return RatPoly({Rational(0), Rational(1)}); }

    bool is_zero() const { return c_.empty(); }
    long degree() const { return static_cast<long>(c_.size()) - 1; }
    const Rational& lead() const { return c_.back(); }
    const std::vector<Rational>& coeffs() const { return c_; }

    Rational operator()(const Rational& n) const {
        Rational acc = 0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * n + *it;
        return acc;
    }

    friend RatPoly operator+(const RatPoly& a, const RatPoly& b) {
        std::vector<Rational> c(std::max(a.c_.size(), b.c_.size()), Rational(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
        return RatPoly(std::move(c));
    }
    RatPoly operator-() const {
        RatPoly r = *this;
        for (auto& x : r.c_) x = -x;
        return r;
    }
    friend RatPoly operator-(const RatPoly& a, const RatPoly& b) { return a + (-b); }
    friend RatPoly operator*(const RatPoly& a, const RatPoly& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<Rational> c(a.c_.size() + b.c_.size() - 1, Rational(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return RatPoly(std::move(c));
    }
    friend bool operator==(const RatPoly&, const RatPoly&) = default;

    /// p(n + 1).
    RatPoly shifted() const {
        RatPoly out, pw = constant(1), step = variable() + constant(1);
        for (auto& c : c_) {
            out = out + pw * constant(c);
            pw = pw * step;
        }
        return out;
    }

    /// Every real root has absolute value below this (Cauchy bound).
    Rational root_bound() const {
        if (degree() <= 0) return 0;
        Rational m = 0;
        for (std::size_t i = 0; i + 1 < c_.size(); ++i) {
            Rational r = c_[i] / lead();
            if (r < 0) r = -r;
            if (r > m) m = r;
        }
        return m + 1;
    }

    std::string to_string() const {
        if (c_.empty()) return "0";
        std::string out;
        for (std::size_t i = c_.size(); i-- > 0;) {
            if (c_[i] == 0) continue;
            Rational mag = c_[i] < 0 ? Rational(-c_[i]) : c_[i];
            if (!out.empty()) out += c_[i] < 0 ? " - " : " + ";
            else if (c_[i] < 0) out += "-";
            if (i == 0 || mag != 1) out += entl::to_string(mag);
            if (i > 0) out += (mag != 1 ? "*n" : "n") + (i > 1 ? "^" + std::to_string(i) : std::string());
        }
        return out;
    }

private:
    std::vector<Rational> c_;
};

/// P(n)/Q(n) with Q monic after reduction by the polynomial gcd.
class RatFunc {
public:
    RatFunc() : num_(), den_(RatPoly::constant(1)) {}
    RatFunc(RatPoly num, RatPoly den) {
        require(!den.is_zero(), ErrorKind::InvalidInput, "division by the zero polynomial");
        if (num.is_zero()) {
            den_ = RatPoly::constant(1);
            return;
        }
        auto g = detail::dense_gcd(num.coeffs(), den.coeffs());
        if (g.size() > 1) {
            num = RatPoly(detail::dense_divmod(num.coeffs(), g).first);
            den = RatPoly(detail::dense_divmod(den.coeffs(), g).first);
        }
        Rational l = den.lead();
        num_ = num * RatPoly::constant(1 / l);
        den_ = den * RatPoly::constant(1 / l);
    }
    static RatFunc constant(const Rational& q) { return {RatPoly::constant(q), RatPoly::constant(1)}; }
    static RatFunc variable() { return {RatPoly::variable(), RatPoly::constant(1)}; }

    const RatPoly& num() const { return num_; }
    const RatPoly& den() const { return den_; }

    friend RatFunc operator+(const RatFunc& a, const RatFunc& b) {
        return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
    }
    friend RatFunc operator-(const RatFunc& a, const RatFunc& b) {
        return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
    }
    friend RatFunc operator*(const RatFunc& a, const RatFunc& b) { return {a.num_ * b.num_, a.den_ * b.den_}; }
    friend RatFunc operator/(const RatFunc& a, const RatFunc& b) {
        require(!b.num_.is_zero(), ErrorKind::InvalidInput, "division by zero in a tail rule");
        return {a.num_ * b.den_, a.den_ * b.num_};
    }

    std::optional<Rational> eval(const Rational& n) const {
        Rational d = den_(n);
        if (d == 0) return std::nullopt;
        return num_(n) / d;
    }

    /// Limit as n -> inf; nullopt when it diverges.
    std::optional<Rational> limit() const {
        if (num_.is_zero() || num_.degree() < den_.degree()) return Rational(0);
        if (num_.degree() == den_.degree()) return num_.lead() / den_.lead();
        return std::nullopt;
    }

    std::string to_string() const {
        if (den_.degree() == 0) return num_.to_string();
        return "(" + num_.to_string() + ")/(" + den_.to_string() + ")";
    }

private:
    RatPoly num_, den_;
};

namespace detail {

/// Recursive-descent parser for: rationals, n, + - * /, parentheses.
class TailParser {
public:
    explicit TailParser(std::string_view s) : s_(s) {}

    RatFunc parse() {
        RatFunc r = expr();
        skip();
        require(pos_ == s_.size(), ErrorKind::InvalidInput, "trailing input in tail rule '" + std::string(s_) + "'");
        return r;
    }

private:
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    RatFunc expr() {
        RatFunc r = term();
        for (;;) {
            if (eat('+')) r = r + term();
            else if (eat('-')) r = r - term();
            else return r;
        }
    }
    RatFunc term() {
        RatFunc r = factor();
        for (;;) {
            if (eat('*')) r = r * factor();
            else if (eat('/')) r = r / factor();
            else return r;
        }
    }
    RatFunc factor() {
        skip();
        require(pos_ < s_.size(), ErrorKind::InvalidInput, "unexpected end of tail rule");
        char c = s_[pos_];
        if (c == '-') {
            ++pos_;
            return RatFunc::constant(-1) * factor();
        }
        if (c == '(') {
            ++pos_;
            RatFunc r = expr();
            require(eat(')'), ErrorKind::InvalidInput, "missing ')' in tail rule");
            return r;
        }
        if (c == 'n') {
            ++pos_;
            return RatFunc::variable();
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            return RatFunc::constant(Rational(Integer(std::string(s_.substr(start, pos_ - start)))));
        }
        fail(ErrorKind::InvalidInput, std::string("unexpected '") + c + "' in tail rule");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline RatFunc parse_tail_rule(std::string_view s) { return detail::TailParser(s).parse(); }

/// Cut values gamma_n = min(f(n), cap) for n >= start: a non-increasing sequence of
/// non-negative rationals describing the ascending ideal chain x^{gamma_n} R.
class CutSequence {
public:
    CutSequence() = default;

    /// Validates non-negativity and monotonicity for every n >= start.
    CutSequence(RatFunc f, long start, std::optional<Rational> cap = std::nullopt, std::string source = "")
        : f_(std::move(f)), start_(start), cap_(std::move(cap)), source_(std::move(source)) {
        validate();
    }

    static CutSequence parse(std::string_view rule, long start) {
        return CutSequence(parse_tail_rule(rule), start, std::nullopt, std::string(rule));
    }

    long start() const { return start_; }
    const RatFunc& rule() const { return f_; }
    const std::optional<Rational>& cap() const { return cap_; }

    Rational at(long n) const {
        require(n >= start_, ErrorKind::InvalidInput, "cut index before the tail start");
        Rational v = *f_.eval(Rational(n));
        if (cap_ && *cap_ < v) v = *cap_;
        return v;
    }

    /// gamma_inf = lim gamma_n.
    Rational limit() const {
        Rational v = *f_.limit();
        if (cap_ && *cap_ < v) v = *cap_;
        return v;
    }

    /// gamma_n - delta, for delta <= gamma_inf.
    CutSequence minus(const Rational& delta) const {
        std::optional<Rational> cap;
        if (cap_) cap = *cap_ - delta;
        return CutSequence(f_ - RatFunc::constant(delta), start_, cap, source_.empty() ? "" : "(" + source_ + ")-" + entl::to_string(delta));
    }

    /// min(gamma_n, c).
    CutSequence capped(const Rational& c) const {
        Rational nc = cap_ && *cap_ < c ? *cap_ : c;
        return CutSequence(f_, start_, nc, source_);
    }

    CutSequence with_start(long start) const { return CutSequence(f_, start, cap_, source_); }

    std::string to_string() const {
        std::string body = source_.empty() ? f_.to_string() : source_;
        if (cap_) return "min(" + body + ", " + entl::to_string(*cap_) + ")";
        return body;
    }

    friend bool operator==(const CutSequence& a, const CutSequence& b) {
        return a.f_.num() == b.f_.num() && a.f_.den() == b.f_.den() && a.start_ == b.start_ && a.cap_ == b.cap_;
    }

private:
    /// Sign of p(n) is constant beyond the root bound; integers below it are checked.
    static bool nonneg_from(const RatPoly& p, long start, const char* what) {
        if (p.is_zero()) return true;
        Rational b = p.root_bound();
        Rational last = floor(b) + 1;
        require(last - start <= 100000, ErrorKind::InvalidInput, std::string("tail rule too irregular to certify ") + what);
        for (long n = start; Rational(n) <= last; ++n)
            if (p(Rational(n)) < 0) return false;
        return p.lead() > 0;
    }

    void validate() {
        require(f_.limit().has_value(), ErrorKind::NotAscending, "cut values grow without bound");
        const RatPoly& p = f_.num();
        const RatPoly& q = f_.den();
        // q has no integer root >= start.
        if (q.degree() > 0) {
            Rational last = floor(q.root_bound()) + 1;
            require(last - start_ <= 100000, ErrorKind::InvalidInput, "tail rule too irregular to certify");
            for (long n = start_; Rational(n) <= last; ++n)
                require(q(Rational(n)) != 0, ErrorKind::InvalidInput, "tail rule has a pole at n = " + std::to_string(n));
        }
        // f >= 0 <=> p*q >= 0; f(n) - f(n+1) >= 0 <=> (p*q' - p'*q)*q*q' >= 0.
        require(nonneg_from(p * q, start_, "non-negativity"), ErrorKind::NotAscending, "cut values must be >= 0");
        RatPoly ps = p.shifted(), qs = q.shifted();
        RatPoly diff = (p * qs - ps * q) * q * qs;
        require(nonneg_from(diff, start_, "monotonicity"), ErrorKind::NotAscending,
                "cut values must be non-increasing (ascending ideal chain)");
        if (cap_) require(*cap_ >= 0, ErrorKind::NotAscending, "cap must be >= 0");
    }

    RatFunc f_;
    long start_ = 1;
    std::optional<Rational> cap_;
    std::string source_;
};

} // namespace entl
