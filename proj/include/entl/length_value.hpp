#pragma once

#include <mpfr.h>

#include <cmath>
#include <algorithm>
#include <compare>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace entl {

/// Prime factorisation by trial division followed by Pollard rho on the cofactor.
inline std::map<Integer, unsigned> factorize(Integer n) {
    require(n >= 1, ErrorKind::InvalidInput, "factorize expects a positive integer");
    std::map<Integer, unsigned> out;
    for (unsigned long p = 2; p < 100000 && Integer(p) * p <= n; p += (p == 2 ? 1 : 2)) {
        while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
            ++out[Integer(p)];
            n /= p;
        }
    }
    std::vector<Integer> stack;
    if (n > 1) stack.push_back(n);
    while (!stack.empty()) {
        Integer m = stack.back();
        stack.pop_back();
        if (mpz_probab_prime_p(m.get_mpz_t(), 40) > 0) {
            ++out[m];
            continue;
        }
        // Pollard rho with Floyd cycle detection.
        Integer d = 1;
        for (unsigned long c = 1; d == 1 || d == m; ++c) {
            Integer x = 2, y = 2;
            d = 1;
            while (d == 1) {
                x = (x * x + c) % m;
                y = (y * y + c) % m;
                y = (y * y + c) % m;
                Integer diff = x > y ? Integer(x - y) : Integer(y - x);
                d = gcd(diff, m);
            }
        }
        stack.push_back(d);
        stack.push_back(m / d);
    }
    return out;
}

/// An element of R* = [0, inf]: either infinity or a finite value
/// rat + sum_p e_p * log(p) with natural logarithms of primes.
class LengthValue {
public:
    LengthValue() = default;

    static LengthValue zero() { return {}; }
    static LengthValue infinity() {
        LengthValue v;
        v.infinite_ = true;
        return v;
    }
    static LengthValue rational(const Rational& q) {
        LengthValue v;
        v.rat_ = q;
        v.rat_.canonicalize();
        return v;
    }
    /// log(n) for n >= 1, stored through the prime factorisation of n.
    static LengthValue log_of(const Integer& n) {
        LengthValue v;
        for (auto& [p, e] : factorize(n)) v.logs_[p] = Rational(e);
        return v;
    }
    static LengthValue from_parts(Rational rat, std::map<Integer, Rational> logs) {
        LengthValue v;
        v.rat_ = std::move(rat);
        v.rat_.canonicalize();
        for (auto& [p, c] : logs) {
            c.canonicalize();
            if (c == 0) continue;
            require(mpz_probab_prime_p(p.get_mpz_t(), 40) > 0, ErrorKind::InvalidInput,
                    "log symbols must be primes");
            v.logs_[p] = c;
        }
        return v;
    }

    bool is_infinite() const { return infinite_; }
    bool is_finite() const { return !infinite_; }
    bool is_zero() const { return !infinite_ && rat_ == 0 && logs_.empty(); }
    bool is_rational() const { return !infinite_ && logs_.empty(); }
    const Rational& rat() const { return rat_; }
    const std::map<Integer, Rational>& logs() const { return logs_; }

    double to_double() const {
        if (infinite_) return HUGE_VAL;
        double d = rat_.get_d();
        for (auto& [p, c] : logs_) d += c.get_d() * std::log(p.get_d());
        return d;
    }

    std::string to_string() const {
        if (infinite_) return "inf";
        std::string out;
        if (rat_ != 0 || logs_.empty()) out = entl::to_string(rat_);
        for (auto& [p, c] : logs_) {
            Rational mag = c < 0 ? Rational(-c) : c;
            if (!out.empty() || c < 0) out += (c < 0 ? "-" : "+");
            if (mag != 1) out += entl::to_string(mag) + "*";
            out += "log(" + p.get_str() + ")";
        }
        return out;
    }

    friend bool operator==(const LengthValue& a, const LengthValue& b) {
        if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
        return a.rat_ == b.rat_ && a.logs_ == b.logs_;
    }

    friend LengthValue lv_add(const LengthValue& a, const LengthValue& b) {
        if (a.infinite_ || b.infinite_) return infinity();
        LengthValue r = a;
        r.rat_ += b.rat_;
        for (auto& [p, c] : b.logs_) r.logs_[p] += c;
        r.drop_zero_logs();
        return r;
    }

    friend LengthValue lv_scale(const LengthValue& a, const Rational& q) {
        require(q > 0, ErrorKind::InvalidInput, "lv_scale expects a positive factor");
        if (a.infinite_) return infinity();
        LengthValue r = a;
        Rational f = q;
        f.canonicalize();
        r.rat_ *= f;
        for (auto& [p, c] : r.logs_) c *= f;
        return r;
    }

    /// Signed difference as (rat, logs); shared by subtraction and comparison.
    friend std::pair<Rational, std::map<Integer, Rational>> lv_signed_diff(const LengthValue& a,
                                                                             const LengthValue& b) {
        Rational r = a.rat_ - b.rat_;
        std::map<Integer, Rational> logs = a.logs_;
        for (auto& [p, c] : b.logs_) logs[p] -= c;
        std::erase_if(logs, [](auto& kv) { return kv.second == 0; });
        return {r, logs};
    }

private:
    void drop_zero_logs() {
        std::erase_if(logs_, [](auto& kv) { return kv.second == 0; });
    }

    bool infinite_ = false;
    Rational rat_ = 0;
    std::map<Integer, Rational> logs_;
};

namespace detail {

class MpfrVar {
public:
    explicit MpfrVar(mpfr_prec_t bits) { mpfr_init2(v_, bits); }
    ~MpfrVar() { mpfr_clear(v_); }
    MpfrVar(const MpfrVar&) = delete;
    MpfrVar& operator=(const MpfrVar&) = delete;
    mpfr_ptr get() { return v_; }

private:
    mpfr_t v_;
};

/// Interval enclosure [lo, hi] of r + sum c_p log p at the given precision.
/// Returns -1 / +1 when the sign is certain, 0 when the interval straddles zero.
inline int interval_sign(const Rational& r, const std::map<Integer, Rational>& logs,
                         mpfr_prec_t bits) {
    MpfrVar lo(bits), hi(bits), t1(bits), t2(bits), llo(bits), lhi(bits), clo(bits), chi(bits);
    mpfr_set_q(lo.get(), r.get_mpq_t(), MPFR_RNDD);
    mpfr_set_q(hi.get(), r.get_mpq_t(), MPFR_RNDU);
    for (auto& [p, c] : logs) {
        mpfr_set_z(t1.get(), p.get_mpz_t(), MPFR_RNDN); // primes of modest size are exact
        mpfr_log(llo.get(), t1.get(), MPFR_RNDD);
        mpfr_log(lhi.get(), t1.get(), MPFR_RNDU);
        mpfr_set_q(clo.get(), c.get_mpq_t(), MPFR_RNDD);
        mpfr_set_q(chi.get(), c.get_mpq_t(), MPFR_RNDU);
        // log p > 0, so the product bounds depend only on the sign of c.
        if (c > 0) {
            mpfr_mul(t1.get(), clo.get(), llo.get(), MPFR_RNDD);
            mpfr_mul(t2.get(), chi.get(), lhi.get(), MPFR_RNDU);
        } else {
            mpfr_mul(t1.get(), clo.get(), lhi.get(), MPFR_RNDD);
            mpfr_mul(t2.get(), chi.get(), llo.get(), MPFR_RNDU);
        }
        mpfr_add(lo.get(), lo.get(), t1.get(), MPFR_RNDD);
        mpfr_add(hi.get(), hi.get(), t2.get(), MPFR_RNDU);
    }
    if (mpfr_sgn(lo.get()) > 0) return 1;
    if (mpfr_sgn(hi.get()) < 0) return -1;
    return 0;
}

/// Exact sign of sum c_p log p (no rational part): compares prod p^(k c_p) with 1.
/// Returns 2 when the exponents are too large to expand.
inline int pure_log_sign(const std::map<Integer, Rational>& logs) {
    Integer den = 1;
    for (auto& [p, c] : logs) den = lcm(den, c.get_den());
    Integer pos = 1, neg = 1;
    for (auto& [p, c] : logs) {
        Integer k = c.get_num() * (den / c.get_den());
        Integer mag = k < 0 ? Integer(-k) : k;
        if (mpz_sizeinbase(p.get_mpz_t(), 2) * mag > 1u << 22) return 2;
        Integer pw;
        mpz_pow_ui(pw.get_mpz_t(), p.get_mpz_t(), mag.get_ui());
        (k > 0 ? pos : neg) *= pw;
    }
    return pos == neg ? 0 : (pos > neg ? 1 : -1);
}

} // namespace detail

inline constexpr long kDefaultPrecisionBits = 256;

/// Process-wide precision used when a comparison does not name one.
inline long& precision_bits_setting() {
    static long bits = kDefaultPrecisionBits;
    return bits;
}

/// Total order on R*. Mixed rational/log differences are resolved by interval
/// refinement up to `precision_bits`; PrecisionExhausted beyond that.
inline std::strong_ordering lv_compare(const LengthValue& a, const LengthValue& b,
                                       long precision_bits = 0) {
    if (precision_bits <= 0) precision_bits = precision_bits_setting();
    if (a.is_infinite() || b.is_infinite()) {
        if (a.is_infinite() && b.is_infinite()) return std::strong_ordering::equal;
        return a.is_infinite() ? std::strong_ordering::greater : std::strong_ordering::less;
    }
    auto [r, logs] = lv_signed_diff(a, b);
    auto from_sign = [](int s) {
        return s > 0 ? std::strong_ordering::greater
                     : (s < 0 ? std::strong_ordering::less : std::strong_ordering::equal);
    };
    if (logs.empty()) return from_sign(sgn(r));
    if (r == 0) {
        int s = detail::pure_log_sign(logs);
        if (s != 2) return from_sign(s);
    }
    // r != 0 with logs present can never vanish (e^r is transcendental for rational r != 0).
    for (long bits = 64;; bits *= 2) {
        bits = std::min(bits, std::max(precision_bits, 2L));
        int s = detail::interval_sign(r, logs, bits);
        if (s != 0) return from_sign(s);
        if (bits >= precision_bits) break;
    }
    fail(ErrorKind::PrecisionExhausted,
         "comparison not resolved within " + std::to_string(precision_bits) + " bits");
}

inline std::strong_ordering operator<=>(const LengthValue& a, const LengthValue& b) {
    return lv_compare(a, b);
}

/// a - b for a >= b; an infinite minuend with finite subtrahend stays infinite.
inline LengthValue lv_sub(const LengthValue& a, const LengthValue& b) {
    require(!b.is_infinite(), ErrorKind::InvalidInput, "cannot subtract an infinite length");
    if (a.is_infinite()) return LengthValue::infinity();
    auto [r, logs] = lv_signed_diff(a, b);
    LengthValue d = LengthValue::from_parts(r, logs);
    require(lv_compare(d, LengthValue::zero()) >= 0, ErrorKind::InvalidInput,
            "lv_sub would produce a negative length");
    return d;
}

inline const LengthValue& lv_min(const LengthValue& a, const LengthValue& b) {
    return lv_compare(b, a) < 0 ? b : a;
}

inline const LengthValue& lv_max(const LengthValue& a, const LengthValue& b) {
    return lv_compare(b, a) > 0 ? b : a;
}

} // namespace entl
