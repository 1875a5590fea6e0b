#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

#include "errors.hpp"

namespace entl {

using Integer = mpz_class;
/// Always canonical (reduced, positive denominator); zero is 0/1.
using Rational = mpq_class;

inline Rational make_rational(const Integer& num, const Integer& den = 1) {
    require(den != 0, ErrorKind::InvalidInput, "zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

/// Parses "3", "-7", "2/3", " 5 / 6 ".
inline Rational parse_rational(std::string_view text) {
    std::string s;
    for (char c : text)
        if (c != ' ' && c != '\t') s.push_back(c);
    require(!s.empty(), ErrorKind::InvalidInput, "empty rational literal");
    auto slash = s.find('/');
    auto valid_int = [](const std::string& t) {
        if (t.empty()) return false;
        size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
        if (i == t.size()) return false;
        for (; i < t.size(); ++i)
            if (t[i] < '0' || t[i] > '9') return false;
        return true;
    };
    auto strip_plus = [](std::string t) {
        if (!t.empty() && t[0] == '+') t.erase(0, 1);
        return t;
    };
    std::string num = s.substr(0, slash);
    std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
    require(valid_int(num) && valid_int(den), ErrorKind::InvalidInput,
            "bad rational literal '" + std::string(text) + "'");
    return make_rational(Integer(strip_plus(num)), Integer(strip_plus(den)));
}

inline std::string to_string(const Rational& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline std::string to_string(const Integer& z) { return z.get_str(); }

inline Integer lcm(const Integer& a, const Integer& b) {
    Integer r;
    mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline Integer gcd(const Integer& a, const Integer& b) {
    Integer r;
    mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline Integer floor_div(const Integer& a, const Integer& b) {
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

inline Integer floor_mod(const Integer& a, const Integer& b) {
    Integer r;
    mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline Rational floor(const Rational& q) { return Rational(floor_div(q.get_num(), q.get_den())); }

inline Rational ceil(const Rational& q) {
    Integer c;
    mpz_cdiv_q(c.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return Rational(c);
}

inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

} // namespace entl
