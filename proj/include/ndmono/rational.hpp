#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cctype>
#include <stdexcept>
#include <string>

namespace ndmono {

// Exact arithmetic carrier for probabilities, coefficients and bounds.
// GMP-backed; kept canonical (lowest terms, positive denominator).
using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

// Malformed or inconsistent user input (files, labels, flags).
class input_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A configured cap was exceeded (enumeration size, LP size, iteration limit).
class resource_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline Rational make_rational(const Integer& num, const Integer& den) {
    if (den == 0)
        throw input_error("rational with zero denominator");
    Rational r(num, den);
    mpq_canonicalize(r.backend().data());
    return r;
}

// Accepts "p", "-p", "p/q" with optional leading sign on p only.
inline Rational parse_rational(const std::string& text) {
    const auto bad = [&] { return input_error("malformed rational '" + text + "'"); };
    std::string::size_type i = 0;
    bool negative = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        negative = text[i] == '-';
        ++i;
    }
    const std::string::size_type num_begin = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
        ++i;
    if (i == num_begin)
        throw bad();
    Integer num(text.substr(num_begin, i - num_begin));
    if (negative)
        num = -num;
    Integer den(1);
    if (i < text.size()) {
        if (text[i] != '/')
            throw bad();
        const std::string den_part = text.substr(i + 1);
        if (den_part.empty())
            throw bad();
        for (char c : den_part)
            if (!std::isdigit(static_cast<unsigned char>(c)))
                throw bad();
        den = Integer(den_part);
    }
    return make_rational(num, den);
}

// Canonical "p/q" (or "p" when q = 1).
inline std::string rational_string(const Rational& r) {
    return r.str();
}

// Exact decimal rendering, round half away from zero.
inline std::string decimal_string(const Rational& r, int digits = 9) {
    Integer num = numerator(r);
    Integer den = denominator(r);
    const bool neg = num < 0;
    if (neg)
        num = -num;
    Integer scale(1);
    for (int i = 0; i < digits; ++i)
        scale *= 10;
    Integer scaled = (2 * num * scale + den) / (2 * den);
    Integer whole = scaled / scale;
    Integer frac = scaled % scale;
    std::string frac_str = frac.str();
    frac_str.insert(frac_str.begin(), static_cast<std::size_t>(digits) - frac_str.size(), '0');
    std::string out = (neg && scaled != 0 ? "-" : "") + whole.str();
    if (digits > 0)
        out += "." + frac_str;
    return out;
}

inline double to_double(const Rational& r) {
    return r.convert_to<double>();
}

}  // namespace ndmono
