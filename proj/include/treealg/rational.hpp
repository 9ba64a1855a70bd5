#pragma once

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <string>

#include "treealg/errors.hpp"

namespace treealg {

// Exact arbitrary-precision rational. GMP keeps values canonical
// (coprime, positive denominator), which we rely on for equality and
// for stable serialization.
using Rational = mpq_class;

inline Rational rat(long num, long den = 1)
{
    Rational q(num, den);
    q.canonicalize();
    return q;
}

// Parses "p" or "p/q" with optional sign, no decimals.
inline Rational parse_rational(const std::string& s)
{
    if (s.empty())
        throw input_error("empty rational literal");
    for (char c : s)
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '/'))
            throw input_error("bad rational literal: " + s);
    Rational q;
    if (q.set_str(s, 10) != 0)
        throw input_error("bad rational literal: " + s);
    q.canonicalize();
    if (q.get_den() == 0)
        throw input_error("zero denominator in rational literal: " + s);
    return q;
}

inline std::string to_string(const Rational& q)
{
    return q.get_str();
}

inline double to_double(const Rational& q)
{
    return q.get_d();
}

inline Rational pow_rational(const Rational& base, long e)
{
    if (e < 0) {
        if (base == 0)
            throw domain_error("negative power of zero");
        Rational inv = 1 / base;
        return pow_rational(inv, -e);
    }
    Rational r = 1, b = base;
    while (e > 0) {
        if (e & 1)
            r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

inline bool is_integer(const Rational& q)
{
    return q.get_den() == 1;
}

using Complex = std::complex<double>;

} // namespace treealg
