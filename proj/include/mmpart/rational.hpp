#ifndef MMPART_RATIONAL_HPP
#define MMPART_RATIONAL_HPP

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace mmpart {

// All instants, durations and utilizations are exact rationals.
using Rational = mpq_class;
using Time = mpq_class;

// Parses "12", "0.175", "-3", "7/40" exactly. Throws std::invalid_argument.
Rational parse_rational(std::string_view text);

// "p/q", or "p" when the denominator is 1.
std::string to_fraction(const Rational& value);

// Decimal rendering with at most `significant` significant digits.
// `rounded` is set when the decimal is not exact.
std::string to_decimal(const Rational& value, int significant, bool* rounded = nullptr);

mpz_class ceil_of(const Rational& value);
mpz_class floor_of(const Rational& value);

// ceil(numerator / denominator) for positive denominators.
inline mpz_class ceil_div(const Rational& numerator, const Rational& denominator)
{
    return ceil_of(Rational(numerator / denominator));
}

// Least common multiple of two positive rationals: the smallest positive
// rational that is an integer multiple of both.
Rational rational_lcm(const Rational& a, const Rational& b);

} // namespace mmpart

#endif
