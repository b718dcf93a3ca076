#include "mmpart/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace mmpart {

namespace {

bool all_digits(std::string_view s)
{
    if (s.empty())
        return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            return false;
    return true;
}

mpz_class pow10(unsigned long exponent)
{
    mpz_class result;
    mpz_ui_pow_ui(result.get_mpz_t(), 10, exponent);
    return result;
}

} // namespace

Rational parse_rational(std::string_view text)
{
    std::string_view s = text;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);

    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }

    Rational result;
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        auto num = s.substr(0, slash);
        auto den = s.substr(slash + 1);
        if (!all_digits(num) || !all_digits(den))
            throw std::invalid_argument("malformed fraction '" + std::string(text) + "'");
        mpz_class d(std::string(den), 10);
        if (d == 0)
            throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
        result = Rational(mpz_class(std::string(num), 10), d);
    } else {
        auto dot = s.find('.');
        auto whole = s.substr(0, dot);
        std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
        if (whole.empty() && frac.empty())
            throw std::invalid_argument("malformed number '" + std::string(text) + "'");
        if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac))
            || (dot != std::string_view::npos && frac.empty()))
            throw std::invalid_argument("malformed number '" + std::string(text) + "'");
        std::string digits = std::string(whole) + std::string(frac);
        result = Rational(mpz_class(digits, 10), pow10(frac.size()));
    }
    result.canonicalize();
    return negative ? Rational(-result) : result;
}

std::string to_fraction(const Rational& value)
{
    if (value.get_den() == 1)
        return value.get_num().get_str();
    return value.get_num().get_str() + "/" + value.get_den().get_str();
}

std::string to_decimal(const Rational& value, int significant, bool* rounded)
{
    if (rounded)
        *rounded = false;
    if (value == 0)
        return "0";

    Rational v = abs(value);
    // Exponent e with 10^e <= v < 10^(e+1).
    long e = 0;
    if (v >= 1) {
        e = static_cast<long>(floor_of(v).get_str().size()) - 1;
    } else {
        Rational probe = v;
        while (probe < 1) {
            probe *= 10;
            --e;
        }
    }

    long places = significant - 1 - e;
    Rational scaled = v;
    if (places >= 0)
        scaled *= Rational(pow10(static_cast<unsigned long>(places)));
    else
        scaled /= Rational(pow10(static_cast<unsigned long>(-places)));
    mpz_class n = floor_of(scaled + Rational(1, 2));
    if (rounded)
        *rounded = Rational(n) != scaled;

    std::string out = value < 0 ? "-" : "";
    if (places <= 0) {
        n *= pow10(static_cast<unsigned long>(-places));
        return out + n.get_str();
    }
    mpz_class scale = pow10(static_cast<unsigned long>(places));
    mpz_class whole = n / scale;
    std::string frac = mpz_class(n % scale).get_str();
    frac.insert(0, static_cast<std::size_t>(places) - frac.size(), '0');
    while (!frac.empty() && frac.back() == '0')
        frac.pop_back();
    out += whole.get_str();
    if (!frac.empty())
        out += "." + frac;
    return out;
}

mpz_class ceil_of(const Rational& value)
{
    mpz_class r;
    mpz_cdiv_q(r.get_mpz_t(), value.get_num_mpz_t(), value.get_den_mpz_t());
    return r;
}

mpz_class floor_of(const Rational& value)
{
    mpz_class r;
    mpz_fdiv_q(r.get_mpz_t(), value.get_num_mpz_t(), value.get_den_mpz_t());
    return r;
}

Rational rational_lcm(const Rational& a, const Rational& b)
{
    // lcm(p/q, r/s) = lcm(p, r) / gcd(q, s) for reduced fractions.
    mpz_class num = lcm(a.get_num(), b.get_num());
    mpz_class den = gcd(a.get_den(), b.get_den());
    Rational result(num, den);
    result.canonicalize();
    return result;
}

} // namespace mmpart
