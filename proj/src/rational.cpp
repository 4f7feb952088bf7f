#include "airy/rational.hpp"

#include "airy/errors.hpp"

#include <cctype>

namespace airy {

Rational parse_rational(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    require(!s.empty(), "empty rational literal");

    auto dot = s.find('.');
    if (dot != std::string::npos) {
        require(s.find('/') == std::string::npos, "mixed decimal/fraction literal: " + text);
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        std::size_t frac = s.size() - dot - 1;
        BigInt num;
        require(num.set_str(digits, 10) == 0, "invalid decimal literal: " + text);
        BigInt den;
        mpz_ui_pow_ui(den.get_mpz_t(), 10, frac);
        Rational q(num, den);
        q.canonicalize();
        return q;
    }

    Rational q;
    require(q.set_str(s, 10) == 0, "invalid rational literal: " + text);
    require(q.get_den() != 0, "zero denominator: " + text);
    q.canonicalize();
    return q;
}

std::string to_fraction_string(const Rational& q) {
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

double to_double(const Rational& q) { return q.get_d(); }

Rational pow(const Rational& base, long exponent) {
    if (exponent < 0) {
        require(base != 0, "zero to a negative power");
        Rational inv = 1 / base;
        return pow(inv, -exponent);
    }
    Rational out;
    mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), static_cast<unsigned long>(exponent));
    mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), static_cast<unsigned long>(exponent));
    out.canonicalize();
    return out;
}

bool is_integer(const Rational& q) { return q.get_den() == 1; }

}  // namespace airy
