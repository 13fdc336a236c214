#include "odt/rational.hpp"

#include <cmath>
#include <stdexcept>

namespace odt {

namespace {

mpz_class from_u64_z(std::uint64_t v) {
    mpz_class z;
    mpz_import(z.get_mpz_t(), 1, 1, sizeof v, 0, 0, &v);
    return z;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    q_ = mpq_class(mpz_class(static_cast<long>(num)), mpz_class(static_cast<long>(den)));
    q_.canonicalize();
}

Rational::Rational(const mpz_class& num, const mpz_class& den) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    q_ = mpq_class(num, den);
    q_.canonicalize();
}

Rational Rational::from_u64(std::uint64_t num, std::uint64_t den) {
    return Rational(from_u64_z(num), from_u64_z(den));
}

Rational Rational::from_long_double(long double x) {
    if (!std::isfinite(x)) throw std::domain_error("non-finite value");
    int exp = 0;
    long double m = std::frexp(x, &exp);
    // 64 mantissa bits cover the x87 extended format and anything narrower.
    long double scaled = std::ldexp(m, 64);
    bool neg = scaled < 0;
    if (neg) scaled = -scaled;
    auto hi = static_cast<std::uint64_t>(scaled);
    mpz_class num = from_u64_z(hi);
    if (neg) num = -num;
    exp -= 64;
    mpz_class den = 1;
    if (exp >= 0) num <<= exp;
    else den <<= -exp;
    return Rational(num, den);
}

long double Rational::to_long_double() const {
    // Enough for diagnostics: split into integer scale and a double mantissa.
    long e1 = 0, e2 = 0;
    double a = mpz_get_d_2exp(&e1, q_.get_num_mpz_t());
    double b = mpz_get_d_2exp(&e2, q_.get_den_mpz_t());
    return std::ldexp(static_cast<long double>(a) / b, static_cast<int>(e1 - e2));
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.is_zero()) throw std::domain_error("division by zero rational");
    q_ /= o.q_;
    return *this;
}

std::string Rational::decimal(int digits) const {
    mpz_class num = q_.get_num();
    mpz_class den = q_.get_den();
    bool neg = num < 0;
    if (neg) num = -num;
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
    mpz_class t = num * scale / den;
    mpz_class ip = t / scale;
    mpz_class fp = t % scale;
    std::string frac = fp.get_str();
    if (static_cast<int>(frac.size()) < digits) frac.insert(0, digits - frac.size(), '0');
    std::string out = (neg ? "-" : "") + ip.get_str();
    if (digits > 0) out += "." + frac;
    return out;
}

Rational reciprocal(std::uint64_t n) {
    if (n == 0) throw std::domain_error("reciprocal of zero");
    return Rational::from_u64(1, n);
}

std::string format_density(const Rational& r) {
    return r.str() + " (≈ " + r.decimal(15) + ")";
}

}  // namespace odt
