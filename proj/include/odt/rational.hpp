#pragma once

#include <cstdint>
#include <compare>
#include <string>
#include <gmpxx.h>

namespace odt {

// Canonical exact rational. Every operation leaves the value in lowest terms
// with a positive denominator.
class Rational {
public:
    Rational() = default;
    Rational(long v) : q_(v) {}
    Rational(int v) : q_(v) {}
    Rational(std::int64_t num, std::int64_t den);
    explicit Rational(const mpz_class& num, const mpz_class& den = 1);
    explicit Rational(const mpq_class& q) : q_(q) { q_.canonicalize(); }

    static Rational from_u64(std::uint64_t num, std::uint64_t den = 1);
    // Exact value of a finite long double (every such value is dyadic).
    static Rational from_long_double(long double x);

    mpz_class numerator() const { return q_.get_num(); }
    mpz_class denominator() const { return q_.get_den(); }
    const mpq_class& raw() const { return q_; }

    int sign() const { return sgn(q_); }
    bool is_zero() const { return sign() == 0; }
    double to_double() const { return q_.get_d(); }
    long double to_long_double() const;

    Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
    Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }
    Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
    Rational operator-() const { return Rational(mpq_class(-q_)); }

    friend bool operator==(const Rational& a, const Rational& b) { return cmp(a.q_, b.q_) == 0; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        int c = cmp(a.q_, b.q_);
        return c < 0 ? std::strong_ordering::less
             : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
    }

    // "p/q"
    std::string str() const { return q_.get_str(); }
    // Decimal expansion truncated toward zero to `digits` fractional digits.
    std::string decimal(int digits = 15) const;

private:
    mpq_class q_;
};

// 1/n for positive n.
Rational reciprocal(std::uint64_t n);

// "p/q (≈ 0.ddddddddddddddd)"
std::string format_density(const Rational& r);

}  // namespace odt
