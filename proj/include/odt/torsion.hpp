#pragma once

#include <cstdint>
#include <compare>
#include <stdexcept>
#include <string>
#include <vector>

#include "odt/classnum.hpp"

namespace odt {

enum class Kind : std::uint8_t { Trivial, Z2, Z4, Z2xZ2, Cyclic, TwoTimesCyclic };

struct NeverRealizable : std::domain_error {
    using std::domain_error::domain_error;
};

// One of the torsion groups possible for a CM elliptic curve over an odd
// degree field: 1, Z/2, Z/4, Z/2+Z/2, Z/l^n or Z/2l^n with l = 3 mod 4.
struct TorsionGroup {
    Kind kind = Kind::Trivial;
    u64 ell = 0;
    unsigned n = 0;

    static TorsionGroup trivial() { return {}; }
    static TorsionGroup z2() { return {Kind::Z2, 0, 0}; }
    static TorsionGroup z4() { return {Kind::Z4, 0, 0}; }
    static TorsionGroup z2xz2() { return {Kind::Z2xZ2, 0, 0}; }
    static TorsionGroup cyclic(u64 ell, unsigned n);
    static TorsionGroup two_times_cyclic(u64 ell, unsigned n);

    // Throws on overflow.
    u64 order() const;
    // "Z/9", "Z/2⊕Z/2"
    std::string name() const;

    // Ordering: by order, then kind, then ell.
    friend std::strong_ordering operator<=>(const TorsionGroup& a, const TorsionGroup& b);
    friend bool operator==(const TorsionGroup& a, const TorsionGroup& b) {
        return a.kind == b.kind && a.ell == b.ell && a.n == b.n;
    }
};

struct Threshold {
    TorsionGroup group;
    u64 value = 1;
    bool always_realizable = false;
};

// Exponent of ell in the degree threshold.
unsigned delta(u64 ell, unsigned n);

// Smallest odd degree b such that the group occurs in odd degree d iff b | d.
// Throws NeverRealizable for Z/l^n with l = 7 mod 8, std::overflow_error when
// the value does not fit in 64 bits.
Threshold threshold(const TorsionGroup& g, const ClassNumberSource& h);

bool realizable(const TorsionGroup& g, u64 d, const ClassNumberSource& h);

std::vector<TorsionGroup> groups(u64 d, const ClassNumberSource& h);
u64 t_cm(u64 d, const ClassNumberSource& h);

// Realized groups outside the six that occur in every odd degree.
struct Fingerprint {
    std::vector<TorsionGroup> realized;

    bool empty() const { return realized.empty(); }
    // "C11^1,T23^1"; empty string for Olson degrees.
    std::string key() const;
    friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

Fingerprint fingerprint(u64 d, const ClassNumberSource& h);
bool is_olson(u64 d, const ClassNumberSource& h);
bool equivalent(u64 d1, u64 d2, const ClassNumberSource& h);

// Is this one of Trivial, Z/2, Z/4, Z/2+Z/2, Z/3, Z/6?
bool is_universal(const TorsionGroup& g);

struct Generator {
    u64 value = 0;
    std::vector<u64> witnesses;  // primes ell with (ell-1)/2 h(-ell) == value
};

struct GeneratorSet {
    std::vector<Generator> elements;  // ascending, leading 2 included
    u64 limit = 0;

    std::vector<u64> values() const;
};

// {2} together with (ell-1)/2 h(-ell) over 3 < ell <= limit, ell = 3 mod 4,
// keeping a value only when no element already kept divides it.
GeneratorSet olson_generators(u64 limit, const ClassNumberCache& cache);

// Divisors e of d equal to (ell-1)/2 h(-ell) for some prime ell = 3 mod 4.
u64 r_count(u64 d, const ClassNumberSource& h);

void require_odd(u64 d);

}  // namespace odt
