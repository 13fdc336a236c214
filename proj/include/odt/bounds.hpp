#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "odt/classnum.hpp"
#include "odt/density.hpp"
#include "odt/rational.hpp"

namespace odt {

// Constants of the analytic estimates.
inline constexpr u64 kWatkinsDisc = 2383747;          // h(-l) > 100 beyond this
inline constexpr u64 kWatkinsLimit = 2800000000ull;   // switch to the Siegel-type floor
inline constexpr long double kSiegelConst = 0.041L;   // h > 0.041 sqrt(l)/log(l)
inline constexpr long double kSiegelSwitchLog10 = 115; // beyond 10^115: h > 3e4 l^(1/2 - eps0)
inline constexpr long double kFarConst = 3e4L;
long double far_epsilon();                            // 0.999 / log(10^6)

// Default ceiling for class-number work done by sum1_partial without the
// long-run flag.
inline constexpr u64 kSum1Ceiling = 10000000;

struct DyadicBound {
    Rational lower;
    Rational upper;
};

// sum of 1/g_l over primes 3 < l <= cutoff, l = 3 mod 4, gcd(g_l, 30) = 1.
Rational sum1_partial(u64 cutoff, const ClassNumberCache& cache, bool long_run = false);

struct SweepOptions {
    SieveConfig sieve;
    unsigned workers = 1;
    std::size_t chunks = 64;
    // Called with (k, K) after chunk k of K completes.
    std::function<void(std::size_t, std::size_t)> progress;
};

// sum over primes l in (lo, hi] with gcd((l-1)/2, 30) = 1 of 1/(100 (l-1)/2),
// as a dyadic enclosure with 2^-100 resolution per term.
DyadicBound sum2(u64 lo = 1000000000ull, u64 hi = kWatkinsLimit, const SweepOptions& opt = {});

struct Sum3 {
    long double exceptional = 0;
    long double main = 0;
};
Sum3 sum3_tail();

// Weighted Brun-Titchmarsh quadrature: with Pi(t) <= coef * t / log(t/q),
// returns an upper bound for sum over l > a of 1/(h_floor(l) (l-1)/2) using
// the Siegel-type floors (0.041 sqrt(l)/log l up to 10^115, 3e4 l^(1/2-eps0)
// beyond).
long double siegel_integral(long double a, long double q, long double coef);

struct TailOptions {
    u64 explicit_limit = 50000000;  // ell up to here use the exact class number
    SweepOptions sweep;
};

struct TailEstimate {
    u64 z = 0;
    Rational explicit_part;
    Rational watkins_part;
    long double siegel_part = 0;
    long double exceptional_part = 0;
    Rational total_upper;
};

// Upper bound on sum of 1/g over every threshold g > z of every group
// realizable in odd degree (one term per group).
TailEstimate certified_tail(u64 z, const ClassNumberCache& cache, const TailOptions& opt = {});

// Upper bound on the density of n in the truncated stratum (odd, multiple
// of c.lcm, no forbidden threshold dividing n) that are divisible by some
// threshold above c.z.
TailEstimate certified_stratum_tail(const StratumConstraint& c, const ClassNumberCache& cache,
                                    const TailOptions& opt = {});

// TailBound adapter for stratum_density. Returns nullopt when z is too small
// for the explicit range.
TailBound stratum_tail_bound(const ClassNumberCache& cache, const TailOptions& opt = {});

struct RatioRecord {
    u64 ell = 0;
    u64 d = 0;
    u64 t_cm = 0;
    double ratio = 0;            // T_CM(d) / (d loglog d)^(2/3)
    double l_value_product = 0;  // L(1) loglog l
};

// Primes l <= limit where L(1) loglog l reaches a new minimum.
std::vector<RatioRecord> record_search(u64 limit, const ClassNumberCache& cache);

}  // namespace odt
