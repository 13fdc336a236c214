#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "odt/classnum.hpp"
#include "odt/rational.hpp"

namespace odt {

enum class Universe { All, Odd };

// Sorted, deduplicated; throws on a zero element.
std::vector<u64> normalize_set(std::vector<u64> h);

// Drops every element that is a multiple of another element.
std::vector<u64> prune_dominated(std::vector<u64> h);

struct RelprimeSplit {
    std::vector<u64> rel;   // elements coprime to every other element
    std::vector<u64> rest;
};
RelprimeSplit factor_out_relprime(const std::vector<u64>& h);

struct PrimeSplit {
    std::vector<u64> scaled;  // h / gcd(h, p)
    std::vector<u64> sieved;  // h not divisible by p
};
PrimeSplit p_split(const std::vector<u64>& h, u64 p);

// prod over h of (1 - 1/h).
Rational relprime_factor(const std::vector<u64>& rel);

// sum over subsets A of h of (-1)^|A| / lcm(A), i.e. the density of integers
// divisible by no element. Exact; cost 2^|h|.
Rational inclusion_exclusion_complement(const std::vector<u64>& h);

struct DensityOptions {
    std::size_t direct_cap = 26;
};

// Exact densities of sets of multiples. Results of sub-problems are memoized
// across calls on the same engine.
class DensityEngine {
public:
    explicit DensityEngine(DensityOptions opt = {}) : opt_(opt) {}

    // Density of integers divisible by no element of h.
    Rational complement(const std::vector<u64>& h);
    Rational density(const std::vector<u64>& h, Universe u = Universe::All);

    // Prime dividing the most elements (smallest on ties); 0 when none.
    static u64 split_prime(const std::vector<u64>& h);

private:
    Rational complement_pruned(const std::vector<u64>& h);

    DensityOptions opt_;
    std::map<std::vector<u64>, Rational> memo_;
};

Rational density_of_multiples(const std::vector<u64>& h, Universe u = Universe::All);

// The reduction chain for 1 - d(M(H)) when H is an initial segment of the
// Olson generator list: factor out H_rel, split the rest on a prime, factor
// out again on the scaled side and evaluate the remaining pieces directly.
struct OlsonChain {
    std::vector<u64> set, rel, rest;
    u64 split_prime = 0;
    std::vector<u64> scaled, sieved;
    std::vector<u64> scaled_rel, scaled_rest;  // scaled_rest pruned
    Rational sieved_density;        // d(M(sieved))
    Rational scaled_rest_complement;  // 1 - d(M(scaled_rest))
    Rational scaled_complement;       // 1 - d(M(scaled))
    Rational rest_density;            // d(M(rest))
    Rational upper;                   // 1 - d(M(set))
};

// split_prime = 0 picks the engine's greedy choice.
OlsonChain olson_chain(const std::vector<u64>& h, u64 split_prime = 0, DensityOptions opt = {});

// 1 - d(M(first `take` Olson generators up to `limit`)).
Rational olson_density_interval_upper(const ClassNumberCache& cache, u64 limit = 100000, std::size_t take = 38);

struct DensityInterval {
    Rational lower;
    Rational upper;
};

// Everything the tail bound needs to know about a stratum.
struct StratumConstraint {
    u64 z = 0;
    u64 lcm = 1;                  // L: every n in the stratum is a multiple of L
    std::vector<u64> forbidden;   // pruned thresholds <= z that must not divide n
    bool odd = true;
};

struct StratumQuery {
    u64 d = 1;
    u64 z = 0;
};

struct StratumResult {
    DensityInterval interval;
    Rational tail;
    u64 lcm = 1;
    std::vector<u64> divisor_thresholds;
    std::vector<u64> reduced_forbidden;
    bool inconsistent = false;
    bool tail_available = false;
};

using TailBound = std::function<std::optional<Rational>(const StratumConstraint&)>;

// Thresholds <= z of every group realizable in some odd degree, excluding
// the value 1. Sorted, deduplicated.
std::vector<u64> threshold_values(u64 z, const ClassNumberSource& h, u64 ell_limit);

StratumResult stratum_density(const StratumQuery& q, const ClassNumberCache& cache,
                              const TailBound& tail, DensityEngine* engine = nullptr);

}  // namespace odt
