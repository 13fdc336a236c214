#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace odt {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

struct Factorization {
    u64 value = 1;
    std::vector<std::pair<u64, unsigned>> factors;  // (prime, exponent), primes ascending

    unsigned valuation(u64 p) const;
    u64 divisor_count() const;
};

Factorization factorize(u64 n);
std::vector<u64> divisors(u64 n);
std::vector<u64> divisors(const Factorization& f);

// Deterministic for all 64-bit inputs.
bool is_prime(u64 n);

// All primes <= limit by a plain sieve; limit is expected to be modest.
std::vector<std::uint32_t> primes_up_to(std::uint32_t limit);

u64 isqrt(u64 n);
u64 mulmod(u64 a, u64 b, u64 m);
u64 powmod(u64 a, u64 e, u64 m);

struct ResidueFilter {
    u64 modulus = 1;
    std::vector<u64> allowed;
};

struct SieveConfig {
    // Odd numbers covered per segment; one byte each.
    std::size_t segment_odds = std::size_t{1} << 20;
    // Upper limit on the number of segments a single stream may walk.
    std::size_t max_segments = std::size_t{1} << 24;
};

// Largest hi accepted by the segmented sieve.
inline constexpr u64 kSieveMaxHi = u64{1} << 50;

// Primes in [lo, hi] in increasing order, optionally restricted to residue
// classes. Memory is proportional to the segment size plus the base primes.
class PrimeStream {
public:
    PrimeStream(u64 lo, u64 hi, std::optional<ResidueFilter> filter = std::nullopt,
                SieveConfig cfg = {});

    std::optional<u64> next();

    // Calls f(p) for every remaining prime; faster than repeated next().
    template <class F>
    void for_each(F&& f) {
        if (pending_two_) {
            pending_two_ = false;
            if (accept(2)) f(u64{2});
        }
        while (load_segment()) {
            const std::size_t n = seg_.size();
            for (; pos_ < n; ++pos_) {
                if (!seg_[pos_]) continue;
                u64 p = seg_lo_ + 2 * pos_;
                if (accept(p)) f(p);
            }
        }
    }

    u64 lo() const { return lo_; }
    u64 hi() const { return hi_; }

private:
    bool accept(u64 p) const {
        return !filter_ || allowed_[p % filter_->modulus];
    }
    bool load_segment();

    u64 lo_, hi_;
    std::optional<ResidueFilter> filter_;
    std::vector<char> allowed_;
    SieveConfig cfg_;
    std::vector<std::uint32_t> base_;
    std::vector<u64> next_mult_;
    std::vector<char> seg_;
    u64 seg_lo_ = 0;     // odd number at seg_[0]
    u64 next_lo_ = 0;    // first odd number of the next segment
    std::size_t pos_ = 0;
    bool pending_two_ = false;
    bool done_ = false;
};

PrimeStream sieve_segmented(u64 lo, u64 hi, std::optional<ResidueFilter> filter = std::nullopt);

}  // namespace odt
