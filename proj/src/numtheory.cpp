#include "odt/numtheory.hpp"

#include <algorithm>
#include <stdexcept>

namespace odt {

unsigned Factorization::valuation(u64 p) const {
    for (auto [q, e] : factors)
        if (q == p) return e;
    return 0;
}

u64 Factorization::divisor_count() const {
    u64 t = 1;
    for (auto [p, e] : factors) t *= e + 1;
    return t;
}

u64 isqrt(u64 n) {
    u64 r = static_cast<u64>(__builtin_sqrtl(static_cast<long double>(n)));
    while (r > 0 && (u128)r * r > n) --r;
    while ((u128)(r + 1) * (r + 1) <= n) ++r;
    return r;
}

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>((u128)a * b % m); }

u64 powmod(u64 a, u64 e, u64 m) {
    u64 r = 1 % m;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

bool is_prime(u64 n) {
    if (n < 2) return false;
    static constexpr u64 small[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (u64 p : small) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    for (u64 a : small) {
        u64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool comp = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) { comp = false; break; }
        }
        if (comp) return false;
    }
    return true;
}

std::vector<std::uint32_t> primes_up_to(std::uint32_t limit) {
    std::vector<std::uint32_t> out;
    if (limit < 2) return out;
    std::vector<char> comp(limit + 1, 0);
    for (u64 i = 2; i <= limit; ++i) {
        if (comp[i]) continue;
        out.push_back(static_cast<std::uint32_t>(i));
        for (u64 j = i * i; j <= limit; j += i) comp[j] = 1;
    }
    return out;
}

namespace {

const std::vector<std::uint32_t>& trial_primes() {
    static const std::vector<std::uint32_t> table = primes_up_to(1u << 20);
    return table;
}

}  // namespace

Factorization factorize(u64 n) {
    if (n == 0) throw std::invalid_argument("factorize: n must be positive");
    Factorization f;
    f.value = n;
    auto take = [&](u64 p) {
        unsigned e = 0;
        while (n % p == 0) { n /= p; ++e; }
        if (e) f.factors.emplace_back(p, e);
    };
    for (std::uint32_t p : trial_primes()) {
        if ((u64)p * p > n) break;
        take(p);
    }
    // Beyond the table (n > 2^40) keep going with odd trial divisors.
    u64 p = (trial_primes().back() + 2) | 1;
    while (n > 1 && (u128)p * p <= n) {
        take(p);
        p += 2;
    }
    if (n > 1) f.factors.emplace_back(n, 1);
    return f;
}

std::vector<u64> divisors(const Factorization& f) {
    std::vector<u64> out{1};
    for (auto [p, e] : f.factors) {
        std::size_t k = out.size();
        u64 pk = 1;
        for (unsigned i = 0; i < e; ++i) {
            pk *= p;
            for (std::size_t j = 0; j < k; ++j) out.push_back(out[j] * pk);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<u64> divisors(u64 n) { return divisors(factorize(n)); }

PrimeStream::PrimeStream(u64 lo, u64 hi, std::optional<ResidueFilter> filter, SieveConfig cfg)
    : lo_(lo), hi_(hi), filter_(std::move(filter)), cfg_(cfg) {
    if (lo < 2) lo_ = lo = 2;
    if (lo > hi) throw std::invalid_argument("sieve: range inverted");
    if (hi > kSieveMaxHi) throw std::out_of_range("sieve: hi exceeds supported word size");
    if (cfg_.segment_odds == 0) throw std::invalid_argument("sieve: empty segment");
    if ((hi - lo) / 2 / cfg_.segment_odds + 1 > cfg_.max_segments)
        throw std::length_error("sieve: range exceeds segment budget");
    if (filter_) {
        if (filter_->modulus == 0) throw std::invalid_argument("sieve: zero modulus");
        allowed_.assign(filter_->modulus, 0);
        for (u64 r : filter_->allowed) allowed_[r % filter_->modulus] = 1;
    }
    pending_two_ = (lo <= 2);
    u64 root = isqrt(hi);
    for (std::uint32_t p : primes_up_to(static_cast<std::uint32_t>(root)))
        if (p != 2) base_.push_back(p);
    next_lo_ = lo | 1;
    if (next_lo_ < 3) next_lo_ = 3;
    next_mult_.resize(base_.size());
    for (std::size_t i = 0; i < base_.size(); ++i) {
        u64 p = base_[i];
        u64 m = std::max(p * p, (next_lo_ + p - 1) / p * p);
        if ((m & 1) == 0) m += p;
        next_mult_[i] = m;
    }
    pos_ = 0;
}

bool PrimeStream::load_segment() {
    if (pos_ < seg_.size()) return true;
    if (done_) return false;
    if (next_lo_ > hi_) {
        done_ = true;
        seg_.clear();
        return false;
    }
    seg_lo_ = next_lo_;
    u64 span = std::min<u64>(cfg_.segment_odds, (hi_ - seg_lo_) / 2 + 1);
    seg_.assign(span, 1);
    u64 seg_hi = seg_lo_ + 2 * (span - 1);
    for (std::size_t i = 0; i < base_.size(); ++i) {
        u64 p = base_[i];
        u64 m = next_mult_[i];
        if (m > seg_hi) continue;
        u64 step = 2 * p;
        for (; m <= seg_hi; m += step) seg_[(m - seg_lo_) >> 1] = 0;
        next_mult_[i] = m;
    }
    if (seg_lo_ == 1) seg_[0] = 0;
    next_lo_ = seg_hi + 2;
    pos_ = 0;
    return true;
}

std::optional<u64> PrimeStream::next() {
    if (pending_two_) {
        pending_two_ = false;
        if (accept(2)) return u64{2};
    }
    while (load_segment()) {
        while (pos_ < seg_.size()) {
            std::size_t i = pos_++;
            if (!seg_[i]) continue;
            u64 p = seg_lo_ + 2 * i;
            if (accept(p)) return p;
        }
    }
    return std::nullopt;
}

PrimeStream sieve_segmented(u64 lo, u64 hi, std::optional<ResidueFilter> filter) {
    return PrimeStream(lo, hi, std::move(filter));
}

}  // namespace odt
