// Direct inclusion-exclusion over all subsets, done in residue arithmetic.
//
// With D the lcm of every element, S = sum_A (-1)^|A| D/lcm(A) is an integer
// in [0, D]. Each term D/lcm(A) is a product of prime powers, so it can be
// updated incrementally along a depth-first walk of the subsets. S is
// tracked modulo a handful of ~62-bit primes and recovered by CRT.

#include <algorithm>
#include <array>
#include <stdexcept>

#include "odt/density.hpp"
#include "odt/numtheory.hpp"

namespace odt {

namespace {

struct Mont {
    u64 q = 0, qinv = 0, r2 = 0;

    explicit Mont(u64 mod) : q(mod) {
        u64 inv = 1;
        for (int i = 0; i < 6; ++i) inv *= 2 - mod * inv;
        qinv = 0 - inv;
        r2 = static_cast<u64>(((u128)1 << 64) % mod);
        r2 = static_cast<u64>((u128)r2 * r2 % mod);
    }
    u64 redc(u128 t) const {
        u64 m = static_cast<u64>(t) * qinv;
        u64 r = static_cast<u64>((t + (u128)m * q) >> 64);
        return r >= q ? r - q : r;
    }
    u64 mul(u64 a, u64 b) const { return redc((u128)a * b); }
    u64 to(u64 a) const { return mul(a % q, r2); }
    u64 from(u64 a) const { return redc(a); }
};

const std::vector<u64>& crt_moduli() {
    static const std::vector<u64> mods = [] {
        std::vector<u64> m;
        for (u64 c = (u64{1} << 62) - 1; m.size() < 64; c -= 2)
            if (is_prime(c)) m.push_back(c);
        return m;
    }();
    return mods;
}

constexpr int kMaxMods = 16;

struct Walker {
    struct Step {
        int prime;
        unsigned exp;
    };
    int n = 0, k = 0;
    std::vector<std::vector<Step>> elems;
    std::vector<unsigned> cur;
    // invpow[prime][e] = Montgomery forms of p^-e modulo each modulus
    std::vector<std::vector<std::array<u64, kMaxMods>>> invpow;
    std::vector<Mont> mont;
    std::array<u128, kMaxMods> acc[2]{};

    void walk(int start, int parity, const u64* v) {
        std::array<u64, kMaxMods> w;
        std::array<std::pair<int, unsigned>, 16> saved;
        for (int j = start; j < n; ++j) {
            std::copy(v, v + k, w.begin());
            int ns = 0;
            for (const Step& s : elems[j]) {
                unsigned c = cur[s.prime];
                if (s.exp <= c) continue;
                const auto& mult = invpow[s.prime][s.exp - c];
                for (int i = 0; i < k; ++i) w[i] = mont[i].mul(w[i], mult[i]);
                saved[ns++] = {s.prime, c};
                cur[s.prime] = s.exp;
            }
            const int np = parity ^ 1;
            for (int i = 0; i < k; ++i) acc[np][i] += w[i];
            if (j + 1 < n) walk(j + 1, np, w.data());
            while (ns--) cur[saved[ns].first] = saved[ns].second;
        }
    }
};

}  // namespace

Rational inclusion_exclusion_complement(const std::vector<u64>& input) {
    std::vector<u64> h = normalize_set(input);
    if (h.empty()) return Rational(1);
    if (h.front() == 1) return Rational(0);
    if (h.size() > 40) throw std::length_error("direct inclusion-exclusion limited to 40 elements");

    Walker w;
    w.n = static_cast<int>(h.size());
    std::vector<u64> primes;
    std::vector<unsigned> emax;
    std::vector<Factorization> fs;
    for (u64 x : h) fs.push_back(factorize(x));
    for (const auto& f : fs)
        for (auto [p, e] : f.factors) {
            auto it = std::lower_bound(primes.begin(), primes.end(), p);
            if (it == primes.end() || *it != p) {
                emax.insert(emax.begin() + (it - primes.begin()), e);
                primes.insert(it, p);
            } else {
                auto& m = emax[it - primes.begin()];
                m = std::max(m, e);
            }
        }
    for (const auto& f : fs) {
        std::vector<Walker::Step> steps;
        for (auto [p, e] : f.factors) {
            int idx = static_cast<int>(std::lower_bound(primes.begin(), primes.end(), p) - primes.begin());
            steps.push_back({idx, e});
        }
        if (steps.size() > 16) throw std::logic_error("too many prime factors");
        w.elems.push_back(std::move(steps));
    }

    mpz_class D = 1;
    for (std::size_t i = 0; i < primes.size(); ++i) {
        mpz_class pk;
        mpz_ui_pow_ui(pk.get_mpz_t(), primes[i], emax[i]);
        D *= pk;
    }
    // Need prod(moduli) > D since 0 <= S <= D.
    std::vector<u64> mods;
    mpz_class M = 1;
    for (u64 q : crt_moduli()) {
        if (std::find(primes.begin(), primes.end(), q) != primes.end()) continue;
        mods.push_back(q);
        M *= mpz_class(std::to_string(q));
        if (M > D) break;
    }
    if (M <= D || static_cast<int>(mods.size()) > kMaxMods)
        throw std::length_error("inclusion-exclusion modulus budget exceeded");
    w.k = static_cast<int>(mods.size());
    for (u64 q : mods) w.mont.emplace_back(q);

    w.cur.assign(primes.size(), 0);
    w.invpow.resize(primes.size());
    for (std::size_t i = 0; i < primes.size(); ++i) {
        w.invpow[i].resize(emax[i] + 1);
        for (int m = 0; m < w.k; ++m) {
            u64 q = mods[m];
            u64 inv = powmod(primes[i] % q, q - 2, q);
            u64 pw = 1;
            for (unsigned e = 0; e <= emax[i]; ++e) {
                w.invpow[i][e][m] = w.mont[m].to(pw);
                pw = mulmod(pw, inv, q);
            }
        }
    }

    std::array<u64, kMaxMods> start{};
    for (int m = 0; m < w.k; ++m) {
        u64 dm = mpz_fdiv_ui(D.get_mpz_t(), mods[m]);
        start[m] = w.mont[m].to(dm);
        w.acc[0][m] += start[m];  // empty subset
    }
    w.walk(0, 0, start.data());

    mpz_class S = 0, prod = 1;
    for (int m = 0; m < w.k; ++m) {
        u64 q = mods[m];
        u64 pos = static_cast<u64>(w.acc[0][m] % q);
        u64 neg = static_cast<u64>(w.acc[1][m] % q);
        u64 r = w.mont[m].from((pos + q - neg) % q);
        // Garner step: S += prod * ((r - S) * prod^-1 mod q)
        u64 s_mod = mpz_fdiv_ui(S.get_mpz_t(), q);
        u64 p_mod = mpz_fdiv_ui(prod.get_mpz_t(), q);
        u64 t = mulmod((r + q - s_mod) % q, powmod(p_mod, q - 2, q), q);
        S += prod * mpz_class(std::to_string(t));
        prod *= mpz_class(std::to_string(q));
    }
    return Rational(S, D);
}

}  // namespace odt
