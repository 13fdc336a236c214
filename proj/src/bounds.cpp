#include "odt/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "odt/torsion.hpp"

namespace odt {

namespace {

constexpr int kDyadicBits = 100;

// Residues of m = (l-1)/2 are tracked modulo this; it covers every prime
// power a stratum can forbid at desk scale (3^5, 5^2, 7).
constexpr u64 kBucketMod = 243 * 25 * 7;

mpz_class u128_to_mpz(u128 v) {
    mpz_class hi(std::to_string(static_cast<u64>(v >> 64)));
    mpz_class lo(std::to_string(static_cast<u64>(v)));
    return (hi << 64) + lo;
}

mpz_class u64_to_mpz(u64 v) { return mpz_class(std::to_string(v)); }

// Per-residue sums of floor/ceil(2^100 / m) over primes l = 3 mod 4 in
// (lo, hi], m = (l-1)/2, bucketed by m mod kBucketMod.
struct ReciprocalTable {
    std::vector<u128> floor_sum, ceil_sum;
};

ReciprocalTable sweep_reciprocals(u64 lo, u64 hi, const SweepOptions& opt) {
    ReciprocalTable t;
    t.floor_sum.assign(kBucketMod, 0);
    t.ceil_sum.assign(kBucketMod, 0);
    if (hi <= lo) return t;
    const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(opt.chunks, (hi - lo) / 1024 + 1));
    const u64 width = (hi - lo + chunks - 1) / chunks;
    const unsigned workers = std::max(1u, std::min<unsigned>(opt.workers, static_cast<unsigned>(chunks)));
    std::vector<ReciprocalTable> parts(workers, t);
    std::mutex mu;
    std::size_t done = 0;
    std::vector<std::string> errors(workers);
    const u128 one = (u128)1 << kDyadicBits;

    auto run = [&](unsigned w) {
        try {
            auto& part = parts[w];
            for (std::size_t c = w; c < chunks; c += workers) {
                const u64 a = lo + 1 + c * width;
                if (a > hi) continue;
                const u64 b = std::min<u64>(hi, a + width - 1);
                PrimeStream ps(std::max<u64>(a, 2), b, ResidueFilter{4, {3}}, opt.sieve);
                ps.for_each([&](u64 ell) {
                    const u64 m = (ell - 1) / 2;
                    const u128 q = one / m;
                    const std::size_t r = m % kBucketMod;
                    part.floor_sum[r] += q;
                    part.ceil_sum[r] += q + (q * m != one);
                });
                if (opt.progress) {
                    std::lock_guard lk(mu);
                    opt.progress(++done, chunks);
                }
            }
        } catch (const std::exception& e) {
            errors[w] = e.what();
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> ts;
        for (unsigned w = 0; w < workers; ++w) ts.emplace_back(run, w);
        for (auto& th : ts) th.join();
    }
    for (auto& e : errors)
        if (!e.empty()) throw std::runtime_error(e);
    for (const auto& p : parts)
        for (std::size_t r = 0; r < kBucketMod; ++r) {
            t.floor_sum[r] += p.floor_sum[r];
            t.ceil_sum[r] += p.ceil_sum[r];
        }
    return t;
}

const ReciprocalTable& cached_sweep(u64 lo, u64 hi, const SweepOptions& opt) {
    static std::mutex mu;
    static std::map<std::pair<u64, u64>, ReciprocalTable> cache;
    std::lock_guard lk(mu);
    auto it = cache.find({lo, hi});
    if (it == cache.end()) it = cache.emplace(std::pair{lo, hi}, sweep_reciprocals(lo, hi, opt)).first;
    return it->second;
}

Rational dyadic(const mpz_class& units, u64 extra_den = 1) {
    mpz_class den = u64_to_mpz(extra_den) << kDyadicBits;
    return Rational(units, den);
}

// Adaptive Simpson with an absolute tolerance.
template <class F>
long double simpson_rec(F& f, long double a, long double b, long double fa, long double fm, long double fb,
                        long double whole, long double tol, int depth) {
    const long double m = (a + b) / 2, lm = (a + m) / 2, rm = (m + b) / 2;
    const long double flm = f(lm), frm = f(rm);
    const long double left = (m - a) / 6 * (fa + 4 * flm + fm);
    const long double right = (b - m) / 6 * (fm + 4 * frm + fb);
    const long double diff = left + right - whole;
    if (depth <= 0) throw std::runtime_error("quadrature did not converge");
    if (std::fabs(diff) <= 15 * tol) return left + right + diff / 15;
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

template <class F>
long double simpson(F f, long double a, long double b, long double tol) {
    // Split up front so the recursion never sees a deceptively flat sample.
    const int pieces = 64;
    long double total = 0;
    for (int i = 0; i < pieces; ++i) {
        long double x0 = a + (b - a) * i / pieces, x1 = a + (b - a) * (i + 1) / pieces;
        long double f0 = f(x0), f1 = f(x1), fm = f((x0 + x1) / 2);
        long double whole = (x1 - x0) / 6 * (f0 + 4 * fm + f1);
        total += simpson_rec(f, x0, x1, f0, fm, f1, whole, tol / pieces, 50);
    }
    return total;
}

// What the tail needs to know about the set it is bounding.
struct Model {
    bool family_sum = false;
    bool odd = false;
    u64 lcm = 1;
    std::vector<u64> forbidden;
    std::vector<std::pair<u64, unsigned>> powers;  // forbidden odd prime powers p^k (least k per p)
    u64 residue_mod = 1;                           // product of the p^k that kBucketMod resolves
};

unsigned val(u64 x, u64 p) {
    unsigned v = 0;
    while (x && x % p == 0) { x /= p; ++v; }
    return v;
}

Model make_model(const StratumConstraint& c) {
    Model m;
    m.odd = c.odd;
    m.lcm = c.lcm;
    m.forbidden = c.forbidden;
    std::map<u64, unsigned> best;
    for (u64 f : c.forbidden) {
        auto fac = factorize(f);
        if (fac.factors.size() != 1 || fac.factors[0].first == 2) continue;
        auto [p, k] = fac.factors[0];
        auto it = best.find(p);
        if (it == best.end() || k < it->second) best[p] = k;
    }
    for (auto [p, k] : best) {
        m.powers.emplace_back(p, k);
        u64 pk = 1;
        for (unsigned i = 0; i < k; ++i) pk *= p;
        if (kBucketMod % pk == 0) m.residue_mod *= pk;
    }
    return m;
}

// Weight of one l beyond the explicit range, as a function of m mod
// residue_mod: an upper bound for g * density{n in the model : g | n} over
// all g that are multiples of m. Prime powers the residue cannot resolve are
// treated as unknown (no exclusion, largest factor).
Rational analytic_weight(const Model& md, u64 r) {
    Rational w = md.odd ? Rational(1, 2) : Rational(1);
    for (auto [p, k] : md.powers) {
        u64 pk = 1;
        for (unsigned i = 0; i < k; ++i) pk *= p;
        const unsigned vl = val(md.lcm, p);
        unsigned vm = 0;
        if (md.residue_mod % pk == 0) {
            vm = r % pk == 0 ? k : val(r % pk, p);
        }
        const unsigned v = std::max(vm, vl);
        if (v >= k) return Rational(0);
        u64 rest = 1;
        for (unsigned i = v; i < k; ++i) rest *= p;
        w *= Rational::from_u64(rest - 1, rest);
    }
    return w;
}

// Exact density of {n in the model : g | n}, ignoring forbidden thresholds
// other than prime powers; zero when some forbidden threshold divides
// lcm(g, L).
Rational explicit_term(const Model& md, u64 g) {
    const u128 big = (u128)g / std::gcd(g, md.lcm) * md.lcm;
    if (big > std::numeric_limits<u64>::max()) return reciprocal(g);
    const u64 M = static_cast<u64>(big);
    for (u64 f : md.forbidden)
        if (M % f == 0) return Rational(0);
    Rational w = md.odd ? Rational(1, 2) : Rational(1);
    for (auto [p, k] : md.powers) {
        const unsigned v = val(M, p);
        if (v >= k) return Rational(0);
        u64 rest = 1;
        for (unsigned i = v; i < k; ++i) rest *= p;
        w *= Rational::from_u64(rest - 1, rest);
    }
    return w / Rational::from_u64(M);
}

mpz_class ceil_units(const Rational& x) {
    mpz_class num = x.numerator() << kDyadicBits;
    mpz_class q;
    mpz_cdiv_q(q.get_mpz_t(), num.get_mpz_t(), x.denominator().get_mpz_t());
    return q;
}

// Members of the threshold family of one l that exceed z. In union mode only
// members not divisible by another member above z are returned; in sum mode
// every member up to 2^62 is returned and `truncated` is set.
std::vector<u64> members_above(u64 ell, u64 h, u64 z, bool all, bool& truncated) {
    std::vector<u64> out;
    const u64 base = h * ((ell - 1) / 2);
    const bool three_mod_eight = ell % 8 == 3;
    constexpr u64 cap = u64{1} << 62;
    truncated = false;
    for (unsigned n = 1;; ++n) {
        u128 t = base;
        for (unsigned i = 0, dl = delta(ell, n); i < dl && t <= cap; ++i) t *= ell;
        if (t > cap) {
            truncated = true;
            break;
        }
        const u64 tv = static_cast<u64>(t);
        const u64 two = three_mod_eight ? ((ell == 3 && n == 1) ? 1 : 3 * tv) : tv;
        if (three_mod_eight && tv > z) out.push_back(tv);
        if (two > z) out.push_back(two);
        if (!all && tv > z) break;
    }
    if (!all) out = prune_dominated(std::move(out));
    return out;
}

TailEstimate tail_impl(const Model& md, u64 z, const ClassNumberCache& cache, const TailOptions& opt) {
    const u64 L0 = opt.explicit_limit;
    if (z < 1000) throw std::invalid_argument("tail: z below the explicit-enumeration floor (1000)");
    if (L0 < 2 * z + 1) throw std::invalid_argument("tail: explicit range must reach 2z+1");
    if (L0 < kWatkinsDisc) throw std::invalid_argument("tail: explicit range must reach the Watkins bound");
    if (L0 >= kWatkinsLimit) throw std::invalid_argument("tail: explicit range too large");
    if (cache.covered_limit() < L0) throw CacheInsufficient("tail needs class numbers up to " + std::to_string(L0));

    TailEstimate te;
    te.z = z;

    // ell <= L0 with exact class numbers.
    mpz_class units = 0;
    const mpz_class trunc_units = mpz_class(1) << (kDyadicBits - 60);
    cache.for_each([&](u64 ell, u64 h) {
        if (ell > L0) return;
        bool truncated = false;
        for (u64 g : members_above(ell, h, z, md.family_sum, truncated)) {
            if (md.family_sum) {
                mpz_class q;
                mpz_class one = mpz_class(1) << kDyadicBits;
                mpz_cdiv_q(q.get_mpz_t(), one.get_mpz_t(), u64_to_mpz(g).get_mpz_t());
                units += q;
            } else {
                Rational t = explicit_term(md, g);
                if (!t.is_zero()) units += ceil_units(t);
            }
        }
        // Remaining ladder terms beyond 2^62 sum to less than 3 * 2^-62.
        if (md.family_sum && truncated) units += trunc_units;
    });
    te.explicit_part = dyadic(units);

    // (L0, 2.8e9]: h > 100.
    const auto& tab = cached_sweep(L0, kWatkinsLimit, opt.sweep);
    Rational weight_max(0);
    std::map<u64, Rational> weights;  // residue of m mod residue_mod
    auto weight_of = [&](u64 r) -> const Rational& {
        auto it = weights.find(r);
        if (it != weights.end()) return it->second;
        Rational w = md.family_sum
                         ? Rational(4, 3) * (Rational(1) + Rational(1) / (Rational::from_u64(L0) * Rational::from_u64(L0 - 1)))
                         : analytic_weight(md, r);
        return weights.emplace(r, w).first->second;
    };
    std::map<u64, mpz_class> grouped;
    for (u64 r = 0; r < kBucketMod; ++r) {
        if (tab.ceil_sum[r] == 0) continue;
        grouped[r % md.residue_mod] += u128_to_mpz(tab.ceil_sum[r]);
    }
    Rational watkins(0);
    for (auto& [r, s] : grouped) watkins += weight_of(r) * dyadic(s, 100);
    te.watkins_part = watkins;

    // Beyond 2.8e9: Brun-Titchmarsh over the residue classes of l mod 4*residue_mod.
    const u64 q = 4 * md.residue_mod;
    Rational class_weight(0);
    u64 phi = 0;
    for (u64 a = 1; a < q; ++a) {
        if (std::gcd(a, q) != 1) continue;
        ++phi;
        if (a % 4 != 3) continue;
        const u64 r = ((a - 1) / 2) % md.residue_mod;
        const Rational& w = weight_of(r);
        class_weight += w;
        if (w > weight_max) weight_max = w;
    }
    const long double coef = 2 * class_weight.to_long_double() / static_cast<long double>(phi);
    te.siegel_part = siegel_integral(static_cast<long double>(kWatkinsLimit), static_cast<long double>(q), coef);
    te.exceptional_part = weight_max.to_long_double() / (100.0L * ((kWatkinsLimit - 1) / 2.0L));

    // Round the floating parts up generously before turning them exact.
    const long double analytic = (te.siegel_part + te.exceptional_part) * (1 + 1e-12L) + 1e-18L;
    te.total_upper = te.explicit_part + te.watkins_part + Rational::from_long_double(analytic);
    return te;
}

}  // namespace

long double far_epsilon() { return 0.999L / std::log(1e6L); }

Rational sum1_partial(u64 cutoff, const ClassNumberCache& cache, bool long_run) {
    if (cutoff > kSum1Ceiling && !long_run)
        throw std::invalid_argument("sum1 cutoff above " + std::to_string(kSum1Ceiling) + " requires long-run mode");
    if (cutoff > cache.covered_limit()) throw CacheInsufficient("sum1 needs class numbers up to " + std::to_string(cutoff));
    std::vector<u64> dens;
    cache.for_each([&](u64 ell, u64 h) {
        if (ell <= 3 || ell > cutoff) return;
        const u64 g = (ell - 1) / 2 * h;
        if (std::gcd(g, u64{30}) == 1) dens.push_back(g);
    });
    if (dens.empty()) return Rational(0);
    // Balanced pairwise sum keeps the intermediate sizes even.
    std::vector<std::pair<mpz_class, mpz_class>> level;
    level.reserve(dens.size());
    for (u64 g : dens) level.emplace_back(1, u64_to_mpz(g));
    while (level.size() > 1) {
        std::vector<std::pair<mpz_class, mpz_class>> next;
        next.reserve((level.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
            auto& [a, b] = level[i];
            auto& [c, d] = level[i + 1];
            next.emplace_back(a * d + c * b, b * d);
        }
        if (level.size() % 2) next.push_back(std::move(level.back()));
        level = std::move(next);
    }
    return Rational(level[0].first, level[0].second);
}

DyadicBound sum2(u64 lo, u64 hi, const SweepOptions& opt) {
    if (lo > hi) throw std::invalid_argument("sum2: range inverted");
    if (hi > kSieveMaxHi) throw std::length_error("sum2: range too large");
    DyadicBound out{Rational(0), Rational(0)};
    if (lo == hi) return out;
    ReciprocalTable t = sweep_reciprocals(lo, hi, opt);
    mpz_class fl = 0, ce = 0;
    for (u64 r = 0; r < kBucketMod; ++r) {
        if (r % 3 == 0 || r % 5 == 0) continue;
        fl += u128_to_mpz(t.floor_sum[r]);
        ce += u128_to_mpz(t.ceil_sum[r]);
    }
    out.lower = dyadic(fl, 100);
    out.upper = dyadic(ce, 100);
    return out;
}

long double siegel_integral(long double a, long double q, long double coef) {
    const long double eps0 = far_epsilon();
    const long double beta = 0.5L - eps0;
    const long double switch_u = kSiegelSwitchLog10 * std::log(10.0L);
    auto pi_bound = [&](long double t) { return t / std::log(t / q); };
    // -(d/dt) log t / ((t-1) sqrt t)
    auto g1 = [&](long double u) {
        const long double t = std::exp(u), lt = u, s = std::sqrt(t);
        const long double d = lt / ((t - 1) * (t - 1) * s) + lt / (2 * (t - 1) * t * s) - 1 / (t * (t - 1) * s);
        return pi_bound(t) * d * t;
    };
    // -(d/dt) 1 / ((t-1) t^beta)
    auto g2 = [&](long double u) {
        const long double t = std::exp(u), tb = std::exp(beta * u);
        const long double d = 1 / ((t - 1) * (t - 1) * tb) + beta / ((t - 1) * t * tb);
        return pi_bound(t) * d * t;
    };
    const long double tol = 1e-8L / std::max<long double>(coef * 2 / kSiegelConst, 1e-30L);
    const long double ua = std::log(a);
    // The first floor is integrated to infinity; past the last sample the
    // integrands are below t^-0.4, whose remaining mass is far under 1e-40.
    const long double i1 = simpson(g1, ua, switch_u, tol) + simpson(g1, switch_u, switch_u + 400, tol) + 1e-40L;
    const long double i2 = simpson(g2, switch_u, switch_u + 2000, tol) + 1e-40L;
    return coef * ((2 / kSiegelConst) * i1 + (2 / kFarConst) * i2) + 2 * 1e-8L;
}

Sum3 sum3_tail() {
    Sum3 s;
    s.exceptional = 1.0L / ((static_cast<long double>(kWatkinsLimit) - 1) / 2 * 100);
    s.main = siegel_integral(static_cast<long double>(kWatkinsLimit), 60, 3.0L / 8);
    return s;
}

TailEstimate certified_tail(u64 z, const ClassNumberCache& cache, const TailOptions& opt) {
    Model md;
    md.family_sum = true;
    return tail_impl(md, z, cache, opt);
}

TailEstimate certified_stratum_tail(const StratumConstraint& c, const ClassNumberCache& cache, const TailOptions& opt) {
    return tail_impl(make_model(c), c.z, cache, opt);
}

TailBound stratum_tail_bound(const ClassNumberCache& cache, const TailOptions& opt) {
    return [&cache, opt](const StratumConstraint& c) -> std::optional<Rational> {
        if (c.z < 1000 || opt.explicit_limit < 2 * c.z + 1) return std::nullopt;
        return certified_stratum_tail(c, cache, opt).total_upper;
    };
}

std::vector<RatioRecord> record_search(u64 limit, const ClassNumberCache& cache) {
    if (limit > cache.covered_limit()) throw CacheInsufficient("record search needs class numbers up to " + std::to_string(limit));
    OnDemandClassNumbers h(&cache);
    std::vector<RatioRecord> out;
    double best = std::numeric_limits<double>::infinity();
    cache.for_each([&](u64 ell, u64 hl) {
        if (ell <= 3 || ell > limit) return;
        const double lv = l_value(ell, cache).value;
        const double prod = lv * std::log(std::log(static_cast<double>(ell)));
        if (!(prod < best)) return;
        best = prod;
        RatioRecord r;
        r.ell = ell;
        r.d = hl * ((ell - 1) / 2);
        r.t_cm = t_cm(r.d, h);
        r.l_value_product = prod;
        const double dd = static_cast<double>(r.d);
        r.ratio = static_cast<double>(r.t_cm) / std::pow(dd * std::log(std::log(dd)), 2.0 / 3.0);
        out.push_back(r);
    });
    return out;
}

}  // namespace odt
