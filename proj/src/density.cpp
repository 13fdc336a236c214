#include "odt/density.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "odt/torsion.hpp"

namespace odt {

std::vector<u64> normalize_set(std::vector<u64> h) {
    for (u64 x : h)
        if (x == 0) throw std::invalid_argument("set of multiples cannot contain 0");
    std::sort(h.begin(), h.end());
    h.erase(std::unique(h.begin(), h.end()), h.end());
    return h;
}

std::vector<u64> prune_dominated(std::vector<u64> h) {
    h = normalize_set(std::move(h));
    std::vector<u64> kept;
    for (u64 x : h) {
        bool dominated = false;
        for (u64 k : kept)
            if (x % k == 0) { dominated = true; break; }
        if (!dominated) kept.push_back(x);
    }
    return kept;
}

RelprimeSplit factor_out_relprime(const std::vector<u64>& input) {
    std::vector<u64> h = normalize_set(input);
    RelprimeSplit out;
    for (std::size_t i = 0; i < h.size(); ++i) {
        bool coprime = true;
        for (std::size_t j = 0; j < h.size() && coprime; ++j)
            if (i != j && std::gcd(h[i], h[j]) != 1) coprime = false;
        (coprime ? out.rel : out.rest).push_back(h[i]);
    }
    return out;
}

PrimeSplit p_split(const std::vector<u64>& input, u64 p) {
    if (!is_prime(p)) throw std::invalid_argument("p_split: p must be prime");
    std::vector<u64> h = normalize_set(input);
    PrimeSplit out;
    for (u64 x : h) {
        out.scaled.push_back(x % p == 0 ? x / p : x);
        if (x % p) out.sieved.push_back(x);
    }
    out.scaled = normalize_set(std::move(out.scaled));
    return out;
}

Rational relprime_factor(const std::vector<u64>& rel) {
    Rational r(1);
    for (u64 x : rel) r *= Rational::from_u64(x - 1, x);
    return r;
}

u64 DensityEngine::split_prime(const std::vector<u64>& h) {
    std::map<u64, std::size_t> counts;
    for (u64 x : h)
        for (auto [p, e] : factorize(x).factors) ++counts[p];
    u64 best = 0;
    std::size_t best_count = 0;
    for (auto [p, c] : counts)
        if (c > best_count) { best = p; best_count = c; }
    return best;
}

Rational DensityEngine::complement(const std::vector<u64>& h) {
    return complement_pruned(prune_dominated(h));
}

Rational DensityEngine::complement_pruned(const std::vector<u64>& h) {
    if (h.empty()) return Rational(1);
    if (h.front() == 1) return Rational(0);
    if (auto it = memo_.find(h); it != memo_.end()) return it->second;

    RelprimeSplit parts = factor_out_relprime(h);
    Rational r = relprime_factor(parts.rel);
    if (parts.rest.size() <= opt_.direct_cap) {
        r *= inclusion_exclusion_complement(parts.rest);
    } else {
        const u64 p = split_prime(parts.rest);
        PrimeSplit s = p_split(parts.rest, p);
        Rational scaled = complement_pruned(prune_dominated(s.scaled));
        Rational sieved = complement_pruned(prune_dominated(s.sieved));
        r *= Rational::from_u64(1, p) * scaled + Rational::from_u64(p - 1, p) * sieved;
    }
    memo_.emplace(h, r);
    return r;
}

Rational DensityEngine::density(const std::vector<u64>& h, Universe u) {
    if (u == Universe::All) return Rational(1) - complement(h);
    std::vector<u64> odd;
    for (u64 x : normalize_set(h))
        if (x % 2) odd.push_back(x);
    return Rational(1, 2) * (Rational(1) - complement(odd));
}

Rational density_of_multiples(const std::vector<u64>& h, Universe u) {
    DensityEngine e;
    return e.density(h, u);
}

OlsonChain olson_chain(const std::vector<u64>& h, u64 split_prime, DensityOptions opt) {
    DensityEngine engine(opt);
    OlsonChain c;
    c.set = normalize_set(h);
    auto top = factor_out_relprime(c.set);
    c.rel = top.rel;
    c.rest = top.rest;
    if (c.rest.empty()) {
        c.rest_density = Rational(0);
        c.upper = relprime_factor(c.rel);
        return c;
    }
    c.split_prime = split_prime ? split_prime : DensityEngine::split_prime(c.rest);
    auto split = p_split(c.rest, c.split_prime);
    c.scaled = split.scaled;
    c.sieved = split.sieved;
    c.sieved_density = Rational(1) - engine.complement(c.sieved);
    auto inner = factor_out_relprime(c.scaled);
    c.scaled_rel = inner.rel;
    c.scaled_rest = prune_dominated(inner.rest);
    c.scaled_rest_complement = engine.complement(c.scaled_rest);
    c.scaled_complement = relprime_factor(c.scaled_rel) * c.scaled_rest_complement;
    const Rational p(static_cast<long>(c.split_prime));
    c.rest_density = (Rational(1) - c.scaled_complement) / p +
                     (Rational(1) - Rational(1) / p) * c.sieved_density;
    c.upper = relprime_factor(c.rel) * (Rational(1) - c.rest_density);
    return c;
}

Rational olson_density_interval_upper(const ClassNumberCache& cache, u64 limit, std::size_t take) {
    auto values = olson_generators(limit, cache).values();
    if (take > values.size()) throw std::invalid_argument("generator set has fewer elements than requested");
    values.resize(take);
    DensityEngine engine;
    return engine.complement(values);
}

std::vector<u64> threshold_values(u64 z, const ClassNumberSource& h, u64 ell_limit) {
    std::vector<u64> out;
    const u64 lmax = std::min<u64>(ell_limit, 2 * z + 1);
    if (lmax < 3) return out;
    PrimeStream ps(3, lmax, ResidueFilter{4, {3}});
    ps.for_each([&](u64 ell) {
        const u64 base = h.class_number(ell) * ((ell - 1) / 2);
        if (base > z) return;
        const bool three_mod_eight = ell % 8 == 3;
        for (unsigned n = 1;; ++n) {
            u128 t = base;
            for (unsigned i = 0, dl = delta(ell, n); i < dl && t <= z; ++i) t *= ell;
            if (t > z) break;
            u64 tv = static_cast<u64>(t);
            if (three_mod_eight) {
                if (tv > 1) out.push_back(tv);
                u64 two = (ell == 3 && n == 1) ? 1 : 3 * tv;
                if (two > 1 && two <= z) out.push_back(two);
            } else {
                out.push_back(tv);
            }
        }
    });
    return normalize_set(std::move(out));
}

StratumResult stratum_density(const StratumQuery& q, const ClassNumberCache& cache, const TailBound& tail,
                              DensityEngine* engine) {
    require_odd(q.d);
    DensityEngine local;
    if (!engine) engine = &local;
    if (2 * q.z + 1 > cache.covered_limit())
        throw CacheInsufficient("stratum needs class numbers up to " + std::to_string(2 * q.z + 1));
    for (const auto& g : groups(q.d, cache)) {
        const u64 t = threshold(g, cache).value;
        if (t > q.z)
            throw std::invalid_argument("z must be at least every threshold dividing d (" + std::to_string(t) + ")");
    }

    StratumResult res;
    std::vector<u64> forbidden;
    for (u64 v : threshold_values(q.z, cache, cache.covered_limit())) {
        if (q.d % v == 0) {
            res.divisor_thresholds.push_back(v);
            res.lcm = std::lcm(res.lcm, v);
        } else {
            forbidden.push_back(v);
        }
    }
    forbidden = prune_dominated(std::move(forbidden));
    std::vector<u64> reduced;
    for (u64 f : forbidden) reduced.push_back(f / std::gcd(f, res.lcm));
    res.reduced_forbidden = prune_dominated(std::move(reduced));

    Rational upper(0);
    if (!res.reduced_forbidden.empty() && res.reduced_forbidden.front() == 1) {
        res.inconsistent = true;
    } else {
        upper = engine->complement(res.reduced_forbidden) / Rational::from_u64(2 * res.lcm);
    }

    StratumConstraint sc{q.z, res.lcm, forbidden, true};
    std::optional<Rational> t = tail ? tail(sc) : std::nullopt;
    res.tail_available = t.has_value();
    res.tail = t.value_or(upper);
    Rational lower = upper - res.tail;
    if (lower.sign() < 0) lower = Rational(0);
    res.interval = {lower, upper};
    return res;
}

}  // namespace odt
