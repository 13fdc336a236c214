#include "odt/torsion.hpp"

#include <algorithm>
#include <limits>

namespace odt {

namespace {

void check_family_prime(u64 ell, unsigned n) {
    if (ell % 4 != 3 || !is_prime(ell)) throw std::invalid_argument("torsion group: ell must be a prime = 3 mod 4");
    if (n < 1) throw std::invalid_argument("torsion group: n must be positive");
}

u64 checked_mul(u64 a, u64 b) {
    u128 p = (u128)a * b;
    if (p > std::numeric_limits<u64>::max()) throw std::overflow_error("threshold exceeds 64 bits");
    return static_cast<u64>(p);
}

u64 checked_pow(u64 b, unsigned e) {
    u64 r = 1;
    for (unsigned i = 0; i < e; ++i) r = checked_mul(r, b);
    return r;
}

int kind_rank(Kind k) { return static_cast<int>(k); }

}  // namespace

void require_odd(u64 d) {
    if (d == 0 || d % 2 == 0)
        throw std::invalid_argument("degree must be odd and positive (the classification covers odd degrees only)");
}

TorsionGroup TorsionGroup::cyclic(u64 ell, unsigned n) {
    check_family_prime(ell, n);
    return {Kind::Cyclic, ell, n};
}

TorsionGroup TorsionGroup::two_times_cyclic(u64 ell, unsigned n) {
    check_family_prime(ell, n);
    return {Kind::TwoTimesCyclic, ell, n};
}

u64 TorsionGroup::order() const {
    switch (kind) {
        case Kind::Trivial: return 1;
        case Kind::Z2: return 2;
        case Kind::Z4:
        case Kind::Z2xZ2: return 4;
        case Kind::Cyclic: return checked_pow(ell, n);
        case Kind::TwoTimesCyclic: return checked_mul(2, checked_pow(ell, n));
    }
    return 0;
}

std::string TorsionGroup::name() const {
    if (kind == Kind::Z2xZ2) return "Z/2⊕Z/2";
    return "Z/" + std::to_string(order());
}

std::strong_ordering operator<=>(const TorsionGroup& a, const TorsionGroup& b) {
    if (auto c = a.order() <=> b.order(); c != 0) return c;
    if (auto c = kind_rank(a.kind) <=> kind_rank(b.kind); c != 0) return c;
    if (auto c = a.ell <=> b.ell; c != 0) return c;
    return a.n <=> b.n;
}

unsigned delta(u64 ell, unsigned n) {
    if (ell % 4 != 3) throw std::invalid_argument("delta: ell must be 3 mod 4");
    if (n < 1) throw std::invalid_argument("delta: n must be positive");
    if (ell > 3) return 3 * n / 2 - 1;
    return n == 1 ? 0 : 3 * n / 2 - 2;
}

bool is_universal(const TorsionGroup& g) {
    switch (g.kind) {
        case Kind::Cyclic:
        case Kind::TwoTimesCyclic: return g.ell == 3 && g.n == 1;
        default: return true;
    }
}

Threshold threshold(const TorsionGroup& g, const ClassNumberSource& h) {
    if (is_universal(g)) return {g, 1, true};
    const u64 ell = g.ell;
    const bool three_mod_eight = ell % 8 == 3;
    if (g.kind == Kind::Cyclic && !three_mod_eight)
        throw NeverRealizable(g.name() + " never occurs in odd degree (ell = 7 mod 8)");
    u64 v = checked_mul(checked_mul(h.class_number(ell), (ell - 1) / 2), checked_pow(ell, delta(ell, g.n)));
    if (g.kind == Kind::TwoTimesCyclic && three_mod_eight) v = checked_mul(3, v);
    return {g, v, false};
}

bool realizable(const TorsionGroup& g, u64 d, const ClassNumberSource& h) {
    require_odd(d);
    try {
        return d % threshold(g, h).value == 0;
    } catch (const NeverRealizable&) {
        return false;
    } catch (const std::overflow_error&) {
        return false;
    }
}

std::vector<TorsionGroup> groups(u64 d, const ClassNumberSource& h) {
    require_odd(d);
    std::vector<TorsionGroup> out{TorsionGroup::trivial(), TorsionGroup::z2(), TorsionGroup::z4(),
                                  TorsionGroup::z2xz2()};
    for (u64 e : divisors(d)) {
        const u64 ell = 2 * e + 1;
        if (ell % 4 != 3 || !is_prime(ell)) continue;
        const u64 base = checked_mul(h.class_number(ell), e);
        const bool three_mod_eight = ell % 8 == 3;
        for (unsigned n = 1;; ++n) {
            u128 t = base;
            bool over = false;
            for (unsigned i = 0, dl = delta(ell, n); i < dl && !over; ++i) {
                t *= ell;
                over = t > d;
            }
            if (over || t > d) break;
            const u64 tv = static_cast<u64>(t);
            if (three_mod_eight && d % tv == 0) out.push_back({Kind::Cyclic, ell, n});
            u64 two = tv;
            if (three_mod_eight && !(ell == 3 && n == 1)) two = 3 * tv;
            if (d % two == 0) out.push_back({Kind::TwoTimesCyclic, ell, n});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

u64 t_cm(u64 d, const ClassNumberSource& h) {
    u64 best = 0;
    for (const auto& g : groups(d, h)) best = std::max(best, g.order());
    return best;
}

std::string Fingerprint::key() const {
    std::string s;
    for (const auto& g : realized) {
        if (!s.empty()) s += ',';
        s += g.kind == Kind::Cyclic ? 'C' : 'T';
        s += std::to_string(g.ell) + '^' + std::to_string(g.n);
    }
    return s;
}

Fingerprint fingerprint(u64 d, const ClassNumberSource& h) {
    Fingerprint f;
    for (const auto& g : groups(d, h))
        if (!is_universal(g)) f.realized.push_back(g);
    return f;
}

bool is_olson(u64 d, const ClassNumberSource& h) { return fingerprint(d, h).empty(); }

bool equivalent(u64 d1, u64 d2, const ClassNumberSource& h) {
    return fingerprint(d1, h) == fingerprint(d2, h);
}

std::vector<u64> GeneratorSet::values() const {
    std::vector<u64> v;
    v.reserve(elements.size());
    for (const auto& g : elements) v.push_back(g.value);
    return v;
}

GeneratorSet olson_generators(u64 limit, const ClassNumberCache& cache) {
    if (limit > cache.covered_limit())
        throw CacheInsufficient("generator set needs class numbers up to " + std::to_string(limit));
    GeneratorSet gs;
    gs.limit = limit;
    gs.elements.push_back({2, {}});
    cache.for_each([&](u64 ell, u64 h) {
        if (ell <= 3 || ell > limit) return;
        const u64 g = (ell - 1) / 2 * h;
        for (auto& e : gs.elements) {
            if (g % e.value) continue;
            if (g == e.value) e.witnesses.push_back(ell);
            return;
        }
        gs.elements.push_back({g, {ell}});
    });
    std::sort(gs.elements.begin(), gs.elements.end(),
              [](const Generator& a, const Generator& b) { return a.value < b.value; });
    // Insertion order is by ell, not by value, so a later small value may
    // divide an earlier large one.
    std::vector<Generator> kept;
    for (auto& e : gs.elements) {
        bool dominated = std::any_of(kept.begin(), kept.end(),
                                     [&](const Generator& k) { return e.value % k.value == 0; });
        if (!dominated) kept.push_back(std::move(e));
    }
    gs.elements = std::move(kept);
    return gs;
}

u64 r_count(u64 d, const ClassNumberSource& h) {
    require_odd(d);
    const Factorization f = factorize(d);
    u64 r = 0;
    for (u64 e : divisors(f)) {
        for (u64 m : divisors(e)) {
            const u64 ell = 2 * m + 1;
            if (ell % 4 != 3 || !is_prime(ell)) continue;
            if ((u128)h.class_number(ell) * m == e) {
                ++r;
                break;
            }
        }
    }
    return r;
}

}  // namespace odt
