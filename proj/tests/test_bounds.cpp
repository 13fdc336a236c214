#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "odt/bounds.hpp"
#include "odt/torsion.hpp"
#include "oracles.hpp"

using namespace odt;

namespace {
const ClassNumberCache& cache() {
    static ClassNumberCache c = batch_class_numbers(kWatkinsDisc);
    return c;
}

TailOptions tail_options() {
    TailOptions o;
    o.explicit_limit = kWatkinsDisc;
    return o;
}
}  // namespace

TEST_CASE("sum1 partial sums") {
    const auto& c = cache();
    CHECK(sum1_partial(3, c) == Rational(0));
    Rational hand(0);
    for (u64 ell : oracle::primes(100)) {
        if (ell <= 3 || ell % 4 != 3) continue;
        const u64 g = (ell - 1) / 2 * oracle::form_count(ell);
        if (std::gcd(g, u64{30}) == 1) hand += Rational::from_u64(1, g);
    }
    CHECK(sum1_partial(100, c) == hand);
    // 59 and 83 pass gcd((l-1)/2, 30) = 1 but have h = 3, so nothing below 100 survives.
    CHECK(hand == Rational(0));
    CHECK(sum1_partial(1000, c) > Rational(0));
    Rational prev(0);
    for (u64 cut : {1000, 10000, 100000, 1000000, 2000000}) {
        Rational s = sum1_partial(cut, c);
        CHECK(s >= prev);
        CHECK(s < Rational(788, 100000));
        prev = s;
    }
    CHECK_THROWS_AS(sum1_partial(kSum1Ceiling + 1, c), std::invalid_argument);
    CHECK_THROWS_AS(sum1_partial(3000000, c, true), CacheInsufficient);
}

TEST_CASE("sum2 on small ranges matches direct summation") {
    Rational exact(0);
    for (u64 ell : oracle::primes(10000)) {
        if (ell <= 1000) continue;
        const u64 m = (ell - 1) / 2;
        if (std::gcd(m, u64{30}) == 1) exact += Rational::from_u64(1, 100 * m);
    }
    DyadicBound b = sum2(1000, 10000);
    CHECK(b.lower <= exact);
    CHECK(exact <= b.upper);
    CHECK(b.upper - b.lower < Rational(1, 1000000000) * Rational(1, 1000000000));
    DyadicBound empty = sum2(1000000000, 1000000000);
    CHECK(empty.upper == Rational(0));
    CHECK_THROWS_AS(sum2(10, 5), std::invalid_argument);
}

TEST_CASE("sum2 does not depend on chunking or worker count") {
    SweepOptions a;
    a.chunks = 1;
    SweepOptions b;
    b.chunks = 37;
    b.workers = 3;
    b.sieve.segment_odds = 12345;
    DyadicBound x = sum2(100000000, 130000000, a), y = sum2(100000000, 130000000, b);
    CHECK(x.lower == y.lower);
    CHECK(x.upper == y.upper);
}

TEST_CASE("progress callback reports every chunk") {
    SweepOptions o;
    o.chunks = 5;
    std::vector<std::size_t> seen;
    o.progress = [&](std::size_t k, std::size_t total) {
        CHECK(total == 5);
        seen.push_back(k);
    };
    sum2(1000000, 2000000, o);
    CHECK(seen.size() == 5);
}

TEST_CASE("sum3") {
    Sum3 s = sum3_tail();
    CHECK(s.exceptional < 1e-11L);
    CHECK(s.main < 0.001220L);
    CHECK(s.main > 0.0011L);
    CHECK(far_epsilon() == doctest::Approx(0.0723136).epsilon(1e-5));
    // Integrals shrink as the start moves right and scale linearly in the coefficient.
    const long double a = siegel_integral(3e9L, 60, 1), b = siegel_integral(3e10L, 60, 1);
    CHECK(std::isfinite(static_cast<double>(a)));
    CHECK(a > b);
    CHECK(b > 0);
    CHECK(std::abs(static_cast<double>(siegel_integral(3e9L, 60, 2) - 2 * a)) < 1e-7);
}

TEST_CASE("family tail") {
    const auto& c = cache();
    const auto opt = tail_options();
    CHECK_THROWS_AS(certified_tail(999, c, opt), std::invalid_argument);
    TailOptions too_small = opt;
    too_small.explicit_limit = 1000000;
    CHECK_THROWS_AS(certified_tail(5000, c, too_small), std::invalid_argument);

    // Explicit part against a direct loop over every threshold above z.
    const u64 z = 1000000;
    TailEstimate te = certified_tail(z, c, opt);
    long double direct = 0;
    c.for_each([&](u64 ell, u64 h) {
        const long double base = static_cast<long double>(h) * ((ell - 1) / 2);
        for (unsigned n = 1; n < 40; ++n) {
            long double t = base * std::pow(static_cast<long double>(ell), delta(ell, n));
            if (t > 1e30L) break;
            if (ell % 8 == 3) {
                if (!(ell == 3 && n == 1)) {
                    if (t > z) direct += 1 / t;
                    if (3 * t > z) direct += 1 / (3 * t);
                }
            } else if (t > z) {
                direct += 1 / t;
            }
        }
    });
    const long double ex = te.explicit_part.to_long_double();
    CHECK(ex >= direct * (1 - 1e-15L));
    CHECK(ex <= direct * (1 + 1e-10L));
    CHECK(te.total_upper > te.explicit_part + te.watkins_part);

    Rational prev = certified_tail(1000, c, opt).total_upper;
    for (u64 zz : {5000, 20000, 100000, 400000, 1000000}) {
        Rational cur = certified_tail(zz, c, opt).total_upper;
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("stratum tail is at most half the family tail") {
    const auto& c = cache();
    const auto opt = tail_options();
    for (u64 z : {5000, 32927}) {
        const Rational family = certified_tail(z, c, opt).total_upper;
        StratumConstraint olson{z, 1, threshold_values(z, c, 2 * z + 1), true};
        const Rational st = certified_stratum_tail(olson, c, opt).total_upper;
        CHECK(st > Rational(0));
        CHECK(st <= family / Rational(2));
        StratumConstraint three{z, 3, {}, true};
        CHECK(certified_stratum_tail(three, c, opt).total_upper <= family / Rational(2));
    }
    auto bound = stratum_tail_bound(c, opt);
    CHECK(!bound(StratumConstraint{500, 1, {}, true}));
    CHECK(bound(StratumConstraint{5000, 1, {}, true}).has_value());
}

TEST_CASE("records") {
    const auto& c = cache();
    auto small = record_search(200, c);
    bool has163 = false;
    for (const auto& r : small) has163 |= r.ell == 163;
    CHECK(has163);
    const double window = std::pow(24 * std::exp(0.5772156649015329) / M_PI, 2.0 / 3.0) * 1.25;
    auto rs = record_search(100000, c);
    REQUIRE(!rs.empty());
    for (const auto& r : rs) {
        CHECK(r.d % 2 == 1);
        CHECK(r.d == c.class_number(r.ell) * ((r.ell - 1) / 2));
        CHECK(r.t_cm >= r.ell);
        if (r.d >= 20) CHECK(r.ratio <= window);
    }
    for (std::size_t i = 1; i < rs.size(); ++i) CHECK(rs[i].l_value_product < rs[i - 1].l_value_product);
    CHECK_THROWS_AS(record_search(kWatkinsDisc + 100, c), CacheInsufficient);
}
