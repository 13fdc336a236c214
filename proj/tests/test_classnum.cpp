#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "odt/classnum.hpp"
#include "oracles.hpp"

using namespace odt;

TEST_CASE("single class numbers") {
    CHECK(class_number(7) == 1);
    CHECK(class_number(167) == 11);
    CHECK(class_number(163) == 1);
    CHECK(class_number(3) == 1);
    CHECK(class_number(23) == 3);
    CHECK_THROWS_AS(class_number(15), std::invalid_argument);
    CHECK_THROWS_AS(class_number(13), std::invalid_argument);
    for (u64 ell : {3, 7, 11, 19, 43, 67, 163}) CHECK(class_number(ell) == 1);
}

TEST_CASE("batch to 50") {
    auto c = batch_class_numbers(50);
    std::vector<std::pair<u64, u64>> got;
    c.for_each([&](u64 ell, u64 h) { got.emplace_back(ell, h); });
    CHECK(got == std::vector<std::pair<u64, u64>>{{3, 1}, {7, 1}, {11, 1}, {19, 1}, {23, 3}, {31, 3}, {43, 1}, {47, 5}});
    CHECK(c.covered_limit() == 50);
}

TEST_CASE("batch to 3") {
    auto c = batch_class_numbers(3);
    CHECK(c.size() == 1);
    CHECK(c.class_number(3) == 1);
}

TEST_CASE("batch and direct agree with both oracles up to 1e4") {
    auto c = batch_class_numbers(10000);
    std::size_t n = 0;
    for (u64 ell : oracle::primes(10000)) {
        if (ell % 4 != 3) continue;
        ++n;
        const u64 forms = oracle::form_count(ell);
        REQUIRE(c.class_number(ell) == forms);
        REQUIRE(class_number(ell) == forms);
        REQUIRE(oracle::dirichlet_class_number(ell) == forms);
        REQUIRE(forms % 2 == 1);
    }
    CHECK(c.size() == n);
}

TEST_CASE("batch at 1e5 has 4808 entries; sampled entries match the oracle") {
    auto c = batch_class_numbers(100000, 2);
    CHECK(c.size() == 4808);
    std::size_t i = 0;
    c.for_each([&](u64 ell, u64 h) {
        if (i++ % 37 == 0) REQUIRE(h == oracle::dirichlet_class_number(ell));
    });
}

TEST_CASE("extension never changes existing entries and matches a fresh batch") {
    auto small = batch_class_numbers(20000);
    auto grown = small;
    grown.extend(60000);
    small.for_each([&](u64 ell, u64 h) { REQUIRE(grown.class_number(ell) == h); });
    CHECK(grown == batch_class_numbers(60000, 3));
}

TEST_CASE("cache lookups") {
    auto c = batch_class_numbers(1000);
    CHECK_THROWS_AS(c.class_number(1019), CacheInsufficient);
    CHECK_THROWS_AS(c.class_number(21), std::invalid_argument);
    CHECK(!c.find(21));
    CHECK(c.find(23) == 3u);
    OnDemandClassNumbers od(&c);
    CHECK(od.class_number(1019) == oracle::form_count(1019));
    CHECK(od.class_number(23) == 3);
}

TEST_CASE("file format round trip") {
    auto c = batch_class_numbers(50);
    std::ostringstream os;
    c.write(os);
    CHECK(os.str() == "#covered_limit=50\n3,1\n7,1\n11,1\n19,1\n23,3\n31,3\n43,1\n47,5\n");
    std::istringstream is(os.str());
    CHECK(ClassNumberCache::read(is) == c);
}

TEST_CASE("corrupt cache files are rejected") {
    auto bad = [](const std::string& s) {
        std::istringstream is(s);
        return ClassNumberCache::read(is);
    };
    CHECK_THROWS(bad(""));
    CHECK_THROWS(bad("3,1\n"));
    CHECK_THROWS(bad("#covered_limit=10\n3,1\n"));           // 7 missing
    CHECK_THROWS(bad("#covered_limit=10\n7,1\n3,1\n"));      // descending
    CHECK_THROWS(bad("#covered_limit=10\n3,1\n7,2\n"));      // even h
    CHECK_THROWS(bad("#covered_limit=20\n3,1\n7,1\n11,1\n15,1\n19,1\n"));  // 15 not prime
    CHECK_THROWS(bad("#covered_limit=10\n3,1\n7,x\n"));
    CHECK_NOTHROW(bad("#covered_limit=10\n3,1\n7,1\n"));
}

TEST_CASE("L-values") {
    auto c = batch_class_numbers(200);
    CHECK(l_value(7, c).value == doctest::Approx(1.18742).epsilon(1e-5));
    CHECK(l_value(163, c).value == doctest::Approx(0.24608).epsilon(1e-4));
    CHECK(l_value(23, c).value == doctest::Approx(1.965201).epsilon(1e-6));
    CHECK(std::abs(l_value(167, c).value - M_PI * 11 / std::sqrt(167.0)) < 1e-12);
    CHECK_THROWS_AS(l_value(3, c), std::invalid_argument);
}
