#pragma once

#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "odt/numtheory.hpp"

namespace odt {

struct CacheInsufficient : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Anything that can answer h(-ell) for primes ell = 3 mod 4.
class ClassNumberSource {
public:
    virtual ~ClassNumberSource() = default;
    virtual u64 class_number(u64 ell) const = 0;
};

// Number of reduced forms of discriminant -ell, by direct enumeration.
u64 class_number(u64 ell);

// Dense table of h(-ell) for every prime ell = 3 mod 4 up to covered_limit.
class ClassNumberCache : public ClassNumberSource {
public:
    ClassNumberCache() = default;

    u64 covered_limit() const { return covered_; }
    std::size_t size() const { return entries_; }
    std::optional<std::uint32_t> find(u64 ell) const;
    u64 class_number(u64 ell) const override;

    // Computes every missing entry up to new_limit. Existing entries are kept.
    void extend(u64 new_limit, unsigned workers = 1);

    template <class F>
    void for_each(F&& f) const {
        for (std::size_t i = 0; i < h_.size(); ++i)
            if (h_[i]) f(u64{4 * i + 3}, u64{h_[i]});
    }

    void write(std::ostream& os) const;
    static ClassNumberCache read(std::istream& is);
    void save(const std::string& path) const;
    static ClassNumberCache load(const std::string& path);

    friend bool operator==(const ClassNumberCache& a, const ClassNumberCache& b) {
        return a.covered_ == b.covered_ && a.h_ == b.h_;
    }

private:
    u64 covered_ = 0;
    std::size_t entries_ = 0;
    std::vector<std::uint32_t> h_;  // index (ell - 3) / 4, zero when ell is not prime
};

ClassNumberCache batch_class_numbers(u64 limit, unsigned workers = 1);

// Cache lookups with a memoized fallback to direct enumeration, for
// scattered large ell that no dense table covers.
class OnDemandClassNumbers : public ClassNumberSource {
public:
    explicit OnDemandClassNumbers(const ClassNumberCache* base = nullptr) : base_(base) {}
    u64 class_number(u64 ell) const override;

private:
    const ClassNumberCache* base_;
    mutable std::mutex mu_;
    mutable std::unordered_map<u64, u64> memo_;
};

struct LValue {
    u64 ell = 0;
    double value = 0;
};

// L(1, (-ell/.)) = pi h / sqrt(ell) for ell > 3.
LValue l_value(u64 ell, const ClassNumberSource& h);

}  // namespace odt
