#include "odt/classnum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace odt {

namespace {

void check_ell(u64 ell) {
    if (ell % 4 != 3) throw std::invalid_argument("class number: ell must be 3 mod 4");
    if (!is_prime(ell)) throw std::invalid_argument("class number: ell must be prime");
}

// Index j = (D - 3) / 4 for D = 3 mod 4.
constexpr std::size_t kWindow = std::size_t{1} << 17;

// Adds the reduced-form counts for every D = 3 mod 4 with index in
// [j0, j0 + cnt.size()). Reduced forms (a, b, c) of discriminant -D with
// b odd: 0 < |b| <= a <= c, b > 0 when |b| = a or a = c. For 0 < b < a < c
// both signs of b are reduced.
void count_forms(u64 j0, std::vector<std::uint32_t>& cnt) {
    const u64 j1 = j0 + cnt.size();  // exclusive
    const u64 dmax = 4 * (j1 - 1) + 3;
    const u64 amax = isqrt(dmax / 3);
    std::uint32_t* base = cnt.data();
    for (u64 a = 1; a <= amax; ++a) {
        for (u64 b = 1; b <= a; b += 2) {
            const u64 k = (b * b + 3) / 4;  // j = a c - k
            u64 c_lo = std::max<u64>(a, (j0 + k + a - 1) / a);
            u64 c_hi = (j1 - 1 + k) / a;
            if (c_lo > c_hi) continue;
            u64 j = a * c_lo - k - j0;
            const u64 jend = a * c_hi - k - j0;
            if (b == a) {
                for (; j <= jend; j += a) base[j] += 1;
                continue;
            }
            if (c_lo == a) {
                base[j] += 1;
                j += a;
            }
            for (; j <= jend; j += a) base[j] += 2;
        }
    }
}

}  // namespace

u64 class_number(u64 ell) {
    check_ell(ell);
    if (ell == 3) return 1;
    const u64 amax = isqrt(ell / 3);
    u64 h = 0;
    for (u64 a = 1; a <= amax; ++a) {
        const u64 four_a = 4 * a;
        for (long long b = -static_cast<long long>(a); b <= static_cast<long long>(a); ++b) {
            u64 bb = static_cast<u64>(b < 0 ? -b : b);
            if ((bb * bb + ell) % four_a) continue;
            u64 c = (bb * bb + ell) / four_a;
            if (c < a) continue;
            if (b < 0 && (bb == a || a == c)) continue;
            if (std::gcd(std::gcd(a, bb), c) != 1) continue;
            ++h;
        }
    }
    return h;
}

std::optional<std::uint32_t> ClassNumberCache::find(u64 ell) const {
    if (ell > covered_ || ell % 4 != 3) return std::nullopt;
    std::uint32_t v = h_[(ell - 3) / 4];
    if (!v) return std::nullopt;
    return v;
}

u64 ClassNumberCache::class_number(u64 ell) const {
    if (ell > covered_)
        throw CacheInsufficient("class-number cache covers ell <= " + std::to_string(covered_) +
                                ", need " + std::to_string(ell));
    auto v = find(ell);
    if (!v) throw std::invalid_argument("class number: ell must be a prime = 3 mod 4");
    return *v;
}

void ClassNumberCache::extend(u64 new_limit, unsigned workers) {
    if (new_limit < 3) new_limit = 3;
    if (new_limit <= covered_) return;
    if (new_limit / 4 >= (u64{1} << 32)) throw std::length_error("class-number table too large");
    const u64 old_slots = h_.size();
    const u64 new_slots = (new_limit - 3) / 4 + 1;
    h_.resize(new_slots, 0);

    const u64 first = old_slots;
    const u64 nwin = (new_slots - first + kWindow - 1) / kWindow;
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(nwin)));
    std::vector<std::string> errors(workers);

    auto run = [&](unsigned w) {
        std::vector<std::uint32_t> cnt;
        try {
            for (u64 win = w; win < nwin; win += workers) {
                const u64 j0 = first + win * kWindow;
                const u64 j1 = std::min<u64>(j0 + kWindow, new_slots);
                cnt.assign(j1 - j0, 0);
                count_forms(j0, cnt);
                const u64 lo = 4 * j0 + 3, hi = 4 * (j1 - 1) + 3;
                PrimeStream ps(lo, hi, ResidueFilter{4, {3}});
                ps.for_each([&](u64 p) {
                    u64 j = (p - 3) / 4;
                    std::uint32_t h = cnt[j - j0];
                    // Genus theory: h(-ell) is odd for prime ell = 3 mod 4.
                    if (h == 0 || (h & 1) == 0)
                        throw std::logic_error("class number parity check failed at ell=" +
                                               std::to_string(p));
                    h_[j] = h;
                });
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
        for (auto& t : ts) t.join();
    }
    for (auto& e : errors)
        if (!e.empty()) {
            h_.resize(old_slots);
            throw std::logic_error(e);
        }
    // ell = 3 has the single form (1,1,1).
    if (first == 0) h_[0] = 1;
    entries_ = 0;
    for (auto v : h_) entries_ += v != 0;
    covered_ = new_limit;
}

void ClassNumberCache::write(std::ostream& os) const {
    os << "#covered_limit=" << covered_ << '\n';
    for_each([&](u64 ell, u64 h) { os << ell << ',' << h << '\n'; });
}

ClassNumberCache ClassNumberCache::read(std::istream& is) {
    auto corrupt = [](const std::string& why) {
        return std::runtime_error("class-number cache corrupt: " + why);
    };
    std::string line;
    if (!std::getline(is, line) || line.rfind("#covered_limit=", 0) != 0)
        throw corrupt("missing header");
    ClassNumberCache c;
    try {
        c.covered_ = std::stoull(line.substr(15));
    } catch (...) {
        throw corrupt("bad header");
    }
    if (c.covered_ / 4 >= (u64{1} << 32)) throw corrupt("limit too large");
    c.h_.assign(c.covered_ >= 3 ? (c.covered_ - 3) / 4 + 1 : 0, 0);
    u64 prev = 0;
    while (std::getline(is, line)) {
        auto comma = line.find(',');
        if (comma == std::string::npos) throw corrupt("malformed line '" + line + "'");
        u64 ell = 0, h = 0;
        try {
            std::size_t p1 = 0, p2 = 0;
            ell = std::stoull(line.substr(0, comma), &p1);
            h = std::stoull(line.substr(comma + 1), &p2);
            if (p1 != comma || p2 != line.size() - comma - 1) throw 0;
        } catch (...) {
            throw corrupt("malformed line '" + line + "'");
        }
        if (ell <= prev) throw corrupt("keys not ascending");
        if (ell > c.covered_ || ell % 4 != 3 || !is_prime(ell)) throw corrupt("bad key " + std::to_string(ell));
        if (h == 0 || (h & 1) == 0 || h > UINT32_MAX) throw corrupt("bad class number for " + std::to_string(ell));
        c.h_[(ell - 3) / 4] = static_cast<std::uint32_t>(h);
        prev = ell;
        ++c.entries_;
    }
    std::size_t expected = 0;
    if (c.covered_ >= 3) {
        PrimeStream ps(3, c.covered_, ResidueFilter{4, {3}});
        ps.for_each([&](u64) { ++expected; });
    }
    if (expected != c.entries_) throw corrupt("missing entries below covered limit");
    return c;
}

void ClassNumberCache::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path);
    write(os);
    if (!os) throw std::runtime_error("write failed for " + path);
}

ClassNumberCache ClassNumberCache::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path);
    return read(is);
}

ClassNumberCache batch_class_numbers(u64 limit, unsigned workers) {
    ClassNumberCache c;
    c.extend(limit, workers);
    return c;
}

u64 OnDemandClassNumbers::class_number(u64 ell) const {
    if (base_ && ell <= base_->covered_limit()) return base_->class_number(ell);
    {
        std::lock_guard lk(mu_);
        auto it = memo_.find(ell);
        if (it != memo_.end()) return it->second;
    }
    u64 h = odt::class_number(ell);
    std::lock_guard lk(mu_);
    memo_.emplace(ell, h);
    return h;
}

LValue l_value(u64 ell, const ClassNumberSource& h) {
    if (ell == 3) throw std::invalid_argument("l_value: ell = 3 has extra roots of unity");
    check_ell(ell);
    long double v = std::numbers::pi_v<long double> * static_cast<long double>(h.class_number(ell)) /
                    std::sqrt(static_cast<long double>(ell));
    return {ell, static_cast<double>(v)};
}

}  // namespace odt
