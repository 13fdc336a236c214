#include "odt/census.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace odt {

namespace {

// Stable packed identity of a non-universal group.
u64 pack(const TorsionGroup& g) {
    return (g.ell << 16) | (u64{g.n} << 8) | static_cast<u64>(g.kind);
}

void append_key(std::string& key, u64 packed) {
    key.append(reinterpret_cast<const char*>(&packed), sizeof packed);
}

// Every non-universal group whose threshold is <= hi, in canonical group
// order, plus the distinct values (l-1)/2 h(-l) <= hi.
struct FamilyIndex {
    std::vector<u64> threshold;
    std::vector<u64> order;
    std::vector<u64> packed;
    std::vector<TorsionGroup> group;
    std::vector<u64> generator_values;
};

FamilyIndex build_family(u64 hi, const ClassNumberCache& cache) {
    struct Item {
        TorsionGroup g;
        u64 t;
    };
    std::vector<Item> items;
    std::vector<u64> gens;
    cache.for_each([&](u64 ell, u64 h) {
        if (ell > 2 * hi + 1) return;
        const u64 base = h * ((ell - 1) / 2);
        if (base > hi) return;
        gens.push_back(base);
        const bool three_mod_eight = ell % 8 == 3;
        for (unsigned n = 1;; ++n) {
            u128 t = base;
            for (unsigned i = 0, dl = delta(ell, n); i < dl && t <= hi; ++i) t *= ell;
            if (t > hi) break;
            const u64 tv = static_cast<u64>(t);
            const bool universal = ell == 3 && n == 1;
            if (three_mod_eight && !universal) items.push_back({{Kind::Cyclic, ell, n}, tv});
            const u64 two = three_mod_eight && !universal ? 3 * tv : tv;
            if (!universal && two <= hi) items.push_back({{Kind::TwoTimesCyclic, ell, n}, two});
        }
    });
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.g < b.g; });
    FamilyIndex f;
    for (const auto& it : items) {
        f.threshold.push_back(it.t);
        f.order.push_back(it.g.order());
        f.packed.push_back(pack(it.g));
        f.group.push_back(it.g);
    }
    std::sort(gens.begin(), gens.end());
    gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
    f.generator_values = std::move(gens);
    return f;
}

struct ChunkResult {
    u64 a = 0;
    std::vector<std::uint32_t> offsets;  // size n + 1
    std::vector<std::uint32_t> members;
    std::vector<std::uint32_t> r;
};

template <class F>
void for_odd_multiples(u64 t, u64 a, u64 b, F&& f) {
    u64 k = (a + t - 1) / t;
    if (k % 2 == 0) ++k;
    for (u64 d = k * t; d <= b; d += 2 * t) f((d - a) / 2);
}

ChunkResult process_chunk(u64 a, u64 b, const FamilyIndex& fam) {
    ChunkResult c;
    c.a = a;
    const std::size_t n = (b - a) / 2 + 1;
    c.offsets.assign(n + 1, 0);
    for (std::size_t i = 0; i < fam.threshold.size(); ++i)
        for_odd_multiples(fam.threshold[i], a, b, [&](u64 idx) { ++c.offsets[idx + 1]; });
    for (std::size_t i = 0; i < n; ++i) c.offsets[i + 1] += c.offsets[i];
    c.members.resize(c.offsets[n]);
    std::vector<std::uint32_t> fill(c.offsets.begin(), c.offsets.end() - 1);
    for (std::size_t i = 0; i < fam.threshold.size(); ++i)
        for_odd_multiples(fam.threshold[i], a, b,
                          [&](u64 idx) { c.members[fill[idx]++] = static_cast<std::uint32_t>(i); });
    c.r.assign(n, 0);
    for (u64 e : fam.generator_values) for_odd_multiples(e, a, b, [&](u64 idx) { ++c.r[idx]; });
    return c;
}

std::string canonical_key(const std::vector<TorsionGroup>& gs) {
    Fingerprint f{gs};
    return f.key();
}

// Inverse of Fingerprint::key.
std::string packed_from_canonical(const std::string& s) {
    std::string key;
    if (s.empty()) return key;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.size() < 4 || (item[0] != 'C' && item[0] != 'T')) throw std::runtime_error("bad fingerprint entry");
        auto caret = item.find('^');
        if (caret == std::string::npos) throw std::runtime_error("bad fingerprint entry");
        TorsionGroup g{item[0] == 'C' ? Kind::Cyclic : Kind::TwoTimesCyclic, std::stoull(item.substr(1, caret - 1)),
                       static_cast<unsigned>(std::stoul(item.substr(caret + 1)))};
        append_key(key, pack(g));
    }
    return key;
}

struct ScanState {
    u64 lo = 0, hi = 0;
    u64 next_d = 0;
    std::vector<std::string> canon;
    std::unordered_map<std::string, u64> ids;
    std::vector<u64> rep, count;
    u64 best_d = 0, best_count = 0;
    std::uint64_t output_bytes = 0;

    u64 intern(const std::string& packed, const std::function<std::string()>& canonical, u64 d) {
        auto it = ids.find(packed);
        if (it != ids.end()) return it->second;
        u64 id = canon.size();
        ids.emplace(packed, id);
        canon.push_back(canonical());
        rep.push_back(0);
        count.push_back(0);
        (void)d;
        return id;
    }
};

const char* format_name(RecordFormat f) { return f == RecordFormat::Csv ? "csv" : "jsonl"; }

void write_checkpoint(const std::string& path, const ScanState& st, RecordFormat f) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write checkpoint " + tmp);
        os << "ODTCENSUS v1\n";
        os << "scanned_up_to=" << (st.next_d >= st.lo + 2 ? st.next_d - 2 : 0) << '\n';
        os << "range=" << st.lo << ',' << st.hi << '\n';
        os << "format=" << format_name(f) << '\n';
        os << "output_bytes=" << st.output_bytes << '\n';
        os << "max_group_count=" << st.best_d << ',' << st.best_count << '\n';
        os << "fingerprints=" << st.canon.size() << '\n';
        for (const auto& c : st.canon) os << (c.empty() ? "-" : c) << '\n';
        os << "aggregates=" << st.canon.size() << '\n';
        for (std::size_t i = 0; i < st.canon.size(); ++i) os << i << ',' << st.rep[i] << ',' << st.count[i] << '\n';
        os << "end\n";
        if (!os) throw std::runtime_error("checkpoint write failed");
    }
    std::filesystem::rename(tmp, path);
}

template <class T>
T parse_field(const std::string& line, const std::string& name) {
    if (line.rfind(name + "=", 0) != 0) throw std::runtime_error("checkpoint corrupt: expected " + name);
    std::stringstream ss(line.substr(name.size() + 1));
    T v{};
    ss >> v;
    if (!ss) throw std::runtime_error("checkpoint corrupt: bad " + name);
    return v;
}

bool read_checkpoint(const std::string& path, ScanState& st, RecordFormat f) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return false;
    auto next = [&]() {
        std::string line;
        if (!std::getline(is, line)) throw std::runtime_error("checkpoint corrupt: truncated");
        return line;
    };
    if (next() != "ODTCENSUS v1") throw std::runtime_error("checkpoint corrupt: bad header");
    const u64 upto = parse_field<u64>(next(), "scanned_up_to");
    std::string range = next();
    if (range != "range=" + std::to_string(st.lo) + "," + std::to_string(st.hi))
        throw std::runtime_error("checkpoint belongs to a different range");
    if (next() != std::string("format=") + format_name(f)) throw std::runtime_error("checkpoint format mismatch");
    st.output_bytes = parse_field<std::uint64_t>(next(), "output_bytes");
    {
        std::string l = next();
        if (l.rfind("max_group_count=", 0) != 0) throw std::runtime_error("checkpoint corrupt: expected max_group_count");
        if (std::sscanf(l.c_str(), "max_group_count=%lu,%lu", &st.best_d, &st.best_count) != 2)
            throw std::runtime_error("checkpoint corrupt: bad max_group_count");
    }
    const auto nf = parse_field<std::size_t>(next(), "fingerprints");
    st.canon.clear();
    st.ids.clear();
    for (std::size_t i = 0; i < nf; ++i) {
        std::string c = next();
        if (c == "-") c.clear();
        st.ids.emplace(packed_from_canonical(c), i);
        st.canon.push_back(c);
    }
    if (nf == 0 || !st.canon[0].empty()) throw std::runtime_error("checkpoint corrupt: id 0 must be the Olson class");
    const auto na = parse_field<std::size_t>(next(), "aggregates");
    if (na != nf) throw std::runtime_error("checkpoint corrupt: aggregate count mismatch");
    st.rep.assign(nf, 0);
    st.count.assign(nf, 0);
    for (std::size_t i = 0; i < na; ++i) {
        unsigned long id = 0, rep = 0, cnt = 0;
        if (std::sscanf(next().c_str(), "%lu,%lu,%lu", &id, &rep, &cnt) != 3 || id != i)
            throw std::runtime_error("checkpoint corrupt: bad aggregate line");
        st.rep[i] = rep;
        st.count[i] = cnt;
    }
    if (next() != "end") throw std::runtime_error("checkpoint corrupt: missing end marker");
    st.next_d = upto == 0 ? st.lo : upto + 2;
    if (upto != 0 && (upto < st.lo || upto > st.hi || (upto - st.lo) % 2))
        throw std::runtime_error("checkpoint corrupt: scanned_up_to out of range");
    return true;
}

}  // namespace

std::string csv_header() { return "d,olson,fingerprint_id,group_count,t_cm,r"; }

std::string format_record(const DegreeRecord& r, RecordFormat f) {
    std::ostringstream os;
    if (f == RecordFormat::Csv) {
        os << r.d << ',' << (r.olson ? 1 : 0) << ',' << r.fingerprint_id << ',' << r.group_count << ',' << r.t_cm << ','
           << r.r;
    } else {
        os << "{\"d\":" << r.d << ",\"olson\":" << (r.olson ? "true" : "false") << ",\"fingerprint_id\":"
           << r.fingerprint_id << ",\"group_count\":" << r.group_count << ",\"t_cm\":" << r.t_cm << ",\"r\":" << r.r
           << '}';
    }
    return os.str();
}

ScanResult scan(u64 lo, u64 hi, ClassNumberCache& cache, const ScanOptions& opt) {
    require_odd(lo);
    require_odd(hi);
    if (lo > hi) throw std::invalid_argument("scan: lo must not exceed hi");
    if (opt.chunk_odds == 0 || opt.chunks_per_generation == 0) throw std::invalid_argument("scan: empty chunks");

    ScanState st;
    st.lo = lo;
    st.hi = hi;
    st.next_d = lo;
    st.canon.push_back("");
    st.ids.emplace(std::string(), 0);
    st.rep.push_back(0);
    st.count.push_back(0);

    bool resumed = false;
    if (!opt.checkpoint.empty()) resumed = read_checkpoint(opt.checkpoint, st, opt.format);

    std::ofstream out;
    if (!opt.output.empty()) {
        if (resumed) {
            if (!std::filesystem::exists(opt.output) || std::filesystem::file_size(opt.output) < st.output_bytes)
                throw std::runtime_error("output file shorter than checkpoint records");
            std::filesystem::resize_file(opt.output, st.output_bytes);
            out.open(opt.output, std::ios::binary | std::ios::app);
        } else {
            out.open(opt.output, std::ios::binary | std::ios::trunc);
        }
        if (!out) throw std::runtime_error("cannot open output " + opt.output);
        if (!resumed && opt.header && opt.format == RecordFormat::Csv) {
            out << csv_header() << '\n';
            st.output_bytes += csv_header().size() + 1;
        }
    }

    const unsigned workers = std::max(1u, opt.workers);
    const u64 chunk_span = 2 * opt.chunk_odds;  // integers covered per chunk
    std::size_t generations = 0;
    bool stopped = false;
    while (st.next_d <= hi) {
        if (opt.stop_after_generations && generations == opt.stop_after_generations) {
            stopped = true;
            break;
        }
        // Chunk boundaries are fixed relative to lo so any resume point that
        // lands on a generation boundary reproduces the same chunks.
        std::vector<std::pair<u64, u64>> chunks;
        for (u64 a = st.next_d; a <= hi && chunks.size() < opt.chunks_per_generation; a += chunk_span)
            chunks.emplace_back(a, std::min<u64>(hi, a + chunk_span - 2));
        const u64 gen_hi = chunks.back().second;
        if (cache.covered_limit() < 2 * gen_hi + 1) {
            const u64 block = u64{1} << 20;
            cache.extend(((2 * gen_hi + 1) / block + 1) * block, workers);
        }
        const FamilyIndex fam = build_family(gen_hi, cache);

        std::vector<ChunkResult> results(chunks.size());
        std::vector<std::string> errors(workers);
        auto run = [&](unsigned w) {
            try {
                for (std::size_t i = w; i < chunks.size(); i += workers)
                    results[i] = process_chunk(chunks[i].first, chunks[i].second, fam);
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
            if (!e.empty()) throw std::runtime_error(e);

        std::string key, line;
        for (std::size_t ci = 0; ci < chunks.size(); ++ci) {
            const ChunkResult& c = results[ci];
            const std::size_t n = c.offsets.size() - 1;
            for (std::size_t i = 0; i < n; ++i) {
                const u64 d = c.a + 2 * i;
                key.clear();
                u64 tmax = 6;
                for (auto k = c.offsets[i]; k < c.offsets[i + 1]; ++k) {
                    append_key(key, fam.packed[c.members[k]]);
                    tmax = std::max(tmax, fam.order[c.members[k]]);
                }
                const u64 id = st.intern(key, [&] {
                    std::vector<TorsionGroup> gs;
                    for (auto k = c.offsets[i]; k < c.offsets[i + 1]; ++k) gs.push_back(fam.group[c.members[k]]);
                    return canonical_key(gs);
                }, d);
                if (st.rep[id] == 0) st.rep[id] = d;
                ++st.count[id];
                DegreeRecord rec{d, id, 6 + (c.offsets[i + 1] - c.offsets[i]), tmax, id == 0, c.r[i]};
                if (rec.group_count > st.best_count) {
                    st.best_count = rec.group_count;
                    st.best_d = d;
                }
                if (out.is_open()) {
                    line = format_record(rec, opt.format);
                    line += '\n';
                    out << line;
                    st.output_bytes += line.size();
                }
                if (opt.sink) opt.sink(rec);
            }
        }
        st.next_d = gen_hi + 2;
        ++generations;
        if (out.is_open()) {
            out.flush();
            if (!out) throw std::runtime_error("write failed for " + opt.output);
        }
        if (!opt.checkpoint.empty()) write_checkpoint(opt.checkpoint, st, opt.format);
    }

    ScanResult res;
    res.lo = lo;
    res.hi = hi;
    res.scanned_up_to = st.next_d >= lo + 2 ? st.next_d - 2 : 0;
    res.complete = !stopped;
    res.fingerprints = st.canon;
    res.max_group_count_d = st.best_d;
    res.max_group_count = st.best_count;
    const Rational range = Rational::from_u64(hi - lo + 1);
    for (std::size_t i = 0; i < st.canon.size(); ++i) {
        ClassAggregate a;
        a.fingerprint_id = i;
        a.representative = st.rep[i];
        a.count = st.count[i];
        a.empirical_density = Rational::from_u64(st.count[i]) / range;
        res.aggregates.push_back(std::move(a));
    }
    return res;
}

void write_aggregates(std::ostream& os, const ScanResult& r) {
    os << "fingerprint_id,representative,count,empirical_density,fingerprint\n";
    for (const auto& a : r.aggregates)
        os << a.fingerprint_id << ',' << a.representative << ',' << a.count << ',' << a.empirical_density.decimal(15)
           << ',' << (r.fingerprints[a.fingerprint_id].empty() ? "olson" : '"' + r.fingerprints[a.fingerprint_id] + '"')
           << '\n';
}

MaxGroupCount max_group_count(u64 lo, u64 hi, ClassNumberCache& cache, unsigned workers) {
    ScanOptions o;
    o.workers = workers;
    ScanResult r = scan(lo, hi, cache, o);
    return {r.max_group_count_d, r.max_group_count};
}

std::string table_row_groups(const std::vector<TorsionGroup>& gs) {
    std::string ms;
    bool klein = false;
    for (const auto& g : gs) {
        if (g.kind == Kind::Z2xZ2) {
            klein = true;
            continue;
        }
        if (!ms.empty()) ms += ',';
        ms += std::to_string(g.order());
    }
    std::string s = "Z/mZ for m=" + ms;
    if (klein) s += " and Z/2Z⊕Z/2Z";
    return s;
}

std::string table(u64 dmax, ClassNumberCache& cache) {
    require_odd(dmax);
    if (cache.covered_limit() < 2 * dmax + 1) cache.extend(2 * dmax + 1);
    std::map<std::string, u64> first;
    std::ostringstream os;
    for (u64 d = 1; d <= dmax; d += 2) {
        const auto gs = groups(d, cache);
        std::vector<TorsionGroup> extra;
        for (const auto& g : gs)
            if (!is_universal(g)) extra.push_back(g);
        const std::string key = canonical_key(extra);
        auto [it, fresh] = first.emplace(key, d);
        os << d << " | ";
        if (!fresh && key.empty()) os << "Olson";
        else if (!fresh) os << it->second << "-Olson";
        else os << table_row_groups(gs);
        os << '\n';
    }
    return os.str();
}

}  // namespace odt
