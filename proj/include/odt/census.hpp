#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "odt/classnum.hpp"
#include "odt/density.hpp"
#include "odt/torsion.hpp"

namespace odt {

struct DegreeRecord {
    u64 d = 0;
    u64 fingerprint_id = 0;
    u64 group_count = 0;
    u64 t_cm = 0;
    bool olson = false;
    u64 r = 0;
    friend bool operator==(const DegreeRecord&, const DegreeRecord&) = default;
};

struct ClassAggregate {
    u64 fingerprint_id = 0;
    u64 representative = 0;  // 0 while no member has been seen
    u64 count = 0;
    Rational empirical_density;
    std::optional<DensityInterval> certified;
};

enum class RecordFormat { Csv, Jsonl };

std::string csv_header();
std::string format_record(const DegreeRecord& r, RecordFormat f);

struct ScanOptions {
    unsigned workers = 1;
    u64 chunk_odds = u64{1} << 16;      // odd degrees per work chunk
    std::size_t chunks_per_generation = 16;
    RecordFormat format = RecordFormat::Csv;
    bool header = true;
    std::string checkpoint;             // empty: no checkpointing
    std::string output;                 // empty: records go to the sink only
    // Stop (as if killed) after this many generations; 0 = run to the end.
    std::size_t stop_after_generations = 0;
    std::function<void(const DegreeRecord&)> sink;
};

struct ScanResult {
    u64 lo = 0, hi = 0;
    u64 scanned_up_to = 0;
    bool complete = false;
    std::vector<std::string> fingerprints;  // id -> canonical key ("" for Olson)
    std::vector<ClassAggregate> aggregates; // indexed by id
    u64 max_group_count_d = 0;
    u64 max_group_count = 0;
};

// Scans every odd d in [lo, hi]. The cache is extended on demand to 2*hi+1.
ScanResult scan(u64 lo, u64 hi, ClassNumberCache& cache, const ScanOptions& opt = {});

// "fingerprint_id,representative,count,empirical_density,fingerprint"
void write_aggregates(std::ostream& os, const ScanResult& r);

struct MaxGroupCount {
    u64 d = 0;
    u64 count = 0;
};
MaxGroupCount max_group_count(u64 lo, u64 hi, ClassNumberCache& cache, unsigned workers = 1);

// One line per odd d <= dmax: "d | Olson", "d | k-Olson" or the full list.
std::string table(u64 dmax, ClassNumberCache& cache);
std::string table_row_groups(const std::vector<TorsionGroup>& gs);

}  // namespace odt
