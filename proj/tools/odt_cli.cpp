#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "odt/bounds.hpp"
#include "odt/census.hpp"
#include "odt/classnum.hpp"
#include "odt/density.hpp"
#include "odt/torsion.hpp"

using namespace odt;

namespace {

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

std::string cache_path;
unsigned workers = std::max(1u, std::thread::hardware_concurrency());

// Class numbers covering at least `limit`, loaded from and written back to
// the --cache file when one is given.
ClassNumberCache& cache_for(u64 limit) {
    static ClassNumberCache cache;
    static bool loaded = false;
    if (!loaded) {
        loaded = true;
        if (!cache_path.empty() && std::filesystem::exists(cache_path)) cache = ClassNumberCache::load(cache_path);
    }
    if (cache.covered_limit() < limit) {
        cache.extend(limit, workers);
        if (!cache_path.empty()) cache.save(cache_path);
    }
    return cache;
}

void progress(std::size_t k, std::size_t total) { std::cerr << "segment " << k << "/" << total << "\n"; }

u64 odd_arg(u64 d) {
    try {
        require_odd(d);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return d;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CM torsion in odd degree"};
    app.require_subcommand(1);
    app.add_option("--cache", cache_path, "class-number cache file (read if present, updated when extended)");
    app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

    u64 d = 0, dmax = 0, lo = 0, hi = 0, ell = 0;

    auto* groups_cmd = app.add_subcommand("groups", "torsion groups of CM elliptic curves in odd degree d");
    groups_cmd->add_option("d", d)->required();
    auto* tcm_cmd = app.add_subcommand("tcm", "largest torsion order in odd degree d");
    tcm_cmd->add_option("d", d)->required();
    auto* table_cmd = app.add_subcommand("table", "group table for odd degrees up to dmax");
    table_cmd->add_option("dmax", dmax)->required();

    std::string checkpoint, format = "csv", output, aggregates;
    bool no_header = false;
    auto* scan_cmd = app.add_subcommand("scan", "scan odd degrees in [lo, hi]");
    scan_cmd->add_option("lo", lo)->required();
    scan_cmd->add_option("hi", hi)->required();
    scan_cmd->add_option("--workers", workers)->check(CLI::PositiveNumber);
    scan_cmd->add_option("--checkpoint", checkpoint, "resume from and update this checkpoint");
    scan_cmd->add_option("--format", format)->check(CLI::IsMember({"csv", "jsonl"}));
    scan_cmd->add_option("--output", output, "record file (default: standard output)");
    scan_cmd->add_option("--aggregates", aggregates, "write per-class aggregates to this file");
    scan_cmd->add_flag("--no-header", no_header);

    u64 limit = 100000;
    std::size_t take = 38;
    auto* upper_cmd = app.add_subcommand("olson-upper", "upper bound for the density of Olson degrees");
    upper_cmd->add_option("--limit", limit);
    upper_cmd->add_option("--take", take);

    u64 z = 32927, l0 = 50000000;
    bool no_tail = false;
    auto* stratum_cmd = app.add_subcommand("stratum", "density interval for the degrees equivalent to d");
    stratum_cmd->add_option("d", d)->required();
    stratum_cmd->add_option("--z", z, "threshold cutoff");
    stratum_cmd->add_option("--l0", l0, "exact class numbers are used up to this prime");
    stratum_cmd->add_flag("--no-tail", no_tail, "upper bound only");

    auto* classnum_cmd = app.add_subcommand("classnum", "class number of Q(sqrt(-ell))");
    classnum_cmd->add_option("ell", ell)->required();

    std::string which;
    u64 cutoff = kSum1Ceiling, s2lo = 1000000000ull, s2hi = kWatkinsLimit;
    bool long_run = false;
    auto* sums_cmd = app.add_subcommand("sums", "partial sums of the lower-bound argument");
    sums_cmd->add_option("which", which)->required()->check(CLI::IsMember({"s1", "s2", "s3"}));
    sums_cmd->add_option("--cutoff", cutoff, "s1: prime cutoff");
    sums_cmd->add_option("--lo", s2lo, "s2: lower end");
    sums_cmd->add_option("--hi", s2hi, "s2: upper end");
    sums_cmd->add_flag("--long-run", long_run, "s1: allow cutoffs above the default ceiling");

    u64 rlimit = 100000;
    auto* records_cmd = app.add_subcommand("records", "small L(1) values and the torsion they force");
    records_cmd->add_option("--limit", rlimit);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (groups_cmd->parsed()) {
            const auto& h = cache_for(2 * odd_arg(d) + 1);
            std::string out, klein;
            for (const auto& g : groups(d, h)) {
                if (g.kind == Kind::Z2xZ2) {
                    klein = g.name();
                    continue;
                }
                out += (out.empty() ? "" : ",") + g.name();
            }
            if (!klein.empty()) out += "," + klein;
            std::cout << out << "\n";
        } else if (tcm_cmd->parsed()) {
            const auto& h = cache_for(2 * odd_arg(d) + 1);
            std::cout << t_cm(d, h) << "\n";
        } else if (table_cmd->parsed()) {
            std::cout << table(odd_arg(dmax), cache_for(2 * odd_arg(dmax) + 1));
        } else if (scan_cmd->parsed()) {
            odd_arg(lo);
            odd_arg(hi);
            if (lo > hi) throw UsageError("scan: lo must not exceed hi");
            ScanOptions o;
            o.workers = workers;
            o.format = format == "csv" ? RecordFormat::Csv : RecordFormat::Jsonl;
            o.header = !no_header;
            o.checkpoint = checkpoint;
            o.output = output;
            if (output.empty()) {
                if (o.header && o.format == RecordFormat::Csv) std::cout << csv_header() << "\n";
                o.sink = [&](const DegreeRecord& r) { std::cout << format_record(r, o.format) << "\n"; };
            }
            auto& cache = cache_for(0);
            ScanResult r = scan(lo, hi, cache, o);
            if (!cache_path.empty()) cache.save(cache_path);
            if (!aggregates.empty()) {
                std::ofstream os(aggregates);
                write_aggregates(os, r);
            }
            std::cerr << "classes " << r.fingerprints.size() << ", max group count " << r.max_group_count << " at d = "
                      << r.max_group_count_d << "\n";
        } else if (upper_cmd->parsed()) {
            std::cout << format_density(olson_density_interval_upper(cache_for(limit), limit, take)) << "\n";
        } else if (stratum_cmd->parsed()) {
            odd_arg(d);
            auto& cache = cache_for(no_tail ? 2 * z + 1 : std::max(2 * z + 1, l0));
            TailOptions to;
            to.explicit_limit = l0;
            to.sweep.workers = workers;
            to.sweep.progress = progress;
            TailBound tail = no_tail ? TailBound{} : stratum_tail_bound(cache, to);
            StratumResult r = stratum_density({d, z}, cache, tail);
            std::cout << "lcm " << r.lcm << "\n";
            std::cout << "upper " << format_density(r.interval.upper) << "\n";
            if (r.tail_available) {
                std::cout << "tail  " << r.tail.decimal(15) << "\n";
                std::cout << "lower " << format_density(r.interval.lower) << "\n";
            } else {
                std::cout << "lower 0 (no certified tail at this z)\n";
            }
        } else if (classnum_cmd->parsed()) {
            if (ell < 3 || ell % 4 != 3 || !is_prime(ell)) throw UsageError("ell must be a prime congruent to 3 mod 4");
            std::cout << class_number(ell) << "\n";
        } else if (sums_cmd->parsed()) {
            if (which == "s1") {
                if (cutoff > kSum1Ceiling && !long_run)
                    throw UsageError("cutoffs above " + std::to_string(kSum1Ceiling) + " need --long-run");
                Rational s = sum1_partial(cutoff, cache_for(cutoff), long_run);
                std::cout << "partial (ell <= " << cutoff << ") " << format_density(s) << "\n";
            } else if (which == "s2") {
                SweepOptions so;
                so.workers = workers;
                so.progress = progress;
                DyadicBound b = sum2(s2lo, s2hi, so);
                std::cout << "lower " << b.lower.decimal(15) << "\nupper " << b.upper.decimal(15) << "\n";
            } else {
                Sum3 s = sum3_tail();
                std::cout.precision(12);
                std::cout << "exceptional " << s.exceptional << "\nmain " << s.main << "\n";
            }
        } else if (records_cmd->parsed()) {
            auto rs = record_search(rlimit, cache_for(rlimit));
            std::cout << "ell,d,t_cm,ratio,l_value_loglog\n";
            std::cout.precision(10);
            for (const auto& r : rs)
                std::cout << r.ell << ',' << r.d << ',' << r.t_cm << ',' << r.ratio << ',' << r.l_value_product << "\n";
        }
    } catch (const std::invalid_argument& e) {  // bad arguments, including ones only the library can judge
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
