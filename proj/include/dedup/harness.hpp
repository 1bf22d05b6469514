#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dedup/bits.hpp"
#include "dedup/bounds.hpp"
#include "dedup/chunking.hpp"
#include "dedup/codecs.hpp"
#include "dedup/random.hpp"
#include "dedup/source_model.hpp"

namespace dedup {

/// Empirical rate estimate for one (source params, scheme, parameter)
/// point. Every trial is round-trip verified before it is averaged.
struct RateReport {
    Scheme scheme = Scheme::FixedLength;
    std::uint32_t param = 1;
    std::uint64_t trials = 0;
    double mean_bits = 0;
    double std_err = 0;
    double rstar_lower = 0;
    double rstar_upper = 0;
    double ratio_vs_rstar_upper = 0;  // mean_bits / rstar_upper
    double ratio_vs_rstar_lower = 0;  // mean_bits / rstar_lower (inf when lower = 0)
    double mean_chunks = 0;
    double mean_dict = 0;
    double mean_boundary = 0;             // mean total boundary chunks per instance
    std::uint64_t max_boundary_per_block = 0;
    double mean_raw_chunks = 0;           // chunks encoded raw (dictionary inserts)
    double mean_source_bits = 0;
};

struct MeasureOptions {
    bool classify = true;          // fill the boundary statistics
    bool parse_stats = true;       // fill chunk/dictionary statistics
    bool keep_curves = false;      // accumulate the distinct-blocks curve
    unsigned threads = 0;          // 0 = hardware concurrency
};

namespace harness_detail {

struct TrialStats {
    std::uint64_t payload_bits = 0;
    std::uint64_t chunks = 0;
    std::uint64_t dict_size = 0;
    std::uint64_t boundary = 0;
    std::uint64_t max_boundary_block = 0;
    std::uint64_t source_bits = 0;
    std::uint64_t raw_chunks = 0;
    std::vector<std::uint64_t> distinct_curve;
};

template <typename Fn>
inline void parallel_trials(std::uint64_t trials, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::thread::hardware_concurrency();
    if (threads <= 1 || trials <= 1) {
        for (std::uint64_t t = 0; t < trials; ++t) fn(t);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            std::uint64_t t = next.fetch_add(1);
            if (t >= trials) return;
            try {
                fn(t);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    unsigned n = static_cast<unsigned>(std::min<std::uint64_t>(threads, trials));
    pool.reserve(n);
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace harness_detail

/// Average payload length over independent instances. Trials are keyed
/// by (master seed, trial index), so the report is a pure function of
/// its arguments; a round-trip mismatch on any trial is a codec bug and
/// aborts the measurement.
inline RateReport measure_rate(const SourceParams& base_params, Scheme scheme,
                               std::uint32_t scheme_param, std::uint64_t trials,
                               std::uint64_t master_seed,
                               const MeasureOptions& opts = MeasureOptions()) {
    if (trials == 0) throw std::invalid_argument("measure_rate: trials must be positive");
    base_params.validate();

    std::vector<harness_detail::TrialStats> stats(static_cast<std::size_t>(trials));
    harness_detail::parallel_trials(trials, opts.threads, [&](std::uint64_t t) {
        SourceParams p = base_params;
        p.seed = trial_seed(master_seed, t);
        SourceInstance inst = build_instance(p);

        EncodedStream enc = encode(inst.sequence, scheme, scheme_param);
        BitString back = decode(enc);
        if (!(back == inst.sequence))
            throw std::runtime_error("measure_rate: round-trip mismatch (codec bug)");

        harness_detail::TrialStats& st = stats[static_cast<std::size_t>(t)];
        st.payload_bits = enc.payload.size();
        st.source_bits = inst.sequence.size();
        if (opts.parse_stats || opts.classify) {
            ChunkParsing parsing = parse(inst.sequence, scheme, scheme_param);
            std::unordered_set<BitString, BitStringHash> distinct;
            for (std::uint64_t c = 0; c < parsing.chunk_count(); ++c)
                distinct.insert(parsing.chunk(c));
            st.chunks = parsing.chunk_count();
            st.dict_size = distinct.size();
            st.raw_chunks = distinct.size();
            if (opts.classify) {
                ChunkAttribution attr = classify_chunks(inst, parsing);
                st.boundary = attr.total_boundary();
                st.max_boundary_block = attr.max_boundary_per_block();
            }
        }
        if (opts.keep_curves) st.distinct_curve = distinct_blocks_curve(inst);
    });

    RateReport r;
    r.scheme = scheme;
    r.param = scheme_param;
    r.trials = trials;
    double sum = 0, sum2 = 0;
    for (const auto& st : stats) {
        sum += static_cast<double>(st.payload_bits);
        sum2 += static_cast<double>(st.payload_bits) * static_cast<double>(st.payload_bits);
        r.mean_chunks += static_cast<double>(st.chunks);
        r.mean_dict += static_cast<double>(st.dict_size);
        r.mean_boundary += static_cast<double>(st.boundary);
        r.mean_raw_chunks += static_cast<double>(st.raw_chunks);
        r.mean_source_bits += static_cast<double>(st.source_bits);
        r.max_boundary_per_block = std::max(r.max_boundary_per_block, st.max_boundary_block);
    }
    double n = static_cast<double>(trials);
    r.mean_bits = sum / n;
    r.mean_chunks /= n;
    r.mean_dict /= n;
    r.mean_boundary /= n;
    r.mean_raw_chunks /= n;
    r.mean_source_bits /= n;
    if (trials > 1) {
        double var = (sum2 - sum * sum / n) / (n - 1.0);
        r.std_err = std::sqrt(std::max(var, 0.0) / n);
    }

    double A = static_cast<double>(base_params.alphabet_size);
    double B = static_cast<double>(base_params.block_count);
    r.rstar_upper = rstar_upper(A, B, base_params.lengths);
    if (A >= 2.0 && B >= 1.0) {
        r.rstar_lower = base_params.lengths.is_constant()
                            ? rstar_lower_fixed(A, B, base_params.lengths.mean())
                            : rstar_lower_variable(A, B, base_params.lengths.mean());
    } else {
        r.rstar_lower = 0.0;
    }
    r.ratio_vs_rstar_upper = r.rstar_upper > 0.0 ? r.mean_bits / r.rstar_upper : kInfiniteBound;
    r.ratio_vs_rstar_lower = r.rstar_lower > 0.0 ? r.mean_bits / r.rstar_lower : kInfiniteBound;
    return r;
}

/// Empirically tuned anchor length: the M minimizing the measured mean
/// payload length over a pilot run. This is how the parameter is set
/// in practice (tune on representative data). Every candidate M is
/// evaluated on the same pilot instances (paired comparison; the
/// instance draw depends only on the seed, not on M), and the pilot
/// seed should stay distinct from the final measurement seed so the
/// selection does not bias the reported rate. Ties go to the smaller M.
inline std::uint32_t tune_anchor_empirically(const SourceParams& params, Scheme scheme,
                                             std::uint32_t m_lo, std::uint32_t m_hi,
                                             std::uint64_t pilot_trials,
                                             std::uint64_t pilot_seed) {
    if (m_lo == 0 || m_hi < m_lo)
        throw std::invalid_argument("tune_anchor_empirically: bad anchor range");
    MeasureOptions pilot;
    pilot.classify = false;
    pilot.parse_stats = false;
    std::uint32_t best_m = m_lo;
    double best_bits = kInfiniteBound;
    for (std::uint32_t m = m_lo; m <= m_hi; ++m) {
        RateReport r = measure_rate(params, scheme, m, pilot_trials, pilot_seed, pilot);
        if (r.mean_bits < best_bits) {
            best_bits = r.mean_bits;
            best_m = m;
        }
    }
    return best_m;
}

// --------------------------------------------------------------------
// Sweeps
// --------------------------------------------------------------------

struct SweepPoint {
    Scheme scheme = Scheme::FixedLength;
    std::uint64_t alphabet_size = 2;
    std::uint64_t block_count = 1;
    LengthDistribution lengths = LengthDistribution::constant(1);
    std::uint32_t param = 1;
    bool override_regime_checks = false;
};

struct SweepSpec {
    std::vector<SweepPoint> grid;
    std::uint64_t trials = 1;
    std::uint64_t master_seed = 0;
    std::string output_path;  // empty = no file
    MeasureOptions measure;
};

struct SweepRow {
    SweepPoint point;
    RateReport report;
};

inline const char* kSweepCsvHeader =
    "scheme,A,B,EL,param,trials,mean_bits,stderr,rstar_lower,rstar_upper,"
    "ratio_lo,ratio_hi,mean_chunks,mean_dict,mean_boundary";

inline std::string format_csv_row(const SweepRow& row) {
    char buf[512];
    const RateReport& r = row.report;
    std::snprintf(buf, sizeof buf,
                  "%s,%llu,%llu,%.10g,%u,%llu,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,"
                  "%.10g,%.10g",
                  scheme_name(row.point.scheme),
                  static_cast<unsigned long long>(row.point.alphabet_size),
                  static_cast<unsigned long long>(row.point.block_count),
                  row.point.lengths.mean(), row.point.param,
                  static_cast<unsigned long long>(r.trials), r.mean_bits, r.std_err,
                  r.rstar_lower, r.rstar_upper, r.ratio_vs_rstar_upper,
                  r.ratio_vs_rstar_lower, r.mean_chunks, r.mean_dict, r.mean_boundary);
    return buf;
}

/// One row per grid point, deterministic in the master seed. The CSV
/// file is written to a temporary path and renamed into place.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    if (spec.grid.empty()) throw std::invalid_argument("run_sweep: empty grid");
    if (spec.trials == 0) throw std::invalid_argument("run_sweep: trials must be positive");
    std::vector<SweepRow> rows;
    rows.reserve(spec.grid.size());
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
        const SweepPoint& pt = spec.grid[i];
        SourceParams params;
        params.alphabet_size = pt.alphabet_size;
        params.block_count = pt.block_count;
        params.lengths = pt.lengths;
        params.override_regime_checks = pt.override_regime_checks;
        std::uint64_t point_seed = hash_u64(spec.master_seed ^ hash_u64(0x5EEDull + i));
        rows.push_back({pt, measure_rate(params, pt.scheme, pt.param, spec.trials, point_seed,
                                         spec.measure)});
    }
    if (!spec.output_path.empty()) {
        std::string tmp = spec.output_path + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
            out << kSweepCsvHeader << "\n";
            for (const SweepRow& row : rows) out << format_csv_row(row) << "\n";
            if (!out) throw std::runtime_error("write failed: " + tmp);
        }
        if (std::rename(tmp.c_str(), spec.output_path.c_str()) != 0)
            throw std::runtime_error("cannot move sweep output into place: " +
                                     spec.output_path);
    }
    return rows;
}

// --------------------------------------------------------------------
// Brute-force entropy oracle
// --------------------------------------------------------------------

/// Overcount of (alphabet draws) x A^B used to refuse oversized jobs.
inline double entropy_oracle_state_estimate(std::uint64_t A, std::uint64_t B,
                                            const LengthDistribution& lengths) {
    double per_symbol = 0.0;
    for (const auto& e : lengths.support()) per_symbol += std::exp2(double(e.length));
    return std::pow(per_symbol, double(A)) * std::pow(double(A), double(B));
}

/// Exact H(S) by enumerating every ordered alphabet (lengths i.i.d.
/// from P_L, symbols uniform without replacement) and every block
/// tuple, accumulating the exact distribution of the concatenation.
inline double exact_entropy_bruteforce(std::uint64_t A, std::uint64_t B,
                                       const LengthDistribution& lengths,
                                       double max_outcomes = 1e7) {
    if (A == 0 || B == 0) throw std::invalid_argument("entropy oracle: need A, B >= 1");
    double estimate = entropy_oracle_state_estimate(A, B, lengths);
    if (!(estimate <= max_outcomes)) {
        std::ostringstream msg;
        msg << "entropy oracle: state space too large (about " << estimate
            << " outcomes, limit " << max_outcomes << ")";
        throw std::invalid_argument(msg.str());
    }

    std::unordered_map<BitString, double, BitStringHash> dist;
    std::vector<BitString> symbols(static_cast<std::size_t>(A));

    // Enumerate block tuples under one fixed alphabet.
    auto enumerate_blocks = [&](double alphabet_prob) {
        double tuple_prob = alphabet_prob / std::pow(double(A), double(B));
        std::vector<std::uint32_t> ids(static_cast<std::size_t>(B), 0);
        for (;;) {
            BitString s;
            for (std::uint32_t id : ids) s.append(symbols[id]);
            dist[s] += tuple_prob;
            std::size_t i = 0;
            for (; i < ids.size(); ++i) {
                if (++ids[i] < A) break;
                ids[i] = 0;
            }
            if (i == ids.size()) break;
        }
    };

    // Depth-first over symbols: choose a length (weighted by P_L), then
    // a string uniform over the unused strings of that length.
    std::unordered_set<BitString, BitStringHash> used;
    auto choose_symbol = [&](auto&& self, std::uint64_t a, double prob_so_far) -> void {
        if (a == A) {
            enumerate_blocks(prob_so_far);
            return;
        }
        for (const auto& entry : lengths.support()) {
            std::uint64_t strings = 1ull << entry.length;
            std::uint64_t used_same = 0;
            for (const BitString& u : used)
                if (u.size() == entry.length) ++used_same;
            if (used_same >= strings) continue;  // length exhausted: draw impossible
            double p_choice = entry.probability / double(strings - used_same);
            for (std::uint64_t v = 0; v < strings; ++v) {
                BitString candidate;
                candidate.append_uint(v, entry.length);
                if (used.count(candidate)) continue;
                used.insert(candidate);
                symbols[static_cast<std::size_t>(a)] = candidate;
                self(self, a + 1, prob_so_far * p_choice);
                used.erase(candidate);
            }
        }
    };
    choose_symbol(choose_symbol, 0, 1.0);

    double h = 0.0;
    double total = 0.0;
    for (const auto& [s, p] : dist) {
        if (p > 0.0) h -= p * std::log2(p);
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::runtime_error("entropy oracle: probabilities do not sum to 1");
    return h;
}

} // namespace dedup
