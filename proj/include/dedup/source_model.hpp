#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "dedup/bits.hpp"
#include "dedup/random.hpp"

namespace dedup {

/// Distribution P_L of the source-symbol lengths. Support is kept
/// sorted by length; probabilities must sum to one.
class LengthDistribution {
public:
    struct Entry {
        std::uint32_t length;
        double probability;
    };

    LengthDistribution(std::vector<Entry> support, std::string descriptor)
        : support_(std::move(support)), descriptor_(std::move(descriptor)) {
        if (support_.empty())
            throw std::invalid_argument("length distribution: empty support");
        std::sort(support_.begin(), support_.end(),
                  [](const Entry& a, const Entry& b) { return a.length < b.length; });
        double sum = 0.0;
        for (const Entry& e : support_) {
            if (e.length == 0) throw std::invalid_argument("length distribution: zero length");
            if (!(e.probability > 0.0))
                throw std::invalid_argument("length distribution: nonpositive probability");
            sum += e.probability;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("length distribution: probabilities must sum to 1");
        for (std::size_t i = 1; i < support_.size(); ++i)
            if (support_[i].length == support_[i - 1].length)
                throw std::invalid_argument("length distribution: duplicate length");
        mean_ = 0.0;
        for (const Entry& e : support_) mean_ += e.probability * e.length;
    }

    static LengthDistribution constant(std::uint32_t L) {
        return LengthDistribution({{L, 1.0}}, "const:" + std::to_string(L));
    }

    /// Equal mass on L and L+1.
    static LengthDistribution two_point(std::uint32_t L) {
        return LengthDistribution({{L, 0.5}, {L + 1, 0.5}}, "two-point:" + std::to_string(L));
    }

    static LengthDistribution uniform_range(std::uint32_t lo, std::uint32_t hi) {
        if (lo == 0 || hi < lo) throw std::invalid_argument("uniform length range: bad bounds");
        std::vector<Entry> sup;
        double p = 1.0 / (hi - lo + 1);
        for (std::uint32_t l = lo; l <= hi; ++l) sup.push_back({l, p});
        return LengthDistribution(std::move(sup),
                                  "uniform:" + std::to_string(lo) + "," + std::to_string(hi));
    }

    static LengthDistribution table(std::vector<Entry> support) {
        std::ostringstream d;
        d << "table:";
        std::sort(support.begin(), support.end(),
                  [](const Entry& a, const Entry& b) { return a.length < b.length; });
        for (std::size_t i = 0; i < support.size(); ++i) {
            if (i) d << ",";
            d << support[i].length << "=" << support[i].probability;
        }
        return LengthDistribution(std::move(support), d.str());
    }

    /// Parse "const:L", "two-point:L", "uniform:lo,hi" or
    /// "table:l=p,l=p,...".
    static LengthDistribution parse(const std::string& descriptor) {
        auto colon = descriptor.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("length distribution descriptor: missing ':'");
        std::string kind = descriptor.substr(0, colon);
        std::string rest = descriptor.substr(colon + 1);
        if (kind == "const") return constant(parse_u32(rest));
        if (kind == "two-point") return two_point(parse_u32(rest));
        if (kind == "uniform") {
            auto comma = rest.find(',');
            if (comma == std::string::npos)
                throw std::invalid_argument("uniform descriptor: expected lo,hi");
            return uniform_range(parse_u32(rest.substr(0, comma)),
                                 parse_u32(rest.substr(comma + 1)));
        }
        if (kind == "table") {
            std::vector<Entry> sup;
            std::istringstream in(rest);
            std::string item;
            while (std::getline(in, item, ',')) {
                auto eq = item.find('=');
                if (eq == std::string::npos)
                    throw std::invalid_argument("table descriptor: expected length=prob");
                sup.push_back({parse_u32(item.substr(0, eq)), std::stod(item.substr(eq + 1))});
            }
            return table(std::move(sup));
        }
        throw std::invalid_argument("unknown length distribution kind: " + kind);
    }

    const std::vector<Entry>& support() const { return support_; }
    double mean() const { return mean_; }
    const std::string& descriptor() const { return descriptor_; }

    bool is_constant() const { return support_.size() == 1; }
    std::uint32_t min_length() const { return support_.front().length; }
    std::uint32_t max_length() const { return support_.back().length; }

    /// Shannon entropy H(P_L) in bits.
    double entropy() const {
        double h = 0.0;
        for (const Entry& e : support_) h -= e.probability * std::log2(e.probability);
        return h;
    }

    /// All support lengths lie in [E(L)/2, 2E(L)].
    bool is_concentrated() const {
        return min_length() >= mean_ / 2.0 && max_length() <= 2.0 * mean_;
    }

    std::uint32_t sample(SplitMix64& rng) const {
        double u = rng.next_real();
        double acc = 0.0;
        for (const Entry& e : support_) {
            acc += e.probability;
            if (u < acc) return e.length;
        }
        return support_.back().length;
    }

private:
    static std::uint32_t parse_u32(const std::string& s) {
        std::size_t pos = 0;
        unsigned long v = std::stoul(s, &pos);
        if (pos != s.size() || v == 0 || v > 0xFFFFFFFFul)
            throw std::invalid_argument("bad integer in length descriptor: " + s);
        return static_cast<std::uint32_t>(v);
    }

    std::vector<Entry> support_;
    std::string descriptor_;
    double mean_ = 0.0;
};

inline double length_entropy(const LengthDistribution& d) { return d.entropy(); }

struct SourceParams {
    std::uint64_t alphabet_size = 2;  // A
    std::uint64_t block_count = 1;    // B
    LengthDistribution lengths = LengthDistribution::constant(1);
    std::uint64_t seed = 0;
    /// Demote the model-regime checks below to warnings. Needed for
    /// tiny instances fed to the brute-force entropy oracle.
    bool override_regime_checks = false;

    /// Regime violations (empty if the params sit inside the source
    /// model's assumptions). Throws std::invalid_argument unless the
    /// override flag is set.
    std::vector<std::string> validate() const {
        if (alphabet_size == 0) throw std::invalid_argument("alphabet size must be positive");
        std::vector<std::string> warnings;
        double el = lengths.mean();
        if (alphabet_size < 2) warnings.push_back("model assumes A >= 2");
        if (std::log2(static_cast<double>(alphabet_size)) > el / 2.0 - 1.0)
            warnings.push_back("model assumes A <= 2^(E(L)/2 - 1)");
        if (!lengths.is_concentrated())
            warnings.push_back("model assumes P(E(L)/2 <= L <= 2E(L)) = 1");
        if (block_count < 1) warnings.push_back("model assumes B >= 1");
        if (!warnings.empty() && !override_regime_checks) {
            std::string msg = "source params outside model regime:";
            for (const std::string& w : warnings) msg += " [" + w + "]";
            msg += " (set the override flag to proceed)";
            throw std::invalid_argument(msg);
        }
        return warnings;
    }
};

/// One realized source: alphabet X_1..X_A, block ids Y_1..Y_B (as
/// 0-based indices into the alphabet), the concatenated sequence S and
/// the cumulative block boundaries (B+1 offsets, first 0, last l(S)).
struct SourceInstance {
    std::vector<BitString> alphabet;
    std::vector<std::uint32_t> block_ids;
    BitString sequence;
    std::vector<std::uint64_t> block_boundaries;

    std::uint64_t block_count() const { return block_ids.size(); }
};

/// Draw the alphabet the way the model does: lengths i.i.d. from P_L,
/// then each symbol uniform over the strings of its length minus the
/// symbols drawn so far (rejection sampling, bounded retries).
inline std::vector<BitString> generate_alphabet(const SourceParams& params, SplitMix64& rng) {
    params.validate();
    // Certain impossibility: more symbols requested than strings exist
    // over the whole support.
    double attainable = 0.0;
    for (const auto& e : params.lengths.support())
        attainable += std::exp2(static_cast<double>(e.length));
    if (attainable < 1e18 && static_cast<double>(params.alphabet_size) > attainable)
        throw std::invalid_argument("impossible alphabet: A exceeds the number of "
                                    "distinct strings over the length support");

    constexpr int kMaxRetries = 10000;
    std::vector<BitString> alphabet;
    alphabet.reserve(static_cast<std::size_t>(params.alphabet_size));
    std::unordered_set<BitString, BitStringHash> seen;
    for (std::uint64_t a = 0; a < params.alphabet_size; ++a) {
        std::uint32_t len = params.lengths.sample(rng);
        int tries = 0;
        for (;;) {
            BitString candidate = rng.next_bits(len);
            if (!seen.count(candidate)) {
                seen.insert(candidate);
                alphabet.push_back(std::move(candidate));
                break;
            }
            if (++tries >= kMaxRetries)
                throw std::invalid_argument("alphabet generation: retry bound hit while "
                                            "drawing distinct symbols");
        }
    }
    return alphabet;
}

inline std::vector<std::uint32_t> sample_blocks(std::uint64_t alphabet_size,
                                                std::uint64_t block_count, SplitMix64& rng) {
    if (alphabet_size == 0) throw std::invalid_argument("sample_blocks: empty alphabet");
    std::vector<std::uint32_t> ids;
    ids.reserve(static_cast<std::size_t>(block_count));
    for (std::uint64_t b = 0; b < block_count; ++b)
        ids.push_back(static_cast<std::uint32_t>(rng.next_below(alphabet_size)));
    return ids;
}

inline SourceInstance assemble_instance(std::vector<BitString> alphabet,
                                        std::vector<std::uint32_t> block_ids) {
    SourceInstance inst;
    inst.alphabet = std::move(alphabet);
    inst.block_ids = std::move(block_ids);
    std::uint64_t total = 0;
    for (std::uint32_t id : inst.block_ids) {
        if (id >= inst.alphabet.size())
            throw std::invalid_argument("assemble_instance: block id out of range");
        total += inst.alphabet[id].size();
    }
    inst.sequence.reserve(total);
    inst.block_boundaries.reserve(inst.block_ids.size() + 1);
    inst.block_boundaries.push_back(0);
    for (std::uint32_t id : inst.block_ids) {
        inst.sequence.append(inst.alphabet[id]);
        inst.block_boundaries.push_back(inst.sequence.size());
    }
    return inst;
}

/// Pure function of the params (including seed): draws the alphabet
/// first, then the B block ids, from one SplitMix64 stream.
inline SourceInstance build_instance(const SourceParams& params) {
    SplitMix64 rng(params.seed);
    std::vector<BitString> alphabet = generate_alphabet(params, rng);
    std::vector<std::uint32_t> ids = sample_blocks(alphabet.size(), params.block_count, rng);
    return assemble_instance(std::move(alphabet), std::move(ids));
}

/// |Y^b| for b = 0..B: number of distinct blocks among the first b.
inline std::vector<std::uint64_t> distinct_blocks_curve(const SourceInstance& inst) {
    std::vector<std::uint64_t> curve;
    curve.reserve(inst.block_ids.size() + 1);
    curve.push_back(0);
    std::unordered_set<std::uint32_t> seen;
    for (std::uint32_t id : inst.block_ids) {
        seen.insert(id);
        curve.push_back(seen.size());
    }
    return curve;
}

/// E|Y^b| = A(1 - (1 - 1/A)^b).
inline double expected_distinct_blocks(double A, double b) {
    return A * (1.0 - std::pow(1.0 - 1.0 / A, b));
}

// --------------------------------------------------------------------
// DSRC container: "DSRC" magic, version byte, flags byte (bit 0 =
// boundary table present), then A, B, seed as little-endian u64, the
// length-distribution descriptor (u16 length + ASCII), the sequence
// bit count as u64 and the packed bits MSB-first. The optional
// boundary table ((B+1) u64 offsets) is ground truth for analysis
// only; codecs never read it.
// --------------------------------------------------------------------

struct SourceFile {
    std::uint64_t alphabet_size = 0;
    std::uint64_t block_count = 0;
    std::uint64_t seed = 0;
    std::string length_descriptor;
    BitString sequence;
    std::optional<std::vector<std::uint64_t>> boundaries;
};

namespace io_detail {

inline void put_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void put_u16(std::ostream& out, std::uint16_t v) {
    std::uint8_t b[2] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8)};
    put_bytes(out, b, 2);
}

inline void put_u32(std::ostream& out, std::uint32_t v) {
    std::uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    put_bytes(out, b, 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    put_bytes(out, b, 8);
}

inline void get_bytes(std::istream& in, void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw CorruptStream("container truncated");
}

inline std::uint16_t get_u16(std::istream& in) {
    std::uint8_t b[2];
    get_bytes(in, b, 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline std::uint32_t get_u32(std::istream& in) {
    std::uint8_t b[4];
    get_bytes(in, b, 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

inline std::uint64_t get_u64(std::istream& in) {
    std::uint8_t b[8];
    get_bytes(in, b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

} // namespace io_detail

inline void write_dsrc(std::ostream& out, const SourceFile& f) {
    using namespace io_detail;
    put_bytes(out, "DSRC", 4);
    std::uint8_t version = 1;
    std::uint8_t flags = f.boundaries ? 1 : 0;
    put_bytes(out, &version, 1);
    put_bytes(out, &flags, 1);
    put_u64(out, f.alphabet_size);
    put_u64(out, f.block_count);
    put_u64(out, f.seed);
    if (f.length_descriptor.size() > 0xFFFF)
        throw std::invalid_argument("length descriptor too long");
    put_u16(out, static_cast<std::uint16_t>(f.length_descriptor.size()));
    put_bytes(out, f.length_descriptor.data(), f.length_descriptor.size());
    put_u64(out, f.sequence.size());
    put_bytes(out, f.sequence.packed_bytes().data(), f.sequence.packed_bytes().size());
    if (f.boundaries) {
        if (f.boundaries->size() != f.block_count + 1)
            throw std::invalid_argument("boundary table must have B+1 offsets");
        for (std::uint64_t v : *f.boundaries) put_u64(out, v);
    }
    if (!out) throw std::runtime_error("write failed");
}

inline SourceFile read_dsrc(std::istream& in) {
    using namespace io_detail;
    char magic[4];
    get_bytes(in, magic, 4);
    if (std::string(magic, 4) != "DSRC") throw CorruptStream("not a DSRC container");
    std::uint8_t version, flags;
    get_bytes(in, &version, 1);
    get_bytes(in, &flags, 1);
    if (version != 1) throw CorruptStream("unsupported DSRC version");
    SourceFile f;
    f.alphabet_size = get_u64(in);
    f.block_count = get_u64(in);
    f.seed = get_u64(in);
    std::uint16_t dlen = get_u16(in);
    f.length_descriptor.resize(dlen);
    if (dlen) get_bytes(in, f.length_descriptor.data(), dlen);
    std::uint64_t bits = get_u64(in);
    std::vector<std::uint8_t> packed(static_cast<std::size_t>((bits + 7) / 8));
    if (!packed.empty()) get_bytes(in, packed.data(), packed.size());
    f.sequence = BitString::from_packed(std::move(packed), bits);
    if (flags & 1) {
        std::vector<std::uint64_t> bounds(static_cast<std::size_t>(f.block_count + 1));
        for (auto& v : bounds) v = get_u64(in);
        f.boundaries = std::move(bounds);
    }
    return f;
}

inline void write_dsrc_file(const std::string& path, const SourceFile& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_dsrc(out, f);
}

inline SourceFile read_dsrc_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return read_dsrc(in);
}

inline SourceFile to_source_file(const SourceInstance& inst, const SourceParams& params,
                                 bool with_boundaries) {
    SourceFile f;
    f.alphabet_size = params.alphabet_size;
    f.block_count = params.block_count;
    f.seed = params.seed;
    f.length_descriptor = params.lengths.descriptor();
    f.sequence = inst.sequence;
    if (with_boundaries) f.boundaries = inst.block_boundaries;
    return f;
}

} // namespace dedup
