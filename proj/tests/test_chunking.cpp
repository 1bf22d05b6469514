#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <unordered_set>
#include <vector>

#include "dedup/dedup.hpp"

using namespace dedup;

namespace {

std::vector<std::string> chunk_strings(const ChunkParsing& p) {
    std::vector<std::string> out;
    for (std::uint64_t c = 0; c < p.chunk_count(); ++c) out.push_back(p.chunk(c).to_string());
    return out;
}

SourceInstance inject(const std::vector<std::string>& blocks) {
    std::vector<BitString> alpha;
    std::vector<std::uint32_t> ids;
    for (const std::string& b : blocks) {
        alpha.push_back(BitString::from_string(b));
        ids.push_back(static_cast<std::uint32_t>(ids.size()));
    }
    return assemble_instance(std::move(alpha), std::move(ids));
}

} // namespace

TEST_CASE("fixed-length parse of the worked example") {
    BitString s = BitString::from_string("1001100");
    ChunkParsing p = parse_fixed(s, 2);
    CHECK(chunk_strings(p) == std::vector<std::string>{"10", "01", "10", "0"});
    CHECK_FALSE(p.final_chunk_anchored);

    CHECK(parse_fixed(BitString(), 3).chunk_count() == 0);
    ChunkParsing exact = parse_fixed(BitString::from_string("10110"), 5);
    CHECK(chunk_strings(exact) == std::vector<std::string>{"10110"});
    CHECK(exact.final_chunk_anchored);
    CHECK_THROWS_AS(parse_fixed(s, 0), std::invalid_argument);
}

TEST_CASE("anchor parse of the worked example") {
    ChunkParsing p = parse_anchor(BitString::from_string("1001100"), 2);
    CHECK(chunk_strings(p) == std::vector<std::string>{"100", "1100"});
    CHECK(p.final_chunk_anchored);

    // Greedy non-overlapping scan: 000 -> 00 | 0.
    ChunkParsing zeros = parse_anchor(BitString::from_string("000"), 2);
    CHECK(chunk_strings(zeros) == std::vector<std::string>{"00", "0"});
    CHECK_FALSE(zeros.final_chunk_anchored);

    ChunkParsing ones = parse_anchor(BitString::from_string("111"), 2);
    CHECK(chunk_strings(ones) == std::vector<std::string>{"111"});
    CHECK_FALSE(ones.final_chunk_anchored);
}

TEST_CASE("multi-chunk parse of the worked example") {
    ChunkParsing p = parse_multichunk(BitString::from_string("1100000000100001000010"), 4);
    CHECK(chunk_strings(p) ==
          std::vector<std::string>{"11000000", "001000010000", "10"});

    ChunkParsing q = parse_multichunk(BitString::from_string("100100"), 2);
    CHECK(chunk_strings(q) == std::vector<std::string>{"100", "100"});
    CHECK(q.final_chunk_anchored);

    ChunkParsing r = parse_multichunk(BitString::from_string("101"), 4);
    CHECK(chunk_strings(r) == std::vector<std::string>{"101"});
    CHECK_FALSE(r.final_chunk_anchored);
}

TEST_CASE("parsers reassemble the input and respect their shape invariants") {
    SplitMix64 rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        std::uint64_t len = rng.next_below(100000);
        BitString s = rng.next_bits(len);
        std::uint32_t D = 1 + static_cast<std::uint32_t>(rng.next_below(16));
        std::uint32_t M = 1 + static_cast<std::uint32_t>(rng.next_below(8));

        for (const ChunkParsing& p :
             {parse_fixed(s, D), parse_anchor(s, M), parse_multichunk(s, M)}) {
            REQUIRE(p.cuts.front() == 0);
            REQUIRE(p.cuts.back() == s.size());
            BitString join;
            for (std::uint64_t c = 0; c < p.chunk_count(); ++c) {
                REQUIRE(p.cuts[c] < p.cuts[c + 1]);
                join.append(p.chunk(c));
            }
            REQUIRE(join == s);
        }

        ChunkParsing fl = parse_fixed(s, D);
        for (std::uint64_t c = 0; c + 1 < fl.chunk_count(); ++c) REQUIRE(fl.length(c) == D);

        // Non-final anchor chunks end with 0^M and contain no earlier
        // non-overlapping occurrence of 0^M.
        ChunkParsing vl = parse_anchor(s, M);
        std::uint64_t vl_chunks = vl.chunk_count() - (vl.final_chunk_anchored ? 0 : 1);
        for (std::uint64_t c = 0; c < vl_chunks; ++c) {
            BitString z = vl.chunk(c);
            REQUIRE(z.size() >= M);
            std::uint32_t run = 0;
            for (std::uint64_t i = 0; i < z.size(); ++i) {
                run = z[i] ? 0 : run + 1;
                if (run == M) REQUIRE(i + 1 == z.size());
            }
        }

        // Non-final multi-chunks: at least 2^(M-1) bits, 0^M suffix, and
        // no shorter admissible prefix ends with the anchor.
        ChunkParsing mc = parse_multichunk(s, M);
        std::uint64_t min_len = mc_min_length(M);
        std::uint64_t mc_chunks = mc.chunk_count() - (mc.final_chunk_anchored ? 0 : 1);
        for (std::uint64_t c = 0; c < mc_chunks; ++c) {
            BitString z = mc.chunk(c);
            REQUIRE(z.size() >= min_len);
            std::uint32_t run = 0;
            for (std::uint64_t i = 0; i < z.size(); ++i) {
                run = z[i] ? 0 : run + 1;
                if (i + 1 >= min_len && run >= M) REQUIRE(i + 1 == z.size());
            }
        }
    }
}

TEST_CASE("chunk attribution on the anchor worked example") {
    SourceInstance inst = inject({"100110110001", "01110010", "010011"});
    REQUIRE(inst.sequence.to_string() == "10011011000101110010010011");
    ChunkParsing p = parse_anchor(inst.sequence, 2);
    CHECK(chunk_strings(p) ==
          std::vector<std::string>{"100", "1101100", "01011100", "100", "100", "11"});

    ChunkAttribution attr = classify_chunks(inst, p);
    CHECK(attr.chunks[0] == std::vector<std::uint32_t>{0, 1, 2});
    CHECK(attr.chunks[1] == std::vector<std::uint32_t>{3});
    CHECK(attr.chunks[2] == std::vector<std::uint32_t>{4, 5});
    CHECK(attr.interior[0] == std::vector<std::uint32_t>{1});
    CHECK(attr.boundary[0] == std::vector<std::uint32_t>{0, 2});
    CHECK(attr.interior[1].empty());
    CHECK(attr.boundary[1] == std::vector<std::uint32_t>{3});
    CHECK(attr.interior[2].empty());
    CHECK(attr.boundary[2] == std::vector<std::uint32_t>{4, 5});
}

TEST_CASE("single-block attribution touches only the edge chunks") {
    // A block opening with a one-bit has identical cut positions under
    // every left context, so only the first chunk (whose left edge is
    // the context boundary itself) and the trailing chunk can be
    // boundary. Middle chunks must come out interior.
    SplitMix64 rng(33);
    for (int trial = 0; trial < 50; ++trial) {
        BitString block;
        block.push_back(true);
        block.append(rng.next_bits(64 + rng.next_below(64)));
        SourceInstance inst = assemble_instance({block}, {0});
        ChunkParsing p = parse_anchor(inst.sequence, 2);
        ChunkAttribution attr = classify_chunks(inst, p);
        for (std::uint32_t c : attr.boundary[0]) {
            INFO("boundary chunk " << c << " of " << p.chunk_count());
            REQUIRE((c == 0 || c == p.chunk_count() - 1));
        }
        if (p.final_chunk_anchored && p.chunk_count() > 1) {
            // Anchored tail that repeats an interior cut pattern stays
            // interior; only the head may remain boundary.
            for (std::uint32_t c : attr.boundary[0]) REQUIRE(c == 0);
        }
    }
}

TEST_CASE("variable-length boundary chunks per block never exceed three") {
    SplitMix64 rng(77);
    for (int trial = 0; trial < 1000; ++trial) {
        SourceParams params;
        params.alphabet_size = 2 + rng.next_below(6);
        params.block_count = 2 + rng.next_below(12);
        params.lengths = LengthDistribution::two_point(
            16 + static_cast<std::uint32_t>(rng.next_below(32)));
        params.seed = rng.next();
        params.override_regime_checks = true;
        SourceInstance inst = build_instance(params);
        std::uint32_t M = 1 + static_cast<std::uint32_t>(rng.next_below(4));
        ChunkAttribution attr = classify_chunks(inst, parse_anchor(inst.sequence, M));
        INFO("trial " << trial << " M=" << M);
        REQUIRE(attr.max_boundary_per_block() <= 3);
    }
}

TEST_CASE("interior chunks survive random neighbor contexts") {
    // The literal every-context criterion, sampled: re-chunk each block
    // between random neighbors; every interior chunk string must appear
    // as a complete chunk inside the block span.
    SplitMix64 rng(123);
    for (int trial = 0; trial < 40; ++trial) {
        SourceParams params;
        params.alphabet_size = 3;
        params.block_count = 4;
        params.lengths = LengthDistribution::two_point(40);
        params.seed = rng.next();
        SourceInstance inst = build_instance(params);

        struct Case {
            Scheme scheme;
            std::uint32_t param;
        };
        for (Case cs : {Case{Scheme::VariableLength, 2}, Case{Scheme::VariableLength, 3},
                        Case{Scheme::MultiChunk, 3}}) {
            ChunkParsing parsing = parse(inst.sequence, cs.scheme, cs.param);
            ChunkAttribution attr = classify_chunks(inst, parsing);
            for (std::uint64_t b = 0; b < inst.block_count(); ++b) {
                if (attr.interior[b].empty()) continue;
                BitString block = inst.sequence.substr(
                    inst.block_boundaries[b],
                    inst.block_boundaries[b + 1] - inst.block_boundaries[b]);
                for (int ctx = 0; ctx < 8; ++ctx) {
                    BitString left = rng.next_bits(rng.next_below(96));
                    BitString right = rng.next_bits(rng.next_below(96));
                    BitString seq = left;
                    seq.append(block);
                    seq.append(right);
                    ChunkParsing re = parse(seq, cs.scheme, cs.param);
                    std::unordered_set<BitString, BitStringHash> inside;
                    std::uint64_t lo = left.size(), hi = left.size() + block.size();
                    for (std::uint64_t c = 0; c < re.chunk_count(); ++c) {
                        bool completed = re.offset(c) + re.length(c) < seq.size() ||
                                         re.final_chunk_anchored;
                        if (re.offset(c) >= lo && re.offset(c) + re.length(c) <= hi &&
                            completed)
                            inside.insert(re.chunk(c));
                    }
                    for (std::uint32_t c : attr.interior[b]) {
                        INFO("scheme " << scheme_name(cs.scheme) << " M=" << cs.param
                                       << " block " << b << " chunk "
                                       << parsing.chunk(c).to_string());
                        REQUIRE(inside.count(parsing.chunk(c)) == 1);
                    }
                }
            }
        }
    }
}

TEST_CASE("expected chunk count respects the per-block anchor bound") {
    // E(C) <= B(1 + 2^-M E(L)) on average.
    const std::uint64_t trials = 300;
    SourceParams params;
    params.alphabet_size = 8;
    params.block_count = 24;
    params.lengths = LengthDistribution::constant(64);
    const std::uint32_t M = 3;
    double sum = 0, sum2 = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        params.seed = trial_seed(77, t);
        SourceInstance inst = build_instance(params);
        double c = double(parse_anchor(inst.sequence, M).chunk_count());
        sum += c;
        sum2 += c * c;
    }
    double mean = sum / double(trials);
    double var = (sum2 - sum * sum / double(trials)) / double(trials - 1);
    double se = std::sqrt(std::max(var, 1e-12) / double(trials));
    double bound =
        double(params.block_count) * (1.0 + std::exp2(-double(M)) * params.lengths.mean());
    INFO("mean C = " << mean << ", bound " << bound << ", se " << se);
    CHECK(mean <= bound + 3.0 * se);
}

TEST_CASE("classification rejects a mismatched parsing") {
    SourceInstance inst = inject({"10110", "00101"});
    ChunkParsing other = parse_anchor(BitString::from_string("111000111"), 2);
    CHECK_THROWS_AS(classify_chunks(inst, other), std::invalid_argument);
}
