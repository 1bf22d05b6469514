#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "dedup/bits.hpp"
#include "dedup/source_model.hpp"

namespace dedup {

enum class Scheme : std::uint8_t { FixedLength = 0, VariableLength = 1, MultiChunk = 2 };

inline const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::FixedLength: return "fl";
        case Scheme::VariableLength: return "vl";
        case Scheme::MultiChunk: return "mc";
    }
    return "?";
}

inline Scheme parse_scheme(const std::string& s) {
    if (s == "fl") return Scheme::FixedLength;
    if (s == "vl") return Scheme::VariableLength;
    if (s == "mc") return Scheme::MultiChunk;
    throw std::invalid_argument("unknown scheme: " + s + " (expected fl, vl or mc)");
}

/// Minimum chunk length of the multi-chunk parser.
inline std::uint64_t mc_min_length(std::uint32_t anchor_len) {
    if (anchor_len == 0 || anchor_len > 62)
        throw std::invalid_argument("anchor length out of range");
    return 1ull << (anchor_len - 1);
}

/// A parse of one source string into chunks Z_1..Z_C. Cut offsets have
/// C+1 entries (0 and l(S) included); concatenating the chunks gives
/// back the source.
struct ChunkParsing {
    Scheme scheme = Scheme::FixedLength;
    std::uint32_t param = 1;  // D for FL, M for VL/MC
    BitString source;
    std::vector<std::uint64_t> cuts;
    /// False when the last chunk is the trailing remainder that did not
    /// end via the scheme's cut rule.
    bool final_chunk_anchored = true;

    std::uint64_t chunk_count() const { return cuts.size() - 1; }
    std::uint64_t offset(std::uint64_t c) const { return cuts[c]; }
    std::uint64_t length(std::uint64_t c) const { return cuts[c + 1] - cuts[c]; }
    BitString chunk(std::uint64_t c) const { return source.substr(cuts[c], length(c)); }
};

/// Split into blocks of exactly D bits; the final chunk keeps the
/// remainder.
inline ChunkParsing parse_fixed(const BitString& s, std::uint32_t D) {
    if (D == 0) throw std::invalid_argument("parse_fixed: chunk length must be positive");
    ChunkParsing p;
    p.scheme = Scheme::FixedLength;
    p.param = D;
    p.source = s;
    p.cuts.push_back(0);
    std::uint64_t pos = 0;
    while (pos + D <= s.size()) {
        pos += D;
        p.cuts.push_back(pos);
    }
    if (pos < s.size()) {
        p.cuts.push_back(s.size());
        p.final_chunk_anchored = false;
    }
    return p;
}

/// Greedy left-to-right scan; a chunk ends at the first occurrence of
/// 0^M not yet consumed. Scanning restarts after each cut, so "000"
/// with M=2 parses as 00|0.
inline ChunkParsing parse_anchor(const BitString& s, std::uint32_t M) {
    if (M == 0) throw std::invalid_argument("parse_anchor: anchor length must be positive");
    ChunkParsing p;
    p.scheme = Scheme::VariableLength;
    p.param = M;
    p.source = s;
    p.cuts.push_back(0);
    std::uint32_t run = 0;
    std::uint64_t last_cut = 0;
    for (std::uint64_t i = 0; i < s.size(); ++i) {
        run = s[i] ? 0 : run + 1;
        if (run == M) {
            p.cuts.push_back(i + 1);
            last_cut = i + 1;
            run = 0;
        }
    }
    if (last_cut < s.size()) {
        p.cuts.push_back(s.size());
        p.final_chunk_anchored = false;
    }
    return p;
}

/// Each chunk is the shortest string of length at least 2^(M-1) ending
/// in 0^M; the final chunk keeps the remainder.
inline ChunkParsing parse_multichunk(const BitString& s, std::uint32_t M) {
    std::uint64_t min_len = mc_min_length(M);
    ChunkParsing p;
    p.scheme = Scheme::MultiChunk;
    p.param = M;
    p.source = s;
    p.cuts.push_back(0);
    std::uint64_t chunk_start = 0;
    std::uint64_t run = 0;
    for (std::uint64_t i = 0; i < s.size(); ++i) {
        run = s[i] ? 0 : run + 1;
        std::uint64_t fill = i + 1 - chunk_start;
        if (fill >= min_len && run >= M) {
            p.cuts.push_back(i + 1);
            chunk_start = i + 1;
            run = 0;
        }
    }
    if (chunk_start < s.size()) {
        p.cuts.push_back(s.size());
        p.final_chunk_anchored = false;
    }
    return p;
}

inline ChunkParsing parse(const BitString& s, Scheme scheme, std::uint32_t param) {
    switch (scheme) {
        case Scheme::FixedLength: return parse_fixed(s, param);
        case Scheme::VariableLength: return parse_anchor(s, param);
        case Scheme::MultiChunk: return parse_multichunk(s, param);
    }
    throw std::invalid_argument("parse: bad scheme");
}

/// Per-block chunk ownership with the interior/boundary split. Chunk c
/// belongs to the block containing its start offset. A chunk is
/// interior when its string shows up as a complete chunk of its block
/// under every neighbor context, boundary otherwise.
struct ChunkAttribution {
    std::vector<std::uint32_t> block_of;               // per chunk
    std::vector<std::vector<std::uint32_t>> chunks;    // C_b per block
    std::vector<std::vector<std::uint32_t>> interior;  // interior part of C_b
    std::vector<std::vector<std::uint32_t>> boundary;  // boundary part of C_b

    std::uint64_t max_boundary_per_block() const {
        std::uint64_t m = 0;
        for (const auto& v : boundary) m = std::max<std::uint64_t>(m, v.size());
        return m;
    }
    std::uint64_t total_boundary() const {
        std::uint64_t t = 0;
        for (const auto& v : boundary) t += v.size();
        return t;
    }
};

namespace detail {

/// Parser state carried across a block boundary. `fill` is the number
/// of bits already inside the open chunk (capped), `run` the current
/// zero run, `phase` the fixed-length grid offset.
struct EntryState {
    std::uint64_t fill = 0;
    std::uint32_t run = 0;
};

/// Complete chunks produced inside [begin, end) when the scan enters
/// mid-chunk with the given state: pieces between consecutive cuts.
/// The piece open at `end` is not a complete chunk and is excluded.
inline void block_pieces(const BitString& s, std::uint64_t begin, std::uint64_t end,
                         Scheme scheme, std::uint32_t param, EntryState st,
                         std::unordered_set<BitString, BitStringHash>& out) {
    std::uint64_t prev_cut = 0;
    bool have_cut = false;
    if (scheme == Scheme::FixedLength) {
        // With f bits already in the open chunk, cuts land at
        // begin + (D - f) + kD. f == 0 always means a cut exactly at
        // begin, so the piece starting there is a complete chunk.
        std::uint64_t cut = begin;
        if (st.fill == 0) {
            prev_cut = begin;
            have_cut = true;
            cut = begin + param;
        } else {
            cut = begin + (param - st.fill);
        }
        for (; cut <= end; cut += param) {
            if (have_cut) out.insert(s.substr(prev_cut, cut - prev_cut));
            prev_cut = cut;
            have_cut = true;
        }
        return;
    }
    const std::uint64_t min_len =
        scheme == Scheme::MultiChunk ? mc_min_length(param) : 1;
    std::uint64_t fill = st.fill;
    std::uint32_t run = st.run;
    for (std::uint64_t i = begin; i < end; ++i) {
        run = s[i] ? 0 : run + 1;
        ++fill;
        bool cut = scheme == Scheme::VariableLength ? run == param
                                                    : (fill >= min_len && run >= param);
        if (cut) {
            if (have_cut) out.insert(s.substr(prev_cut, i + 1 - prev_cut));
            prev_cut = i + 1;
            have_cut = true;
            fill = 0;
            run = 0;
        }
    }
}

/// Entry states to quantify over. For the variable-length scheme the
/// zero-run values 0..M-1 cover every possible left context exactly.
/// For multi-chunk and fixed-length the state space is large, so a
/// representative family is used; the context-perturbation tests keep
/// this honest.
inline std::vector<EntryState> entry_states(Scheme scheme, std::uint32_t param) {
    std::vector<EntryState> states;
    switch (scheme) {
        case Scheme::VariableLength:
            for (std::uint32_t r = 0; r < param; ++r) states.push_back({r, r});
            break;
        case Scheme::MultiChunk: {
            std::uint64_t min_len = mc_min_length(param);
            for (std::uint64_t f = 1; f < min_len; f *= 2) {
                states.push_back({f, 0});
                std::uint32_t r = static_cast<std::uint32_t>(
                    std::min<std::uint64_t>(f, param - 1));
                if (r) states.push_back({f, r});
            }
            for (std::uint32_t r = 0; r < param; ++r) states.push_back({min_len, r});
            states.push_back({0, 0});
            break;
        }
        case Scheme::FixedLength: {
            std::uint32_t step = param <= 16 ? 1 : param / 16;
            for (std::uint32_t f = 0; f < param; f += step) states.push_back({f, 0});
            break;
        }
    }
    return states;
}

} // namespace detail

/// Attribute chunks to source blocks and split each block's chunks
/// into interior and boundary per the every-context criterion: a chunk
/// is boundary if it leaves its block, if it is the trailing anchorless
/// chunk, or if some entry state fails to reproduce its string as a
/// complete within-block chunk.
inline ChunkAttribution classify_chunks(const SourceInstance& inst, const ChunkParsing& parsing) {
    if (!(parsing.source == inst.sequence))
        throw std::invalid_argument("classify_chunks: parsing does not match instance");
    const std::vector<std::uint64_t>& bounds = inst.block_boundaries;
    const std::uint64_t B = inst.block_count();
    const std::uint64_t C = parsing.chunk_count();

    ChunkAttribution attr;
    attr.block_of.resize(C);
    attr.chunks.resize(B);
    attr.interior.resize(B);
    attr.boundary.resize(B);

    std::uint64_t b = 0;
    for (std::uint64_t c = 0; c < C; ++c) {
        std::uint64_t start = parsing.offset(c);
        while (b + 1 < B && start >= bounds[b + 1]) ++b;
        attr.block_of[c] = static_cast<std::uint32_t>(b);
        attr.chunks[b].push_back(static_cast<std::uint32_t>(c));
    }

    const std::vector<detail::EntryState> states =
        detail::entry_states(parsing.scheme, parsing.param);

    for (std::uint64_t blk = 0; blk < B; ++blk) {
        if (attr.chunks[blk].empty()) continue;
        std::uint64_t blk_begin = bounds[blk];
        std::uint64_t blk_end = bounds[blk + 1];

        // Candidates must lie fully inside the block and end via a cut.
        std::vector<std::uint32_t> candidates;
        for (std::uint32_t c : attr.chunks[blk]) {
            std::uint64_t end = parsing.offset(c) + parsing.length(c);
            bool anchorless_tail = (c + 1 == C) && !parsing.final_chunk_anchored;
            if (end > blk_end || anchorless_tail)
                attr.boundary[blk].push_back(c);
            else
                candidates.push_back(c);
        }
        if (candidates.empty()) continue;

        std::vector<BitString> cand_strings;
        cand_strings.reserve(candidates.size());
        for (std::uint32_t c : candidates) cand_strings.push_back(parsing.chunk(c));

        std::vector<bool> interior(candidates.size(), true);
        std::unordered_set<BitString, BitStringHash> pieces;
        for (const detail::EntryState& st : states) {
            pieces.clear();
            detail::block_pieces(parsing.source, blk_begin, blk_end, parsing.scheme,
                                 parsing.param, st, pieces);
            bool any = false;
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                if (!interior[i]) continue;
                if (!pieces.count(cand_strings[i]))
                    interior[i] = false;
                else
                    any = true;
            }
            if (!any) break;
        }
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (interior[i])
                attr.interior[blk].push_back(candidates[i]);
            else
                attr.boundary[blk].push_back(candidates[i]);
        }
    }
    for (auto& v : attr.boundary) std::sort(v.begin(), v.end());
    return attr;
}

} // namespace dedup
