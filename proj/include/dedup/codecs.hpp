#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "dedup/bits.hpp"
#include "dedup/chunking.hpp"
#include "dedup/source_model.hpp"

namespace dedup {

/// Insertion-ordered set of distinct chunks. An entry's index never
/// changes once assigned; pointers in the encoded stream are these
/// 0-based indices.
class ChunkDictionary {
public:
    std::optional<std::uint32_t> find(const BitString& chunk) const {
        auto it = index_.find(chunk);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    /// Inserts if absent; returns the entry index either way.
    std::uint32_t insert(const BitString& chunk) {
        auto [it, fresh] = index_.try_emplace(chunk, static_cast<std::uint32_t>(entries_.size()));
        if (fresh) entries_.push_back(chunk);
        return it->second;
    }

    const BitString& entry(std::uint32_t i) const { return entries_.at(i); }
    std::uint64_t size() const { return entries_.size(); }

private:
    std::vector<BitString> entries_;
    std::unordered_map<BitString, std::uint32_t, BitStringHash> index_;
};

/// Encoded payload plus the scheme that produced it. The payload is
/// the exact on-paper bit sequence: gamma(l(S)) followed by the chunk
/// codes. An empty source has an empty payload (gamma has no codeword
/// for zero; the container's bit count delimits this case).
struct EncodedStream {
    Scheme scheme = Scheme::FixedLength;
    std::uint32_t param = 1;  // D for FL, M for VL/MC
    BitString payload;
};

namespace codec_detail {

inline void append_pointer(BitString& out, std::uint32_t index, std::uint64_t dict_size) {
    out.append_uint(index, pointer_width(dict_size));
}

} // namespace codec_detail

// --------------------------------------------------------------------
// Fixed-length deduplication
// --------------------------------------------------------------------

inline EncodedStream encode_fl(const BitString& s, std::uint32_t D) {
    if (D == 0) throw std::invalid_argument("encode_fl: chunk length must be positive");
    EncodedStream e;
    e.scheme = Scheme::FixedLength;
    e.param = D;
    if (s.empty()) return e;
    gamma_append(e.payload, s.size());
    ChunkDictionary dict;
    for (std::uint64_t pos = 0; pos < s.size(); pos += D) {
        BitString chunk = s.substr(pos, std::min<std::uint64_t>(D, s.size() - pos));
        if (auto idx = dict.find(chunk)) {
            e.payload.push_back(false);
            codec_detail::append_pointer(e.payload, *idx, dict.size());
        } else {
            e.payload.push_back(true);
            e.payload.append(chunk);
            dict.insert(chunk);
        }
    }
    return e;
}

/// Decode from a cursor; consumes exactly the encoded bits, so trailing
/// data after the payload is left untouched.
inline BitString decode_fl_stream(BitCursor& cur, std::uint32_t D) {
    if (D == 0) throw std::invalid_argument("decode_fl: chunk length must be positive");
    std::uint64_t total = gamma_decode(cur);
    BitString out;
    out.reserve(total);
    ChunkDictionary dict;
    try {
        while (out.size() < total) {
            if (cur.read_bit()) {
                std::uint64_t len = std::min<std::uint64_t>(D, total - out.size());
                BitString chunk = cur.read_bits(len);
                dict.insert(chunk);
                out.append(chunk);
            } else {
                if (dict.size() == 0) throw CorruptStream("pointer into empty dictionary");
                std::uint64_t idx = cur.read_uint(pointer_width(dict.size()));
                if (idx >= dict.size()) throw CorruptStream("dictionary index out of range");
                const BitString& chunk = dict.entry(static_cast<std::uint32_t>(idx));
                if (out.size() + chunk.size() > total)
                    throw CorruptStream("decoded data overruns declared length");
                out.append(chunk);
            }
        }
    } catch (const StreamExhausted&) {
        throw CorruptStream("payload ended before declared source length");
    }
    return out;
}

// --------------------------------------------------------------------
// Variable-length deduplication
// --------------------------------------------------------------------

inline EncodedStream encode_vl(const BitString& s, std::uint32_t M) {
    if (M == 0) throw std::invalid_argument("encode_vl: anchor length must be positive");
    EncodedStream e;
    e.scheme = Scheme::VariableLength;
    e.param = M;
    if (s.empty()) return e;
    gamma_append(e.payload, s.size());
    ChunkParsing parsing = parse_anchor(s, M);
    ChunkDictionary dict;
    for (std::uint64_t c = 0; c < parsing.chunk_count(); ++c) {
        BitString chunk = parsing.chunk(c);
        if (auto idx = dict.find(chunk)) {
            e.payload.push_back(false);
            codec_detail::append_pointer(e.payload, *idx, dict.size());
        } else {
            e.payload.push_back(true);
            e.payload.append(chunk);
            dict.insert(chunk);
        }
    }
    return e;
}

inline BitString decode_vl_stream(BitCursor& cur, std::uint32_t M) {
    if (M == 0) throw std::invalid_argument("decode_vl: anchor length must be positive");
    std::uint64_t total = gamma_decode(cur);
    BitString out;
    out.reserve(total);
    ChunkDictionary dict;
    try {
        while (out.size() < total) {
            if (cur.read_bit()) {
                // Raw chunk: bits up to and including the first 0^M, or
                // up to the declared source length for the final chunk.
                BitString chunk;
                std::uint32_t run = 0;
                while (run < M && out.size() + chunk.size() < total) {
                    bool bit = cur.read_bit();
                    chunk.push_back(bit);
                    run = bit ? 0 : run + 1;
                }
                dict.insert(chunk);
                out.append(chunk);
            } else {
                if (dict.size() == 0) throw CorruptStream("pointer into empty dictionary");
                std::uint64_t idx = cur.read_uint(pointer_width(dict.size()));
                if (idx >= dict.size()) throw CorruptStream("dictionary index out of range");
                const BitString& chunk = dict.entry(static_cast<std::uint32_t>(idx));
                if (out.size() + chunk.size() > total)
                    throw CorruptStream("decoded data overruns declared length");
                out.append(chunk);
            }
        }
    } catch (const StreamExhausted&) {
        throw CorruptStream("payload ended before declared source length");
    }
    return out;
}

// --------------------------------------------------------------------
// Multi-chunk deduplication
// --------------------------------------------------------------------

/// New chunks are encoded in runs: flag 1, gamma(V), then the V chunk
/// bodies back to back. Old chunks are encoded in runs: flag 0,
/// gamma(W), then one pointer to the dictionary entry of the first
/// chunk; the run replays W consecutive dictionary entries. Newness is
/// evaluated per chunk with the dictionary updated as the run grows, so
/// a chunk repeating an earlier chunk of the same run ends the run.
inline EncodedStream encode_mc(const BitString& s, std::uint32_t M) {
    EncodedStream e;
    e.scheme = Scheme::MultiChunk;
    e.param = M;
    mc_min_length(M);  // validates M
    if (s.empty()) return e;
    gamma_append(e.payload, s.size());
    ChunkParsing parsing = parse_multichunk(s, M);
    const std::uint64_t C = parsing.chunk_count();
    ChunkDictionary dict;
    std::uint64_t c = 0;
    while (c < C) {
        BitString first = parsing.chunk(c);
        if (auto idx = dict.find(first)) {
            std::uint64_t w = 1;
            while (c + w < C && *idx + w < dict.size() &&
                   dict.entry(static_cast<std::uint32_t>(*idx + w)) == parsing.chunk(c + w))
                ++w;
            e.payload.push_back(false);
            gamma_append(e.payload, w);
            codec_detail::append_pointer(e.payload, *idx, dict.size());
            c += w;
        } else {
            std::uint64_t v = 0;
            while (c + v < C) {
                BitString chunk = parsing.chunk(c + v);
                if (dict.find(chunk)) break;
                dict.insert(chunk);
                ++v;
            }
            e.payload.push_back(true);
            gamma_append(e.payload, v);
            for (std::uint64_t i = 0; i < v; ++i) e.payload.append(parsing.chunk(c + i));
            c += v;
        }
    }
    return e;
}

inline BitString decode_mc_stream(BitCursor& cur, std::uint32_t M) {
    const std::uint64_t min_len = mc_min_length(M);
    std::uint64_t total = gamma_decode(cur);
    BitString out;
    out.reserve(total);
    ChunkDictionary dict;
    try {
        while (out.size() < total) {
            if (cur.read_bit()) {
                std::uint64_t v = gamma_decode(cur);
                for (std::uint64_t i = 0; i < v; ++i) {
                    if (out.size() >= total)
                        throw CorruptStream("new run continues past declared length");
                    BitString chunk;
                    std::uint32_t run = 0;
                    while (out.size() + chunk.size() < total) {
                        bool bit = cur.read_bit();
                        chunk.push_back(bit);
                        run = bit ? 0 : run + 1;
                        if (chunk.size() >= min_len && run >= M) break;
                    }
                    if (dict.find(chunk))
                        throw CorruptStream("duplicate chunk inside a new run");
                    dict.insert(chunk);
                    out.append(chunk);
                }
            } else {
                std::uint64_t w = gamma_decode(cur);
                if (dict.size() == 0) throw CorruptStream("pointer into empty dictionary");
                std::uint64_t idx = cur.read_uint(pointer_width(dict.size()));
                if (idx >= dict.size() || w > dict.size() - idx)
                    throw CorruptStream("old run overruns dictionary");
                for (std::uint64_t i = 0; i < w; ++i) {
                    const BitString& chunk = dict.entry(static_cast<std::uint32_t>(idx + i));
                    if (out.size() + chunk.size() > total)
                        throw CorruptStream("decoded data overruns declared length");
                    out.append(chunk);
                }
            }
        }
    } catch (const StreamExhausted&) {
        throw CorruptStream("payload ended before declared source length");
    }
    return out;
}

// --------------------------------------------------------------------
// Scheme-generic entry points
// --------------------------------------------------------------------

inline EncodedStream encode(const BitString& s, Scheme scheme, std::uint32_t param) {
    switch (scheme) {
        case Scheme::FixedLength: return encode_fl(s, param);
        case Scheme::VariableLength: return encode_vl(s, param);
        case Scheme::MultiChunk: return encode_mc(s, param);
    }
    throw std::invalid_argument("encode: bad scheme");
}

inline BitString decode_stream(BitCursor& cur, Scheme scheme, std::uint32_t param) {
    switch (scheme) {
        case Scheme::FixedLength: return decode_fl_stream(cur, param);
        case Scheme::VariableLength: return decode_vl_stream(cur, param);
        case Scheme::MultiChunk: return decode_mc_stream(cur, param);
    }
    throw std::invalid_argument("decode: bad scheme");
}

/// Decode a whole stream; the payload must be consumed exactly.
inline BitString decode(const EncodedStream& e) {
    if (e.payload.empty()) return BitString();
    BitCursor cur(e.payload);
    BitString out = decode_stream(cur, e.scheme, e.param);
    if (cur.position() != e.payload.size())
        throw CorruptStream("payload longer than its encoding");
    return out;
}

inline BitString decode_fl(const EncodedStream& e) {
    if (e.scheme != Scheme::FixedLength) throw std::invalid_argument("decode_fl: wrong scheme");
    return decode(e);
}
inline BitString decode_vl(const EncodedStream& e) {
    if (e.scheme != Scheme::VariableLength)
        throw std::invalid_argument("decode_vl: wrong scheme");
    return decode(e);
}
inline BitString decode_mc(const EncodedStream& e) {
    if (e.scheme != Scheme::MultiChunk) throw std::invalid_argument("decode_mc: wrong scheme");
    return decode(e);
}

// --------------------------------------------------------------------
// DDUP container: "DDUP" magic, version byte, scheme byte (0 FL, 1 VL,
// 2 MC), 32-bit parameter, 64-bit payload bit count, payload packed
// MSB-first with zero padding. Integers little-endian.
// --------------------------------------------------------------------

inline void write_ddup(std::ostream& out, const EncodedStream& e) {
    using namespace io_detail;
    put_bytes(out, "DDUP", 4);
    std::uint8_t version = 1;
    std::uint8_t scheme = static_cast<std::uint8_t>(e.scheme);
    put_bytes(out, &version, 1);
    put_bytes(out, &scheme, 1);
    put_u32(out, e.param);
    put_u64(out, e.payload.size());
    put_bytes(out, e.payload.packed_bytes().data(), e.payload.packed_bytes().size());
    if (!out) throw std::runtime_error("write failed");
}

inline EncodedStream read_ddup(std::istream& in) {
    using namespace io_detail;
    char magic[4];
    get_bytes(in, magic, 4);
    if (std::string(magic, 4) != "DDUP") throw CorruptStream("not a DDUP container");
    std::uint8_t version, scheme;
    get_bytes(in, &version, 1);
    get_bytes(in, &scheme, 1);
    if (version != 1) throw CorruptStream("unsupported DDUP version");
    if (scheme > 2) throw CorruptStream("unknown scheme byte");
    EncodedStream e;
    e.scheme = static_cast<Scheme>(scheme);
    e.param = get_u32(in);
    std::uint64_t bits = get_u64(in);
    std::vector<std::uint8_t> packed(static_cast<std::size_t>((bits + 7) / 8));
    if (!packed.empty()) get_bytes(in, packed.data(), packed.size());
    e.payload = BitString::from_packed(std::move(packed), bits);
    return e;
}

inline void write_ddup_file(const std::string& path, const EncodedStream& e) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_ddup(out, e);
}

inline EncodedStream read_ddup_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return read_ddup(in);
}

} // namespace dedup
