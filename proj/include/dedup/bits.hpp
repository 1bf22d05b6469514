#pragma once

#include <cstdint>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dedup {

struct StreamError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Read past the end of a bit stream.
struct StreamExhausted : StreamError {
    using StreamError::StreamError;
};

/// Decoder saw bits that no encoder produces (bad index, truncated
/// codeword, payload under/overrun).
struct CorruptStream : StreamError {
    using StreamError::StreamError;
};

/// Sequence of bits packed MSB-first into bytes. Unused bits of the
/// final byte are kept zero, so equal contents imply equal storage.
class BitString {
public:
    BitString() = default;

    static BitString from_string(std::string_view s) {
        BitString b;
        b.reserve(s.size());
        for (char c : s) {
            if (c == '0') b.push_back(false);
            else if (c == '1') b.push_back(true);
            else throw std::invalid_argument("BitString::from_string: bad character");
        }
        return b;
    }

    /// Reinterpret packed bytes (MSB-first) as a bit string of `bits` bits.
    static BitString from_packed(std::vector<std::uint8_t> bytes, std::uint64_t bits) {
        if (bytes.size() != (bits + 7) / 8)
            throw std::invalid_argument("BitString::from_packed: byte count mismatch");
        BitString b;
        b.bytes_ = std::move(bytes);
        b.size_ = bits;
        b.mask_tail();
        return b;
    }

    std::uint64_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    bool operator[](std::uint64_t i) const {
        return (bytes_[i >> 3] >> (7 - (i & 7))) & 1u;
    }

    bool at(std::uint64_t i) const {
        if (i >= size_) throw std::out_of_range("BitString::at");
        return (*this)[i];
    }

    void reserve(std::uint64_t bits) { bytes_.reserve(static_cast<std::size_t>((bits + 7) / 8)); }

    void push_back(bool bit) {
        if ((size_ & 7) == 0) bytes_.push_back(0);
        if (bit) bytes_[size_ >> 3] |= static_cast<std::uint8_t>(0x80u >> (size_ & 7));
        ++size_;
    }

    /// Append `width` low bits of `value`, most significant first.
    void append_uint(std::uint64_t value, unsigned width) {
        for (unsigned i = width; i-- > 0;) push_back((value >> i) & 1u);
    }

    void append(const BitString& other) {
        if (other.size_ == 0) return;
        if ((size_ & 7) == 0) {
            bytes_.insert(bytes_.end(), other.bytes_.begin(), other.bytes_.end());
            size_ += other.size_;
            mask_tail();
            return;
        }
        const unsigned shift = size_ & 7;          // bits already used in tail byte
        const unsigned rev = 8 - shift;
        std::uint64_t newsize = size_ + other.size_;
        bytes_.resize(static_cast<std::size_t>((newsize + 7) / 8), 0);
        std::size_t dst = static_cast<std::size_t>(size_ >> 3);
        for (std::size_t src = 0; src < other.bytes_.size(); ++src) {
            std::uint8_t v = other.bytes_[src];
            bytes_[dst] |= static_cast<std::uint8_t>(v >> shift);
            if (dst + 1 < bytes_.size())
                bytes_[dst + 1] |= static_cast<std::uint8_t>(v << rev);
            ++dst;
        }
        size_ = newsize;
        mask_tail();
    }

    BitString substr(std::uint64_t pos, std::uint64_t len) const {
        if (pos + len > size_) throw std::out_of_range("BitString::substr");
        BitString out;
        out.reserve(len);
        if ((pos & 7) == 0) {
            std::size_t first = static_cast<std::size_t>(pos >> 3);
            out.bytes_.assign(bytes_.begin() + first,
                              bytes_.begin() + first + static_cast<std::size_t>((len + 7) / 8));
            out.size_ = len;
            out.mask_tail();
            return out;
        }
        for (std::uint64_t i = 0; i < len; ++i) out.push_back((*this)[pos + i]);
        return out;
    }

    std::string to_string() const {
        std::string s;
        s.reserve(static_cast<std::size_t>(size_));
        for (std::uint64_t i = 0; i < size_; ++i) s.push_back((*this)[i] ? '1' : '0');
        return s;
    }

    const std::vector<std::uint8_t>& packed_bytes() const { return bytes_; }

    friend bool operator==(const BitString& a, const BitString& b) {
        return a.size_ == b.size_ && a.bytes_ == b.bytes_;
    }
    friend bool operator!=(const BitString& a, const BitString& b) { return !(a == b); }

    std::size_t hash() const {
        // FNV-1a over the packed bytes plus the length.
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](std::uint8_t v) {
            h ^= v;
            h *= 1099511628211ull;
        };
        for (std::uint8_t v : bytes_) mix(v);
        for (int i = 0; i < 8; ++i) mix(static_cast<std::uint8_t>(size_ >> (8 * i)));
        return static_cast<std::size_t>(h);
    }

private:
    void mask_tail() {
        bytes_.resize(static_cast<std::size_t>((size_ + 7) / 8));
        if (size_ & 7)
            bytes_.back() &= static_cast<std::uint8_t>(0xFF00u >> (size_ & 7));
    }

    std::vector<std::uint8_t> bytes_;
    std::uint64_t size_ = 0;
};

struct BitStringHash {
    std::size_t operator()(const BitString& b) const { return b.hash(); }
};

/// Reading position over a BitString; reads advance the position.
class BitCursor {
public:
    explicit BitCursor(const BitString& s, std::uint64_t pos = 0) : s_(&s), pos_(pos) {
        if (pos_ > s_->size()) throw std::out_of_range("BitCursor: position past end");
    }
    explicit BitCursor(BitString&&, std::uint64_t = 0) = delete;  // would dangle

    std::uint64_t position() const { return pos_; }
    std::uint64_t remaining() const { return s_->size() - pos_; }

    bool read_bit() {
        if (pos_ >= s_->size()) throw StreamExhausted("bit stream exhausted");
        return (*s_)[pos_++];
    }

    BitString read_bits(std::uint64_t n) {
        if (pos_ + n > s_->size()) throw StreamExhausted("bit stream exhausted");
        BitString out = s_->substr(pos_, n);
        pos_ += n;
        return out;
    }

    std::uint64_t read_uint(unsigned width) {
        if (width > 64) throw std::invalid_argument("BitCursor::read_uint: width > 64");
        if (pos_ + width > s_->size()) throw StreamExhausted("bit stream exhausted");
        std::uint64_t v = 0;
        for (unsigned i = 0; i < width; ++i) v = (v << 1) | ((*s_)[pos_ + i] ? 1u : 0u);
        pos_ += width;
        return v;
    }

private:
    const BitString* s_;
    std::uint64_t pos_;
};

inline unsigned floor_log2_u64(std::uint64_t n) {
    unsigned r = 0;
    while (n >>= 1) ++r;
    return r;
}

/// Width of the dictionary pointer for a dictionary of `size` entries:
/// ceil(log2(size)), which is 0 for a single entry.
inline unsigned pointer_width(std::uint64_t size) {
    if (size <= 1) return 0;
    unsigned r = floor_log2_u64(size - 1) + 1;
    return r;
}

inline unsigned gamma_length(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("gamma_length: n must be positive");
    return 2 * floor_log2_u64(n) + 1;
}

/// Elias gamma code: floor(log2(n)) zeros followed by the binary
/// expansion of n. gamma(7) = 00111.
inline void gamma_append(BitString& out, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("gamma_encode: n must be positive");
    unsigned w = floor_log2_u64(n) + 1;
    for (unsigned i = 1; i < w; ++i) out.push_back(false);
    out.append_uint(n, w);
}

inline BitString gamma_encode(std::uint64_t n) {
    BitString out;
    gamma_append(out, n);
    return out;
}

inline std::uint64_t gamma_decode(BitCursor& cur) {
    unsigned zeros = 0;
    for (;;) {
        bool b;
        try {
            b = cur.read_bit();
        } catch (const StreamExhausted&) {
            throw CorruptStream("truncated gamma codeword");
        }
        if (b) break;
        if (++zeros >= 64) throw CorruptStream("gamma codeword too long");
    }
    std::uint64_t v = 1;
    for (unsigned i = 0; i < zeros; ++i) {
        bool b;
        try {
            b = cur.read_bit();
        } catch (const StreamExhausted&) {
            throw CorruptStream("truncated gamma codeword");
        }
        v = (v << 1) | (b ? 1u : 0u);
    }
    return v;
}

} // namespace dedup
