#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace agar {

using Bit = std::uint8_t;

/* Packed bit sequence, index 0 = first symbol. Ordering is
 * length-first, then lexicographic, which is the canonical order
 * used for every sorted artifact (index files, CTM tables). */
class BitString {
public:
    BitString() = default;

    static BitString zeros(std::size_t n) {
        BitString s;
        s.size_ = n;
        s.words_.assign((n + 63) / 64, 0);
        return s;
    }

    static BitString from_ascii(std::string_view text) {
        BitString s;
        for (char c : text) {
            if (c == '0')
                s.push_back(0);
            else if (c == '1')
                s.push_back(1);
            else
                throw std::invalid_argument("BitString::from_ascii: symbol must be 0 or 1");
        }
        return s;
    }

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    Bit operator[](std::size_t i) const {
        return static_cast<Bit>((words_[i >> 6] >> (i & 63)) & 1u);
    }

    void set(std::size_t i, Bit b) {
        std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (b)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }

    void push_back(Bit b) {
        if ((size_ & 63) == 0) words_.push_back(0);
        if (b) words_.back() |= std::uint64_t{1} << (size_ & 63);
        ++size_;
    }

    void append(const BitString& other) {
        for (std::size_t i = 0; i < other.size_; ++i) push_back(other[i]);
    }

    /* Most significant bit first. */
    void append_uint(std::uint64_t value, unsigned width) {
        for (unsigned i = width; i-- > 0;) push_back(static_cast<Bit>((value >> i) & 1u));
    }

    void clear() {
        words_.clear();
        size_ = 0;
    }

    std::string to_ascii() const {
        std::string out(size_, '0');
        for (std::size_t i = 0; i < size_; ++i)
            if ((*this)[i]) out[i] = '1';
        return out;
    }

    /* First symbol goes to the MSB of the first byte; tail padded with zeros. */
    std::vector<std::uint8_t> packed_bytes() const {
        std::vector<std::uint8_t> out((size_ + 7) / 8, 0);
        for (std::size_t i = 0; i < size_; ++i)
            if ((*this)[i]) out[i >> 3] |= static_cast<std::uint8_t>(0x80u >> (i & 7));
        return out;
    }

    static BitString from_packed(const std::uint8_t* data, std::size_t nbits) {
        BitString s;
        for (std::size_t i = 0; i < nbits; ++i)
            s.push_back(static_cast<Bit>((data[i >> 3] >> (7 - (i & 7))) & 1u));
        return s;
    }

    /* Value of the whole string read MSB-first; valid for size <= 64. */
    std::uint64_t to_uint() const {
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < size_; ++i) v = (v << 1) | (*this)[i];
        return v;
    }

    static BitString from_uint(std::uint64_t value, unsigned width) {
        BitString s;
        s.append_uint(value, width);
        return s;
    }

    bool is_prefix_of(const BitString& other) const {
        if (size_ > other.size_) return false;
        for (std::size_t i = 0; i < size_; ++i)
            if ((*this)[i] != other[i]) return false;
        return true;
    }

    friend bool operator==(const BitString& a, const BitString& b) {
        if (a.size_ != b.size_) return false;
        for (std::size_t w = 0; w < a.words_.size(); ++w) {
            std::uint64_t mask = ~std::uint64_t{0};
            if (w == a.words_.size() - 1 && (a.size_ & 63))
                mask = (std::uint64_t{1} << (a.size_ & 63)) - 1;
            if ((a.words_[w] & mask) != (b.words_[w] & mask)) return false;
        }
        return true;
    }

    friend std::strong_ordering operator<=>(const BitString& a, const BitString& b) {
        if (a.size_ != b.size_) return a.size_ <=> b.size_;
        for (std::size_t i = 0; i < a.size_; ++i)
            if (a[i] != b[i]) return a[i] <=> b[i];
        return std::strong_ordering::equal;
    }

    std::size_t hash() const {
        std::uint64_t h = 1469598103934665603ull ^ size_;
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t word = words_[w];
            if (w == words_.size() - 1 && (size_ & 63))
                word &= (std::uint64_t{1} << (size_ & 63)) - 1;
            h ^= word;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }

private:
    std::vector<std::uint64_t> words_;
    std::size_t size_ = 0;
};

struct BitStringHash {
    std::size_t operator()(const BitString& s) const { return s.hash(); }
};

/* Bits needed to index n alternatives; 0 when n == 1. */
inline unsigned ceil_log2(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("ceil_log2: n must be positive");
    unsigned bits = 0;
    std::uint64_t cap = 1;
    while (cap < n) {
        cap <<= 1;
        ++bits;
    }
    return bits;
}

inline unsigned floor_log2(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("floor_log2: n must be positive");
    unsigned bits = 0;
    while (n >>= 1) ++bits;
    return bits;
}

/* Elias gamma code of v >= 1: floor_log2(v) zeros, then v in binary. */
inline void append_elias_gamma(BitString& s, std::uint64_t v) {
    if (v == 0) throw std::invalid_argument("elias gamma: value must be positive");
    unsigned k = floor_log2(v);
    for (unsigned i = 0; i < k; ++i) s.push_back(0);
    s.append_uint(v, k + 1);
}

inline std::size_t elias_gamma_length(std::uint64_t v) {
    if (v == 0) throw std::invalid_argument("elias gamma: value must be positive");
    return 2 * floor_log2(v) + 1;
}

class BitReader {
public:
    explicit BitReader(const BitString& s) : s_(&s) {}

    bool exhausted() const { return pos_ >= s_->size(); }
    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return s_->size() - pos_; }

    Bit read() {
        if (exhausted()) throw std::out_of_range("BitReader: read past end");
        return (*s_)[pos_++];
    }

    std::uint64_t read_uint(unsigned width) {
        std::uint64_t v = 0;
        for (unsigned i = 0; i < width; ++i) v = (v << 1) | read();
        return v;
    }

    std::uint64_t read_elias_gamma() {
        unsigned k = 0;
        while (read() == 0) ++k;
        std::uint64_t v = 1;
        for (unsigned i = 0; i < k; ++i) v = (v << 1) | read();
        return v;
    }

private:
    const BitString* s_;
    std::size_t pos_ = 0;
};

}  // namespace agar
