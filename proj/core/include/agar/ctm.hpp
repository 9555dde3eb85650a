#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agar/bits.hpp"
#include "agar/codec.hpp"

namespace agar {

/* Coding-Theorem-Method table over blocks of a fixed length, built from
 * the micro-universe enumeration restricted to outputs of exactly that
 * length and normalized over them:
 *   K_ctm(block) = -log2( m_L(block) / sum_{|y|=b} m_L(y) ).
 * Values are stored in 1/2^24-bit fixed point (the file's 32-bit field),
 * blocks sorted by value. Blocks never emitted fall back to the declared
 * penalty b + 2 log2 b at lookup time. */
class CtmTable {
public:
    struct Entry {
        std::uint32_t block = 0;   // MSB-first value of the b-bit block
        std::uint32_t k_fixed = 0; // K_ctm in 2^-24 bit units
    };

    CtmTable(unsigned block_bits, unsigned source_max_bits, std::uint64_t source_steps,
             std::vector<Entry> entries);

    unsigned block_bits() const { return block_bits_; }
    unsigned source_max_bits() const { return source_max_bits_; }
    std::uint64_t source_steps() const { return source_steps_; }
    const std::vector<Entry>& entries() const { return entries_; }
    double coverage() const;

    std::optional<double> lookup(std::uint32_t block) const;
    double k_or_fallback(std::uint32_t block) const;
    double fallback_bits() const;

    std::vector<std::uint8_t> to_bytes() const;
    static CtmTable from_bytes(const std::vector<std::uint8_t>& bytes);
    std::string to_csv() const;

private:
    unsigned block_bits_;
    unsigned source_max_bits_;
    std::uint64_t source_steps_;
    std::vector<Entry> entries_;  // sorted by block value
};

CtmTable build_ctm_table(unsigned block_bits, unsigned max_program_bits,
                         std::uint64_t step_budget, unsigned threads = 1);

/* Block Decomposition Method, drop-remainder policy: consecutive
 * non-overlapping blocks, trailing partial block dropped and its size
 * reported; bits = sum over distinct blocks of K_ctm + log2 multiplicity. */
CodeLengthReport bdm(const BitString& x, const CtmTable& table);

using CtmTableProvider =
    std::function<std::shared_ptr<const CtmTable>(unsigned b, unsigned L, std::uint64_t S)>;

/* Full estimator factory including bdm; the provider supplies (and may
 * cache) CTM tables. */
Codelength make_estimator_with_tables(const EstimatorSpec& spec,
                                      const CtmTableProvider& provider);

}  // namespace agar
