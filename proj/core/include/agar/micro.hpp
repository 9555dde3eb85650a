#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "agar/bits.hpp"
#include "agar/errors.hpp"
#include "agar/exact.hpp"

namespace agar {

/* Reference prefix machine. Programs are streams of 2-bit opcodes
 *   00 EMIT0   append 0
 *   01 EMIT1   append 1
 *   10 DBL     append a copy of the current output buffer
 *   11 HALT    stop; must appear exactly once, at the end
 * The first HALT terminates the program and DBL on an empty buffer
 * rejects it, so the set of valid programs is prefix-free by
 * construction. Costs: one step per executed opcode plus the number of
 * symbols a DBL appends; exceeding the step budget counts as
 * non-halting and contributes nothing. */
enum class MicroOp : std::uint8_t { Emit0 = 0, Emit1 = 1, Dbl = 2, Halt = 3 };

extern const char* const kMicroOpcodeDescriptor;
std::string micro_opcode_hash();  // first 16 hex chars of sha256(descriptor)

struct MicroRun {
    bool halted = false;
    BitString output;
    std::uint64_t steps_used = 0;
};

MicroRun run_micro_program(const BitString& code, std::uint64_t step_budget);

/* Per-output record of the exhaustive enumeration at (L, S).
 * count_by_len[i] is the number of programs of exactly 2(i+1) bits
 * emitting this output; m_num is 2^L * m_L(output), exact. */
struct OutputRecord {
    BitString output;
    unsigned k_bits = 0;
    std::uint64_t m_num = 0;
    std::vector<std::uint32_t> count_by_len;

    std::uint64_t n_up_to(unsigned max_bits) const;  // N_{<= max_bits}
    std::uint64_t n_total() const;
};

class EnumerationIndex {
public:
    static EnumerationIndex build(unsigned max_program_bits, std::uint64_t step_budget,
                                  unsigned threads = 1);

    unsigned max_program_bits() const { return max_bits_; }
    std::uint64_t step_budget() const { return step_budget_; }
    const std::vector<OutputRecord>& records() const { return records_; }
    const OutputRecord* find(const BitString& x) const;

    /* kraft_sum = kraft_num / 2^L, exact. */
    std::uint64_t kraft_num() const { return kraft_num_; }
    std::uint64_t kraft_den() const { return std::uint64_t{1} << max_bits_; }

    std::vector<std::uint8_t> to_bytes() const;
    static EnumerationIndex from_bytes(const std::vector<std::uint8_t>& bytes);
    std::string to_csv() const;

private:
    unsigned max_bits_ = 0;
    std::uint64_t step_budget_ = 0;
    std::uint64_t kraft_num_ = 0;
    std::vector<OutputRecord> records_;  // sorted by output (length, then lex)
};

/* P(p | x) = 2^{-|p|} / m_L(x), exact. The program must emit x. */
Rational posterior(const BitString& program, const BitString& x,
                   const EnumerationIndex& index);

/* c1 = min_x m 2^K, c2 = max_x m 2^K; c1 >= 1 by the shortest
 * program's own mass. */
struct CodingConstants {
    Dyadic c1;
    Dyadic c2;
};
CodingConstants coding_constants(const EnumerationIndex& index);

/* P{|p| >= K(x)+k | x} for k = 0..L-K(x), with the 2(c2/c1)2^-k bound
 * evaluated exactly. */
struct TailRow {
    unsigned excess = 0;
    std::uint64_t num = 0;
    std::uint64_t den = 1;
    bool within_bound = true;
};
std::vector<TailRow> tail_profile(const BitString& x, const EnumerationIndex& index);

struct MultiplicityReport {
    unsigned r = 0;
    std::uint64_t qualifying = 0;
    std::uint64_t violations = 0;           // against K <= L - r + c log2 L + c'
    double reference_c = 1.0;
    double reference_c_prime = 4.0;
    double fitted_c_prime = 0.0;            // max over qualifying x of K-(L-r)-log2 L
    bool weight_counting_exact = true;      // N_{<=L}(x) <= m_num for every x
};
MultiplicityReport multiplicity_check(const EnumerationIndex& index, unsigned r);

struct CountingResult {
    std::uint64_t count = 0;
    std::uint64_t bound = 0;
    bool ok = true;
};
CountingResult counting_check(const EnumerationIndex& index, unsigned n, unsigned k);

/* Exhaustive sweep over all u of |z| bits: fraction of u with
 * K_L(z xor u) <= n - drop, against the chance bound 2^{1-drop}. */
struct ChanceRow {
    unsigned drop = 0;
    std::uint64_t count = 0;
    std::uint64_t total = 0;
    bool within_bound = true;
};
std::vector<ChanceRow> chance_simplification_sweep(const EnumerationIndex& index,
                                                   const BitString& z);

/* Exhaustive world-regulator family sweep verifying the contrastive
 * regulator bound with exact arithmetic. Machines are all transducers
 * whose canonical codes fit in code_limit bits; K proxies are minimal
 * code lengths over behavioral equivalents within the family, and the
 * pair proxy is the minimal pairing (concatenated) code. */
struct GarPairResult {
    std::size_t world_id = 0;
    std::size_t regulator_id = 0;
    BitString on_readout;
    BitString off_readout;
    unsigned a_bits = 0;
    unsigned b_bits = 0;
    int delta_bits = 0;
    unsigned k_world = 0;
    unsigned k_regulator = 0;
    unsigned k_pair = 0;
    int m_bits = 0;
    Rational posterior;  // P(pair | on_readout)
};

struct GarReport {
    unsigned code_limit = 0;
    std::size_t horizon = 0;
    unsigned index_bits = 0;
    std::uint64_t step_budget = 0;
    std::size_t machine_count = 0;
    std::vector<GarPairResult> pairs;
    Rational c_constant;       // max posterior * 2^{delta - m}
    Rational c_tail_constant;  // max over (x, b) groups and k of tail(k) * 2^k
    std::string to_csv() const;
};

GarReport gar_bound_check(unsigned code_limit, std::size_t horizon, unsigned index_bits,
                          std::uint64_t step_budget);

}  // namespace agar
