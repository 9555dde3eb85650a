#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "agar/bits.hpp"

namespace agar {

/* Interface record of one closed-loop run over a fixed horizon.
 * world_readout is x, regulator_output is u; |x| = |u| = horizon. */
struct Transcript {
    std::size_t horizon = 0;
    BitString world_readout;
    BitString regulator_output;

    std::string to_csv() const;
};

/* Per-run mutable cursor over an immutable machine. */
class Execution {
public:
    virtual ~Execution() = default;
    virtual Bit step(Bit input) = 0;
};

/* A deterministic causal machine: one interface symbol in, one out, per
 * step. Machines are immutable after construction; all run state lives
 * in the Execution returned by start(), so concurrent runs are safe.
 * code() is the machine's canonical self-delimiting description and
 * description_bits() its length, the computable stand-in for K(machine). */
class Machine {
public:
    virtual ~Machine() = default;
    virtual std::unique_ptr<Execution> start() const = 0;
    virtual const BitString& code() const = 0;
    virtual std::unique_ptr<Machine> clone() const = 0;

    std::size_t description_bits() const { return code().size(); }
};

/* Finite-state transducer with a total transition map over
 * state x {0,1}. The initial state is state 0 by convention.
 * scratch_capacity is carried through the serialized header; builders
 * fold any auxiliary cells into the state space, so execution itself
 * is table-driven. */
class CausalTransducer final : public Machine {
public:
    struct Entry {
        std::uint32_t next = 0;
        Bit out = 0;
    };

    CausalTransducer(std::uint32_t state_count, std::uint32_t scratch_capacity,
                     std::vector<Entry> table);

    std::uint32_t state_count() const { return state_count_; }
    std::uint32_t scratch_capacity() const { return scratch_capacity_; }
    const Entry& entry(std::uint32_t state, Bit input) const {
        return table_[2 * state + input];
    }

    std::unique_ptr<Execution> start() const override;
    const BitString& code() const override { return code_; }
    std::unique_ptr<Machine> clone() const override {
        return std::make_unique<CausalTransducer>(*this);
    }

private:
    std::uint32_t state_count_;
    std::uint32_t scratch_capacity_;
    std::vector<Entry> table_;  // row-major (state, input)
    BitString code_;
};

/* Canonical bit-exact serialization:
 *   header  = gamma(state_count), gamma(scratch_capacity + 1)
 *   body    = entries in row-major (state, input) order, each
 *             ceil_log2(state_count) next-state bits + 1 output bit
 *   trailer = 11
 * Structurally distinct machines with equal behavior serialize
 * differently; no behavioral canonicalization is attempted. */
BitString serialize(const CausalTransducer& m);
CausalTransducer deserialize_transducer(const BitString& code);

/* Single-state machine emitting 0 on every input. */
CausalTransducer null_regulator();

/* Lock-step synchronous coupling: at step t each machine reads the
 * other's step-(t-1) output; step-0 exchanged symbols are 0 on both
 * interfaces. Pure function of (world, regulator, horizon). */
Transcript run_coupled(const Machine& world, const Machine& regulator, std::size_t horizon);

/* Feed an explicit input stream; returns the machine's output stream. */
BitString open_loop(const Machine& m, const BitString& inputs);

}  // namespace agar
