#include "agar/machine.hpp"

#include <sstream>
#include <stdexcept>

namespace agar {

std::string Transcript::to_csv() const {
    std::ostringstream out;
    out << "t,x_t,u_t\n";
    for (std::size_t t = 0; t < horizon; ++t)
        out << (t + 1) << ',' << int(world_readout[t]) << ',' << int(regulator_output[t])
            << '\n';
    return out.str();
}

CausalTransducer::CausalTransducer(std::uint32_t state_count, std::uint32_t scratch_capacity,
                                   std::vector<Entry> table)
    : state_count_(state_count), scratch_capacity_(scratch_capacity), table_(std::move(table)) {
    if (state_count_ == 0)
        throw std::invalid_argument("CausalTransducer: state_count must be positive");
    if (table_.size() != std::size_t{2} * state_count_)
        throw std::invalid_argument("CausalTransducer: transition table must be total");
    for (const Entry& e : table_) {
        if (e.next >= state_count_)
            throw std::invalid_argument("CausalTransducer: next state out of range");
        if (e.out > 1) throw std::invalid_argument("CausalTransducer: output symbol not binary");
    }
    code_ = serialize(*this);
}

namespace {

class TransducerExecution final : public Execution {
public:
    explicit TransducerExecution(const CausalTransducer& m) : m_(&m) {}

    Bit step(Bit input) override {
        const auto& e = m_->entry(state_, input & 1u);
        state_ = e.next;
        return e.out;
    }

private:
    const CausalTransducer* m_;
    std::uint32_t state_ = 0;
};

}  // namespace

std::unique_ptr<Execution> CausalTransducer::start() const {
    return std::make_unique<TransducerExecution>(*this);
}

BitString serialize(const CausalTransducer& m) {
    BitString code;
    append_elias_gamma(code, m.state_count());
    append_elias_gamma(code, std::uint64_t{m.scratch_capacity()} + 1);
    unsigned state_bits = ceil_log2(m.state_count());
    for (std::uint32_t s = 0; s < m.state_count(); ++s) {
        for (Bit in = 0; in < 2; ++in) {
            const auto& e = m.entry(s, in);
            code.append_uint(e.next, state_bits);
            code.push_back(e.out);
        }
    }
    code.push_back(1);
    code.push_back(1);
    return code;
}

CausalTransducer deserialize_transducer(const BitString& code) {
    BitReader r(code);
    std::uint64_t state_count = r.read_elias_gamma();
    std::uint64_t scratch_plus_one = r.read_elias_gamma();
    if (state_count == 0 || scratch_plus_one == 0)
        throw std::invalid_argument("deserialize_transducer: malformed header");
    unsigned state_bits = ceil_log2(state_count);
    std::vector<CausalTransducer::Entry> table;
    table.reserve(2 * state_count);
    for (std::uint64_t i = 0; i < 2 * state_count; ++i) {
        CausalTransducer::Entry e;
        e.next = static_cast<std::uint32_t>(r.read_uint(state_bits));
        e.out = r.read();
        table.push_back(e);
    }
    if (r.read() != 1 || r.read() != 1)
        throw std::invalid_argument("deserialize_transducer: missing end marker");
    if (!r.exhausted())
        throw std::invalid_argument("deserialize_transducer: trailing bits");
    return CausalTransducer(static_cast<std::uint32_t>(state_count),
                            static_cast<std::uint32_t>(scratch_plus_one - 1), std::move(table));
}

CausalTransducer null_regulator() {
    return CausalTransducer(1, 0, {{0, 0}, {0, 0}});
}

Transcript run_coupled(const Machine& world, const Machine& regulator, std::size_t horizon) {
    if (horizon == 0) throw std::invalid_argument("run_coupled: horizon must be >= 1");
    auto w = world.start();
    auto r = regulator.start();
    Transcript t;
    t.horizon = horizon;
    Bit w_prev = 0;
    Bit r_prev = 0;
    for (std::size_t i = 0; i < horizon; ++i) {
        Bit x = w->step(r_prev);
        Bit u = r->step(w_prev);
        t.world_readout.push_back(x);
        t.regulator_output.push_back(u);
        w_prev = x;
        r_prev = u;
    }
    return t;
}

BitString open_loop(const Machine& m, const BitString& inputs) {
    auto exec = m.start();
    BitString out;
    for (std::size_t i = 0; i < inputs.size(); ++i) out.push_back(exec->step(inputs[i]));
    return out;
}

}  // namespace agar
