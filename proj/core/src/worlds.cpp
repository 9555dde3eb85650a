#include "agar/worlds.hpp"

#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "agar/codec.hpp"
#include "agar/rng.hpp"

namespace agar {

// ---------------------------------------------------------------------------
// Thermostat

void ThermostatParams::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("thermostat: dt must be > 0");
    if (!(time_constant > 0.0)) throw std::invalid_argument("thermostat: tau must be > 0");
    if (!(dt / time_constant < 1.0))
        throw std::invalid_argument("thermostat: need dt/tau < 1 for a stable update");
    if (readout_bits < 1 || readout_bits > 16)
        throw std::invalid_argument("thermostat: readout_bits must be in [1,16]");
    if (!(error_lo < error_hi)) throw std::invalid_argument("thermostat: error range empty");
    if (!(outdoor_period > 0.0)) throw std::invalid_argument("thermostat: period must be > 0");
    if (outdoor_amplitude < 0.0)
        throw std::invalid_argument("thermostat: amplitude must be >= 0");
}

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

/* Plant state shared by the Machine execution and the trace replay. */
struct ThermostatCore {
    const ThermostatParams* p;
    double temp;
    std::size_t plant_step = 0;

    explicit ThermostatCore(const ThermostatParams& params)
        : p(&params), temp(params.initial_temp) {}

    std::uint32_t update(Bit heat) {
        double outdoor = p->outdoor_temp;
        if (p->outdoor_amplitude != 0.0)
            outdoor += p->outdoor_amplitude *
                       std::sin(kTwoPi * static_cast<double>(plant_step) / p->outdoor_period +
                                p->forcing_phase);
        temp += p->dt * (-(temp - outdoor) / p->time_constant) + p->heater_gain * heat;
        ++plant_step;
        return quantize_value(temp - p->setpoint, p->readout_bits, p->error_lo, p->error_hi);
    }
};

class ThermostatExecution final : public Execution {
public:
    explicit ThermostatExecution(const ThermostatParams& params) : core_(params) {}

    Bit step(Bit input) override {
        if (bitpos_ == 0) code_ = core_.update(input);
        Bit out = static_cast<Bit>((code_ >> (core_.p->readout_bits - 1 - bitpos_)) & 1u);
        bitpos_ = (bitpos_ + 1) % core_.p->readout_bits;
        return out;
    }

private:
    ThermostatCore core_;
    unsigned bitpos_ = 0;
    std::uint32_t code_ = 0;
};

void append_double(BitString& code, double v) {
    code.append_uint(std::bit_cast<std::uint64_t>(v), 64);
}

double read_double(BitReader& r) { return std::bit_cast<double>(r.read_uint(64)); }

}  // namespace

ThermostatWorld::ThermostatWorld(ThermostatParams params) : params_(params) {
    params_.validate();
    // parameter block: gamma(readout_bits), then the real fields as raw
    // IEEE-754 words in a fixed order
    append_elias_gamma(code_, params_.readout_bits);
    for (double v : {params_.dt, params_.time_constant, params_.outdoor_temp,
                     params_.outdoor_amplitude, params_.outdoor_period, params_.forcing_phase,
                     params_.heater_gain, params_.setpoint, params_.initial_temp,
                     params_.error_lo, params_.error_hi})
        append_double(code_, v);
}

std::unique_ptr<Execution> ThermostatWorld::start() const {
    return std::make_unique<ThermostatExecution>(params_);
}

ThermostatWorld ThermostatWorld::from_code(const BitString& code) {
    BitReader r(code);
    ThermostatParams p;
    p.readout_bits = static_cast<unsigned>(r.read_elias_gamma());
    p.dt = read_double(r);
    p.time_constant = read_double(r);
    p.outdoor_temp = read_double(r);
    p.outdoor_amplitude = read_double(r);
    p.outdoor_period = read_double(r);
    p.forcing_phase = read_double(r);
    p.heater_gain = read_double(r);
    p.setpoint = read_double(r);
    p.initial_temp = read_double(r);
    p.error_lo = read_double(r);
    p.error_hi = read_double(r);
    if (!r.exhausted()) throw std::invalid_argument("ThermostatWorld: trailing code bits");
    return ThermostatWorld(p);
}

std::vector<PlantTraceRow> thermostat_trace(const ThermostatParams& params,
                                            const Machine& regulator,
                                            std::size_t plant_steps) {
    params.validate();
    ThermostatWorld world(params);
    Transcript tr = run_coupled(world, regulator, plant_steps * params.readout_bits);
    ThermostatCore core(params);
    std::vector<PlantTraceRow> rows;
    rows.reserve(plant_steps);
    for (std::size_t k = 0; k < plant_steps; ++k) {
        Bit heat = (k == 0) ? Bit{0} : tr.regulator_output[k * params.readout_bits - 1];
        PlantTraceRow row;
        row.t = k + 1;
        row.heat = heat;
        row.error_code = core.update(heat);
        row.temperature = core.temp;
        rows.push_back(row);
    }
    return rows;
}

std::string plant_trace_csv(const std::vector<PlantTraceRow>& rows) {
    std::ostringstream out;
    out << "t,T,heat,error_code\n";
    out.precision(10);
    for (const auto& r : rows)
        out << r.t << ',' << r.temperature << ',' << int(r.heat) << ',' << r.error_code << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Automaton compiler

CausalTransducer compile_automaton(
    std::uint32_t state_count, std::uint32_t initial_state,
    const std::function<std::pair<std::uint32_t, Bit>(std::uint32_t, Bit)>& step,
    std::uint32_t scratch_capacity) {
    if (initial_state >= state_count)
        throw std::invalid_argument("compile_automaton: initial state out of range");
    // swap the requested initial state into slot 0
    auto remap = [&](std::uint32_t s) {
        if (s == initial_state) return std::uint32_t{0};
        if (s == 0) return initial_state;
        return s;
    };
    std::vector<CausalTransducer::Entry> table(2 * state_count);
    for (std::uint32_t s = 0; s < state_count; ++s) {
        for (Bit in = 0; in < 2; ++in) {
            auto [next, out] = step(remap(s), in);
            table[2 * s + in] = {remap(next), out};
        }
    }
    return CausalTransducer(state_count, scratch_capacity, std::move(table));
}

// ---------------------------------------------------------------------------
// Latch and XOR worlds

void LatchWorldParams::validate() const {
    if (horizon < 1) throw std::invalid_argument("latch: horizon must be >= 1");
    if (watch_length < 1 || watch_length > horizon)
        throw std::invalid_argument("latch: need 1 <= watch_length <= horizon");
    if (fallback.size() != horizon)
        throw std::invalid_argument("latch: |fallback| must equal horizon");
}

namespace {

/* Shared latch construction. The watch window covers the regulator's
 * output steps 1..watch_length, which arrive as world inputs one step
 * later. Zeroing the fallback's watch prefix makes the two branches
 * agree on everything emitted before the trigger can be known, so the
 * readout is always exactly one of the two strings. */
CausalTransducer build_latch(const LatchWorldParams& params, bool quiet_emits_fallback) {
    params.validate();
    BitString z = params.fallback;
    for (std::size_t i = 0; i < params.watch_length; ++i) z.set(i, 0);
    auto n = static_cast<std::uint32_t>(params.horizon);
    auto delta = static_cast<std::uint32_t>(params.watch_length);
    // state = done * 2 + triggered, done = world steps completed (capped at n)
    std::uint32_t state_count = 2 * (n + 1);
    auto step = [&, z](std::uint32_t s, Bit v) -> std::pair<std::uint32_t, Bit> {
        std::uint32_t done = s / 2;
        bool trig = (s & 1) != 0;
        if (done >= n) return {2 * n + (trig ? 1u : 0u), 0};
        bool in_window = done >= 1 && done <= delta;
        bool new_trig = trig || (v == 1 && in_window);
        Bit fallback_bit = z[done];
        Bit out;
        if (quiet_emits_fallback)
            out = new_trig ? Bit{0} : fallback_bit;
        else
            out = new_trig ? fallback_bit : Bit{0};
        return {2 * (done + 1) + (new_trig ? 1u : 0u), out};
    };
    return compile_automaton(state_count, 0, step);
}

}  // namespace

CausalTransducer build_latch_world(const LatchWorldParams& params) {
    return build_latch(params, /*quiet_emits_fallback=*/false);
}

CausalTransducer build_latch_guard_world(const LatchWorldParams& params) {
    return build_latch(params, /*quiet_emits_fallback=*/true);
}

CausalTransducer build_xor_world(const BitString& mask) {
    if (mask.empty()) throw std::invalid_argument("xor world: mask must be nonempty");
    auto n = static_cast<std::uint32_t>(mask.size());
    auto step = [&mask, n](std::uint32_t t, Bit v) -> std::pair<std::uint32_t, Bit> {
        if (t >= n) return {n, 0};
        return {t + 1, static_cast<Bit>(mask[t] ^ v)};
    };
    return compile_automaton(n + 1, 0, step);
}

CausalTransducer build_lfsr_world(unsigned register_bits, std::uint64_t taps,
                                  std::uint64_t init) {
    if (register_bits < 2 || register_bits > 12)
        throw std::invalid_argument("lfsr: register_bits must be in [2,12]");
    std::uint64_t mask = (std::uint64_t{1} << register_bits) - 1;
    if ((taps & mask) == 0) throw std::invalid_argument("lfsr: taps must be nonzero");
    if ((init & mask) == 0) throw std::invalid_argument("lfsr: init must be nonzero");
    auto step = [=](std::uint32_t reg, Bit) -> std::pair<std::uint32_t, Bit> {
        Bit out = static_cast<Bit>(reg & 1u);
        std::uint32_t fb = static_cast<std::uint32_t>(std::popcount(reg & taps) & 1);
        std::uint32_t next = (reg >> 1) | (fb << (register_bits - 1));
        return {next, out};
    };
    return compile_automaton(std::uint32_t{1} << register_bits,
                             static_cast<std::uint32_t>(init & mask), step);
}

// ---------------------------------------------------------------------------
// Regulators

CausalTransducer build_constant_regulator(Bit symbol) {
    if (symbol > 1) throw std::invalid_argument("constant regulator: symbol must be 0 or 1");
    return CausalTransducer(1, 0, {{0, symbol}, {0, symbol}});
}

CausalTransducer build_bangbang_regulator(double deadband, const ThermostatParams& plant) {
    plant.validate();
    if (!(deadband >= 0.0)) throw std::invalid_argument("bangbang: deadband must be >= 0");
    unsigned b = plant.readout_bits;
    std::uint32_t on_below =
        quantize_value(-deadband, b, plant.error_lo, plant.error_hi);
    std::uint32_t off_above =
        quantize_value(deadband, b, plant.error_lo, plant.error_hi);
    // state = ((skip? 0) | frame progress) with held decision; the very
    // first input is the step-0 quiescent symbol and is skipped so frame
    // alignment matches the world's emission frames
    std::uint32_t prefixes = (std::uint32_t{1} << b) - 1;  // sum_{j<b} 2^j
    std::uint32_t per_decision = 1 + prefixes;             // skip-slot + partial frames
    std::uint32_t state_count = 2 * per_decision;
    auto encode = [&](Bit d, bool skip, unsigned j, std::uint32_t prefix) {
        std::uint32_t base = d * per_decision;
        if (skip) return base;
        return base + 1 + ((std::uint32_t{1} << j) - 1) + prefix;
    };
    auto step = [&](std::uint32_t s, Bit v) -> std::pair<std::uint32_t, Bit> {
        Bit d = static_cast<Bit>(s / per_decision);
        std::uint32_t rem = s % per_decision;
        if (rem == 0) return {encode(d, false, 0, 0), d};  // consume the step-0 symbol
        unsigned j = floor_log2(rem);  // rem = 2^j + prefix
        std::uint32_t prefix = rem - (std::uint32_t{1} << j);
        std::uint32_t new_prefix = prefix * 2 + v;
        if (j + 1 < b) return {encode(d, false, j + 1, new_prefix), d};
        std::uint32_t code = new_prefix;
        Bit nd = d;
        if (code < on_below)
            nd = 1;
        else if (code > off_above)
            nd = 0;
        return {encode(nd, false, 0, 0), nd};
    };
    return compile_automaton(state_count, encode(0, true, 0, 0), step);
}

CausalTransducer build_pi_regulator(double kp, double ki, unsigned integrator_bits,
                                    const ThermostatParams& plant) {
    plant.validate();
    if (integrator_bits < 1 || integrator_bits > 8)
        throw std::invalid_argument("pi: integrator_bits must be in [1,8]");
    if (!(kp >= 0.0) || !(ki >= 0.0)) throw std::invalid_argument("pi: gains must be >= 0");
    unsigned b = plant.readout_bits;
    std::int32_t kp16 = static_cast<std::int32_t>(std::lround(kp * 16.0));
    std::int32_t ki16 = static_cast<std::int32_t>(std::lround(ki * 16.0));
    if (kp16 == 0 && ki16 == 0) throw std::invalid_argument("pi: gains round to zero");
    std::int32_t mid = std::int32_t{1} << (b - 1);
    std::int32_t i_lo = -(std::int32_t{1} << (integrator_bits - 1));
    std::int32_t i_hi = (std::int32_t{1} << (integrator_bits - 1)) - 1;
    std::uint32_t i_levels = std::uint32_t{1} << integrator_bits;
    std::uint32_t prefixes = (std::uint32_t{1} << b) - 1;
    std::uint32_t per_cell = 1 + prefixes;  // skip-slot + partial frames
    std::uint32_t state_count = 2 * i_levels * per_cell;
    auto encode = [&](Bit d, std::int32_t integ, bool skip, unsigned j, std::uint32_t prefix) {
        std::uint32_t iq = static_cast<std::uint32_t>(integ - i_lo);
        std::uint32_t base = (d * i_levels + iq) * per_cell;
        if (skip) return base;
        return base + 1 + ((std::uint32_t{1} << j) - 1) + prefix;
    };
    auto step = [&](std::uint32_t s, Bit v) -> std::pair<std::uint32_t, Bit> {
        std::uint32_t cell = s / per_cell;
        std::uint32_t rem = s % per_cell;
        Bit d = static_cast<Bit>(cell / i_levels);
        std::int32_t integ = static_cast<std::int32_t>(cell % i_levels) + i_lo;
        if (rem == 0) return {encode(d, integ, false, 0, 0), d};
        std::uint32_t w = rem;
        unsigned j = floor_log2(w);
        std::uint32_t prefix = w - (std::uint32_t{1} << j);
        std::uint32_t new_prefix = prefix * 2 + v;
        if (j + 1 < b) return {encode(d, integ, false, j + 1, new_prefix), d};
        std::int32_t err = static_cast<std::int32_t>(new_prefix) - mid;
        std::int32_t ni = std::clamp(integ + err, i_lo, i_hi);
        Bit nd = (kp16 * err + ki16 * ni < 0) ? Bit{1} : Bit{0};
        return {encode(nd, ni, false, 0, 0), nd};
    };
    return compile_automaton(state_count, encode(0, 0, true, 0, 0), step);
}

CausalTransducer build_random_regulator(std::uint64_t seed, std::size_t horizon) {
    if (horizon < 1) throw std::invalid_argument("random regulator: horizon must be >= 1");
    BitString bits = random_bits(horizon, seed);
    auto n = static_cast<std::uint32_t>(horizon);
    auto step = [&bits, n](std::uint32_t t, Bit) -> std::pair<std::uint32_t, Bit> {
        if (t >= n) return {n, 0};
        return {t + 1, bits[t]};
    };
    return compile_automaton(n + 1, 0, step);
}

// ---------------------------------------------------------------------------
// Catalog

MachineSpec MachineSpec::parse(const std::string& text) {
    MachineSpec spec;
    auto open = text.find('(');
    if (open == std::string::npos) {
        spec.name = text;
        return spec;
    }
    if (text.back() != ')')
        throw std::invalid_argument("machine spec: missing ')' in " + text);
    spec.name = text.substr(0, open);
    std::string body = text.substr(open + 1, text.size() - open - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("machine spec: expected key=value in " + text);
        spec.params[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return spec;
}

std::string MachineSpec::canonical() const {
    std::string out = name;
    if (!params.empty()) {
        out += '(';
        bool first = true;
        for (const auto& [k, v] : params) {
            if (!first) out += ',';
            first = false;
            out += k + '=' + v;
        }
        out += ')';
    }
    return out;
}

double MachineSpec::get_double(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : std::stod(it->second);
}

std::uint64_t MachineSpec::get_uint(const std::string& key, std::uint64_t fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : std::stoull(it->second);
}

namespace {

constexpr std::uint64_t kLatchSeedSalt = 0x4c41544348ull;   // "LATCH"
constexpr std::uint64_t kXorSeedSalt = 0x584f52ull;         // "XOR"
constexpr std::uint64_t kRandomRegSalt = 0x52414e44ull;     // "RAND"

}  // namespace

std::unique_ptr<Machine> make_world(const MachineSpec& spec, std::size_t horizon,
                                    std::uint64_t seed, const ThermostatParams& base) {
    if (spec.name == "thermostat") {
        ThermostatParams p = base;
        p.dt = spec.get_double("dt", p.dt);
        p.time_constant = spec.get_double("tau", p.time_constant);
        p.outdoor_temp = spec.get_double("outdoor", p.outdoor_temp);
        p.outdoor_amplitude = spec.get_double("amplitude", p.outdoor_amplitude);
        p.outdoor_period = spec.get_double("period", p.outdoor_period);
        p.heater_gain = spec.get_double("gain", p.heater_gain);
        p.setpoint = spec.get_double("setpoint", p.setpoint);
        p.initial_temp = spec.get_double("initial", p.initial_temp);
        p.readout_bits = static_cast<unsigned>(spec.get_uint("bits", p.readout_bits));
        // seeded exogenous variation: initial-condition jitter and forcing phase
        auto eng = seeded_engine(seed ^ 0x54484552ull);
        p.initial_temp += 2.0 * uniform01(eng) - 1.0;
        p.forcing_phase = kTwoPi * uniform01(eng);
        return std::make_unique<ThermostatWorld>(p);
    }
    if (spec.name == "latch" || spec.name == "latch_guard") {
        LatchWorldParams p;
        p.horizon = horizon;
        p.watch_length = spec.get_uint("delta", 4);
        p.fallback = random_bits(horizon, seed ^ kLatchSeedSalt);
        auto m = (spec.name == "latch") ? build_latch_world(p) : build_latch_guard_world(p);
        return std::make_unique<CausalTransducer>(std::move(m));
    }
    if (spec.name == "xor") {
        BitString mask = random_bits(horizon, seed ^ kXorSeedSalt);
        return std::make_unique<CausalTransducer>(build_xor_world(mask));
    }
    if (spec.name == "lfsr") {
        auto bits = static_cast<unsigned>(spec.get_uint("bits", 8));
        std::uint64_t taps = spec.get_uint("taps", 0b10111000);
        std::uint64_t init = spec.get_uint("init", (seed % ((1ull << bits) - 1)) + 1);
        return std::make_unique<CausalTransducer>(build_lfsr_world(bits, taps, init));
    }
    throw std::invalid_argument("unknown world: " + spec.name);
}

std::unique_ptr<Machine> make_regulator(const MachineSpec& spec, std::size_t horizon,
                                        std::uint64_t seed, const ThermostatParams& base) {
    if (spec.name == "null")
        return std::make_unique<CausalTransducer>(null_regulator());
    if (spec.name == "constant")
        return std::make_unique<CausalTransducer>(
            build_constant_regulator(static_cast<Bit>(spec.get_uint("c", 0))));
    if (spec.name == "bangbang")
        return std::make_unique<CausalTransducer>(
            build_bangbang_regulator(spec.get_double("deadband", 0.5), base));
    if (spec.name == "pi")
        return std::make_unique<CausalTransducer>(
            build_pi_regulator(spec.get_double("kp", 0.5), spec.get_double("ki", 0.125),
                               static_cast<unsigned>(spec.get_uint("quant", 5)), base));
    if (spec.name == "random")
        return std::make_unique<CausalTransducer>(build_random_regulator(
            spec.get_uint("seed", seed ^ kRandomRegSalt), horizon));
    if (spec.name == "trigger") {
        // emits 1 at step t0, 0 elsewhere; the latch-family intervention
        std::uint64_t t0 = spec.get_uint("t", 1);
        auto n = static_cast<std::uint32_t>(horizon);
        auto step = [t0, n](std::uint32_t t, Bit) -> std::pair<std::uint32_t, Bit> {
            if (t >= n) return {n, 0};
            return {t + 1, static_cast<Bit>(t + 1 == t0 ? 1 : 0)};
        };
        return std::make_unique<CausalTransducer>(compile_automaton(n + 1, 0, step));
    }
    if (spec.name == "tabular") {
        auto it = spec.params.find("code");
        if (it == spec.params.end())
            throw std::invalid_argument("tabular regulator needs code=<canonical bits>");
        return std::make_unique<CausalTransducer>(
            deserialize_transducer(BitString::from_ascii(it->second)));
    }
    throw std::invalid_argument("unknown regulator: " + spec.name);
}

}  // namespace agar
