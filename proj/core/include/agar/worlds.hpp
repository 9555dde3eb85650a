#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "agar/machine.hpp"

namespace agar {

/* Forward-Euler room model driven over the bit interface. One plant step
 * spans readout_bits interface steps: at the frame boundary the regulator's
 * last symbol is applied as heat input, the temperature is updated, and the
 * quantized error (T - setpoint) is emitted MSB-first over the frame. */
struct ThermostatParams {
    double dt = 1.0;
    double time_constant = 50.0;
    double outdoor_temp = 19.0;
    double outdoor_amplitude = 6.0;   // sinusoidal forcing; 0 = constant exosystem
    double outdoor_period = 293.0;    // plant steps per forcing cycle
    double forcing_phase = 0.0;       // radians
    double heater_gain = 0.7;
    double setpoint = 21.0;
    double initial_temp = 21.0;
    unsigned readout_bits = 6;
    double error_lo = -16.0;
    double error_hi = 16.0;

    void validate() const;
};

class ThermostatWorld final : public Machine {
public:
    explicit ThermostatWorld(ThermostatParams params);

    const ThermostatParams& params() const { return params_; }

    std::unique_ptr<Execution> start() const override;
    const BitString& code() const override { return code_; }
    std::unique_ptr<Machine> clone() const override {
        return std::make_unique<ThermostatWorld>(*this);
    }

    static ThermostatWorld from_code(const BitString& code);

private:
    ThermostatParams params_;
    BitString code_;
};

struct PlantTraceRow {
    std::size_t t = 0;  // plant step, 1-based
    double temperature = 0.0;
    Bit heat = 0;
    std::uint32_t error_code = 0;
};

/* Closed-loop plant trace for CSV export; replays the exact transcript
 * the Machine interface would produce. */
std::vector<PlantTraceRow> thermostat_trace(const ThermostatParams& params,
                                            const Machine& regulator, std::size_t plant_steps);
std::string plant_trace_csv(const std::vector<PlantTraceRow>& rows);

/* Watch-window latch. The machine watches the regulator's first
 * watch_length output symbols; the fallback string's watch prefix is
 * zeroed at build time so the readout is always exactly 0^N or the
 * stored fallback, never a mixture. */
struct LatchWorldParams {
    std::size_t watch_length = 1;
    BitString fallback;        // |fallback| == horizon
    std::size_t horizon = 1;

    void validate() const;
};

/* Quiet watch window -> 0^N, any 1 in the window -> fallback. */
CausalTransducer build_latch_world(const LatchWorldParams& params);

/* Guarded form used by contrast demos: quiet -> fallback, intervention
 * within the window -> 0^N. Same watch-prefix convention. */
CausalTransducer build_latch_guard_world(const LatchWorldParams& params);

/* Step t emits mask_t XOR u_{t-1} (one-step causal delay, u_0 = 0). */
CausalTransducer build_xor_world(const BitString& mask);

/* Fibonacci LFSR ignoring its input; a pure-exosystem control world. */
CausalTransducer build_lfsr_world(unsigned register_bits, std::uint64_t taps,
                                  std::uint64_t init);

CausalTransducer build_constant_regulator(Bit symbol);

/* Hysteresis controller over quantized error frames: heat on below
 * code(setpoint - deadband), off above code(setpoint + deadband),
 * hold in between. Frame geometry comes from the plant params. */
CausalTransducer build_bangbang_regulator(double deadband, const ThermostatParams& plant);

/* PI controller with a quantized integrator (integrator_bits wide);
 * gains are rounded to 1/16 code units so the law is integer-exact. */
CausalTransducer build_pi_regulator(double kp, double ki, unsigned integrator_bits,
                                    const ThermostatParams& plant);

/* Seeded PRNG output unrolled over the horizon; deterministic replay. */
CausalTransducer build_random_regulator(std::uint64_t seed, std::size_t horizon);

/* Table-driven build of any finite step function (state, input) ->
 * (next state, output). The requested initial state is swapped into
 * slot 0 so the serialized form keeps the fixed-initial convention. */
CausalTransducer compile_automaton(
    std::uint32_t state_count, std::uint32_t initial_state,
    const std::function<std::pair<std::uint32_t, Bit>(std::uint32_t, Bit)>& step,
    std::uint32_t scratch_capacity = 0);

/* name(key=value,...) addressing for the CLI catalog. */
struct MachineSpec {
    std::string name;
    std::map<std::string, std::string> params;

    static MachineSpec parse(const std::string& text);
    std::string canonical() const;

    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
};

/* Catalog builders. Seeded exogenous variation (latch/xor fallback
 * strings, thermostat initial-condition jitter and forcing phase) is
 * derived from the episode seed. */
std::unique_ptr<Machine> make_world(const MachineSpec& spec, std::size_t horizon,
                                    std::uint64_t seed, const ThermostatParams& base);
std::unique_ptr<Machine> make_regulator(const MachineSpec& spec, std::size_t horizon,
                                        std::uint64_t seed, const ThermostatParams& base);

}  // namespace agar
