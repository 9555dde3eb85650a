#include "agar/config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "agar/codec.hpp"
#include "agar/micro.hpp"
#include "agar/sha256.hpp"

namespace agar {

const char* const kToolVersion = "agar 0.1.0";

std::string command_name(Command c) {
    switch (c) {
        case Command::simulate: return "simulate";
        case Command::estimate: return "estimate";
        case Command::contrast: return "contrast";
        case Command::enumerate_universe: return "enumerate";
        case Command::ctm: return "ctm";
        case Command::synergy: return "synergy";
        case Command::verify: return "verify";
    }
    throw std::logic_error("command_name: bad command");
}

namespace {

const std::vector<std::string> kCommands = {"simulate", "estimate", "contrast", "enumerate",
                                            "ctm", "synergy", "verify"};

const std::vector<std::string> kExperimentKeys = {
    "command", "world", "regulator", "horizon", "estimator", "seeds",
    "verdict_threshold_bits", "joint_mode", "permutation_iterations", "max_len", "steps", "block_bits",
    "synergy_n", "verify_gar", "gar_code_limit", "gar_horizon", "input",
    "external_command", "out", "threads"};

const std::vector<std::string> kThermostatKeys = {
    "dt", "tau", "outdoor", "amplitude", "period", "gain",
    "setpoint", "initial", "bits", "error_lo", "error_hi"};

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string nearest_key(const std::string& key, const std::vector<std::string>& candidates) {
    std::string best;
    std::size_t best_d = SIZE_MAX;
    for (const auto& c : candidates) {
        std::size_t d = edit_distance(key, c);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

struct Setter {
    ExperimentConfig* cfg;
    std::vector<ConfigError>* errors;
    int line = 0;

    void fail(const std::string& msg) { errors->push_back({line, msg}); }

    bool parse_u64(const std::string& v, std::uint64_t& out) {
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || p != v.data() + v.size()) {
            fail("expected an unsigned integer, got '" + v + "'");
            return false;
        }
        return true;
    }

    bool parse_i64(const std::string& v, std::int64_t& out) {
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || p != v.data() + v.size()) {
            fail("expected an integer, got '" + v + "'");
            return false;
        }
        return true;
    }

    bool parse_f64(const std::string& v, double& out) {
        try {
            std::size_t used = 0;
            out = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
        } catch (const std::exception&) {
            fail("expected a number, got '" + v + "'");
            return false;
        }
        return true;
    }

    void experiment_key(const std::string& key, const std::string& value) {
        std::uint64_t u;
        std::int64_t i;
        if (key == "command") {
            auto it = std::find(kCommands.begin(), kCommands.end(), value);
            if (it == kCommands.end()) {
                fail("unknown command '" + value + "'; nearest is '" +
                     nearest_key(value, kCommands) + "'");
                return;
            }
            cfg->command = static_cast<Command>(it - kCommands.begin());
        } else if (key == "world") {
            cfg->world = value;
        } else if (key == "regulator") {
            cfg->regulator = value;
        } else if (key == "horizon") {
            if (parse_u64(value, u)) cfg->horizon = u;
        } else if (key == "estimator") {
            cfg->estimator = value;
        } else if (key == "seeds") {
            try {
                cfg->seeds = parse_seed_range(value);
                cfg->seeds_text = value;
            } catch (const std::exception& e) {
                fail(e.what());
            }
        } else if (key == "verdict_threshold_bits") {
            if (parse_i64(value, i)) cfg->verdict_threshold_bits = i;
        } else if (key == "joint_mode") {
            if (value != "interleave" && value != "concat") {
                fail("joint_mode must be 'interleave' or 'concat'");
                return;
            }
            cfg->joint_mode = value;
        } else if (key == "permutation_iterations") {
            if (parse_u64(value, u)) cfg->permutation_iterations = u;
        } else if (key == "max_len") {
            if (parse_u64(value, u)) cfg->max_len = static_cast<unsigned>(u);
        } else if (key == "steps") {
            if (parse_u64(value, u)) cfg->steps = u;
        } else if (key == "block_bits") {
            if (parse_u64(value, u)) cfg->block_bits = static_cast<unsigned>(u);
        } else if (key == "synergy_n") {
            if (parse_u64(value, u)) cfg->synergy_n = u;
        } else if (key == "verify_gar") {
            cfg->verify_gar = (value == "1" || value == "true");
        } else if (key == "gar_code_limit") {
            if (parse_u64(value, u)) cfg->gar_code_limit = static_cast<unsigned>(u);
        } else if (key == "gar_horizon") {
            if (parse_u64(value, u)) cfg->gar_horizon = u;
        } else if (key == "input") {
            cfg->input_path = value;
        } else if (key == "external_command") {
            cfg->external_command = value;
        } else if (key == "out") {
            cfg->out_dir = value;
        } else if (key == "threads") {
            if (parse_u64(value, u)) cfg->threads = static_cast<unsigned>(u);
        } else {
            fail("unknown key '" + key + "'; nearest valid key is '" +
                 nearest_key(key, kExperimentKeys) + "'");
        }
    }

    void thermostat_key(const std::string& key, const std::string& value) {
        double d;
        std::uint64_t u;
        auto& t = cfg->thermostat;
        if (key == "dt") {
            if (parse_f64(value, d)) t.dt = d;
        } else if (key == "tau") {
            if (parse_f64(value, d)) t.time_constant = d;
        } else if (key == "outdoor") {
            if (parse_f64(value, d)) t.outdoor_temp = d;
        } else if (key == "amplitude") {
            if (parse_f64(value, d)) t.outdoor_amplitude = d;
        } else if (key == "period") {
            if (parse_f64(value, d)) t.outdoor_period = d;
        } else if (key == "gain") {
            if (parse_f64(value, d)) t.heater_gain = d;
        } else if (key == "setpoint") {
            if (parse_f64(value, d)) t.setpoint = d;
        } else if (key == "initial") {
            if (parse_f64(value, d)) t.initial_temp = d;
        } else if (key == "bits") {
            if (parse_u64(value, u)) t.readout_bits = static_cast<unsigned>(u);
        } else if (key == "error_lo") {
            if (parse_f64(value, d)) t.error_lo = d;
        } else if (key == "error_hi") {
            if (parse_f64(value, d)) t.error_hi = d;
        } else {
            fail("unknown key 'thermostat." + key + "'; nearest valid key is 'thermostat." +
                 nearest_key(key, kThermostatKeys) + "'");
        }
    }

    void set(const std::string& section, const std::string& key, const std::string& value) {
        if (section == "experiment" || section.empty())
            experiment_key(key, value);
        else if (section == "thermostat")
            thermostat_key(key, value);
        else
            fail("unknown section '[" + section + "]'; valid sections are [experiment] and "
                 "[thermostat]");
    }
};

}  // namespace

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        part = trim(part);
        if (part.empty()) continue;
        auto dots = part.find("..");
        if (dots != std::string::npos) {
            std::uint64_t a = std::stoull(part.substr(0, dots));
            std::uint64_t b = std::stoull(part.substr(dots + 2));
            if (b < a || b - a > 100000)
                throw std::invalid_argument("seed range '" + part + "' is empty or too large");
            for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
        } else {
            seeds.push_back(std::stoull(part));
        }
    }
    if (seeds.empty()) throw std::invalid_argument("seeds: no values in '" + text + "'");
    return seeds;
}

ExperimentConfig parse_config(const std::string& file_text,
                              const std::vector<std::pair<std::string, std::string>>& overrides,
                              std::vector<ConfigError>& errors) {
    ExperimentConfig cfg;
    Setter setter{&cfg, &errors};

    std::istringstream in(file_text);
    std::string raw;
    std::string section = "experiment";
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        setter.line = line_no;
        std::string strip = raw;
        auto hash = strip.find('#');
        if (hash != std::string::npos) strip = strip.substr(0, hash);
        strip = trim(strip);
        if (strip.empty()) continue;
        if (strip.front() == '[') {
            if (strip.back() != ']') {
                setter.fail("malformed section header '" + strip + "'");
                continue;
            }
            section = trim(strip.substr(1, strip.size() - 2));
            continue;
        }
        auto eq = strip.find('=');
        if (eq == std::string::npos) {
            setter.fail("expected key = value, got '" + strip + "'");
            continue;
        }
        std::string key = trim(strip.substr(0, eq));
        std::string value = trim(strip.substr(eq + 1));
        setter.set(section, key, value);
    }

    setter.line = 0;
    for (const auto& [key, value] : overrides) {
        auto dot = key.find('.');
        if (dot != std::string::npos)
            setter.set(key.substr(0, dot), key.substr(dot + 1), value);
        else
            setter.set("experiment", key, value);
    }

    // cross-field validation, still collecting rather than throwing
    setter.line = 0;
    if (cfg.horizon == 0) setter.fail("horizon must be >= 1");
    try {
        MachineSpec::parse(cfg.world);
    } catch (const std::exception& e) {
        setter.fail(std::string("world: ") + e.what());
    }
    try {
        MachineSpec::parse(cfg.regulator);
    } catch (const std::exception& e) {
        setter.fail(std::string("regulator: ") + e.what());
    }
    try {
        EstimatorSpec es = EstimatorSpec::parse(cfg.estimator);
        if (es.id == EstimatorId::external && es.params.find("command") == es.params.end() &&
            cfg.external_command.empty())
            setter.fail("estimator 'external' needs external_command");
    } catch (const std::exception& e) {
        setter.fail(std::string("estimator: ") + e.what());
    }
    try {
        cfg.thermostat.validate();
    } catch (const std::exception& e) {
        setter.fail(std::string("thermostat: ") + e.what());
    }
    return cfg;
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream out;
    out.precision(17);
    out << "agar-config-v1\n";
    out << "opcode_hash=" << micro_opcode_hash() << '\n';
    out << "command=" << command_name(command) << '\n';
    out << "world=" << world << '\n';
    out << "regulator=" << regulator << '\n';
    out << "horizon=" << horizon << '\n';
    out << "estimator=" << estimator << '\n';
    out << "seeds=";
    for (std::size_t i = 0; i < seeds.size(); ++i) out << (i ? "," : "") << seeds[i];
    out << '\n';
    out << "verdict_threshold_bits=" << verdict_threshold_bits << '\n';
    out << "joint_mode=" << joint_mode << '\n';
    out << "permutation_iterations=" << permutation_iterations << '\n';
    out << "max_len=" << max_len << '\n';
    out << "steps=" << steps << '\n';
    out << "block_bits=" << block_bits << '\n';
    out << "synergy_n=" << synergy_n << '\n';
    out << "verify_gar=" << (verify_gar ? 1 : 0) << '\n';
    out << "gar_code_limit=" << gar_code_limit << '\n';
    out << "gar_horizon=" << gar_horizon << '\n';
    out << "input=" << input_path << '\n';
    out << "external_command=" << external_command << '\n';
    const auto& t = thermostat;
    out << "thermostat.dt=" << t.dt << '\n';
    out << "thermostat.tau=" << t.time_constant << '\n';
    out << "thermostat.outdoor=" << t.outdoor_temp << '\n';
    out << "thermostat.amplitude=" << t.outdoor_amplitude << '\n';
    out << "thermostat.period=" << t.outdoor_period << '\n';
    out << "thermostat.gain=" << t.heater_gain << '\n';
    out << "thermostat.setpoint=" << t.setpoint << '\n';
    out << "thermostat.initial=" << t.initial_temp << '\n';
    out << "thermostat.bits=" << t.readout_bits << '\n';
    out << "thermostat.error_lo=" << t.error_lo << '\n';
    out << "thermostat.error_hi=" << t.error_hi << '\n';
    return out.str();
}

std::string ExperimentConfig::fingerprint(const std::string& extra) const {
    return sha256_hex(canonical_text() + extra);
}

}  // namespace agar
