#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agar/worlds.hpp"

namespace agar {

extern const char* const kToolVersion;

enum class Command { simulate, estimate, contrast, enumerate_universe, ctm, synergy, verify };

std::string command_name(Command c);

struct ConfigError {
    int line = 0;  // 0 = flag override or cross-field validation
    std::string message;
};

/* Plain-text key=value configuration with [experiment] and [thermostat]
 * sections. Unknown keys are rejected with a nearest-key suggestion;
 * parsing collects every error rather than stopping at the first.
 * Flag overrides are applied after the file and re-validated. */
struct ExperimentConfig {
    Command command = Command::contrast;
    std::string world = "thermostat";
    std::string regulator = "bangbang(deadband=0.5)";
    std::size_t horizon = 4096;
    std::string estimator = "lz78";
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10,
                                        11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
    std::string seeds_text = "1..20";
    std::int64_t verdict_threshold_bits = 8;
    std::string joint_mode = "interleave";
    std::uint64_t permutation_iterations = 10000;
    unsigned max_len = 16;
    std::uint64_t steps = 10000;
    unsigned block_bits = 4;
    std::size_t synergy_n = 16384;
    bool verify_gar = false;
    unsigned gar_code_limit = 10;
    std::size_t gar_horizon = 8;
    std::string input_path;        // estimate: optional ASCII bit file
    std::string external_command;  // estimator=external
    ThermostatParams thermostat;

    // outside the fingerprint: never affect result bytes
    std::string out_dir = "out";
    unsigned threads = 0;  // 0 = hardware concurrency

    /* Canonical result-affecting content; the fingerprint is its SHA-256.
     * extra covers content that only the dispatcher can resolve (e.g. the
     * bits of an input file). */
    std::string canonical_text() const;
    std::string fingerprint(const std::string& extra = std::string()) const;
};

std::vector<std::uint64_t> parse_seed_range(const std::string& text);

/* file_text may be empty (defaults + overrides only). Overrides are
 * (key, value) pairs using the same key names, optionally section-
 * qualified ("thermostat.tau"). */
ExperimentConfig parse_config(const std::string& file_text,
                              const std::vector<std::pair<std::string, std::string>>& overrides,
                              std::vector<ConfigError>& errors);

}  // namespace agar
