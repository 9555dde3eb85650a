// agar: simulate coupled world-regulator machines, estimate readout
// codelengths, run contrastive ON/OFF experiments, enumerate the
// micro-universe, and verify its exact coding-theorem properties.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "agar/config.hpp"
#include "agar/contrast.hpp"
#include "agar/ctm.hpp"
#include "agar/errors.hpp"
#include "agar/machine.hpp"
#include "agar/micro.hpp"
#include "agar/rng.hpp"
#include "agar/sha256.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace agar;

namespace {

struct Artifacts {
    // name -> content; written atomically, all-or-nothing, after the
    // pipeline has fully succeeded
    std::map<std::string, std::string> files;

    void add(const std::string& name, std::string content) {
        files[name] = std::move(content);
    }

    void write_all(const fs::path& out_dir) const {
        fs::create_directories(out_dir);
        for (const auto& [name, content] : files) {
            fs::path final_path = out_dir / name;
            fs::path tmp = out_dir / (".tmp." + name + "." + std::to_string(::getpid()));
            {
                std::ofstream f(tmp, std::ios::binary);
                if (!f) throw std::runtime_error("cannot write " + tmp.string());
                f.write(content.data(), static_cast<std::streamsize>(content.size()));
            }
            fs::rename(tmp, final_path);
        }
    }
};

std::string csv_preamble(const std::string& fingerprint) {
    std::ostringstream out;
    out << "# config_fingerprint=" << fingerprint << '\n';
    out << "# tool_version=" << kToolVersion << '\n';
    return out.str();
}

unsigned effective_threads(const ExperimentConfig& cfg) {
    if (cfg.threads > 0) return cfg.threads;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

fs::path cache_dir() {
    const char* env = std::getenv("AGAR_CACHE");
    return env == nullptr ? fs::path{} : fs::path(env);
}

std::string bytes_to_string(const std::vector<std::uint8_t>& bytes) {
    return std::string(bytes.begin(), bytes.end());
}

void store_cache(const fs::path& file, const std::vector<std::uint8_t>& bytes) {
    fs::create_directories(file.parent_path());
    fs::path tmp = file;
    tmp += ".tmp" + std::to_string(::getpid());
    std::ofstream f(tmp, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    f.close();
    fs::rename(tmp, file);
}

std::vector<std::uint8_t> load_file(const fs::path& file) {
    std::ifstream f(file, std::ios::binary);
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());
}

EnumerationIndex cached_index(unsigned L, std::uint64_t S, unsigned threads) {
    fs::path dir = cache_dir();
    fs::path file;
    if (!dir.empty()) {
        file = dir / ("idx_L" + std::to_string(L) + "_S" + std::to_string(S) + "_" +
                      micro_opcode_hash() + ".bin");
        if (fs::exists(file)) {
            try {
                EnumerationIndex idx = EnumerationIndex::from_bytes(load_file(file));
                if (idx.max_program_bits() == L && idx.step_budget() == S) return idx;
            } catch (const std::exception&) {
                // stale or corrupt cache entry: rebuild below
            }
        }
    }
    EnumerationIndex idx = EnumerationIndex::build(L, S, threads);
    if (!dir.empty()) store_cache(file, idx.to_bytes());
    return idx;
}

std::shared_ptr<const CtmTable> cached_ctm(unsigned b, unsigned L, std::uint64_t S,
                                           unsigned threads) {
    fs::path dir = cache_dir();
    fs::path file;
    if (!dir.empty()) {
        file = dir / ("ctm_b" + std::to_string(b) + "_L" + std::to_string(L) + "_S" +
                      std::to_string(S) + "_" + micro_opcode_hash() + ".bin");
        if (fs::exists(file)) {
            try {
                auto table = std::make_shared<CtmTable>(CtmTable::from_bytes(load_file(file)));
                if (table->block_bits() == b && table->source_max_bits() == L &&
                    table->source_steps() == S)
                    return table;
            } catch (const std::exception&) {
            }
        }
    }
    auto table = std::make_shared<CtmTable>(build_ctm_table(b, L, S, threads));
    if (!dir.empty()) store_cache(file, table->to_bytes());
    return table;
}

EstimatorSpec resolve_estimator_spec(const ExperimentConfig& cfg) {
    EstimatorSpec spec = EstimatorSpec::parse(cfg.estimator);
    if (spec.id == EstimatorId::external && spec.params.find("command") == spec.params.end())
        spec.params["command"] = cfg.external_command;
    return spec;
}

Codelength resolve_estimator(const ExperimentConfig& cfg, const EstimatorSpec& spec) {
    unsigned threads = effective_threads(cfg);
    return make_estimator_with_tables(spec, [threads](unsigned b, unsigned L, std::uint64_t S) {
        return cached_ctm(b, L, S, threads);
    });
}

BitString read_bits_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot read input file: " + path);
    BitString bits;
    char c;
    while (f.get(c)) {
        if (c == '0')
            bits.push_back(0);
        else if (c == '1')
            bits.push_back(1);
        else if (c != '\n' && c != '\r' && c != ' ' && c != '\t')
            throw std::invalid_argument(std::string("input file: unexpected character '") + c +
                                        "'");
    }
    return bits;
}

// ---------------------------------------------------------------------------
// Command pipelines

int cmd_simulate(const ExperimentConfig& cfg) {
    std::string fp = cfg.fingerprint();
    std::uint64_t seed = cfg.seeds.front();
    MachineSpec wspec = MachineSpec::parse(cfg.world);
    MachineSpec rspec = MachineSpec::parse(cfg.regulator);
    auto world = make_world(wspec, cfg.horizon, seed, cfg.thermostat);
    auto regulator = make_regulator(rspec, cfg.horizon, seed, cfg.thermostat);
    Transcript tr = run_coupled(*world, *regulator, cfg.horizon);

    Artifacts art;
    art.add("transcript.csv", csv_preamble(fp) + tr.to_csv());
    if (const auto* tw = dynamic_cast<const ThermostatWorld*>(world.get())) {
        std::size_t plant_steps = cfg.horizon / tw->params().readout_bits;
        if (plant_steps > 0) {
            auto rows = thermostat_trace(tw->params(), *regulator, plant_steps);
            art.add("plant_trace.csv", csv_preamble(fp) + plant_trace_csv(rows));
        }
    }
    ordered_json j;
    j["config_fingerprint"] = fp;
    j["tool_version"] = kToolVersion;
    j["world"] = wspec.canonical();
    j["regulator"] = rspec.canonical();
    j["N"] = cfg.horizon;
    j["seed"] = seed;
    j["world_description_bits"] = world->description_bits();
    j["regulator_description_bits"] = regulator->description_bits();
    art.add("simulate.json", j.dump(2) + "\n");
    art.write_all(cfg.out_dir);
    return 0;
}

int cmd_estimate(const ExperimentConfig& cfg) {
    EstimatorSpec spec = resolve_estimator_spec(cfg);
    Codelength estimator = resolve_estimator(cfg, spec);

    BitString input;
    std::string extra;
    if (!cfg.input_path.empty()) {
        input = read_bits_file(cfg.input_path);
        extra = "input_sha256=" + sha256_hex(input.to_ascii()) + "\n";
    } else {
        std::uint64_t seed = cfg.seeds.front();
        auto world = make_world(MachineSpec::parse(cfg.world), cfg.horizon, seed,
                                cfg.thermostat);
        auto regulator = make_regulator(MachineSpec::parse(cfg.regulator), cfg.horizon, seed,
                                        cfg.thermostat);
        input = run_coupled(*world, *regulator, cfg.horizon).world_readout;
    }
    std::string fp = cfg.fingerprint(extra);
    CodeLengthReport rep = estimator(input);

    ordered_json j;
    j["config_fingerprint"] = fp;
    j["tool_version"] = kToolVersion;
    j["estimator"] = estimator_name(rep.estimator);
    j["n"] = rep.input_length;
    j["bits_x64"] = rep.bits_x64;
    ordered_json params = ordered_json::object();
    for (const auto& [k, v] : rep.params) params[k] = v;
    j["params"] = params;
    Artifacts art;
    art.add("estimate.json", j.dump(2) + "\n");
    art.write_all(cfg.out_dir);
    return 0;
}

int cmd_contrast(const ExperimentConfig& cfg) {
    std::string fp = cfg.fingerprint();
    EstimatorSpec spec = resolve_estimator_spec(cfg);
    Codelength estimator = resolve_estimator(cfg, spec);
    ContrastOptions opt;
    opt.threads = effective_threads(cfg);
    opt.joint_mode = joint_mode_from_name(cfg.joint_mode);
    opt.verdict_threshold_x64 = cfg.verdict_threshold_bits * kX64;
    opt.permutation_iterations = cfg.permutation_iterations;
    ContrastReport rep =
        run_contrast(MachineSpec::parse(cfg.world), MachineSpec::parse(cfg.regulator),
                     cfg.horizon, spec, estimator, cfg.seeds, cfg.thermostat, opt);
    rep.config_fingerprint = fp;
    rep.tool_version = kToolVersion;

    Artifacts art;
    art.add("contrast.json", rep.to_json());
    art.add("episodes.csv", csv_preamble(fp) + rep.episodes_csv());
    art.write_all(cfg.out_dir);
    std::cout << "mean_delta_bits=" << x64_to_double(rep.mean_delta_x64)
              << " p=" << rep.p_value.value() << " verdict=\"" << rep.verdict << "\"\n";
    return 0;
}

int cmd_enumerate(const ExperimentConfig& cfg) {
    std::string fp = cfg.fingerprint();
    EnumerationIndex idx = cached_index(cfg.max_len, cfg.steps, effective_threads(cfg));
    ordered_json j;
    j["config_fingerprint"] = fp;
    j["tool_version"] = kToolVersion;
    j["opcode_hash"] = micro_opcode_hash();
    j["L"] = idx.max_program_bits();
    j["S"] = idx.step_budget();
    j["outputs"] = idx.records().size();
    j["kraft_num"] = idx.kraft_num();
    j["kraft_den"] = idx.kraft_den();
    Artifacts art;
    art.add("index.bin", bytes_to_string(idx.to_bytes()));
    art.add("index.csv", csv_preamble(fp) + idx.to_csv());
    art.add("enumerate.json", j.dump(2) + "\n");
    art.write_all(cfg.out_dir);
    return 0;
}

int cmd_ctm(const ExperimentConfig& cfg) {
    std::string fp = cfg.fingerprint();
    auto table = cached_ctm(cfg.block_bits, cfg.max_len, cfg.steps, effective_threads(cfg));
    ordered_json j;
    j["config_fingerprint"] = fp;
    j["tool_version"] = kToolVersion;
    j["opcode_hash"] = micro_opcode_hash();
    j["b"] = table->block_bits();
    j["L"] = table->source_max_bits();
    j["S"] = table->source_steps();
    j["entries"] = table->entries().size();
    j["coverage"] = table->coverage();
    Artifacts art;
    art.add("ctm.bin", bytes_to_string(table->to_bytes()));
    art.add("ctm.csv", csv_preamble(fp) + table->to_csv());
    art.add("ctm.json", j.dump(2) + "\n");
    art.write_all(cfg.out_dir);
    return 0;
}

int cmd_synergy(const ExperimentConfig& cfg) {
    std::string fp = cfg.fingerprint();
    EstimatorSpec spec = resolve_estimator_spec(cfg);
    Codelength estimator = resolve_estimator(cfg, spec);
    SynergyReport rep = synergy_demo(cfg.synergy_n, cfg.seeds, spec, estimator,
                                     joint_mode_from_name(cfg.joint_mode),
                                     effective_threads(cfg));
    rep.config_fingerprint = fp;
    rep.tool_version = kToolVersion;
    Artifacts art;
    art.add("synergy.json", rep.to_json());
    art.write_all(cfg.out_dir);
    return 0;
}

int cmd_verify(const ExperimentConfig& cfg) {
    std::string fp = cfg.fingerprint();
    EnumerationIndex idx = cached_index(cfg.max_len, cfg.steps, effective_threads(cfg));
    std::vector<std::string> failures;
    auto check = [&](bool ok, const std::string& name) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
        if (!ok) failures.push_back(name);
    };

    check(idx.kraft_num() <= idx.kraft_den(), "kraft: sum m_L(x) <= 1");

    bool mass_consistent = true;
    for (const auto& rec : idx.records()) {
        std::uint64_t total = 0;
        for (std::size_t i = 0; i < rec.count_by_len.size(); ++i)
            total += std::uint64_t{rec.count_by_len[i]}
                     << (idx.max_program_bits() - 2 * (i + 1));
        if (total != rec.m_num) mass_consistent = false;
    }
    check(mass_consistent, "posterior: program masses sum to m_L(x) exactly for every x");

    CodingConstants cc = coding_constants(idx);
    check(Dyadic(1, 0) <= cc.c1, "coding constants: c1 >= 1");

    bool sandwich = true;
    for (const auto& rec : idx.records()) {
        Dyadic v(rec.m_num, static_cast<int>(idx.max_program_bits() - rec.k_bits));
        if (v < cc.c1 || cc.c2 < v) sandwich = false;
    }
    check(sandwich, "coding constants: c1 2^-K <= m <= c2 2^-K for 100% of outputs");

    bool tails_ok = true;
    for (const auto& rec : idx.records())
        for (const auto& row : tail_profile(rec.output, idx))
            if (!row.within_bound) tails_ok = false;
    check(tails_ok, "excess-length decay: P{|p| >= K+k | x} <= 2 (c2/c1) 2^-k for all x, k");

    bool counting_ok = true;
    for (unsigned n = 1; n <= 12; ++n)
        for (unsigned k = 1; k <= cfg.max_len; ++k)
            if (!counting_check(idx, n, k).ok) counting_ok = false;
    check(counting_ok, "counting: #{n-bit x : K <= k} <= 2^(k+1)");

    bool mult_ok = true;
    for (unsigned r = 1; r <= 8; ++r) {
        MultiplicityReport mr = multiplicity_check(idx, r);
        if (mr.violations != 0 || !mr.weight_counting_exact) mult_ok = false;
    }
    check(mult_ok, "multiplicity: K <= L - r + log2 L + 4 and N_{<=L} <= m 2^L");

    {
        BitString z = random_bits(10, cfg.seeds.front() ^ 0x5a5a5a5aull);
        bool ok = true;
        for (const auto& row : chance_simplification_sweep(idx, z))
            if (!row.within_bound) ok = false;
        check(ok, "chance simplification: Pr[K(z xor u) <= n - drop] <= 2^(1-drop)");
    }

    ordered_json gar_json;
    std::string gar_csv;
    if (cfg.verify_gar) {
        unsigned index_bits =
            std::max<unsigned>(16, 2 * (static_cast<unsigned>(cfg.gar_horizon) + 1));
        GarReport gar = gar_bound_check(cfg.gar_code_limit, cfg.gar_horizon, index_bits,
                                        cfg.steps);
        check(gar.c_constant.num > 0,
              "gar: posterior <= C 2^{M-delta}, C = " + std::to_string(gar.c_constant.num) +
                  "/" + std::to_string(gar.c_constant.den));
        gar_json["machines"] = gar.machine_count;
        gar_json["pairs"] = gar.pairs.size();
        gar_json["C_num"] = gar.c_constant.num;
        gar_json["C_den"] = gar.c_constant.den;
        gar_json["C_tail_num"] = gar.c_tail_constant.num;
        gar_json["C_tail_den"] = gar.c_tail_constant.den;
        gar_csv = gar.to_csv();
    }

    if (!failures.empty()) return 2;

    ordered_json j;
    j["config_fingerprint"] = fp;
    j["tool_version"] = kToolVersion;
    j["L"] = cfg.max_len;
    j["S"] = cfg.steps;
    j["c1"] = cc.c1.to_double();
    j["c2"] = cc.c2.to_double();
    j["c1_exact"] = cc.c1.to_string();
    j["c2_exact"] = cc.c2.to_string();
    j["outputs"] = idx.records().size();
    j["all_checks"] = "pass";
    if (cfg.verify_gar) j["gar"] = gar_json;
    Artifacts art;
    art.add("verify.json", j.dump(2) + "\n");
    if (cfg.verify_gar) art.add("gar.csv", csv_preamble(fp) + gar_csv);
    art.write_all(cfg.out_dir);
    return 0;
}

int dispatch(const ExperimentConfig& cfg) {
    switch (cfg.command) {
        case Command::simulate: return cmd_simulate(cfg);
        case Command::estimate: return cmd_estimate(cfg);
        case Command::contrast: return cmd_contrast(cfg);
        case Command::enumerate_universe: return cmd_enumerate(cfg);
        case Command::ctm: return cmd_ctm(cfg);
        case Command::synergy: return cmd_synergy(cfg);
        case Command::verify: return cmd_verify(cfg);
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"algorithmic good-regulator experiments"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    struct Flags {
        std::string config_path;
        std::vector<std::string> sets;
        std::string out, seeds, world, regulator, estimator, joint_mode, input;
        std::int64_t horizon = -1;
        int threads = -1;
        int max_len = -1;
        std::int64_t steps = -1;
        int block_bits = -1;
        std::int64_t synergy_n = -1;
        bool gar = false;
    } flags;

    std::vector<std::pair<std::string, CLI::App*>> subs;
    for (const char* name : {"simulate", "estimate", "contrast", "enumerate", "ctm",
                             "synergy", "verify"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", flags.config_path, "key=value config file");
        sub->add_option("--set", flags.sets, "override: key=value (repeatable)");
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--seeds", flags.seeds, "seed list, e.g. 1..20 or 3,5,9");
        sub->add_option("--threads", flags.threads, "worker count (speed only, never bytes)");
        sub->add_option("--world", flags.world, "world spec, e.g. thermostat or latch(delta=4)");
        sub->add_option("--regulator", flags.regulator, "regulator spec");
        sub->add_option("-N,--horizon", flags.horizon, "interface steps per episode");
        sub->add_option("--estimator", flags.estimator, "lz78 | lzw | mixture(...) | bdm(...)");
        sub->add_option("--joint-mode", flags.joint_mode, "interleave | concat");
        sub->add_option("--input", flags.input, "ASCII bit file (estimate)");
        sub->add_option("--max-len", flags.max_len, "micro-universe program bit budget L");
        sub->add_option("--steps", flags.steps, "micro-universe step budget S");
        sub->add_option("--block-bits", flags.block_bits, "CTM block length");
        sub->add_option("--synergy-n", flags.synergy_n, "synergy string length");
        sub->add_flag("--gar", flags.gar, "include the pair-family bound check in verify");
        subs.emplace_back(name, sub);
    }

    CLI11_PARSE(app, argc, argv);

    std::string command_name;
    for (auto& [name, sub] : subs)
        if (sub->parsed()) command_name = name;

    std::string file_text;
    if (!flags.config_path.empty()) {
        std::ifstream f(flags.config_path);
        if (!f) {
            std::cerr << "error: cannot read config file " << flags.config_path << '\n';
            return 1;
        }
        std::stringstream ss;
        ss << f.rdbuf();
        file_text = ss.str();
    }

    std::vector<std::pair<std::string, std::string>> overrides;
    overrides.emplace_back("command", command_name);
    for (const auto& kv : flags.sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
            return 1;
        }
        overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!flags.out.empty()) overrides.emplace_back("out", flags.out);
    if (!flags.seeds.empty()) overrides.emplace_back("seeds", flags.seeds);
    if (flags.threads >= 0) overrides.emplace_back("threads", std::to_string(flags.threads));
    if (!flags.world.empty()) overrides.emplace_back("world", flags.world);
    if (!flags.regulator.empty()) overrides.emplace_back("regulator", flags.regulator);
    if (flags.horizon >= 0) overrides.emplace_back("horizon", std::to_string(flags.horizon));
    if (!flags.estimator.empty()) overrides.emplace_back("estimator", flags.estimator);
    if (!flags.joint_mode.empty()) overrides.emplace_back("joint_mode", flags.joint_mode);
    if (!flags.input.empty()) overrides.emplace_back("input", flags.input);
    if (flags.max_len >= 0) overrides.emplace_back("max_len", std::to_string(flags.max_len));
    if (flags.steps >= 0) overrides.emplace_back("steps", std::to_string(flags.steps));
    if (flags.block_bits >= 0)
        overrides.emplace_back("block_bits", std::to_string(flags.block_bits));
    if (flags.synergy_n >= 0)
        overrides.emplace_back("synergy_n", std::to_string(flags.synergy_n));
    if (flags.gar) overrides.emplace_back("verify_gar", "1");

    std::vector<ConfigError> errors;
    ExperimentConfig cfg = parse_config(file_text, overrides, errors);
    if (!errors.empty()) {
        for (const auto& e : errors) {
            if (e.line > 0)
                std::cerr << "config:" << e.line << ": " << e.message << '\n';
            else
                std::cerr << "config: " << e.message << '\n';
        }
        return 1;
    }

    try {
        return dispatch(cfg);
    } catch (const capacity_error& e) {
        std::cerr << "capacity error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
