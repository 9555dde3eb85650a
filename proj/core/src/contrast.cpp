#include "agar/contrast.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "agar/machine.hpp"
#include "agar/rng.hpp"
#include "json.hpp"

namespace agar {

using ordered_json = nlohmann::ordered_json;

PValue permutation_test(const std::vector<std::int64_t>& deltas_x64, std::uint64_t iterations,
                        std::uint64_t seed) {
    std::size_t n = deltas_x64.size();
    if (n < 2) throw std::invalid_argument("permutation_test: need at least 2 episodes");
    // mean comparisons reduce to signed-sum comparisons at equal n
    __int128 observed = 0;
    for (auto d : deltas_x64) observed += d;

    if (n <= 16) {
        std::uint64_t total = std::uint64_t{1} << n;
        std::uint64_t hits = 0;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            __int128 s = 0;
            for (std::size_t i = 0; i < n; ++i)
                s += (mask >> i) & 1 ? -deltas_x64[i] : deltas_x64[i];
            if (s >= observed) ++hits;
        }
        return PValue{hits, total};
    }

    if (iterations == 0) throw std::invalid_argument("permutation_test: need iterations >= 1");
    auto eng = seeded_engine(seed ^ 0x5045524dull);
    std::uint64_t hits = 0;
    for (std::uint64_t it = 0; it < iterations; ++it) {
        __int128 s = 0;
        std::uint64_t word = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if ((i & 63) == 0) word = eng();
            s += (word >> (i & 63)) & 1 ? -deltas_x64[i] : deltas_x64[i];
        }
        if (s >= observed) ++hits;
    }
    return PValue{hits + 1, iterations + 1};  // identity assignment included
}

BoundSummary evaluate_bound(std::int64_t m_hat_x64, std::int64_t mean_delta_x64,
                            std::int64_t verdict_threshold_x64) {
    BoundSummary s;
    s.m_hat_x64 = m_hat_x64;
    s.mean_delta_x64 = mean_delta_x64;
    s.bound_log2_x64 = m_hat_x64 - mean_delta_x64;
    s.bound_value = std::exp2(x64_to_double(s.bound_log2_x64));
    s.verdict = (mean_delta_x64 - m_hat_x64 >= verdict_threshold_x64)
                    ? "low-M explanations exponentially disfavored"
                    : "inconclusive";
    return s;
}

namespace {

std::int64_t round_mean(__int128 sum, std::size_t n) {
    bool neg = sum < 0;
    __int128 a = neg ? -sum : sum;
    __int128 q = (a + static_cast<__int128>(n) / 2) / static_cast<__int128>(n);
    return static_cast<std::int64_t>(neg ? -q : q);
}

constexpr std::uint64_t kSynergyRSalt = 0x53594e2d52ull;  // "SYN-R"
constexpr std::uint64_t kSynergyESalt = 0x53594e2d45ull;  // "SYN-E"

template <typename Fn>
void parallel_over(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    unsigned width = std::min<std::size_t>(threads, count);
    for (unsigned t = 0; t < width; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace

ContrastReport run_contrast(const MachineSpec& world_spec, const MachineSpec& regulator_spec,
                            std::size_t horizon, const EstimatorSpec& estimator_spec,
                            const Codelength& estimator,
                            const std::vector<std::uint64_t>& seeds,
                            const ThermostatParams& base, const ContrastOptions& options) {
    if (seeds.empty()) throw std::invalid_argument("run_contrast: need at least one seed");
    if (horizon == 0) throw std::invalid_argument("run_contrast: horizon must be >= 1");

    ContrastReport rep;
    rep.world = world_spec.canonical();
    rep.regulator = regulator_spec.canonical();
    rep.estimator = estimator_spec.canonical();
    rep.joint_mode = joint_mode_name(options.joint_mode);
    rep.horizon = horizon;
    rep.episodes.resize(seeds.size());

    CausalTransducer off = null_regulator();
    parallel_over(seeds.size(), options.threads, [&](std::size_t i) {
        std::uint64_t seed = seeds[i];
        auto world = make_world(world_spec, horizon, seed, base);
        auto regulator = make_regulator(regulator_spec, horizon, seed, base);
        Transcript on = run_coupled(*world, *regulator, horizon);
        Transcript off_run = run_coupled(*world, off, horizon);

        EpisodeResult ep;
        ep.seed = seed;
        ep.horizon = horizon;
        ep.a_x64 = estimator(on.world_readout).bits_x64;
        ep.b_x64 = estimator(off_run.world_readout).bits_x64;
        ep.delta_x64 = ep.b_x64 - ep.a_x64;
        ep.m_hat_machines_x64 =
            mutual_info_x64(world->code(), regulator->code(), estimator, options.joint_mode);
        ep.m_hat_transcripts_x64 = mutual_info_x64(on.world_readout, on.regulator_output,
                                                   estimator, options.joint_mode);
        rep.episodes[i] = ep;
    });

    __int128 sum = 0, sum_m = 0, sum_mt = 0;
    std::vector<std::int64_t> deltas;
    deltas.reserve(rep.episodes.size());
    for (const auto& ep : rep.episodes) {
        sum += ep.delta_x64;
        sum_m += ep.m_hat_machines_x64;
        sum_mt += ep.m_hat_transcripts_x64;
        deltas.push_back(ep.delta_x64);
    }
    rep.mean_delta_x64 = round_mean(sum, deltas.size());
    std::vector<std::int64_t> sorted = deltas;
    std::sort(sorted.begin(), sorted.end());
    std::size_t mid = sorted.size() / 2;
    rep.median_delta_x64 = (sorted.size() % 2) ? sorted[mid]
                                               : round_mean(static_cast<__int128>(sorted[mid - 1]) +
                                                                sorted[mid],
                                                            2);
    rep.p_value = permutation_test(deltas, options.permutation_iterations,
                                   options.permutation_seed);
    rep.m_hat_x64 = round_mean(sum_m, rep.episodes.size());
    rep.m_hat_transcripts_x64 = round_mean(sum_mt, rep.episodes.size());

    BoundSummary bound =
        evaluate_bound(rep.m_hat_x64, rep.mean_delta_x64, options.verdict_threshold_x64);
    rep.bound_log2_x64 = bound.bound_log2_x64;
    rep.bound_value = bound.bound_value;
    rep.verdict = bound.verdict;
    return rep;
}

std::string ContrastReport::to_json() const {
    ordered_json j;
    j["config_fingerprint"] = config_fingerprint;
    j["tool_version"] = tool_version;
    j["world"] = world;
    j["regulator"] = regulator;
    j["estimator"] = estimator;
    j["joint_mode"] = joint_mode;
    j["N"] = horizon;
    ordered_json eps = ordered_json::array();
    for (const auto& ep : episodes) {
        ordered_json e;
        e["seed"] = ep.seed;
        e["a_x64"] = ep.a_x64;
        e["b_x64"] = ep.b_x64;
        e["delta_x64"] = ep.delta_x64;
        eps.push_back(e);
    }
    j["episodes"] = eps;
    j["mean_delta_x64"] = mean_delta_x64;
    j["median_delta_x64"] = median_delta_x64;
    j["p_value"] = p_value.value();
    j["p_value_num"] = p_value.num;
    j["p_value_den"] = p_value.den;
    j["m_hat_x64"] = m_hat_x64;
    j["m_hat_transcripts_x64"] = m_hat_transcripts_x64;
    j["bound_log2"] = x64_to_double(bound_log2_x64);
    j["verdict"] = verdict;
    return j.dump(2) + "\n";
}

std::string ContrastReport::episodes_csv() const {
    std::ostringstream out;
    out << "seed,a_x64,b_x64,delta_x64,m_hat_machines_x64,m_hat_transcripts_x64\n";
    for (const auto& ep : episodes)
        out << ep.seed << ',' << ep.a_x64 << ',' << ep.b_x64 << ',' << ep.delta_x64 << ','
            << ep.m_hat_machines_x64 << ',' << ep.m_hat_transcripts_x64 << '\n';
    return out.str();
}

SynergyReport synergy_demo(std::size_t n, const std::vector<std::uint64_t>& seeds,
                           const EstimatorSpec& estimator_spec, const Codelength& estimator,
                           JointMode mode, unsigned threads) {
    if (n < 4096)
        throw std::invalid_argument("synergy_demo: need n >= 4096 for the compressor regime");
    if (seeds.empty()) throw std::invalid_argument("synergy_demo: need at least one seed");

    SynergyReport rep;
    rep.n = n;
    rep.estimator = estimator_spec.canonical();
    rep.joint_mode = joint_mode_name(mode);
    rep.rows.resize(seeds.size());

    parallel_over(seeds.size(), threads, [&](std::size_t i) {
        std::uint64_t seed = seeds[i];
        BitString r = random_bits(n, seed ^ kSynergyRSalt);
        BitString e = random_bits(n, seed ^ kSynergyESalt);
        BitString w;
        for (std::size_t t = 0; t < n; ++t) w.push_back(r[t] ^ e[t]);

        SynergyRow row;
        row.seed = seed;
        row.m_w_r_x64 = mutual_info_x64(w, r, estimator, mode);
        row.m_w_e_x64 = mutual_info_x64(w, e, estimator, mode);
        row.m_w_re_x64 = mutual_info_x64(w, interleave_proportional(r, e), estimator, mode);
        rep.rows[i] = row;
    });
    return rep;
}

std::string SynergyReport::to_json() const {
    ordered_json j;
    j["config_fingerprint"] = config_fingerprint;
    j["tool_version"] = tool_version;
    j["n"] = n;
    j["estimator"] = estimator;
    j["joint_mode"] = joint_mode;
    ordered_json rows_json = ordered_json::array();
    for (const auto& row : rows) {
        ordered_json r;
        r["seed"] = row.seed;
        r["m_w_r_x64"] = row.m_w_r_x64;
        r["m_w_e_x64"] = row.m_w_e_x64;
        r["m_w_re_x64"] = row.m_w_re_x64;
        rows_json.push_back(r);
    }
    j["rows"] = rows_json;
    return j.dump(2) + "\n";
}

}  // namespace agar
