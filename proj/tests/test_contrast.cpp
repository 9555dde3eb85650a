#include "doctest.h"

#include <cmath>

#include "agar/contrast.hpp"
#include "agar/machine.hpp"
#include "agar/rng.hpp"

using namespace agar;

namespace {

ContrastOptions fast_options() {
    ContrastOptions opt;
    opt.threads = 2;
    opt.permutation_iterations = 2000;
    return opt;
}

}  // namespace

TEST_SUITE("contrast") {

TEST_CASE("permutation test: exhaustive exact values") {
    // all-positive gaps: only the identity assignment reaches the mean
    PValue p = permutation_test({64, 64, 64, 64}, 100, 1);
    CHECK(p.num == 1);
    CHECK(p.den == 16);
    // all-zero gaps: every assignment ties, p = 1
    p = permutation_test({0, 0, 0}, 100, 1);
    CHECK(p.num == p.den);
    CHECK(p.value() == 1.0);
    // symmetric pair: 3 of 4 assignments reach the zero mean
    p = permutation_test({64, -64}, 100, 1);
    CHECK(p.num == 3);
    CHECK(p.den == 4);
    CHECK(p.value() >= 0.5);
    CHECK_THROWS_AS(permutation_test({64}, 100, 1), std::invalid_argument);
}

TEST_CASE("permutation test: sampled regime includes the identity") {
    std::vector<std::int64_t> deltas(20, 64);  // n > 16 forces sampling
    PValue p = permutation_test(deltas, 10000, 1);
    CHECK(p.den == 10001);
    CHECK(p.num >= 1);
    CHECK(p.value() < 0.05);
    CHECK_THROWS_AS(permutation_test(deltas, 0, 1), std::invalid_argument);
    // all-zero sampled case still reports p = 1
    std::vector<std::int64_t> zeros(20, 0);
    CHECK(permutation_test(zeros, 500, 1).value() == 1.0);
}

TEST_CASE("permutation test calibration: symmetric noise rejects at most alpha-ish") {
    // 200 meta-replications of 10 symmetric coin-flip gaps; the sign-flip
    // test is exact, so P(p <= 0.05) <= 0.05
    unsigned rejections = 0;
    for (std::uint64_t rep = 0; rep < 200; ++rep) {
        auto eng = seeded_engine(rep + 31000);
        std::vector<std::int64_t> deltas;
        for (int i = 0; i < 10; ++i)
            deltas.push_back((eng() & 1) ? 64 : -64);
        if (permutation_test(deltas, 1000, rep).value() <= 0.05) ++rejections;
    }
    CHECK(rejections <= 15);
}

TEST_CASE("null against null: every gap is exactly zero and p is one") {
    ThermostatParams base;
    auto spec = EstimatorSpec::parse("lz78");
    auto est = make_estimator(spec);
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    ContrastReport rep = run_contrast(MachineSpec::parse("thermostat"),
                                      MachineSpec::parse("null"), 512, spec, est, seeds,
                                      base, fast_options());
    for (const auto& ep : rep.episodes) {
        CHECK(ep.delta_x64 == 0);
        CHECK(ep.a_x64 == ep.b_x64);
    }
    CHECK(rep.p_value.value() == 1.0);
    CHECK(rep.mean_delta_x64 == 0);
    CHECK(rep.median_delta_x64 == 0);
}

TEST_CASE("guarded latch: the gap is structurally positive in every episode") {
    ThermostatParams base;
    auto spec = EstimatorSpec::parse("lz78");
    auto est = make_estimator(spec);
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 1; s <= 10; ++s) seeds.push_back(s);
    ContrastReport rep = run_contrast(MachineSpec::parse("latch_guard(delta=4)"),
                                      MachineSpec::parse("trigger(t=2)"), 256, spec, est,
                                      seeds, base, fast_options());
    for (const auto& ep : rep.episodes) CHECK(ep.delta_x64 > 0);
    CHECK(rep.mean_delta_x64 > 0);

    // paired-leg oracle: a-hat is the all-zero codelength, b-hat the
    // codelength of the seeded fallback with its watch prefix zeroed
    std::int64_t a_expected = lz78_codelength(BitString::zeros(256)).bits_x64;
    for (const auto& ep : rep.episodes) {
        CHECK(ep.a_x64 == a_expected);
        BitString z = random_bits(256, ep.seed ^ 0x4c41544348ull);
        for (std::size_t i = 0; i < 4; ++i) z.set(i, 0);
        CHECK(ep.b_x64 == lz78_codelength(z).bits_x64);
        CHECK(ep.delta_x64 == ep.b_x64 - ep.a_x64);
        CHECK(ep.delta_x64 >=
              static_cast<std::int64_t>(0.8 * static_cast<double>(ep.b_x64 - a_expected)));
    }
}

TEST_CASE("plain latch: quiet is already optimal, so no regulator beats null") {
    ThermostatParams base;
    auto spec = EstimatorSpec::parse("lz78");
    auto est = make_estimator(spec);
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4};
    ContrastReport rep = run_contrast(MachineSpec::parse("latch(delta=4)"),
                                      MachineSpec::parse("trigger(t=2)"), 256, spec, est,
                                      seeds, base, fast_options());
    for (const auto& ep : rep.episodes) CHECK(ep.delta_x64 <= 0);
}

TEST_CASE("reports are deterministic across reruns and thread counts") {
    ThermostatParams base;
    auto spec = EstimatorSpec::parse("lz78");
    auto est = make_estimator(spec);
    std::vector<std::uint64_t> seeds = {3, 1, 2};
    ContrastOptions opt1 = fast_options();
    opt1.threads = 1;
    ContrastOptions opt4 = fast_options();
    opt4.threads = 4;
    ContrastReport a = run_contrast(MachineSpec::parse("thermostat"),
                                    MachineSpec::parse("bangbang(deadband=0.5)"), 512, spec,
                                    est, seeds, base, opt1);
    ContrastReport b = run_contrast(MachineSpec::parse("thermostat"),
                                    MachineSpec::parse("bangbang(deadband=0.5)"), 512, spec,
                                    est, seeds, base, opt4);
    CHECK(a.to_json() == b.to_json());
    CHECK(a.episodes_csv() == b.episodes_csv());
    // episode order follows the seed list, not thread completion order
    CHECK(a.episodes[0].seed == 3);
    CHECK(a.episodes[1].seed == 1);
    CHECK(a.episodes[2].seed == 2);
}

TEST_CASE("evaluate_bound arithmetic and verdicts") {
    BoundSummary s = evaluate_bound(100 * kX64, 100 * kX64, 8 * kX64);
    CHECK(s.bound_log2_x64 == 0);
    CHECK(s.bound_value == doctest::Approx(1.0));
    CHECK(s.verdict == "inconclusive");
    s = evaluate_bound(100 * kX64, 110 * kX64, 8 * kX64);
    CHECK(s.bound_value == doctest::Approx(std::exp2(-10.0)));
    CHECK(s.verdict == "low-M explanations exponentially disfavored");
    // the threshold boundary is inclusive
    s = evaluate_bound(0, 8 * kX64, 8 * kX64);
    CHECK(s.verdict == "low-M explanations exponentially disfavored");
    s = evaluate_bound(0, 8 * kX64 - 1, 8 * kX64);
    CHECK(s.verdict == "inconclusive");
}

TEST_CASE("synergy demo: degenerate structures behave as the identities demand") {
    auto spec = EstimatorSpec::parse("lz78");
    auto est = make_estimator(spec);
    std::size_t n = 8192;
    // E = 0^n collapses W to a copy of R
    BitString r = random_bits(n, 5);
    std::int64_t copy = mutual_info_x64(r, r, est);
    CHECK(copy >= est(r).bits_x64 / 2);
    // R = E collapses W to the all-zero string; the concat pairing keeps
    // the estimate near zero, the interleaved one carries a larger
    // finite-length bias from the zero padding
    BitString w = BitString::zeros(n);
    std::int64_t concat = mutual_info_x64(w, r, est, JointMode::concat);
    CHECK(std::llabs(concat) <= static_cast<std::int64_t>(0.1 * n) * kX64);
    std::int64_t inter = mutual_info_x64(w, r, est, JointMode::interleave);
    CHECK(std::llabs(inter) <= static_cast<std::int64_t>(0.3 * n) * kX64);
    CHECK_THROWS_AS(synergy_demo(2048, {1}, spec, est, JointMode::interleave),
                    std::invalid_argument);
    CHECK_THROWS_AS(synergy_demo(8192, {}, spec, est, JointMode::interleave),
                    std::invalid_argument);
}

TEST_CASE("synergy demo report shape and determinism") {
    auto spec = EstimatorSpec::parse("mixture(max_order=6)");
    auto est = make_estimator(spec);
    SynergyReport a = synergy_demo(4096, {1, 2}, spec, est, JointMode::interleave, 1);
    SynergyReport b = synergy_demo(4096, {1, 2}, spec, est, JointMode::interleave, 4);
    CHECK(a.rows.size() == 2);
    CHECK(a.to_json() == b.to_json());
    for (const auto& row : a.rows) {
        // pairwise small, joint large: the synergy signature
        CHECK(row.m_w_re_x64 > 4 * std::max(row.m_w_r_x64, row.m_w_e_x64));
    }
}

TEST_CASE("run_contrast validates its inputs") {
    ThermostatParams base;
    auto spec = EstimatorSpec::parse("lz78");
    auto est = make_estimator(spec);
    CHECK_THROWS_AS(run_contrast(MachineSpec::parse("thermostat"), MachineSpec::parse("null"),
                                 512, spec, est, {}, base, fast_options()),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_contrast(MachineSpec::parse("thermostat"), MachineSpec::parse("null"),
                                 0, spec, est, {1}, base, fast_options()),
                    std::invalid_argument);
}

}  // TEST_SUITE
