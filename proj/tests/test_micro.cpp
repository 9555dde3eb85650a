#include "doctest.h"

#include <map>

#include "agar/micro.hpp"
#include "agar/rng.hpp"

using namespace agar;

namespace {

/* Independent re-enumeration through the public single-program runner;
 * the index builder must agree with this exactly. */
std::map<BitString, std::uint64_t> brute_force_masses(unsigned L, std::uint64_t S) {
    std::map<BitString, std::uint64_t> mass;
    for (unsigned ops = 1; 2 * ops <= L; ++ops) {
        std::vector<std::uint8_t> body(ops - 1, 0);
        while (true) {
            BitString code;
            for (auto op : body) code.append_uint(op, 2);
            code.append_uint(3, 2);  // HALT
            MicroRun run = run_micro_program(code, S);
            if (run.halted) mass[run.output] += std::uint64_t{1} << (L - code.size());
            unsigned pos = 0;
            while (pos < body.size() && body[pos] == 2) body[pos++] = 0;
            if (pos == body.size()) break;
            ++body[pos];
        }
    }
    return mass;
}

}  // namespace

TEST_SUITE("micro") {

TEST_CASE("program execution semantics") {
    // EMIT0 HALT
    MicroRun r = run_micro_program(BitString::from_ascii("0011"), 100);
    CHECK(r.halted);
    CHECK(r.output == BitString::from_ascii("0"));
    CHECK(r.steps_used == 2);
    // EMIT1 DBL DBL HALT -> 1111
    r = run_micro_program(BitString::from_ascii("01101011"), 100);
    CHECK(r.halted);
    CHECK(r.output == BitString::from_ascii("1111"));
    // DBL on the empty buffer rejects the program
    CHECK_FALSE(run_micro_program(BitString::from_ascii("1011"), 100).halted);
    // missing terminal HALT
    CHECK_FALSE(run_micro_program(BitString::from_ascii("0000"), 100).halted);
    // HALT must be terminal: trailing bits invalidate the program
    CHECK_FALSE(run_micro_program(BitString::from_ascii("1100"), 100).halted);
    // odd-length and empty codes are malformed
    CHECK_FALSE(run_micro_program(BitString::from_ascii("001"), 100).halted);
    CHECK_FALSE(run_micro_program(BitString(), 100).halted);
    // step budget: EMIT0 HALT needs two steps
    CHECK_FALSE(run_micro_program(BitString::from_ascii("0011"), 1).halted);
}

TEST_CASE("valid programs form a prefix-free set") {
    // exhaustive at L = 12: no valid program is a proper prefix of another
    std::vector<BitString> programs;
    for (unsigned ops = 1; 2 * ops <= 12; ++ops) {
        std::vector<std::uint8_t> body(ops - 1, 0);
        while (true) {
            BitString code;
            for (auto op : body) code.append_uint(op, 2);
            code.append_uint(3, 2);
            if (run_micro_program(code, 10000).halted) programs.push_back(code);
            unsigned pos = 0;
            while (pos < body.size() && body[pos] == 2) body[pos++] = 0;
            if (pos == body.size()) break;
            ++body[pos];
        }
    }
    for (std::size_t i = 0; i < programs.size(); ++i)
        for (std::size_t j = 0; j < programs.size(); ++j)
            if (i != j) CHECK_FALSE(programs[i].is_prefix_of(programs[j]));
}

TEST_CASE("index masses match a brute-force re-enumeration") {
    EnumerationIndex idx = EnumerationIndex::build(14, 10000);
    auto brute = brute_force_masses(14, 10000);
    CHECK(idx.records().size() == brute.size());
    std::uint64_t kraft = 0;
    for (const auto& [output, m] : brute) {
        const OutputRecord* rec = idx.find(output);
        REQUIRE(rec != nullptr);
        CHECK(rec->m_num == m);
        kraft += m;
    }
    CHECK(idx.kraft_num() == kraft);
}

TEST_CASE("kraft sum at L=16 is exactly 44778/65536") {
    EnumerationIndex idx = EnumerationIndex::build(16, 10000);
    CHECK(idx.kraft_num() == 44778);
    CHECK(idx.kraft_den() == 65536);
    CHECK(idx.kraft_num() <= idx.kraft_den());
    CHECK(idx.records().size() == 1225);
}

TEST_CASE("the two-instruction emit program is minimal for its output") {
    EnumerationIndex idx = EnumerationIndex::build(12, 10000);
    const OutputRecord* rec = idx.find(BitString::from_ascii("0"));
    REQUIRE(rec != nullptr);
    CHECK(rec->k_bits == 4);
    // and it is the only program for "0", so its posterior is exactly one
    Rational p = posterior(BitString::from_ascii("0011"), BitString::from_ascii("0"), idx);
    CHECK(p == Rational(1, 1));
}

TEST_CASE("posterior is the exact normalized program weight") {
    EnumerationIndex idx = EnumerationIndex::build(14, 10000);
    // 0000 has two 8-bit programs (emit+3 dbl? no: E0 D D and E0 E0 D) and more
    BitString x = BitString::from_ascii("0000");
    const OutputRecord* rec = idx.find(x);
    REQUIRE(rec != nullptr);
    Rational p = posterior(BitString::from_ascii("00101011"), x, idx);  // E0 D D HALT
    CHECK(p == Rational(std::uint64_t{1} << (14 - 8), rec->m_num));
    // exhaustive normalization: per output, program weights sum to m_num
    for (const auto& r : idx.records()) {
        std::uint64_t total = 0;
        for (std::size_t i = 0; i < r.count_by_len.size(); ++i)
            total += std::uint64_t{r.count_by_len[i]} << (14 - 2 * (i + 1));
        CHECK(total == r.m_num);
    }
    CHECK_THROWS_AS(posterior(BitString::from_ascii("0011"), x, idx), std::invalid_argument);
}

TEST_CASE("per-program posterior decays with excess length against c1") {
    // P(p | x) = 2^{-|p|} / m(x) <= 2^{-excess} / c1 for every program:
    // spelled out on a concrete excess-2 program with c1 = 1
    EnumerationIndex idx = EnumerationIndex::build(14, 10000);
    CodingConstants cc = coding_constants(idx);
    REQUIRE(cc.c1 == Dyadic(1, 0));
    // E0 E0 D HALT emits 0000 in 8 bits; K(0000) = 8, so the 10-bit
    // variant E0 E0 E0 E0 HALT carries excess 2 and at most a quarter
    BitString x = BitString::from_ascii("0000");
    Rational p = posterior(BitString::from_ascii("0000000011"), x, idx);
    CHECK(p <= Rational(1, 4));
    // and in general c1 <= m 2^K makes every excess-k program's
    // posterior at most 2^-k / c1
    for (const auto& rec : idx.records()) {
        u128 lhs = u128{1} << 14;  // c1 * 2^L with c1 = 1
        u128 rhs = static_cast<u128>(rec.m_num) << rec.k_bits;
        CHECK(lhs <= rhs);
    }
}

TEST_CASE("coding constants at (16, 10^4): c1 = 1 and c2 = 25/8") {
    EnumerationIndex idx = EnumerationIndex::build(16, 10000);
    CodingConstants cc = coding_constants(idx);
    CHECK(cc.c1 == Dyadic(1, 0));
    CHECK(cc.c2 == Dyadic(25, 3));
    CHECK(Dyadic(1, 0) <= cc.c1);
    // the sandwich holds for every output by construction of min/max
    for (const auto& rec : idx.records()) {
        Dyadic v(rec.m_num, static_cast<int>(16 - rec.k_bits));
        CHECK(cc.c1 <= v);
        CHECK(v <= cc.c2);
    }
}

TEST_CASE("excess-length tail: k=0 is certain and the bound never fails") {
    EnumerationIndex idx = EnumerationIndex::build(16, 10000);
    std::size_t checked = 0;
    for (const auto& rec : idx.records()) {
        auto rows = tail_profile(rec.output, idx);
        REQUIRE(!rows.empty());
        CHECK(rows.front().excess == 0);
        CHECK(rows.front().num == rows.front().den);
        for (const auto& row : rows) {
            CHECK(row.within_bound);
            ++checked;
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("length spectra can have internal gaps: no uniform lower bound") {
    EnumerationIndex idx = EnumerationIndex::build(14, 10000);
    const OutputRecord* rec = idx.find(BitString::from_ascii("001001"));
    REQUIRE(rec != nullptr);
    CHECK(rec->k_bits == 10);
    CHECK(rec->count_by_len[4] == 2);  // two 10-bit programs
    CHECK(rec->count_by_len[5] == 0);  // none at 12 bits
    CHECK(rec->count_by_len[6] == 2);  // two 14-bit programs
}

TEST_CASE("monotone refinement from L to L+2") {
    EnumerationIndex small = EnumerationIndex::build(14, 10000);
    EnumerationIndex large = EnumerationIndex::build(16, 10000);
    for (const auto& rec : small.records()) {
        const OutputRecord* big = large.find(rec.output);
        REQUIRE(big != nullptr);
        CHECK(big->k_bits <= rec.k_bits);
        // m_16 >= m_14 pointwise: num16 / 2^16 >= num14 / 2^14
        CHECK(big->m_num >= 4 * rec.m_num);
    }
}

TEST_CASE("multiplicity lemma report at L=16") {
    EnumerationIndex idx = EnumerationIndex::build(16, 10000);
    MultiplicityReport r1 = multiplicity_check(idx, 1);
    CHECK(r1.qualifying == 688);
    CHECK(r1.violations == 0);
    CHECK(r1.weight_counting_exact);
    CHECK(r1.fitted_c_prime == doctest::Approx(-3.0).epsilon(1e-9));
    MultiplicityReport r3 = multiplicity_check(idx, 3);
    CHECK(r3.qualifying == 6);
    CHECK(r3.violations == 0);
    // r beyond the total program budget is vacuous
    MultiplicityReport r12 = multiplicity_check(idx, 12);
    CHECK(r12.qualifying == 0);
    CHECK(r12.violations == 0);
    CHECK_THROWS_AS(multiplicity_check(idx, 0), std::invalid_argument);
}

TEST_CASE("counting bound at n=8") {
    EnumerationIndex idx = EnumerationIndex::build(16, 10000);
    CountingResult c3 = counting_check(idx, 8, 3);
    CHECK(c3.count == 0);
    CHECK(c3.bound == 16);
    CHECK(c3.ok);
    CHECK(counting_check(idx, 8, 10).count == 4);
    CHECK(counting_check(idx, 8, 12).count == 16);
    CHECK(counting_check(idx, 8, 16).count == 100);
    for (unsigned k = 1; k <= 16; ++k) CHECK(counting_check(idx, 8, k).ok);
    // k >= n + 2 is vacuous: every n-bit string satisfies the bound
    CHECK(counting_check(idx, 8, 10).bound == 2048);
}

TEST_CASE("chance simplification sweep at n=10") {
    EnumerationIndex idx = EnumerationIndex::build(16, 10000);
    BitString z = random_bits(10, 4242);
    auto rows = chance_simplification_sweep(idx, z);
    CHECK(rows.size() == 10);
    for (const auto& row : rows) {
        CHECK(row.total == 1024);
        CHECK(row.within_bound);
    }
    CHECK_THROWS_AS(chance_simplification_sweep(idx, random_bits(21, 1)), capacity_error);
}

TEST_CASE("enumeration is deterministic and thread-invariant") {
    auto a = EnumerationIndex::build(14, 10000).to_bytes();
    auto b = EnumerationIndex::build(14, 10000).to_bytes();
    auto c = EnumerationIndex::build(14, 10000, 4).to_bytes();
    CHECK(a == b);
    CHECK(a == c);
    EnumerationIndex loaded = EnumerationIndex::from_bytes(a);
    CHECK(loaded.to_bytes() == a);
    CHECK(loaded.max_program_bits() == 14);
    CHECK(loaded.step_budget() == 10000);
}

TEST_CASE("index file rejects corruption") {
    auto bytes = EnumerationIndex::build(12, 1000).to_bytes();
    auto bad = bytes;
    bad[9] ^= 0x40;  // corrupt the opcode hash
    CHECK_THROWS_AS(EnumerationIndex::from_bytes(bad), std::invalid_argument);
    bad = bytes;
    bad.resize(bytes.size() / 2);
    CHECK_THROWS_AS(EnumerationIndex::from_bytes(bad), std::invalid_argument);
}

TEST_CASE("capacity limits are explicit errors") {
    CHECK_THROWS_AS(EnumerationIndex::build(40, 10000), capacity_error);
    CHECK_THROWS_AS(EnumerationIndex::build(0, 10000), capacity_error);
    CHECK_THROWS_AS(EnumerationIndex::build(12, 0), capacity_error);
    CHECK_THROWS_AS(EnumerationIndex::build(12, 2000000), capacity_error);
}

TEST_CASE("csv export carries exact dyadic masses") {
    EnumerationIndex idx = EnumerationIndex::build(12, 10000);
    std::string csv = idx.to_csv();
    CHECK(csv.rfind("x,K_L,m_L_num,m_L_den,N_le_counts\n", 0) == 0);
    // "0" has the single program EMIT0 HALT: K = 4, m = 2^(12-4)/2^12,
    // and a cumulative count of one from length 4 on
    CHECK(csv.find("\n0,4,256,4096,0;1;1;1;1;1\n") != std::string::npos);
}

TEST_CASE("gar family check at (10, 8): exact frozen constants") {
    GarReport rep = gar_bound_check(10, 8, 18, 10000);
    CHECK(rep.machine_count == 4);
    CHECK(rep.pairs.size() == 16);
    CHECK(rep.c_constant == Rational(1, 1));
    CHECK(rep.c_tail_constant == Rational(1, 1));
    // every pair satisfies posterior <= C 2^{M - delta} at the reported C
    for (const auto& p : rep.pairs) {
        int shift = p.m_bits - p.delta_bits;
        Rational rhs = (shift >= 0) ? Rational(rep.c_constant.num << shift, rep.c_constant.den)
                                    : Rational(rep.c_constant.num,
                                               rep.c_constant.den << -shift);
        CHECK(p.posterior <= rhs);
    }
    // regulator 0 is behaviorally the null regulator: ON == OFF, delta = 0
    for (const auto& p : rep.pairs)
        if (p.regulator_id == 0) CHECK(p.delta_bits == 0);
    // the all-zero readout is shared by six equally-weighted pairs
    for (const auto& p : rep.pairs)
        if (p.on_readout == BitString::zeros(8)) CHECK(p.posterior == Rational(1, 6));
    CHECK(rep.to_csv().find("world,regulator") == 0);
}

TEST_CASE("gar pre-conditions") {
    CHECK_THROWS_AS(gar_bound_check(13, 8, 18, 10000), std::invalid_argument);
    CHECK_THROWS_AS(gar_bound_check(10, 13, 28, 10000), std::invalid_argument);
    CHECK_THROWS_AS(gar_bound_check(10, 8, 12, 10000), capacity_error);
}

TEST_CASE("opcode descriptor hash is pinned into artifacts") {
    CHECK(micro_opcode_hash().size() == 16);
    CHECK(micro_opcode_hash() == micro_opcode_hash());
}

}  // TEST_SUITE
