#include "agar/micro.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <atomic>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "agar/machine.hpp"
#include "agar/sha256.hpp"

namespace agar {

const char* const kMicroOpcodeDescriptor =
    "agar-micro-v1: 2-bit ops 00=EMIT0 01=EMIT1 10=DBL(rejects on empty buffer) 11=HALT; "
    "a valid program is a run of non-HALT ops closed by a single terminal HALT; "
    "cost = 1 per op + appended symbols per DBL";

std::string micro_opcode_hash() { return sha256_hex(kMicroOpcodeDescriptor).substr(0, 16); }

MicroRun run_micro_program(const BitString& code, std::uint64_t step_budget) {
    MicroRun run;
    if (code.size() < 2 || code.size() % 2 != 0) return run;
    std::size_t op_count = code.size() / 2;
    for (std::size_t i = 0; i < op_count; ++i) {
        auto op = static_cast<MicroOp>(2 * code[2 * i] + code[2 * i + 1]);
        bool is_last = (i + 1 == op_count);
        if (op == MicroOp::Halt) {
            if (!is_last) return run;  // HALT before the end: not a valid program
            if (++run.steps_used > step_budget) return run;
            run.halted = true;
            return run;
        }
        if (is_last) return run;  // missing terminal HALT
        switch (op) {
            case MicroOp::Emit0:
            case MicroOp::Emit1:
                if (++run.steps_used > step_budget) return run;
                run.output.push_back(op == MicroOp::Emit1 ? 1 : 0);
                break;
            case MicroOp::Dbl: {
                if (run.output.empty()) return run;  // malformed: nothing to double
                std::uint64_t cost = 1 + run.output.size();
                run.steps_used += cost;
                if (run.steps_used > step_budget) return run;
                BitString copy = run.output;
                run.output.append(copy);
                break;
            }
            default:
                return run;
        }
    }
    return run;
}

std::uint64_t OutputRecord::n_up_to(unsigned max_bits) const {
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < count_by_len.size(); ++i)
        if (2 * (i + 1) <= max_bits) total += count_by_len[i];
    return total;
}

std::uint64_t OutputRecord::n_total() const {
    std::uint64_t total = 0;
    for (auto c : count_by_len) total += c;
    return total;
}

namespace {

struct Accumulator {
    std::uint64_t m_num = 0;
    unsigned k_bits = 0;
    std::vector<std::uint32_t> count_by_len;
};

using AccumMap = std::unordered_map<BitString, Accumulator, BitStringHash>;

/* Runs every valid program of exactly op_count opcodes (body odometer
 * over {EMIT0, EMIT1, DBL}^(op_count-1) closed by HALT). */
void enumerate_length(unsigned op_count, unsigned max_bits, std::uint64_t step_budget,
                      AccumMap& acc) {
    unsigned body = op_count - 1;
    unsigned program_bits = 2 * op_count;
    std::vector<std::uint8_t> ops(body, 0);
    std::uint64_t contribution = std::uint64_t{1} << (max_bits - program_bits);
    while (true) {
        // execute directly from the op list
        BitString output;
        bool ok = true;
        std::uint64_t steps = 0;
        for (unsigned i = 0; i < body && ok; ++i) {
            switch (static_cast<MicroOp>(ops[i])) {
                case MicroOp::Emit0:
                case MicroOp::Emit1:
                    if (++steps > step_budget) { ok = false; break; }
                    output.push_back(ops[i] == 1 ? 1 : 0);
                    break;
                case MicroOp::Dbl: {
                    if (output.empty()) { ok = false; break; }
                    steps += 1 + output.size();
                    if (steps > step_budget) { ok = false; break; }
                    BitString copy = output;
                    output.append(copy);
                    break;
                }
                default:
                    ok = false;
            }
        }
        if (ok && ++steps <= step_budget) {
            auto& a = acc[output];
            if (a.m_num == 0) {
                a.k_bits = program_bits;
                a.count_by_len.assign(max_bits / 2, 0);
            }
            a.m_num += contribution;
            a.k_bits = std::min(a.k_bits, program_bits);
            ++a.count_by_len[op_count - 1];
        }
        // odometer over the body
        unsigned pos = 0;
        while (pos < body && ops[pos] == 2) ops[pos++] = 0;
        if (pos == body) break;
        ++ops[pos];
    }
}

}  // namespace

EnumerationIndex EnumerationIndex::build(unsigned max_program_bits, std::uint64_t step_budget,
                                         unsigned threads) {
    if (max_program_bits < 2 || max_program_bits > 24)
        throw capacity_error("enumerate: max program length must be in [2, 24] bits");
    if (step_budget == 0 || step_budget > 1000000)
        throw capacity_error("enumerate: step budget must be in [1, 10^6]");

    unsigned max_ops = max_program_bits / 2;
    std::vector<AccumMap> shards(max_ops);
    if (threads <= 1) {
        for (unsigned k = 1; k <= max_ops; ++k)
            enumerate_length(k, max_program_bits, step_budget, shards[k - 1]);
    } else {
        std::vector<std::thread> pool;
        std::atomic<unsigned> next{1};
        for (unsigned t = 0; t < std::min(threads, max_ops); ++t)
            pool.emplace_back([&] {
                for (unsigned k = next.fetch_add(1); k <= max_ops; k = next.fetch_add(1))
                    enumerate_length(k, max_program_bits, step_budget, shards[k - 1]);
            });
        for (auto& th : pool) th.join();
    }

    // deterministic sorted reduction
    std::map<BitString, Accumulator> merged;
    for (auto& shard : shards) {
        for (auto& [output, a] : shard) {
            auto it = merged.find(output);
            if (it == merged.end()) {
                merged.emplace(output, std::move(a));
            } else {
                it->second.m_num += a.m_num;
                it->second.k_bits = std::min(it->second.k_bits, a.k_bits);
                for (std::size_t i = 0; i < a.count_by_len.size(); ++i)
                    it->second.count_by_len[i] += a.count_by_len[i];
            }
        }
    }

    EnumerationIndex index;
    index.max_bits_ = max_program_bits;
    index.step_budget_ = step_budget;
    index.records_.reserve(merged.size());
    for (auto& [output, a] : merged) {
        OutputRecord rec;
        rec.output = output;
        rec.k_bits = a.k_bits;
        rec.m_num = a.m_num;
        rec.count_by_len = std::move(a.count_by_len);
        index.kraft_num_ += rec.m_num;
        index.records_.push_back(std::move(rec));
    }
    return index;
}

const OutputRecord* EnumerationIndex::find(const BitString& x) const {
    auto it = std::lower_bound(records_.begin(), records_.end(), x,
                               [](const OutputRecord& r, const BitString& key) {
                                   return r.output < key;
                               });
    if (it == records_.end() || !(it->output == x)) return nullptr;
    return &*it;
}

// ---------------------------------------------------------------------------
// Binary index file

namespace {

void put_u32(std::vector<std::uint8_t>& v, std::uint32_t x) {
    for (int i = 0; i < 4; ++i) v.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& v, std::uint64_t x) {
    for (int i = 0; i < 8; ++i) v.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

struct ByteReader {
    const std::vector<std::uint8_t>* data;
    std::size_t pos = 0;

    std::uint8_t u8() {
        if (pos >= data->size()) throw std::invalid_argument("index file truncated");
        return (*data)[pos++];
    }
    std::uint32_t u32() {
        std::uint32_t x = 0;
        for (int i = 0; i < 4; ++i) x |= std::uint32_t{u8()} << (8 * i);
        return x;
    }
    std::uint64_t u64() {
        std::uint64_t x = 0;
        for (int i = 0; i < 8; ++i) x |= std::uint64_t{u8()} << (8 * i);
        return x;
    }
};

constexpr char kIndexMagic[8] = {'A', 'G', 'A', 'R', 'I', 'D', 'X', '1'};

}  // namespace

std::vector<std::uint8_t> EnumerationIndex::to_bytes() const {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kIndexMagic, kIndexMagic + 8);
    std::string ophash = micro_opcode_hash();
    out.insert(out.end(), ophash.begin(), ophash.end());
    put_u32(out, max_bits_);
    put_u64(out, step_budget_);
    put_u64(out, kraft_num_);
    put_u64(out, records_.size());
    for (const auto& rec : records_) {
        put_u32(out, static_cast<std::uint32_t>(rec.output.size()));
        auto packed = rec.output.packed_bytes();
        out.insert(out.end(), packed.begin(), packed.end());
        put_u32(out, rec.k_bits);
        put_u64(out, rec.m_num);
        put_u32(out, static_cast<std::uint32_t>(rec.count_by_len.size()));
        for (auto c : rec.count_by_len) put_u32(out, c);
    }
    return out;
}

EnumerationIndex EnumerationIndex::from_bytes(const std::vector<std::uint8_t>& bytes) {
    ByteReader r{&bytes};
    for (char c : kIndexMagic)
        if (r.u8() != static_cast<std::uint8_t>(c))
            throw std::invalid_argument("index file: bad magic");
    std::string ophash(16, ' ');
    for (auto& c : ophash) c = static_cast<char>(r.u8());
    if (ophash != micro_opcode_hash())
        throw std::invalid_argument("index file: opcode-set hash mismatch");
    EnumerationIndex index;
    index.max_bits_ = r.u32();
    index.step_budget_ = r.u64();
    index.kraft_num_ = r.u64();
    std::uint64_t count = r.u64();
    index.records_.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        OutputRecord rec;
        std::uint32_t nbits = r.u32();
        std::size_t nbytes = (nbits + 7) / 8;
        if (r.pos + nbytes > bytes.size())
            throw std::invalid_argument("index file truncated");
        rec.output = BitString::from_packed(bytes.data() + r.pos, nbits);
        r.pos += nbytes;
        rec.k_bits = r.u32();
        rec.m_num = r.u64();
        std::uint32_t lens = r.u32();
        rec.count_by_len.resize(lens);
        for (auto& c : rec.count_by_len) c = r.u32();
        index.records_.push_back(std::move(rec));
    }
    return index;
}

std::string EnumerationIndex::to_csv() const {
    std::ostringstream out;
    out << "x,K_L,m_L_num,m_L_den,N_le_counts\n";
    for (const auto& rec : records_) {
        out << rec.output.to_ascii() << ',' << rec.k_bits << ',' << rec.m_num << ','
            << kraft_den() << ',';
        for (std::size_t i = 0; i < rec.count_by_len.size(); ++i) {
            if (i) out << ';';
            out << rec.n_up_to(static_cast<unsigned>(2 * (i + 1)));
        }
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Exact checks

Rational posterior(const BitString& program, const BitString& x,
                   const EnumerationIndex& index) {
    MicroRun run = run_micro_program(program, index.step_budget());
    if (!run.halted || !(run.output == x))
        throw std::invalid_argument("posterior: program does not emit x within budget");
    if (program.size() > index.max_program_bits())
        throw std::invalid_argument("posterior: program longer than the index budget");
    const OutputRecord* rec = index.find(x);
    if (rec == nullptr) throw std::invalid_argument("posterior: x not indexed");
    std::uint64_t num = std::uint64_t{1}
                        << (index.max_program_bits() - static_cast<unsigned>(program.size()));
    return Rational(num, rec->m_num);
}

CodingConstants coding_constants(const EnumerationIndex& index) {
    if (index.records().empty()) throw std::invalid_argument("coding_constants: empty index");
    CodingConstants cc;
    bool first = true;
    for (const auto& rec : index.records()) {
        // m * 2^K = m_num / 2^(L - K)
        Dyadic v(rec.m_num, static_cast<int>(index.max_program_bits() - rec.k_bits));
        if (first || v < cc.c1) cc.c1 = v;
        if (first || cc.c2 < v) cc.c2 = v;
        first = false;
    }
    return cc;
}

std::vector<TailRow> tail_profile(const BitString& x, const EnumerationIndex& index) {
    const OutputRecord* rec = index.find(x);
    if (rec == nullptr) throw std::invalid_argument("tail_profile: x not indexed");
    CodingConstants cc = coding_constants(index);
    unsigned L = index.max_program_bits();
    std::vector<TailRow> rows;
    for (unsigned k = 0; rec->k_bits + k <= L; ++k) {
        // tail mass scaled by 2^L: sum over lengths >= K + k
        std::uint64_t tail_num = 0;
        for (std::size_t i = 0; i < rec->count_by_len.size(); ++i) {
            unsigned len = static_cast<unsigned>(2 * (i + 1));
            if (len >= rec->k_bits + k)
                tail_num += std::uint64_t{rec->count_by_len[i]} << (L - len);
        }
        TailRow row;
        row.excess = k;
        row.num = tail_num;
        row.den = rec->m_num;
        // tail_num / m_num <= 2 * (c2/c1) * 2^-k, all exact:
        // tail_num * c1num * 2^(c2exp + k) <= 2 * c2num * 2^(c1exp) * m_num
        {
            u128 lhs = static_cast<u128>(tail_num) * cc.c1.num;
            u128 rhs = static_cast<u128>(2) * cc.c2.num * rec->m_num;
            int shift = static_cast<int>(k) + cc.c2.exp - cc.c1.exp;
            if (shift >= 0)
                lhs <<= shift;
            else
                rhs <<= -shift;
            row.within_bound = lhs <= rhs;
        }
        rows.push_back(row);
    }
    return rows;
}

MultiplicityReport multiplicity_check(const EnumerationIndex& index, unsigned r) {
    if (r < 1) throw std::invalid_argument("multiplicity_check: r must be >= 1");
    MultiplicityReport rep;
    rep.r = r;
    unsigned L = index.max_program_bits();
    double log2_l = std::log2(static_cast<double>(L));
    double fitted = -1e300;
    std::uint64_t threshold = std::uint64_t{1} << r;
    for (const auto& rec : index.records()) {
        if (rec.n_total() > rec.m_num) rep.weight_counting_exact = false;
        if (rec.n_total() < threshold) continue;
        ++rep.qualifying;
        double excess = static_cast<double>(rec.k_bits) -
                        (static_cast<double>(L) - static_cast<double>(r));
        fitted = std::max(fitted, excess - log2_l);
        double bound = static_cast<double>(L) - static_cast<double>(r) +
                       rep.reference_c * log2_l + rep.reference_c_prime;
        if (static_cast<double>(rec.k_bits) > bound) ++rep.violations;
    }
    rep.fitted_c_prime = (rep.qualifying == 0) ? 0.0 : fitted;
    return rep;
}

CountingResult counting_check(const EnumerationIndex& index, unsigned n, unsigned k) {
    CountingResult res;
    res.bound = std::uint64_t{1} << (k + 1);
    for (const auto& rec : index.records())
        if (rec.output.size() == n && rec.k_bits <= k) ++res.count;
    res.ok = res.count <= res.bound;
    return res;
}

std::vector<ChanceRow> chance_simplification_sweep(const EnumerationIndex& index,
                                                   const BitString& z) {
    unsigned n = static_cast<unsigned>(z.size());
    if (n == 0 || n > 20)
        throw capacity_error("chance sweep: |z| must be in [1, 20] for the exhaustive sweep");
    // K_L(z xor u) tabulated over every u
    std::vector<unsigned> k_of(std::size_t{1} << n, 0xFFFFFFFFu);
    std::uint64_t z_val = z.to_uint();
    for (const auto& rec : index.records()) {
        if (rec.output.size() != n) continue;
        std::uint64_t u = rec.output.to_uint() ^ z_val;
        k_of[u] = rec.k_bits;
    }
    std::vector<ChanceRow> rows;
    std::uint64_t total = std::uint64_t{1} << n;
    for (unsigned drop = 1; drop <= n; ++drop) {
        unsigned k = n - drop;
        ChanceRow row;
        row.drop = drop;
        row.total = total;
        for (std::uint64_t u = 0; u < total; ++u)
            if (k_of[u] <= k) ++row.count;
        // count / 2^n <= 2^(1-drop)  <=>  count * 2^drop <= 2^(n+1)
        row.within_bound = (static_cast<u128>(row.count) << drop) <= (u128{1} << (n + 1));
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Exhaustive GAR family check

namespace {

std::vector<CausalTransducer> enumerate_family(unsigned code_limit) {
    std::vector<CausalTransducer> family;
    for (std::uint32_t sc = 1;; ++sc) {
        std::size_t base_len = elias_gamma_length(sc) + 1 +
                               std::size_t{2} * sc * (ceil_log2(sc) + 1) + 2;
        if (base_len > code_limit) break;
        std::uint64_t choices = std::uint64_t{2} * sc;  // per entry: next state x output
        std::uint64_t tables = 1;
        for (std::uint32_t e = 0; e < 2 * sc; ++e) {
            tables *= choices;
            if (tables > 65536) throw capacity_error("gar: machine family exceeds budget");
        }
        for (std::uint64_t t = 0; t < tables; ++t) {
            std::uint64_t v = t;
            std::vector<CausalTransducer::Entry> entries(2 * sc);
            for (auto& e : entries) {
                e.next = static_cast<std::uint32_t>(v % sc);
                v /= sc;
                e.out = static_cast<Bit>(v % 2);
                v /= 2;
            }
            family.emplace_back(sc, 0, std::move(entries));
        }
    }
    if (family.empty()) throw capacity_error("gar: no machine fits the code limit");
    return family;
}

}  // namespace

GarReport gar_bound_check(unsigned code_limit, std::size_t horizon, unsigned index_bits,
                          std::uint64_t step_budget) {
    if (code_limit > 12)
        throw std::invalid_argument("gar_bound_check: code_limit must be <= 12");
    if (horizon < 1 || horizon > 12)
        throw std::invalid_argument("gar_bound_check: horizon must be in [1, 12]");
    if (index_bits < 2 * (horizon + 1))
        throw capacity_error("gar_bound_check: index budget cannot cover all readouts");

    GarReport rep;
    rep.code_limit = code_limit;
    rep.horizon = horizon;
    rep.index_bits = index_bits;
    rep.step_budget = step_budget;

    std::vector<CausalTransducer> family = enumerate_family(code_limit);
    rep.machine_count = family.size();
    if (family.size() * family.size() > 1000000)
        throw capacity_error("gar: pair family exceeds budget");

    // behavioral signature = outputs over every input stream of length horizon
    std::vector<unsigned> k_proxy(family.size());
    {
        std::vector<std::string> signature(family.size());
        for (std::size_t i = 0; i < family.size(); ++i) {
            std::string sig;
            for (std::uint64_t in = 0; in < (std::uint64_t{1} << horizon); ++in) {
                BitString input = BitString::from_uint(in, static_cast<unsigned>(horizon));
                sig += open_loop(family[i], input).to_ascii();
                sig += '|';
            }
            signature[i] = std::move(sig);
        }
        for (std::size_t i = 0; i < family.size(); ++i) {
            unsigned best = static_cast<unsigned>(family[i].code().size());
            for (std::size_t j = 0; j < family.size(); ++j)
                if (signature[j] == signature[i])
                    best = std::min(best, static_cast<unsigned>(family[j].code().size()));
            k_proxy[i] = best;
        }
    }

    EnumerationIndex index = EnumerationIndex::build(index_bits, step_budget);
    CausalTransducer off_regulator = null_regulator();

    std::vector<BitString> off_readout(family.size());
    std::vector<unsigned> off_k(family.size());
    for (std::size_t w = 0; w < family.size(); ++w) {
        off_readout[w] = run_coupled(family[w], off_regulator, horizon).world_readout;
        const OutputRecord* rec = index.find(off_readout[w]);
        if (rec == nullptr) throw capacity_error("gar: OFF readout not covered by index");
        off_k[w] = rec->k_bits;
    }

    struct RawPair {
        std::size_t w, r;
        BitString x;
        unsigned a, b;
        int m, delta;
        std::uint64_t weight;  // 2^(2*code_limit - |W| - |R|)
    };
    std::vector<RawPair> raw;
    raw.reserve(family.size() * family.size());
    std::unordered_map<BitString, std::uint64_t, BitStringHash> weight_given_x;
    for (std::size_t w = 0; w < family.size(); ++w) {
        for (std::size_t r = 0; r < family.size(); ++r) {
            RawPair p;
            p.w = w;
            p.r = r;
            p.x = run_coupled(family[w], family[r], horizon).world_readout;
            const OutputRecord* rec = index.find(p.x);
            if (rec == nullptr) throw capacity_error("gar: ON readout not covered by index");
            p.a = rec->k_bits;
            p.b = off_k[w];
            p.delta = static_cast<int>(p.b) - static_cast<int>(p.a);
            unsigned k_pair = k_proxy[w] + k_proxy[r];  // minimal pairing code
            p.m = static_cast<int>(k_proxy[w]) + static_cast<int>(k_proxy[r]) -
                  static_cast<int>(k_pair);
            unsigned spare = 2 * code_limit -
                             static_cast<unsigned>(family[w].code().size()) -
                             static_cast<unsigned>(family[r].code().size());
            p.weight = std::uint64_t{1} << spare;
            weight_given_x[p.x] += p.weight;
            raw.push_back(std::move(p));
        }
    }

    // posterior and the single family-wide constant C
    Rational c_best(0, 1);
    for (const auto& p : raw) {
        GarPairResult out;
        out.world_id = p.w;
        out.regulator_id = p.r;
        out.on_readout = p.x;
        out.off_readout = off_readout[p.w];
        out.a_bits = p.a;
        out.b_bits = p.b;
        out.delta_bits = p.delta;
        out.k_world = k_proxy[p.w];
        out.k_regulator = k_proxy[p.r];
        out.k_pair = k_proxy[p.w] + k_proxy[p.r];
        out.m_bits = p.m;
        out.posterior = Rational(p.weight, weight_given_x[p.x]);
        // ratio = posterior * 2^(delta - m)
        int shift = p.delta - p.m;
        Rational ratio = (shift >= 0)
                             ? Rational(out.posterior.num << shift, out.posterior.den)
                             : Rational(out.posterior.num, out.posterior.den << -shift);
        if (c_best < ratio) c_best = ratio;
        rep.pairs.push_back(std::move(out));
    }
    rep.c_constant = c_best;

    // tail P{ M <= delta - k | x, E_b } <= C' 2^-k over (x, b) groups
    Rational c_tail(0, 1);
    std::map<std::pair<std::string, unsigned>, std::vector<const RawPair*>> groups;
    for (const auto& p : raw) groups[{p.x.to_ascii(), p.b}].push_back(&p);
    for (const auto& [key, members] : groups) {
        std::uint64_t total = 0;
        int delta = members.front()->delta;
        int m_min = members.front()->m;
        for (const auto* p : members) {
            total += p->weight;
            m_min = std::min(m_min, p->m);
        }
        for (int k = 0; delta - k >= m_min; ++k) {
            std::uint64_t mass = 0;
            for (const auto* p : members)
                if (p->m <= delta - k) mass += p->weight;
            if (mass == 0) break;
            Rational t(mass << k, total);  // tail(k) * 2^k
            if (c_tail < t) c_tail = t;
        }
    }
    rep.c_tail_constant = c_tail;
    return rep;
}

std::string GarReport::to_csv() const {
    std::ostringstream out;
    out << "world,regulator,x,a,b,delta,m,posterior_num,posterior_den\n";
    for (const auto& p : pairs)
        out << p.world_id << ',' << p.regulator_id << ',' << p.on_readout.to_ascii() << ','
            << p.a_bits << ',' << p.b_bits << ',' << p.delta_bits << ',' << p.m_bits << ','
            << p.posterior.num << ',' << p.posterior.den << '\n';
    return out.str();
}

}  // namespace agar
