#include "agar/ctm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "agar/micro.hpp"

namespace agar {

namespace {

constexpr double kFixedScale = 16777216.0;  // 2^24

}  // namespace

CtmTable::CtmTable(unsigned block_bits, unsigned source_max_bits, std::uint64_t source_steps,
                   std::vector<Entry> entries)
    : block_bits_(block_bits),
      source_max_bits_(source_max_bits),
      source_steps_(source_steps),
      entries_(std::move(entries)) {
    if (block_bits_ < 1 || block_bits_ > 12)
        throw std::invalid_argument("CtmTable: block length must be in [1, 12]");
    if (!std::is_sorted(entries_.begin(), entries_.end(),
                        [](const Entry& a, const Entry& b) { return a.block < b.block; }))
        throw std::invalid_argument("CtmTable: entries must be sorted by block");
}

double CtmTable::coverage() const {
    return static_cast<double>(entries_.size()) /
           static_cast<double>(std::uint64_t{1} << block_bits_);
}

std::optional<double> CtmTable::lookup(std::uint32_t block) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), block,
                               [](const Entry& e, std::uint32_t key) { return e.block < key; });
    if (it == entries_.end() || it->block != block) return std::nullopt;
    return static_cast<double>(it->k_fixed) / kFixedScale;
}

double CtmTable::fallback_bits() const {
    return static_cast<double>(block_bits_) +
           2.0 * std::log2(static_cast<double>(block_bits_));
}

double CtmTable::k_or_fallback(std::uint32_t block) const {
    auto v = lookup(block);
    return v ? *v : fallback_bits();
}

CtmTable build_ctm_table(unsigned block_bits, unsigned max_program_bits,
                         std::uint64_t step_budget, unsigned threads) {
    if (block_bits < 1 || block_bits > 12)
        throw std::invalid_argument("build_ctm_table: block length must be in [1, 12]");
    if (max_program_bits > 22)
        throw std::invalid_argument("build_ctm_table: max program length must be <= 22");

    EnumerationIndex index = EnumerationIndex::build(max_program_bits, step_budget, threads);
    std::uint64_t total = 0;
    std::vector<std::pair<std::uint32_t, std::uint64_t>> blocks;
    for (const auto& rec : index.records()) {
        if (rec.output.size() != block_bits) continue;
        blocks.emplace_back(static_cast<std::uint32_t>(rec.output.to_uint()), rec.m_num);
        total += rec.m_num;
    }
    if (blocks.empty())
        throw std::runtime_error("build_ctm_table: no program emits any block of this length");
    std::sort(blocks.begin(), blocks.end());

    std::vector<CtmTable::Entry> entries;
    entries.reserve(blocks.size());
    double log2_total = std::log2(static_cast<double>(total));
    for (auto [block, m_num] : blocks) {
        double k = log2_total - std::log2(static_cast<double>(m_num));
        CtmTable::Entry e;
        e.block = block;
        e.k_fixed = static_cast<std::uint32_t>(std::llround(k * kFixedScale));
        entries.push_back(e);
    }
    return CtmTable(block_bits, max_program_bits, step_budget, std::move(entries));
}

CodeLengthReport bdm(const BitString& x, const CtmTable& table) {
    unsigned b = table.block_bits();
    if (x.size() < b)
        throw std::invalid_argument("bdm: input shorter than one block");
    std::size_t blocks = x.size() / b;
    std::size_t dropped = x.size() - blocks * b;

    std::map<std::uint32_t, std::uint64_t> multiplicity;
    for (std::size_t i = 0; i < blocks; ++i) {
        std::uint32_t v = 0;
        for (unsigned j = 0; j < b; ++j) v = (v << 1) | x[i * b + j];
        ++multiplicity[v];
    }

    double bits = 0.0;
    std::size_t missing = 0;
    for (const auto& [block, count] : multiplicity) {
        auto k = table.lookup(block);
        if (!k) ++missing;
        bits += (k ? *k : table.fallback_bits()) + std::log2(static_cast<double>(count));
    }

    CodeLengthReport rep;
    rep.estimator = EstimatorId::bdm;
    rep.input_length = x.size();
    rep.bits_x64 = std::max<std::int64_t>(0, x64_ceil(bits));
    rep.params["b"] = std::to_string(b);
    rep.params["L"] = std::to_string(table.source_max_bits());
    rep.params["S"] = std::to_string(table.source_steps());
    rep.params["policy"] = "drop-remainder";
    rep.params["dropped_symbols"] = std::to_string(dropped);
    rep.params["missing_blocks"] = std::to_string(missing);
    return rep;
}

// ---------------------------------------------------------------------------
// File format

namespace {

void put_u32(std::vector<std::uint8_t>& v, std::uint32_t x) {
    for (int i = 0; i < 4; ++i) v.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& v, std::uint64_t x) {
    for (int i = 0; i < 8; ++i) v.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

constexpr char kCtmMagic[8] = {'A', 'G', 'A', 'R', 'C', 'T', 'M', '1'};

}  // namespace

std::vector<std::uint8_t> CtmTable::to_bytes() const {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kCtmMagic, kCtmMagic + 8);
    std::string ophash = micro_opcode_hash();
    out.insert(out.end(), ophash.begin(), ophash.end());
    put_u32(out, block_bits_);
    put_u32(out, source_max_bits_);
    put_u64(out, source_steps_);
    put_u64(out, entries_.size());
    for (const auto& e : entries_) {
        // block padded to whole bytes, MSB-first, then the fixed-point value
        BitString bs = BitString::from_uint(e.block, block_bits_);
        auto packed = bs.packed_bytes();
        out.insert(out.end(), packed.begin(), packed.end());
        put_u32(out, e.k_fixed);
    }
    return out;
}

CtmTable CtmTable::from_bytes(const std::vector<std::uint8_t>& bytes) {
    std::size_t pos = 0;
    auto u8 = [&]() {
        if (pos >= bytes.size()) throw std::invalid_argument("ctm file truncated");
        return bytes[pos++];
    };
    auto u32 = [&]() {
        std::uint32_t x = 0;
        for (int i = 0; i < 4; ++i) x |= std::uint32_t{u8()} << (8 * i);
        return x;
    };
    auto u64 = [&]() {
        std::uint64_t x = 0;
        for (int i = 0; i < 8; ++i) x |= std::uint64_t{u8()} << (8 * i);
        return x;
    };
    for (char c : kCtmMagic)
        if (u8() != static_cast<std::uint8_t>(c))
            throw std::invalid_argument("ctm file: bad magic");
    std::string ophash(16, ' ');
    for (auto& c : ophash) c = static_cast<char>(u8());
    if (ophash != micro_opcode_hash())
        throw std::invalid_argument("ctm file: opcode-set hash mismatch");
    unsigned b = u32();
    unsigned L = u32();
    std::uint64_t S = u64();
    std::uint64_t count = u64();
    std::vector<Entry> entries;
    entries.reserve(count);
    std::size_t block_bytes = (b + 7) / 8;
    for (std::uint64_t i = 0; i < count; ++i) {
        if (pos + block_bytes > bytes.size())
            throw std::invalid_argument("ctm file truncated");
        BitString bs = BitString::from_packed(bytes.data() + pos, b);
        pos += block_bytes;
        Entry e;
        e.block = static_cast<std::uint32_t>(bs.to_uint());
        e.k_fixed = u32();
        entries.push_back(e);
    }
    return CtmTable(b, L, S, std::move(entries));
}

std::string CtmTable::to_csv() const {
    std::ostringstream out;
    out << "block,K_ctm_bits\n";
    out.precision(9);
    for (const auto& e : entries_)
        out << BitString::from_uint(e.block, block_bits_).to_ascii() << ','
            << static_cast<double>(e.k_fixed) / kFixedScale << '\n';
    return out.str();
}

Codelength make_estimator_with_tables(const EstimatorSpec& spec,
                                      const CtmTableProvider& provider) {
    if (spec.id != EstimatorId::bdm) return make_estimator(spec);
    auto get = [&](const std::string& key, std::uint64_t fallback) {
        auto it = spec.params.find(key);
        return it == spec.params.end() ? fallback : std::stoull(it->second);
    };
    unsigned b = static_cast<unsigned>(get("b", 4));
    unsigned L = static_cast<unsigned>(get("L", 14));
    std::uint64_t S = get("S", 10000);
    std::shared_ptr<const CtmTable> table = provider(b, L, S);
    return [table](const BitString& x) { return bdm(x, *table); };
}

}  // namespace agar
