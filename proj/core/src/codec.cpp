#include "agar/codec.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "json.hpp"

namespace agar {

using ordered_json = nlohmann::ordered_json;

std::string estimator_name(EstimatorId id) {
    switch (id) {
        case EstimatorId::lz78: return "lz78";
        case EstimatorId::lzw: return "lzw";
        case EstimatorId::mixture: return "mixture";
        case EstimatorId::bdm: return "bdm";
        case EstimatorId::external: return "external";
    }
    throw std::logic_error("estimator_name: bad id");
}

EstimatorId estimator_from_name(const std::string& name) {
    if (name == "lz78") return EstimatorId::lz78;
    if (name == "lzw") return EstimatorId::lzw;
    if (name == "mixture") return EstimatorId::mixture;
    if (name == "bdm") return EstimatorId::bdm;
    if (name == "external") return EstimatorId::external;
    throw std::invalid_argument("unknown estimator: " + name);
}

std::string CodeLengthReport::to_json() const {
    ordered_json j;
    j["estimator"] = estimator_name(estimator);
    j["n"] = input_length;
    j["bits_x64"] = bits_x64;
    ordered_json p = ordered_json::object();
    for (const auto& [k, v] : params) p[k] = v;
    j["params"] = p;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// LZ78

namespace {

struct Trie {
    // child[2*node + bit] = node id or 0 (root has id 0 and is never a child)
    std::vector<std::uint32_t> child{0, 0};

    std::uint32_t get(std::uint32_t node, Bit b) const { return child[2 * node + b]; }

    void add(std::uint32_t node, Bit b, std::uint32_t id) {
        child[2 * node + b] = id;
        child.push_back(0);
        child.push_back(0);
    }
};

}  // namespace

BitString lz78_encode(const BitString& x) {
    BitString out;
    append_elias_gamma(out, x.size() + 1);
    Trie trie;
    std::uint32_t next_phrase = 1;
    std::size_t pos = 0;
    while (pos < x.size()) {
        std::uint32_t node = 0;
        while (pos < x.size() && trie.get(node, x[pos]) != 0) {
            node = trie.get(node, x[pos]);
            ++pos;
        }
        unsigned width = ceil_log2(next_phrase);
        out.append_uint(node, width);
        if (pos < x.size()) {
            Bit lit = x[pos++];
            out.push_back(lit);
            trie.add(node, lit, next_phrase++);
        }
        // else: input ended inside an existing phrase; index-only emission
    }
    return out;
}

BitString lz78_decode(const BitString& stream) {
    BitReader r(stream);
    std::uint64_t n = r.read_elias_gamma() - 1;
    std::vector<std::pair<std::uint32_t, Bit>> phrase;  // (parent, literal), 1-based
    std::vector<std::uint32_t> length{0};
    auto emit_phrase = [&](std::uint32_t id, BitString& out) {
        std::string tmp;
        for (std::uint32_t p = id; p != 0; p = phrase[p - 1].first)
            tmp.push_back(phrase[p - 1].second ? '1' : '0');
        for (auto it = tmp.rbegin(); it != tmp.rend(); ++it) out.push_back(*it == '1');
    };
    BitString out;
    std::uint32_t next_phrase = 1;
    while (out.size() < n) {
        unsigned width = ceil_log2(next_phrase);
        auto idx = static_cast<std::uint32_t>(r.read_uint(width));
        if (idx >= next_phrase) throw std::invalid_argument("lz78_decode: bad phrase index");
        if (out.size() + length[idx] == n) {
            emit_phrase(idx, out);
            break;
        }
        if (out.size() + length[idx] + 1 > n)
            throw std::invalid_argument("lz78_decode: phrase overruns length header");
        Bit lit = r.read();
        emit_phrase(idx, out);
        out.push_back(lit);
        phrase.emplace_back(idx, lit);
        length.push_back(length[idx] + 1);
        ++next_phrase;
    }
    return out;
}

CodeLengthReport lz78_codelength(const BitString& x) {
    CodeLengthReport rep;
    rep.estimator = EstimatorId::lz78;
    rep.input_length = x.size();
    rep.bits_x64 = x64_from_bits(lz78_encode(x).size());
    return rep;
}

// ---------------------------------------------------------------------------
// LZW

BitString lzw_encode(const BitString& x) {
    BitString out;
    append_elias_gamma(out, x.size() + 1);
    // entries 1 and 2 are the single-symbol strings "0" and "1"; emitted
    // codes are entry-1 so the initial dictionary is {0, 1}
    Trie trie;
    trie.add(0, 0, 1);
    trie.add(0, 1, 2);
    std::uint32_t next_code = 3;  // internal node ids; dictionary size = next_code - 1
    std::size_t pos = 0;
    while (pos < x.size()) {
        std::uint32_t node = trie.get(0, x[pos]);
        std::size_t consumed = 1;
        while (pos + consumed < x.size() && trie.get(node, x[pos + consumed]) != 0) {
            node = trie.get(node, x[pos + consumed]);
            ++consumed;
        }
        out.append_uint(node - 1, ceil_log2(next_code - 1));
        if (pos + consumed < x.size()) {
            trie.add(node, x[pos + consumed], next_code);
            ++next_code;
        }
        pos += consumed;
    }
    return out;
}

BitString lzw_decode(const BitString& stream) {
    BitReader r(stream);
    std::uint64_t n = r.read_elias_gamma() - 1;
    std::vector<std::string> dict{"0", "1"};
    BitString out;
    std::string prev;
    while (out.size() < n) {
        unsigned width = ceil_log2(dict.size() + (prev.empty() ? 0 : 1));
        auto code = static_cast<std::uint32_t>(r.read_uint(width));
        std::string cur;
        if (code < dict.size())
            cur = dict[code];
        else if (code == dict.size() && !prev.empty())
            cur = prev + prev[0];  // pending-entry case
        else
            throw std::invalid_argument("lzw_decode: bad code");
        if (!prev.empty()) dict.push_back(prev + cur[0]);
        if (out.size() + cur.size() > n)
            throw std::invalid_argument("lzw_decode: output overruns length header");
        for (char c : cur) out.push_back(c == '1');
        prev = cur;
    }
    return out;
}

CodeLengthReport lzw_codelength(const BitString& x) {
    CodeLengthReport rep;
    rep.estimator = EstimatorId::lzw;
    rep.input_length = x.size();
    rep.bits_x64 = x64_from_bits(lzw_encode(x).size());
    return rep;
}

// ---------------------------------------------------------------------------
// KT Markov mixture

void MixtureModelClass::validate() const {
    if (max_order > 12)
        throw std::invalid_argument("MixtureModelClass: max_order must be <= 12");
}

double MixtureModelClass::prior_log2(unsigned order) const {
    if (order > max_order) throw std::invalid_argument("prior_log2: order out of class");
    if (order == max_order) return -static_cast<double>(max_order == 0 ? 0 : max_order);
    return -(static_cast<double>(order) + 1.0);
}

namespace {

/* Shared scan driving all orders at once; ctx_d = last d symbols. */
std::vector<double> kt_all_orders_bits(const BitString& x, unsigned max_order) {
    std::vector<std::vector<std::array<std::uint32_t, 2>>> counts(max_order + 1);
    for (unsigned d = 0; d <= max_order; ++d)
        counts[d].assign(std::size_t{1} << d, {0, 0});
    std::vector<double> neg_log2(max_order + 1, 0.0);
    std::uint32_t history = 0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        Bit b = x[t];
        for (unsigned d = 0; d <= max_order; ++d) {
            std::uint32_t ctx = history & ((std::uint32_t{1} << d) - 1);
            auto& c = counts[d][ctx];
            double p = (c[b] + 0.5) / (c[0] + c[1] + 1.0);
            neg_log2[d] -= std::log2(p);
            ++c[b];
        }
        history = (history << 1) | b;
    }
    return neg_log2;
}

}  // namespace

double kt_markov_bits(const BitString& x, unsigned order) {
    if (order > 12) throw std::invalid_argument("kt_markov_bits: order must be <= 12");
    return kt_all_orders_bits(x, order)[order];
}

CodeLengthReport mixture_codelength(const BitString& x, const MixtureModelClass& cls) {
    cls.validate();
    std::vector<double> neg_log2 = kt_all_orders_bits(x, cls.max_order);
    // -log2 sum_d pi(d) P_d(x), stabilized around the best term
    double best = -1e300;
    std::vector<double> weighted(cls.max_order + 1);
    for (unsigned d = 0; d <= cls.max_order; ++d) {
        weighted[d] = cls.prior_log2(d) - neg_log2[d];
        best = std::max(best, weighted[d]);
    }
    double acc = 0.0;
    for (double w : weighted) acc += std::exp2(w - best);
    double bits = -(best + std::log2(acc));

    CodeLengthReport rep;
    rep.estimator = EstimatorId::mixture;
    rep.input_length = x.size();
    rep.bits_x64 = std::max<std::int64_t>(0, x64_ceil(bits));
    rep.params["max_order"] = std::to_string(cls.max_order);
    return rep;
}

// ---------------------------------------------------------------------------
// Estimator registry

EstimatorSpec EstimatorSpec::parse(const std::string& text) {
    EstimatorSpec spec;
    auto open = text.find('(');
    std::string name = (open == std::string::npos) ? text : text.substr(0, open);
    spec.id = estimator_from_name(name);
    if (open != std::string::npos) {
        if (text.back() != ')')
            throw std::invalid_argument("estimator spec: missing ')' in " + text);
        std::string body = text.substr(open + 1, text.size() - open - 2);
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            auto eq = item.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("estimator spec: expected key=value in " + text);
            spec.params[item.substr(0, eq)] = item.substr(eq + 1);
        }
    }
    return spec;
}

std::string EstimatorSpec::canonical() const {
    std::string out = estimator_name(id);
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

Codelength make_estimator(const EstimatorSpec& spec) {
    switch (spec.id) {
        case EstimatorId::lz78:
            return [](const BitString& x) { return lz78_codelength(x); };
        case EstimatorId::lzw:
            return [](const BitString& x) { return lzw_codelength(x); };
        case EstimatorId::mixture: {
            MixtureModelClass cls;
            auto it = spec.params.find("max_order");
            if (it != spec.params.end()) cls.max_order = std::stoul(it->second);
            cls.validate();
            return [cls](const BitString& x) { return mixture_codelength(x, cls); };
        }
        case EstimatorId::external: {
            auto it = spec.params.find("command");
            if (it == spec.params.end())
                throw std::invalid_argument("external estimator needs command=...");
            std::string cmd = it->second;
            return [cmd](const BitString& x) { return external_codelength(x, cmd); };
        }
        case EstimatorId::bdm:
            throw std::invalid_argument(
                "bdm estimator needs a CTM table; build it via make_estimator_with_tables");
    }
    throw std::logic_error("make_estimator: bad id");
}

// ---------------------------------------------------------------------------
// NCD, joint codelength, mutual information

namespace {

BitString concat(const BitString& a, const BitString& b) {
    BitString out = a;
    out.append(b);
    return out;
}

}  // namespace

double ncd(const BitString& x, const BitString& y, const Codelength& estimator) {
    if (x.empty() || y.empty()) throw std::invalid_argument("ncd: inputs must be nonempty");
    std::int64_t cx = estimator(x).bits_x64;
    std::int64_t cy = estimator(y).bits_x64;
    std::int64_t cxy = std::min(estimator(concat(x, y)).bits_x64,
                                estimator(concat(y, x)).bits_x64);
    std::int64_t den = std::max(cx, cy);
    if (den == 0) throw std::domain_error("ncd: degenerate input, both codelengths are zero");
    return static_cast<double>(cxy - std::min(cx, cy)) / static_cast<double>(den);
}

std::string joint_mode_name(JointMode mode) {
    return mode == JointMode::interleave ? "interleave" : "concat";
}

JointMode joint_mode_from_name(const std::string& name) {
    if (name == "interleave") return JointMode::interleave;
    if (name == "concat") return JointMode::concat;
    throw std::invalid_argument("unknown joint mode: " + name);
}

BitString interleave_proportional(const BitString& x, const BitString& y) {
    BitString out;
    std::size_t ax = 0, ay = 0;
    while (ax < x.size() || ay < y.size()) {
        bool take_x;
        if (ax == x.size())
            take_x = false;
        else if (ay == y.size())
            take_x = true;
        else
            take_x = ax * y.size() <= ay * x.size();
        if (take_x)
            out.push_back(x[ax++]);
        else
            out.push_back(y[ay++]);
    }
    return out;
}

CodeLengthReport joint_codelength(const BitString& x, const BitString& y,
                                  const Codelength& estimator, JointMode mode) {
    auto pair_string = [&](const BitString& a, const BitString& b) {
        return mode == JointMode::interleave ? interleave_proportional(a, b) : concat(a, b);
    };
    CodeLengthReport xy = estimator(pair_string(x, y));
    CodeLengthReport yx = estimator(pair_string(y, x));
    CodeLengthReport rep = (xy.bits_x64 <= yx.bits_x64) ? xy : yx;
    rep.params["joint"] = joint_mode_name(mode);
    rep.params["order"] = (xy.bits_x64 <= yx.bits_x64) ? "xy" : "yx";
    rep.bits_x64 += kX64;  // orientation flag bit in the header
    rep.input_length = x.size() + y.size();
    return rep;
}

std::int64_t mutual_info_x64(const BitString& x, const BitString& y,
                             const Codelength& estimator, JointMode mode) {
    if (x.empty() || y.empty())
        throw std::invalid_argument("mutual_info: inputs must be nonempty");
    std::int64_t cx = estimator(x).bits_x64;
    std::int64_t cy = estimator(y).bits_x64;
    std::int64_t cj = joint_codelength(x, y, estimator, mode).bits_x64;
    return cx + cy - cj;
}

// ---------------------------------------------------------------------------
// Quantizer and Gaussian rate

std::uint32_t quantize_value(double v, unsigned bits, double lo, double hi) {
    if (std::isnan(v)) throw std::invalid_argument("quantize: NaN sample");
    if (!(lo < hi)) throw std::invalid_argument("quantize: need lo < hi");
    if (bits < 1 || bits > 16) throw std::invalid_argument("quantize: bits must be in [1,16]");
    double levels = static_cast<double>(std::uint32_t{1} << bits);
    double u = std::floor((v - lo) / (hi - lo) * levels);
    if (u < 0.0) u = 0.0;
    if (u > levels - 1.0) u = levels - 1.0;
    return static_cast<std::uint32_t>(u);
}

std::vector<std::uint32_t> quantize_codes(const std::vector<double>& signal, unsigned bits,
                                          double lo, double hi) {
    std::vector<std::uint32_t> out;
    out.reserve(signal.size());
    for (double v : signal) out.push_back(quantize_value(v, bits, lo, hi));
    return out;
}

BitString quantize(const std::vector<double>& signal, unsigned bits, double lo, double hi) {
    BitString out;
    for (double v : signal) out.append_uint(quantize_value(v, bits, lo, hi), bits);
    return out;
}

double gaussian_entropy_rate(double sigma) {
    if (!(sigma > 0.0)) throw std::domain_error("gaussian_entropy_rate: sigma must be > 0");
    const double two_pi_e = 2.0 * 3.14159265358979323846 * 2.71828182845904523536;
    return 0.5 * std::log2(two_pi_e * sigma * sigma);
}

// ---------------------------------------------------------------------------
// External compressor adapter

namespace {

/* Best-effort provenance: first line of `command --version`. */
std::string external_version_string(const std::string& command) {
    std::string cmd = command + " --version 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) return "unknown";
    char buf[256] = {0};
    std::string line;
    if (std::fgets(buf, sizeof buf, pipe) != nullptr) {
        line = buf;
        while (!line.empty() && (line.back() == '\n' || line.back() == '\r'))
            line.pop_back();
    }
    pclose(pipe);
    return line.empty() ? "unknown" : line;
}

}  // namespace

CodeLengthReport external_codelength(const BitString& x, const std::string& command) {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path();
    auto tag = std::to_string(static_cast<unsigned long>(::getpid())) + "_" +
               std::to_string(x.hash());
    fs::path in = dir / ("agar_ext_in_" + tag);
    fs::path out = dir / ("agar_ext_out_" + tag);
    {
        std::ofstream f(in, std::ios::binary);
        auto bytes = x.packed_bytes();
        f.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
    }
    std::string shell = command + " < " + in.string() + " > " + out.string();
    int rc = std::system(shell.c_str());
    std::uintmax_t out_size = fs::exists(out) ? fs::file_size(out) : 0;
    fs::remove(in);
    fs::remove(out);
    if (rc != 0) throw std::runtime_error("external compressor failed: " + command);

    CodeLengthReport rep;
    rep.estimator = EstimatorId::external;
    rep.input_length = x.size();
    rep.bits_x64 = x64_from_bits(8 * out_size);
    rep.params["command"] = command;
    rep.params["command_version"] = external_version_string(command);
    rep.params["adapter"] = "stdin-stdout, codelength = 8 x output bytes";
    return rep;
}

}  // namespace agar
