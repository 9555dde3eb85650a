#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "agar/bits.hpp"

namespace agar {

enum class EstimatorId { lz78, lzw, mixture, bdm, external };

std::string estimator_name(EstimatorId id);
EstimatorId estimator_from_name(const std::string& name);

/* Codelengths are carried as integers in 1/64-bit units so that gap
 * arithmetic stays exact. lz78/lzw lengths are whole bits by
 * construction; mixture/bdm lengths are rounded up to the grid, which
 * keeps every reported value a valid upper bound. */
constexpr std::int64_t kX64 = 64;

inline std::int64_t x64_from_bits(std::uint64_t whole_bits) {
    return static_cast<std::int64_t>(whole_bits) * kX64;
}

inline std::int64_t x64_ceil(double bits) {
    return static_cast<std::int64_t>(std::ceil(bits * static_cast<double>(kX64)));
}

inline double x64_to_double(std::int64_t v) { return static_cast<double>(v) / kX64; }

struct CodeLengthReport {
    EstimatorId estimator = EstimatorId::lz78;
    std::size_t input_length = 0;
    std::int64_t bits_x64 = 0;
    std::map<std::string, std::string> params;

    double bits() const { return x64_to_double(bits_x64); }
    std::string to_json() const;
};

/* LZ78 incremental parse. Phrase i costs ceil_log2(i) prefix-index bits
 * plus one literal bit; a trailing incomplete phrase costs its index
 * only (the length header lets the decoder stop). Header is the Elias
 * gamma code of |x|+1, so empty input costs exactly one bit. */
BitString lz78_encode(const BitString& x);
BitString lz78_decode(const BitString& stream);
CodeLengthReport lz78_codelength(const BitString& x);

/* LZW with initial dictionary {0,1}; each index costs
 * ceil_log2(dictionary size at emission time) bits; same length header. */
BitString lzw_encode(const BitString& x);
BitString lzw_decode(const BitString& stream);
CodeLengthReport lzw_codelength(const BitString& x);

/* Bayes mixture over KT (add-1/2) Markov predictors of orders 0..D with
 * prior pi(d) = 2^-(d+1), remainder mass folded onto order D. */
struct MixtureModelClass {
    unsigned max_order = 8;

    void validate() const;
    double prior_log2(unsigned order) const;
};

/* Ideal codelength -log2 P_d(x) of the single order-d KT predictor;
 * history before the first symbol is taken as zeros. */
double kt_markov_bits(const BitString& x, unsigned order);

CodeLengthReport mixture_codelength(const BitString& x, const MixtureModelClass& cls);

using Codelength = std::function<CodeLengthReport(const BitString&)>;

struct EstimatorSpec {
    EstimatorId id = EstimatorId::lz78;
    std::map<std::string, std::string> params;

    static EstimatorSpec parse(const std::string& text);
    std::string canonical() const;
};

/* Factory for the table-free estimators; bdm needs a CTM table and is
 * wired up in ctm.hpp. */
Codelength make_estimator(const EstimatorSpec& spec);

/* NCD over plain concatenation, C(xy) minimized over both orders. */
double ncd(const BitString& x, const BitString& y, const Codelength& estimator);

/* Pairing convention for the joint codelength C(x,y). Interleaving
 * paces the two strings proportionally so positionwise dependence is
 * visible to sequential estimators; concat is the naive alternative.
 * Both add a single orientation flag bit and take the cheaper of the
 * two orientations. The choice is recorded in the report. */
enum class JointMode { interleave, concat };

std::string joint_mode_name(JointMode mode);
JointMode joint_mode_from_name(const std::string& name);

BitString interleave_proportional(const BitString& x, const BitString& y);

CodeLengthReport joint_codelength(const BitString& x, const BitString& y,
                                  const Codelength& estimator, JointMode mode);

/* M-hat = C(x) + C(y) - C(x,y), signed; estimator noise can push it
 * negative and it is reported as-is. */
std::int64_t mutual_info_x64(const BitString& x, const BitString& y,
                             const Codelength& estimator,
                             JointMode mode = JointMode::interleave);

inline double mutual_info_estimate(const BitString& x, const BitString& y,
                                   const Codelength& estimator,
                                   JointMode mode = JointMode::interleave) {
    return x64_to_double(mutual_info_x64(x, y, estimator, mode));
}

/* Uniform quantizer: 2^bits levels over [lo, hi), clamp outside,
 * offset-binary codes, MSB-first flattening. */
std::uint32_t quantize_value(double v, unsigned bits, double lo, double hi);
std::vector<std::uint32_t> quantize_codes(const std::vector<double>& signal, unsigned bits,
                                          double lo, double hi);
BitString quantize(const std::vector<double>& signal, unsigned bits, double lo, double hi);

/* h = 1/2 log2(2 pi e sigma^2) bits per sample. */
double gaussian_entropy_rate(double sigma);

/* Optional adapter around a host compressor command reading stdin and
 * writing stdout; codelength is 8x the output byte count. Off the hot
 * path and never used by default configs. */
CodeLengthReport external_codelength(const BitString& x, const std::string& command);

}  // namespace agar
