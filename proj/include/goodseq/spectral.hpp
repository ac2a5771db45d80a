#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "goodseq/angle.hpp"
#include "goodseq/lacunary.hpp"
#include "goodseq/real.hpp"

// The spectral limit function L(theta) = lim_k prod_{j<k} (1+2cos(2pi m_j
// theta))/3, finite-N Cesaro averages of e^{2pi i s_n theta} by direct
// summation and by the block decomposition of the partial sum, and circle
// subgroup diagnostics.

namespace goodseq::spectral {

using lacunary::ModulusSequence;
using modone::Angle;

enum class SpectralClass {
    ZeroExact,                 // some factor is exactly 0 (rational arithmetic)
    ZeroByNonpositiveFactors,  // nonpositive factors seen, |L_k| below tolerance
    PositiveConverged,         // all factors in (0,1], tail certified
    Truncated,                 // horizon reached without certification
};

std::string to_string(SpectralClass c);

struct SpectralValue {
    double value = 0.0;
    SpectralClass cls = SpectralClass::Truncated;
    int truncation_k = 0;   // index k of the last computed partial product L_k
    double tail_bound = 0;  // certified bound on |L - value| (inf if none)
};

struct LimitPolicy {
    int k_max = 64;
    double tail_tol = 1e-12;
    mpfr_prec_t prec = 256;
};

// Certified upper bound on sum_{j >= j_from} ||m_j theta||^2, or nullopt when
// no bound is available from j_from on.
using TailMajorant = std::function<std::optional<BigRat>(long j_from)>;

// L_1..L_K (L_1 = 1 is the empty product).
std::vector<Real> partial_products(const ModulusSequence& m, const Angle& theta, int K,
                                   mpfr_prec_t prec = Real::kDefaultPrec);

SpectralValue limit_L(const ModulusSequence& m, const Angle& theta, const LimitPolicy& policy,
                      const TailMajorant* majorant = nullptr);

enum class AvgMethod { Direct, Block };

struct CesaroEstimate {
    long long n = 0;
    Complex sum;
    Complex average;
    AvgMethod method = AvgMethod::Direct;
    double err = 0.0;  // bound on |average - true value|
};

struct EvalPolicy {
    mpfr_prec_t prec = 256;
    // Rational angles with denominator at most this use the exact
    // residue-count path; the two averaging routes then agree bit for bit.
    unsigned long dense_q_limit = 1ul << 20;
};

CesaroEstimate direct_average(const ModulusSequence& m, const Angle& theta, long long N,
                              const EvalPolicy& policy = {});
CesaroEstimate block_average(const ModulusSequence& m, const Angle& theta, long long N,
                             const EvalPolicy& policy = {});

struct H2Report {
    int k = 0;
    std::vector<double> partial_sums;  // sum_{j<=i} ||m_j theta||^2
    BigRat total_exact;
    bool apparently_bounded = false;
    double flag_value = 0.0;  // extrapolated bound, or per-step slope
};

H2Report h2_diagnostic(const ModulusSequence& m, const Angle& theta, int K,
                       double flat_tol = 1e-9);

struct ScanRow {
    Angle theta;
    std::string repr;
    std::optional<SpectralValue> value;
    std::optional<CesaroEstimate> avg;
    bool block_checked = false;
    bool block_matches = true;
    std::optional<std::string> error;
};

struct ScanPolicy {
    LimitPolicy limit;
    EvalPolicy eval;
    std::optional<long long> navg;  // also compute direct averages at this N
    bool check_blocks = false;
    int threads = 0;  // 0: GOODSEQ_THREADS env or hardware default
};

// One row per angle, in input order regardless of thread count. Per-row
// failures are captured in the row; the scan continues.
std::vector<ScanRow> spectrum_scan(const ModulusSequence& m, const std::vector<Angle>& angles,
                                   const ScanPolicy& policy,
                                   const std::vector<TailMajorant>* majorants = nullptr);

// Effective worker count: `requested`, else GOODSEQ_THREADS, else hardware.
int thread_count(int requested);

}  // namespace goodseq::spectral
