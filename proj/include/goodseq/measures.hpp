#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "goodseq/angle.hpp"
#include "goodseq/lacunary.hpp"
#include "goodseq/spectral.hpp"

// Fast-growing subsequences (m_{j_k}) of a modulus family, the circle points
// theta(eta) = sum eta_k / m_{j_k} they generate, Fourier coefficients of the
// fair-coin measure carried by those points, Wiener-type averages along the
// generated sequence, and the certified bounds behind the Dirichlet property
// L(m_{j_n} theta) -> 1.
//
// Selected indices grow so fast that deep moduli are often impossible to
// materialize (the greedy index itself can exceed any machine word). Entries
// therefore carry optional exact values plus certified lower bounds derived
// from the defining ratio conditions; every downstream bound consumes those,
// so reports stay rigorous whether or not the numbers fit in memory.

namespace goodseq::measures {

using lacunary::ModulusSequence;
using modone::Angle;

enum class SelectionMode { Prop5, Thm6 };

struct SelectPolicy {
    long window = 16;                     // verification window for list families
    long max_modulus_bits = 1l << 20;     // materialization size cap
    long enumeration_budget = 4096;       // max exact terms per diagnostic region
};

struct SelectionEntry {
    std::optional<BigInt> index;          // j_k, when exactly determined
    std::optional<BigInt> modulus;        // m_{j_k}, when materialized
    std::optional<BigInt> prev_modulus;   // m_{j_k - 1}, when materialized
    BigInt index_lb;                      // certified j_k >= index_lb
    BigInt ratio_bound_lb;                // certified: m_j/m_{j-1} > this for all j >= j_k
    bool bound_exact = false;             // ratio_bound_lb is the exact mode bound
    BigInt modulus_lb;                    // certified m_{j_k} >= modulus_lb
    bool tail_certified = false;          // "for all j >= j_k" certified beyond any horizon
};

class SubsequenceSelection {
  public:
    SelectionMode mode = SelectionMode::Prop5;
    std::vector<SelectionEntry> entries;
    long horizon = 0;
    std::shared_ptr<const ModulusSequence> seq;

    int K() const { return static_cast<int>(entries.size()); }
    const SelectionEntry& entry(int k) const;       // 1-based
    bool modulus_materialized(int k) const { return entry(k).modulus.has_value(); }
    // Certified upper bound on 1/m_{j_k}.
    BigRat recip_modulus_ub(int k) const;
    // Certified: is j_k > j? (Resolvable for every j below the horizon.)
    bool index_exceeds(int k, const BigInt& j) const;
    // Least selected k with j_k > j, or 0 when none.
    int first_index_above(const BigInt& j) const;
    // Certified upper bound on m_{j_a}/m_{j_b} for a <= b (1 when a == b).
    BigRat selected_ratio_ub(int a, int b) const;

    nlohmann::json to_json() const;
};

// Greedy minimal selection: j_k is the least index > j_{k-1} with
// m_j/m_{j-1} > 2^{k+2} (and additionally > 2^{k+2} m_{j_{k-1}} in Thm6 mode,
// k > 1) for all j >= j_k. Families with a monotone ratio formula are
// certified symbolically; list families are checked through the horizon
// window and throw GrowthTooSlowError when no admissible index exists.
SubsequenceSelection select_subsequence(std::shared_ptr<const ModulusSequence> m,
                                        SelectionMode mode, int K,
                                        const SelectPolicy& policy = {});

struct EtaPoint {
    std::vector<std::uint8_t> eta;
    SubsequenceSelection sel;
    Angle theta;             // exact rational over the materialized active indices
    BigRat truncation_err;   // distance bound to the untruncated / full point
    bool theta_exact = false;  // every active index was materialized
};

EtaPoint theta_of_eta(const std::vector<std::uint8_t>& eta, const SubsequenceSelection& sel);

// 2 m_j / m_{j_k}, j_k the least selected index > j. Exact when that modulus
// is materialized, otherwise a certified upper bound. Bounds ||m_j theta(eta)||
// for every eta.
BigRat mtheta_bound(const SubsequenceSelection& sel, long j);

// Fourier coefficient of the fair-bit measure: prod_{k<=K} (1+e^{2pi i s/m_{j_k}})/2.
Complex mu_hat(const SubsequenceSelection& sel, const BigInt& s, int K,
               mpfr_prec_t prec = Real::kDefaultPrec);

struct McEstimate {
    Complex value;
    double std_err = 0.0;
    unsigned long samples = 0;
    std::uint64_t seed = 0;
};

// Empirical mean of e^{2 pi i s theta(eta)} over M fair draws of eta_1..eta_K.
// Reproducible bit-for-bit from (seed, M); independent of thread count.
McEstimate mu_hat_mc(const SubsequenceSelection& sel, const BigInt& s, int K, unsigned long M,
                     std::uint64_t seed, mpfr_prec_t prec = Real::kDefaultPrec);

enum class WienerMethod { ExactProduct, MonteCarlo };

struct WienerEstimate {
    long long n = 0;
    Complex mean_coeff;  // (1/N) sum mu_hat(s_i)
    Real mean_sq;        // (1/N) sum |mu_hat(s_i)|^2
    WienerMethod method = WienerMethod::ExactProduct;
    double std_err = 0.0;
    unsigned long mc_samples = 0;
    std::uint64_t seed = 0;
};

WienerEstimate wiener_average(const ModulusSequence& m, const SubsequenceSelection& sel,
                              long long N, int K, mpfr_prec_t prec = Real::kDefaultPrec);
WienerEstimate wiener_average_mc(const ModulusSequence& m, const SubsequenceSelection& sel,
                                 long long N, int K, unsigned long M, std::uint64_t seed,
                                 mpfr_prec_t prec = Real::kDefaultPrec);

// Fourier coefficient of the asymptotic orbit distribution: L(t * theta).
spectral::SpectralValue nu_hat(const ModulusSequence& m, const Angle& theta, const BigInt& t,
                               const spectral::LimitPolicy& policy,
                               const spectral::TailMajorant* majorant = nullptr);

struct DirichletRow {
    int n = 0;
    double L_lower = 0.0;   // certified: L(m_{j_n} theta) >= L_lower
    double L_value = 1.0;   // certified upper bound; exact product when available
    BigRat tail_sum;        // certified upper bound on sum_j ||m_{j_n} m_j theta||^2
    BigRat tail_bound;      // reference threshold (4/3) 4^{-n}
    bool exact = false;     // tail_sum evaluated exactly (small selections)
};

// Requires a Thm6-mode selection over a structurally divisible family.
std::vector<DirichletRow> dirichlet_check(const EtaPoint& pt, int n_max,
                                          mpfr_prec_t prec = Real::kDefaultPrec,
                                          long enumeration_budget = 4096);

// Certified tail majorant for limit_L at theta(eta) (Eq-style block bounds).
spectral::TailMajorant eta_tail_majorant(const EtaPoint& pt);

}  // namespace goodseq::measures
