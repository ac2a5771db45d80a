#include "goodseq/measures.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "goodseq/errors.hpp"

namespace goodseq::measures {

using modone::dist_nearest_int;
using modone::times_int_mod1;
using modone::unit_exp_rat;

const SelectionEntry& SubsequenceSelection::entry(int k) const {
    if (k < 1 || k > K())
        throw SelectionTooShallowError("selected index " + std::to_string(k) +
                                       " of a depth-" + std::to_string(K()) + " selection");
    return entries[k - 1];
}

BigRat SubsequenceSelection::recip_modulus_ub(int k) const {
    const SelectionEntry& e = entry(k);
    BigRat r(1, e.modulus ? *e.modulus : e.modulus_lb);
    r.canonicalize();
    return r;
}

bool SubsequenceSelection::index_exceeds(int k, const BigInt& j) const {
    const SelectionEntry& e = entry(k);
    if (e.index) return *e.index > j;
    if (e.index_lb > j) return true;
    throw Error("cannot certify a comparison against an unmaterialized selected index");
}

int SubsequenceSelection::first_index_above(const BigInt& j) const {
    for (int k = 1; k <= K(); ++k)
        if (index_exceeds(k, j)) return k;
    return 0;
}

BigRat SubsequenceSelection::selected_ratio_ub(int a, int b) const {
    if (a > b) throw ConfigError("selected_ratio_ub needs a <= b");
    if (a == b) return BigRat(1);
    const SelectionEntry& ea = entry(a);
    const SelectionEntry& eb = entry(b);
    if (ea.modulus && eb.modulus) {
        BigRat r(*ea.modulus, *eb.modulus);
        r.canonicalize();
        return r;
    }
    // m_{j_{t-1}}/m_{j_t} <= 1/bound_t, telescoped from a to b.
    BigRat r(1);
    for (int t = a + 1; t <= b; ++t) {
        BigRat step(1, entry(t).ratio_bound_lb);
        step.canonicalize();
        r *= step;
    }
    return r;
}

nlohmann::json SubsequenceSelection::to_json() const {
    nlohmann::json j;
    j["mode"] = mode == SelectionMode::Prop5 ? "prop5" : "thm6";
    auto arr = nlohmann::json::array();
    for (const auto& e : entries) {
        if (e.index)
            arr.push_back(e.index->get_str());
        else
            arr.push_back(nullptr);
    }
    j["indices"] = arr;
    j["horizon"] = horizon;
    return j;
}

namespace {

// Materialize m_j when its size is estimable and below the cap.
std::optional<BigInt> try_materialize(const ModulusSequence& m, const BigInt& index,
                                      long max_bits) {
    if (!index.fits_slong_p()) return std::nullopt;
    long j = index.get_si();
    if (j < 1) return std::nullopt;
    double est_bits = -1;
    switch (m.kind()) {
        case lacunary::FamilyKind::Geometric:
            est_bits = static_cast<double>(j) * bit_length(m.geometric_base());
            break;
        case lacunary::FamilyKind::FactorialShift: {
            double n = static_cast<double>(j + m.factorial_offset());
            est_bits = std::lgamma(n + 1.0) / std::log(2.0);
            break;
        }
        default:
            break;  // list families are small; compute and measure
    }
    if (est_bits > static_cast<double>(max_bits)) return std::nullopt;
    if (m.is_finite() && j > m.length()) return std::nullopt;
    BigInt v = m.modulus(j);
    if (bit_length(v) > max_bits) return std::nullopt;
    return v;
}

// Least window-family index j >= start such that the ratio condition holds on
// [j, j + window]; expands the scan a few times before giving up.
ModulusSequence::RatioSolve find_window_index(const ModulusSequence& m, const BigInt& bound,
                                              const BigInt& start, long window) {
    long h = (start.fits_slong_p() ? start.get_si() : 1) + window;
    for (int round = 0; round < 8; ++round) {
        if (m.is_finite()) h = std::min(h, m.length());
        auto solve = m.least_index_with_ratio_above(bound, start, h);
        if (solve.status == ModulusSequence::RatioSolve::Status::Found) {
            long got = solve.index.get_si();
            if (m.is_finite() && h >= m.length()) return solve;
            if (h - got >= window) return solve;
            h = got + window;
            continue;
        }
        if (m.is_finite() && h >= m.length()) return solve;
        h += window * (1 << round);
    }
    return {ModulusSequence::RatioSolve::Status::WindowLimited, 0, false};
}

}  // namespace

SubsequenceSelection select_subsequence(std::shared_ptr<const ModulusSequence> m,
                                        SelectionMode mode, int K, const SelectPolicy& policy) {
    if (!m) throw ConfigError("select_subsequence needs a modulus sequence");
    if (K < 1) throw ConfigError("select_subsequence needs K >= 1");
    SubsequenceSelection sel;
    sel.mode = mode;
    sel.seq = m;

    BigInt prev_index = 1;  // j_1 > 1
    bool prev_exact = true;
    long max_checked = 0;

    for (int k = 1; k <= K; ++k) {
        SelectionEntry e;
        // Ratio threshold for this depth.
        if (mode == SelectionMode::Prop5 || k == 1) {
            e.ratio_bound_lb = two_pow(k + 2);
            e.bound_exact = true;
        } else {
            const SelectionEntry& pe = sel.entries[k - 2];
            if (pe.modulus) {
                e.ratio_bound_lb = two_pow(k + 2) * (*pe.modulus);
                e.bound_exact = true;
            } else {
                e.ratio_bound_lb = two_pow(k + 2) * pe.modulus_lb;
                e.bound_exact = false;
            }
        }

        BigInt start = prev_index + 1;
        if (start < 2) start = 2;

        if (e.bound_exact && prev_exact) {
            ModulusSequence::RatioSolve solve{};
            if (m->ratios_certified_nondecreasing()) {
                solve = m->least_index_with_ratio_above(e.ratio_bound_lb, start, 0);
            } else {
                solve = find_window_index(*m, e.ratio_bound_lb, start, policy.window);
            }
            if (solve.status == ModulusSequence::RatioSolve::Status::NeverCertified)
                throw GrowthTooSlowError("ratios never exceed " + e.ratio_bound_lb.get_str() +
                                         " (depth " + std::to_string(k) + ")");
            if (solve.status == ModulusSequence::RatioSolve::Status::WindowLimited)
                throw GrowthTooSlowError("no admissible index within the verification horizon "
                                         "(depth " + std::to_string(k) + ")");
            e.index = solve.index;
            e.index_lb = solve.index;
            e.tail_certified = solve.certified;
            if (!solve.certified && solve.index.fits_slong_p())
                max_checked = std::max(max_checked, solve.index.get_si() + policy.window);
            e.modulus = try_materialize(*m, solve.index, policy.max_modulus_bits);
            if (solve.index > 1)
                e.prev_modulus = try_materialize(*m, solve.index - 1, policy.max_modulus_bits);
        } else {
            // The threshold itself is only known by a lower bound; the exact
            // greedy index exists but cannot be written down. Only families
            // with a certified monotone ratio formula can support this.
            if (!m->ratios_certified_nondecreasing())
                throw GrowthTooSlowError(
                    "cannot verify the ratio condition: threshold not materializable");
            auto solve = m->least_index_with_ratio_above(e.ratio_bound_lb, start, 0);
            if (solve.status != ModulusSequence::RatioSolve::Status::Found)
                throw GrowthTooSlowError("ratios never exceed the (lower-bounded) threshold");
            e.index = std::nullopt;
            e.index_lb = solve.index;  // true bound >= lb bound, so true j_k >= this
            e.tail_certified = true;
        }

        // Certified modulus lower bound: m_{j_k} > bound * m_{j_k - 1}.
        BigInt prev_mod_lb = 1;
        if (e.prev_modulus) {
            prev_mod_lb = *e.prev_modulus;
        } else if (k >= 2) {
            const SelectionEntry& pe = sel.entries[k - 2];
            prev_mod_lb = pe.modulus ? *pe.modulus : pe.modulus_lb;  // j_k - 1 >= j_{k-1}
        } else {
            prev_mod_lb = m->modulus(1);
        }
        e.modulus_lb = e.modulus ? *e.modulus : BigInt(e.ratio_bound_lb * prev_mod_lb);

        prev_exact = e.index.has_value();
        prev_index = e.index ? *e.index : e.index_lb;
        sel.entries.push_back(std::move(e));
    }
    sel.horizon = max_checked;  // 0: certified symbolically
    return sel;
}

EtaPoint theta_of_eta(const std::vector<std::uint8_t>& eta, const SubsequenceSelection& sel) {
    if (static_cast<int>(eta.size()) > sel.K())
        throw SelectionTooShallowError("eta word longer than the selection");
    EtaPoint pt;
    pt.eta = eta;
    pt.sel = sel;
    pt.theta_exact = true;
    BigRat sum(0);
    BigRat trunc(0);
    const int len = static_cast<int>(eta.size());
    for (int k = 1; k <= len; ++k) {
        if (!eta[k - 1]) continue;
        if (sel.modulus_materialized(k)) {
            BigRat term(1, *sel.entry(k).modulus);
            term.canonicalize();
            sum += term;
        } else {
            pt.theta_exact = false;
            trunc += sel.recip_modulus_ub(k);
        }
    }
    // Tail of the (conceptually infinite) point beyond the word.
    if (len < sel.K()) {
        trunc += 2 * sel.recip_modulus_ub(len + 1);
    } else if (sel.K() >= 1) {
        // The next admissible modulus would exceed 2^{K+3} m_{j_K}.
        BigRat next = sel.recip_modulus_ub(sel.K());
        next /= BigRat(two_pow(sel.K() + 3));
        trunc += 2 * next;
    }
    pt.theta = Angle::rational(sum);
    pt.truncation_err = trunc;
    return pt;
}

BigRat mtheta_bound(const SubsequenceSelection& sel, long j) {
    if (j < 1) throw ConfigError("mtheta_bound needs j >= 1");
    int k = sel.first_index_above(BigInt(j));
    if (k == 0) throw SelectionTooShallowError("no selected index beyond j");
    BigRat r(2 * sel.seq->modulus(j));
    r *= sel.recip_modulus_ub(k);
    r.canonicalize();
    return r;
}

namespace {

const BigInt& materialized_modulus(const SubsequenceSelection& sel, int k) {
    const SelectionEntry& e = sel.entry(k);
    if (!e.modulus)
        throw Error("selected modulus " + std::to_string(k) +
                    " is too large to materialize for exact evaluation");
    return *e.modulus;
}

}  // namespace

Complex mu_hat(const SubsequenceSelection& sel, const BigInt& s, int K, mpfr_prec_t prec) {
    if (s < 0) throw ConfigError("mu_hat needs s >= 0");
    if (K < 0 || K > sel.K()) throw SelectionTooShallowError("mu_hat depth out of range");
    Complex prod = Complex::one(prec);
    Complex e(prec);
    for (int k = 1; k <= K; ++k) {
        const BigInt& mk = materialized_modulus(sel, k);
        BigRat t(mod_floor(s, mk), mk);
        t.canonicalize();
        unit_exp_rat(t, prec, &e);
        Complex factor(prec);
        factor.re = e.re + Real::of_long(1, prec);
        factor.re.div_si(2);
        factor.im = e.im;
        factor.im.div_si(2);
        prod = prod * factor;
    }
    return prod;
}

McEstimate mu_hat_mc(const SubsequenceSelection& sel, const BigInt& s, int K, unsigned long M,
                     std::uint64_t seed, mpfr_prec_t prec) {
    if (M < 1) throw ConfigError("mu_hat_mc needs M >= 1");
    if (K < 0 || K > sel.K() || K > 24) throw SelectionTooShallowError("mu_hat_mc depth out of range");
    const unsigned long words = 1ul << K;

    // Per-word exact angles s * theta(word) mod 1 and their unit values.
    std::vector<Complex> vals;
    vals.reserve(words);
    for (unsigned long w = 0; w < words; ++w) {
        BigRat t(0);
        for (int k = 1; k <= K; ++k) {
            if (!(w >> (k - 1) & 1)) continue;
            const BigInt& mk = materialized_modulus(sel, k);
            BigRat term(mod_floor(s, mk), mk);
            term.canonicalize();
            t += term;
        }
        Complex e(prec);
        unit_exp_rat(frac_part(t), prec, &e);
        vals.push_back(std::move(e));
    }

    // Fixed task decomposition: counts are exact integers, so the combined
    // result cannot depend on scheduling.
    constexpr unsigned long kChunk = 4096;
    std::vector<unsigned long> counts(words, 0);
    unsigned long tasks = (M + kChunk - 1) / kChunk;
    for (unsigned long t = 0; t < tasks; ++t) {
        SplitMix64 rng(SplitMix64::task_seed(seed, t));
        unsigned long lo = t * kChunk;
        unsigned long hi = std::min(M, lo + kChunk);
        for (unsigned long i = lo; i < hi; ++i)
            counts[rng.next() & (words - 1)] += 1;
    }

    Complex acc(prec);
    for (unsigned long w = 0; w < words; ++w) {
        if (counts[w] == 0) continue;
        Complex term = vals[w];
        term.scale_si(static_cast<long>(counts[w]));
        acc += term;
    }
    acc.div_ull(M);

    McEstimate est;
    est.value = acc;
    est.samples = M;
    est.seed = seed;
    if (M >= 2) {
        // Samples live on the unit circle, so E|X|^2 = 1 exactly.
        double mean2 = acc.norm2().to_double();
        double var = (1.0 - mean2) * static_cast<double>(M) / static_cast<double>(M - 1);
        est.std_err = std::sqrt(std::max(0.0, var) / static_cast<double>(M));
    }
    return est;
}

WienerEstimate wiener_average(const ModulusSequence& m, const SubsequenceSelection& sel,
                              long long N, int K, mpfr_prec_t prec) {
    if (N < 1) throw ConfigError("wiener_average needs N >= 1");
    WienerEstimate est;
    est.n = N;
    est.method = WienerMethod::ExactProduct;
    Complex acc(prec);
    Real accsq(prec);
    lacunary::ElementStream st(m);
    for (long long n = 1;; ++n) {
        Complex c = mu_hat(sel, st.value(), K, prec);
        acc += c;
        accsq += c.norm2();
        if (n == N) break;
        st.next();
    }
    acc.div_ull(static_cast<unsigned long long>(N));
    accsq.div_ull(static_cast<unsigned long long>(N));
    est.mean_coeff = acc;
    est.mean_sq = accsq;
    if (est.mean_sq.to_double() + 1e-12 < est.mean_coeff.norm2().to_double())
        throw Error("wiener invariant violated: mean_sq < |mean_coeff|^2");
    return est;
}

WienerEstimate wiener_average_mc(const ModulusSequence& m, const SubsequenceSelection& sel,
                                 long long N, int K, unsigned long M, std::uint64_t seed,
                                 mpfr_prec_t prec) {
    if (N < 1) throw ConfigError("wiener_average_mc needs N >= 1");
    if (K < 0 || K > sel.K() || K > 24)
        throw SelectionTooShallowError("wiener_average_mc depth out of range");
    const unsigned long words = 1ul << K;

    std::vector<unsigned long> counts(words, 0);
    constexpr unsigned long kChunk = 4096;
    unsigned long tasks = (M + kChunk - 1) / kChunk;
    for (unsigned long t = 0; t < tasks; ++t) {
        SplitMix64 rng(SplitMix64::task_seed(seed, t));
        unsigned long lo = t * kChunk;
        unsigned long hi = std::min(M, lo + kChunk);
        for (unsigned long i = lo; i < hi; ++i)
            counts[rng.next() & (words - 1)] += 1;
    }

    std::vector<BigInt> mods(K);
    for (int k = 1; k <= K; ++k) mods[k - 1] = materialized_modulus(sel, k);

    // g_w = (1/N) sum_n e(s_n theta_w); the estimate is the count-weighted mix.
    std::vector<Complex> gw(words, Complex(prec));
    Real accsq(prec);
    std::vector<Complex> factors(K, Complex(prec));
    lacunary::ElementStream st(m);
    for (long long n = 1;; ++n) {
        for (int k = 0; k < K; ++k) {
            BigRat t(mod_floor(st.value(), mods[k]), mods[k]);
            t.canonicalize();
            unit_exp_rat(t, prec, &factors[k]);
        }
        Complex zn(prec);
        for (unsigned long w = 0; w < words; ++w) {
            Complex prod = Complex::one(prec);
            for (int k = 0; k < K; ++k)
                if (w >> k & 1) prod = prod * factors[k];
            gw[w] += prod;
            if (counts[w]) {
                prod.scale_si(static_cast<long>(counts[w]));
                zn += prod;
            }
        }
        zn.div_ull(M);
        accsq += zn.norm2();
        if (n == N) break;
        st.next();
    }

    Complex mean(prec);
    for (unsigned long w = 0; w < words; ++w) {
        gw[w].div_ull(static_cast<unsigned long long>(N));
        if (counts[w] == 0) continue;
        Complex term = gw[w];
        term.scale_si(static_cast<long>(counts[w]));
        mean += term;
    }
    mean.div_ull(M);
    accsq.div_ull(static_cast<unsigned long long>(N));

    WienerEstimate est;
    est.n = N;
    est.method = WienerMethod::MonteCarlo;
    est.mean_coeff = mean;
    est.mean_sq = accsq;
    est.mc_samples = M;
    est.seed = seed;
    if (M >= 2) {
        double var = 0;
        double mr = mean.re.to_double(), mi = mean.im.to_double();
        for (unsigned long w = 0; w < words; ++w) {
            if (counts[w] == 0) continue;
            double dr = gw[w].re.to_double() - mr, di = gw[w].im.to_double() - mi;
            var += counts[w] * (dr * dr + di * di);
        }
        var /= static_cast<double>(M - 1);
        est.std_err = std::sqrt(var / static_cast<double>(M));
    }
    return est;
}

spectral::SpectralValue nu_hat(const ModulusSequence& m, const Angle& theta, const BigInt& t,
                               const spectral::LimitPolicy& policy,
                               const spectral::TailMajorant* majorant) {
    if (t < 0) throw ConfigError("nu_hat needs t >= 0");
    return spectral::limit_L(m, times_int_mod1(theta, t), policy, majorant);
}

namespace {

// Certified upper bound on m_{j_k - 1} / m_{j_k}.
BigRat prev_ratio_ub(const SubsequenceSelection& sel, int k) {
    const SelectionEntry& e = sel.entry(k);
    if (e.modulus && e.prev_modulus) {
        BigRat r(*e.prev_modulus, *e.modulus);
        r.canonicalize();
        return r;
    }
    BigRat r(1, e.ratio_bound_lb);
    r.canonicalize();
    return r;
}

// 1 - (4 pi^2 / 3) * tail, rounded so the result is a certified lower bound.
double certified_lower(const BigRat& tail, mpfr_prec_t prec) {
    Real c(prec);
    mpfr_const_pi(c.raw(), MPFR_RNDU);
    mpfr_sqr(c.raw(), c.raw(), MPFR_RNDU);
    mpfr_mul_ui(c.raw(), c.raw(), 4, MPFR_RNDU);
    mpfr_div_ui(c.raw(), c.raw(), 3, MPFR_RNDU);
    Real t = Real::of_rat(tail, prec, MPFR_RNDU);
    mpfr_mul(t.raw(), t.raw(), c.raw(), MPFR_RNDU);
    Real one = Real::of_long(1, prec);
    mpfr_sub(one.raw(), one.raw(), t.raw(), MPFR_RNDD);
    return mpfr_get_d(one.raw(), MPFR_RNDD);
}

}  // namespace

std::vector<DirichletRow> dirichlet_check(const EtaPoint& pt, int n_max, mpfr_prec_t prec,
                                          long enumeration_budget) {
    const SubsequenceSelection& sel = pt.sel;
    if (sel.mode != SelectionMode::Thm6)
        throw ConfigError("dirichlet_check needs a thm6-mode selection");
    if (!sel.seq->structurally_divisible())
        throw ConfigError("dirichlet_check needs a divisible modulus family");
    if (n_max < 1) throw ConfigError("dirichlet_check needs n_max >= 1");
    if (n_max > sel.K())
        throw SelectionTooShallowError("n_max exceeds the selected subsequence depth");

    const int K = sel.K();
    // Last selected index contributing to the (finite-word) point.
    int last_active = 0;
    for (int k = 1; k <= static_cast<int>(pt.eta.size()); ++k)
        if (pt.eta[k - 1]) last_active = k;

    // Exact evaluation is possible when theta is fully materialized and the
    // active range is short enough to enumerate.
    bool enumerable = pt.theta_exact;
    long j_limit = 1;  // terms vanish for j >= j_limit
    if (last_active > 0) {
        const SelectionEntry& la = sel.entry(last_active);
        if (la.index && la.index->fits_slong_p() && la.index->get_si() <= enumeration_budget)
            j_limit = la.index->get_si();
        else
            enumerable = false;
    }

    std::vector<DirichletRow> rows;
    rows.reserve(n_max);
    for (int n = 1; n <= n_max; ++n) {
        DirichletRow row;
        row.n = n;
        row.tail_bound = BigRat(4, 3 * pow_ui(4, n));
        row.tail_bound.canonicalize();

        bool exact_row = enumerable && sel.modulus_materialized(n);
        if (exact_row) {
            const BigInt& mul = *sel.entry(n).modulus;
            BigRat total(0);
            Real prod = Real::of_long(1, prec);
            for (long j = 1; j < j_limit; ++j) {
                Angle a = times_int_mod1(pt.theta, mul * sel.seq->modulus(j));
                BigRat d = dist_nearest_int(a);
                total += d * d;
                Real f = modone::cos_2pi(a.value(), prec);
                f.mul_si(2);
                f += Real::of_long(1, prec);
                f.div_si(3);
                prod *= f;
            }
            row.tail_sum = total;
            row.exact = true;
            row.L_value = prod.to_double() + std::ldexp(1.0, -40);
        } else {
            // Certified block bounds from the selection's ratio conditions.
            BigRat total(0);
            // j < j_n region.
            BigRat rp = prev_ratio_ub(sel, n);
            BigRat low = BigRat(8, pow_ui(4, n + 3)) * rp * rp;
            total += low;
            // Blocks [j_{k-1}, j_k) for k = n+1..K_active.
            for (int k = n + 1; k <= K; ++k) {
                BigRat rs = sel.selected_ratio_ub(n, k - 1);
                BigRat blk = BigRat(8, pow_ui(4, k + 2)) * rs * rs;
                total += blk;
            }
            total.canonicalize();
            row.tail_sum = total;
            row.exact = false;
            row.L_value = 1.0;
        }
        if (cmp(row.tail_sum, row.tail_bound) >= 0)
            throw Error("dirichlet tail bound not met at n=" + std::to_string(n));
        row.L_lower = certified_lower(row.tail_sum, prec);
        if (row.L_value < row.L_lower) row.L_value = 1.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

spectral::TailMajorant eta_tail_majorant(const EtaPoint& pt) {
    struct Block {
        std::optional<BigInt> index;
        BigInt index_lb;
        BigRat bound;  // 8 (m_{j_k-1}/m_{j_k})^2, certified
    };
    auto blocks = std::make_shared<std::vector<Block>>();
    const SubsequenceSelection& sel = pt.sel;
    for (int k = 1; k <= static_cast<int>(pt.eta.size()); ++k) {
        if (!pt.eta[k - 1] || !sel.modulus_materialized(k)) continue;
        BigRat r = prev_ratio_ub(sel, k);
        Block b;
        b.index = sel.entry(k).index;
        b.index_lb = sel.entry(k).index_lb;
        b.bound = 8 * r * r;
        blocks->push_back(std::move(b));
    }
    bool divisible = sel.seq->structurally_divisible();
    return [blocks, divisible](long j_from) -> std::optional<BigRat> {
        if (!divisible) return std::nullopt;
        BigRat total(0);
        for (const auto& b : *blocks) {
            bool has_terms;  // block contains some j >= j_from iff j_k > j_from
            if (b.index)
                has_terms = *b.index > j_from;
            else
                has_terms = true;  // cannot rule it out; including is safe
            if (has_terms) total += b.bound;
        }
        total.canonicalize();
        return total;
    };
}

}  // namespace goodseq::measures
