#include "goodseq/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "goodseq/errors.hpp"

namespace goodseq::spectral {

using modone::dist_nearest_int;
using modone::times_int_mod1;
using modone::unit_exp_rat;

std::string to_string(SpectralClass c) {
    switch (c) {
        case SpectralClass::ZeroExact: return "zero_exact";
        case SpectralClass::ZeroByNonpositiveFactors: return "zero_nonpositive";
        case SpectralClass::PositiveConverged: return "positive_converged";
        case SpectralClass::Truncated: return "truncated";
    }
    return "?";
}

namespace {

struct Factor {
    Real value;
    bool exactly_zero = false;
    bool exactly_one = false;
    bool nonpositive = false;  // exact sign: ||m_j theta|| >= 1/3
};

Factor factor_at(const ModulusSequence& m, const Angle& theta, long j, mpfr_prec_t prec) {
    Angle t = times_int_mod1(theta, m.modulus(j));
    Factor f{Real(prec)};
    if (t.is_zero()) {
        f.exactly_one = true;
        mpfr_set_ui(f.value.raw(), 1, MPFR_RNDN);
        return f;
    }
    BigRat dist = dist_nearest_int(t);
    int c = cmp(dist, BigRat(1, 3));
    if (c == 0) {
        f.exactly_zero = true;
        return f;  // value stays exact 0
    }
    f.nonpositive = c > 0;
    f.value = modone::cos_2pi(t.value(), prec);
    f.value.mul_si(2);
    f.value += Real::of_long(1, prec);
    f.value.div_si(3);
    return f;
}

// 4*pi^2/3 rounded up; multiplying a tail bound by this stays an upper bound.
constexpr double kFactorLossConst = 13.159473;

}  // namespace

std::vector<Real> partial_products(const ModulusSequence& m, const Angle& theta, int K,
                                   mpfr_prec_t prec) {
    if (K < 1) throw ConfigError("partial_products needs K >= 1");
    std::vector<Real> out;
    out.reserve(K);
    Real run = Real::of_long(1, prec);
    out.push_back(run);
    for (int k = 2; k <= K; ++k) {
        Factor f = factor_at(m, theta, k - 1, prec);
        if (f.exactly_zero) {
            run = Real(prec);  // exact zero propagates
        } else if (!f.exactly_one) {
            run *= f.value;
        }
        out.push_back(run);
    }
    return out;
}

SpectralValue limit_L(const ModulusSequence& m, const Angle& theta, const LimitPolicy& policy,
                      const TailMajorant* majorant) {
    if (policy.k_max < 2) throw ConfigError("limit_L needs k_max >= 2");
    if (policy.tail_tol <= 0) throw ConfigError("limit_L needs tail_tol > 0");
    const mpfr_prec_t prec = policy.prec;
    Real run = Real::of_long(1, prec);
    bool any_nonpositive = false;
    const double round_err = std::ldexp(1.0, -static_cast<int>(prec) + 16);

    for (long j = 1; j <= policy.k_max; ++j) {
        if (m.is_finite() && j > m.length()) {
            // Finite family: no tail to certify beyond the listed moduli.
            double v = run.to_double();
            return {v, SpectralClass::Truncated, static_cast<int>(m.length()),
                    2.0 * std::fabs(v) + round_err};
        }
        Factor f = factor_at(m, theta, j, prec);
        if (f.exactly_zero) {
            // All later partial products vanish identically.
            return {0.0, SpectralClass::ZeroExact, static_cast<int>(j + 1), 0.0};
        }
        if (f.exactly_one) {
            // Integral point. For structurally divisible families every later
            // multiple is integral too, so the tail is exactly 1.
            if (m.structurally_divisible()) {
                double v = run.to_double();
                SpectralClass cls = any_nonpositive ? SpectralClass::Truncated
                                                    : SpectralClass::PositiveConverged;
                return {v, cls, static_cast<int>(j), round_err};
            }
        } else {
            if (f.nonpositive) any_nonpositive = true;
            run *= f.value;
        }
        if (any_nonpositive && run.abs().cmp(policy.tail_tol) <= 0) {
            double bound = std::fabs(run.to_double()) + round_err;
            return {0.0, SpectralClass::ZeroByNonpositiveFactors, static_cast<int>(j + 1), bound};
        }
        if (majorant && !any_nonpositive) {
            if (auto tail = (*majorant)(j + 1)) {
                double b = tail->get_d() * (1.0 + 1e-9);
                double loss = kFactorLossConst * b;
                if (loss <= policy.tail_tol && b < 1.0 / 9.0) {
                    double v = run.to_double();
                    return {v, SpectralClass::PositiveConverged, static_cast<int>(j),
                            loss * std::fabs(v) + round_err};
                }
            }
        }
    }
    double v = run.to_double();
    return {v, SpectralClass::Truncated, policy.k_max, 2.0 * std::fabs(v) + round_err};
}

namespace {

// ---- exact residue-count evaluation (rational theta, small denominator) ----

struct DenseCtx {
    unsigned long q = 0;
    unsigned long pm = 0;  // numerator mod q
    std::vector<unsigned long> mmod;    // m_j mod q, 1-based
    std::vector<unsigned long> prefmod; // prefix_sum(j) mod q, 1-based
    const ModulusSequence* m = nullptr;

    void ensure(long j) {
        while (static_cast<long>(mmod.size()) < j + 1) {
            long idx = static_cast<long>(mmod.size());
            if (idx == 0) {
                mmod.push_back(0);
                prefmod.push_back(0);
                continue;
            }
            mmod.push_back(mpz_fdiv_ui(m->modulus(idx).get_mpz_t(), q));
            prefmod.push_back(mpz_fdiv_ui(m->prefix_sum(idx).get_mpz_t(), q));
        }
    }
};

bool dense_eligible(const Angle& theta, const EvalPolicy& policy) {
    const BigInt& den = theta.denominator();
    return den.fits_ulong_p() && den.get_ui() <= policy.dense_q_limit;
}

CesaroEstimate cesaro_from_counts(const std::vector<long long>& counts, unsigned long q,
                                  long long N, AvgMethod method, mpfr_prec_t prec) {
    Complex sum(prec);
    Complex e(prec);
    for (unsigned long r = 0; r < q; ++r) {
        if (counts[r] == 0) continue;
        BigRat t(r, q);
        t.canonicalize();
        unit_exp_rat(t, prec, &e);
        Complex term = e;
        term.scale_si(counts[r]);
        sum += term;
    }
    CesaroEstimate est;
    est.n = N;
    est.method = method;
    est.sum = sum;
    est.average = sum;
    est.average.div_ull(static_cast<unsigned long long>(N));
    est.err = std::ldexp(1.0, -static_cast<int>(prec) + 12);
    return est;
}

CesaroEstimate direct_dense(const ModulusSequence& m, const Angle& theta, long long N,
                            const EvalPolicy& policy) {
    DenseCtx ctx;
    ctx.q = theta.denominator().get_ui();
    ctx.pm = mpz_fdiv_ui(theta.numerator().get_mpz_t(), ctx.q);
    ctx.m = &m;
    const unsigned long q = ctx.q;
    std::vector<long long> counts(q, 0);

    // Residue-tracking odometer over the balanced-ternary digit vectors.
    long k = 1;
    std::vector<int> digits;
    ctx.ensure(1);
    unsigned long r = ctx.mmod[1] % q;  // s_1 = m_1
    for (long long n = 1;; ++n) {
        counts[(r * ctx.pm) % q] += 1;
        if (n == N) break;
        bool stepped = false;
        for (long j = 1; j <= k - 1; ++j) {
            if (digits[j - 1] < 1) {
                digits[j - 1] += 1;
                unsigned long delta = ctx.mmod[j] % q;
                if (j >= 2) delta = (delta + 2 * (q - ctx.prefmod[j - 1] % q)) % q;
                r = (r + delta) % q;
                std::fill(digits.begin(), digits.begin() + (j - 1), -1);
                stepped = true;
                break;
            }
        }
        if (!stepped) {
            ++k;
            ctx.ensure(k);
            digits.assign(k - 1, -1);
            r = (ctx.mmod[k] + (q - ctx.prefmod[k - 1] % q)) % q;
        }
    }
    return cesaro_from_counts(counts, q, N, AvgMethod::Direct, policy.prec);
}

CesaroEstimate block_dense(const ModulusSequence& m, const Angle& theta, long long N,
                           const EvalPolicy& policy) {
    DenseCtx ctx;
    ctx.q = theta.denominator().get_ui();
    ctx.pm = mpz_fdiv_ui(theta.numerator().get_mpz_t(), ctx.q);
    ctx.m = &m;
    const unsigned long q = ctx.q;

    lacunary::BalancedTernaryIndex nxt = lacunary::rank_to_index(N + 1);
    const long kN = nxt.k;
    ctx.ensure(kN);

    // Digit-space translate amounts t_j = (m_j * p) mod q.
    auto tshift = [&](long j) { return (ctx.mmod[j] * ctx.pm) % q; };

    std::vector<long long> total(q, 0);
    std::vector<long long> V(q, 0), W(q, 0);
    V[0] = 1;  // M_1 = {0}

    // suffix[j-1]: residue (p-multiplied) of m_{kN} + sum_{l=j+1}^{kN-1} w_l m_l.
    std::vector<unsigned long> suffix(kN, 0);
    {
        unsigned long acc = (ctx.mmod[kN] * ctx.pm) % q;
        suffix[kN - 2] = acc;  // j = kN-1: empty sum
        for (long j = kN - 2; j >= 1; --j) {
            int w = nxt.digits[j];  // digit w_{j+1}
            unsigned long ts = tshift(j + 1);
            if (w == -1) acc = (acc + q - ts) % q;
            if (w == 1) acc = (acc + ts) % q;
            suffix[j - 1] = acc;
        }
    }

    auto add_translate = [&](const std::vector<long long>& src, unsigned long shift,
                             long long mult) {
        for (unsigned long rr = 0; rr < q; ++rr) {
            if (src[rr] == 0) continue;
            total[(rr + shift) % q] += mult * src[rr];
        }
    };

    for (long j = 1; j <= kN - 1; ++j) {
        // Complete block m_j + M_j.
        add_translate(V, tshift(j), 1);
        // Partial-block translates of M_j inside W_N.
        int wj = nxt.digits[j - 1];
        for (int w = -1; w < wj; ++w) {
            unsigned long shift = suffix[j - 1];
            if (w == -1) shift = (shift + q - tshift(j)) % q;
            add_translate(V, shift, 1);
        }
        // Extend V to M_{j+1}.
        if (j <= kN - 2) {
            unsigned long t = tshift(j);
            for (unsigned long rr = 0; rr < q; ++rr) {
                long long c = V[rr];
                if (c == 0) continue;
                W[rr] += c;
                W[(rr + t) % q] += c;
                W[(rr + q - t) % q] += c;
            }
            std::swap(V, W);
            std::fill(W.begin(), W.end(), 0);
        }
    }
    return cesaro_from_counts(total, q, N, AvgMethod::Block, policy.prec);
}

// ---- high-precision per-term evaluation (large denominators, dyadic) ----

CesaroEstimate direct_perterm(const ModulusSequence& m, const Angle& theta, long long N,
                              const EvalPolicy& policy) {
    const mpfr_prec_t prec = policy.prec;
    Complex sum(prec);
    lacunary::ElementStream st(m);
    for (long long n = 1;; ++n) {
        Angle t = times_int_mod1(theta, st.value());
        Complex e(prec);
        unit_exp_rat(t.value(), prec, &e);
        sum += e;
        if (n == N) break;
        st.next();
    }
    CesaroEstimate est;
    est.n = N;
    est.method = AvgMethod::Direct;
    est.sum = sum;
    est.average = sum;
    est.average.div_ull(static_cast<unsigned long long>(N));
    est.err = std::ldexp(1.0, -static_cast<int>(prec) + 10);
    return est;
}

CesaroEstimate block_perterm(const ModulusSequence& m, const Angle& theta, long long N,
                             const EvalPolicy& policy) {
    const mpfr_prec_t prec = policy.prec;
    lacunary::BalancedTernaryIndex nxt = lacunary::rank_to_index(N + 1);
    const long kN = nxt.k;

    // suffix[j]: m_{kN} + sum_{l=j+1}^{kN-1} w_l m_l, exact.
    std::vector<BigInt> suffix(kN);
    suffix[kN - 1] = m.modulus(kN);
    for (long j = kN - 2; j >= 1; --j)
        suffix[j] = suffix[j + 1] + nxt.digits[j] * m.modulus(j + 1);

    Complex sum(prec);
    Real Lj = Real::of_long(1, prec);  // L_1
    for (long j = 1; j <= kN - 1; ++j) {
        Real w = Lj;
        w.mul_int(pow3(j - 1));
        Complex e(prec);
        unit_exp_rat(times_int_mod1(theta, m.modulus(j)).value(), prec, &e);
        e.scale(w);
        sum += e;
        int wj = nxt.digits[j - 1];
        for (int om = -1; om < wj; ++om) {
            BigInt u = suffix[j] + om * m.modulus(j);
            Complex eu(prec);
            unit_exp_rat(times_int_mod1(theta, u).value(), prec, &eu);
            eu.scale(w);
            sum += eu;
        }
        Factor f = factor_at(m, theta, j, prec);
        if (f.exactly_zero) {
            Lj = Real(prec);  // exact zero; later levels contribute nothing
        } else if (!f.exactly_one) {
            Lj *= f.value;
        }
    }
    CesaroEstimate est;
    est.n = N;
    est.method = AvgMethod::Block;
    est.sum = sum;
    est.average = sum;
    est.average.div_ull(static_cast<unsigned long long>(N));
    est.err = std::ldexp(1.0, -static_cast<int>(prec) + 16);
    return est;
}

}  // namespace

CesaroEstimate direct_average(const ModulusSequence& m, const Angle& theta, long long N,
                              const EvalPolicy& policy) {
    if (N < 1) throw ConfigError("direct_average needs N >= 1");
    if (dense_eligible(theta, policy)) return direct_dense(m, theta, N, policy);
    return direct_perterm(m, theta, N, policy);
}

CesaroEstimate block_average(const ModulusSequence& m, const Angle& theta, long long N,
                             const EvalPolicy& policy) {
    if (N < 1) throw ConfigError("block_average needs N >= 1");
    if (dense_eligible(theta, policy)) return block_dense(m, theta, N, policy);
    return block_perterm(m, theta, N, policy);
}

H2Report h2_diagnostic(const ModulusSequence& m, const Angle& theta, int K, double flat_tol) {
    if (K < 1) throw ConfigError("h2_diagnostic needs K >= 1");
    H2Report rep;
    rep.k = K;
    rep.partial_sums.reserve(K);
    BigRat total = 0;
    for (int j = 1; j <= K; ++j) {
        BigRat d = dist_nearest_int(times_int_mod1(theta, m.modulus(j)));
        total += d * d;
        rep.partial_sums.push_back(Real::of_rat(total, 128).to_double());
    }
    rep.total_exact = total;
    int quarter = std::max(1, K / 4);
    double inc = rep.partial_sums[K - 1] -
                 (K - quarter - 1 >= 0 ? rep.partial_sums[K - quarter - 1] : 0.0);
    if (inc <= flat_tol) {
        rep.apparently_bounded = true;
        rep.flag_value = rep.partial_sums[K - 1] + 3 * inc;
    } else {
        rep.apparently_bounded = false;
        rep.flag_value = inc / quarter;
    }
    return rep;
}

int thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("GOODSEQ_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

std::vector<ScanRow> spectrum_scan(const ModulusSequence& m, const std::vector<Angle>& angles,
                                   const ScanPolicy& policy,
                                   const std::vector<TailMajorant>* majorants) {
    std::vector<ScanRow> rows(angles.size());
    std::atomic<size_t> cursor{0};
    auto work = [&]() {
        for (;;) {
            size_t i = cursor.fetch_add(1);
            if (i >= angles.size()) return;
            ScanRow& row = rows[i];
            row.theta = angles[i];
            row.repr = angles[i].repr();
            try {
                const TailMajorant* mj =
                    majorants && i < majorants->size() && (*majorants)[i] ? &(*majorants)[i]
                                                                          : nullptr;
                row.value = limit_L(m, angles[i], policy.limit, mj);
                if (policy.navg) {
                    row.avg = direct_average(m, angles[i], *policy.navg, policy.eval);
                    if (policy.check_blocks) {
                        CesaroEstimate blk = block_average(m, angles[i], *policy.navg, policy.eval);
                        row.block_checked = true;
                        if (blk.sum.identical(row.avg->sum)) {
                            row.block_matches = true;
                        } else {
                            Complex d = blk.sum - row.avg->sum;
                            double diff = d.abs().to_double() / static_cast<double>(*policy.navg);
                            row.block_matches = diff <= blk.err + row.avg->err;
                        }
                    }
                }
            } catch (const Error& e) {
                row.error = e.what();
            }
        }
    };
    int nt = thread_count(policy.threads);
    if (nt <= 1 || angles.size() <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return rows;
}

}  // namespace goodseq::spectral
