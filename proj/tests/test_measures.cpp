#include <doctest.h>

#include <algorithm>

#include <nlohmann/json.hpp>

#include "goodseq/measures.hpp"

using namespace goodseq;
using namespace goodseq::measures;
using goodseq::lacunary::ModulusSequence;
using goodseq::modone::Angle;

namespace {

std::shared_ptr<ModulusSequence> fact2() { return ModulusSequence::factorial_shift(2); }

// Integer-ratio family built so that the thm6 greedy selection is (2,3,4,5)
// with every modulus materializable: each ratio lands just above its bound.
std::shared_ptr<ModulusSequence> tower() {
    auto ratios = std::make_shared<std::vector<BigInt>>();
    BigInt m = 3;
    auto push = [&](const BigInt& r) {
        ratios->push_back(r);
        m *= r;
    };
    push(9);            // m_2 = 27,   ratio(2) = 9   > 2^3
    push(16 * m + 1);   // m_3,        ratio(3) = 433 > 2^4 m_2
    push(32 * m + 1);   // m_4,        ratio(4)       > 2^5 m_3
    push(64 * m + 1);   // m_5,        ratio(5)       > 2^6 m_4
    BigInt r = ratios->back();
    for (int i = 0; i < 19; ++i) {
        r *= 4;
        push(r);
    }
    long limit = static_cast<long>(ratios->size()) + 1;
    return ModulusSequence::custom(
        3, [ratios](long j) { return ratios->at(static_cast<size_t>(j - 1)); }, limit);
}

std::vector<std::uint8_t> word(std::initializer_list<int> bits) {
    std::vector<std::uint8_t> w;
    for (int b : bits) w.push_back(static_cast<std::uint8_t>(b));
    return w;
}

}  // namespace

TEST_CASE("greedy subsequence selection") {
    SUBCASE("prop5 on the factorial family") {
        auto sel = select_subsequence(fact2(), SelectionMode::Prop5, 3);
        REQUIRE(sel.K() == 3);
        CHECK(*sel.entry(1).index == 7);
        CHECK(*sel.entry(2).index == 15);
        CHECK(*sel.entry(3).index == 31);
        CHECK(*sel.entry(1).modulus == factorial(9));
        CHECK(*sel.entry(2).modulus == factorial(17));
        CHECK(*sel.entry(3).modulus == factorial(33));
        CHECK(sel.entry(1).tail_certified);
        auto j = sel.to_json();
        CHECK(j["mode"] == "prop5");
        CHECK(j["indices"][0] == "7");
        CHECK(j["indices"][2] == "31");
    }
    SUBCASE("constant ratios are too slow") {
        CHECK_THROWS_AS(select_subsequence(ModulusSequence::geometric(3), SelectionMode::Prop5, 1),
                        GrowthTooSlowError);
    }
    SUBCASE("thm6 on the factorial family") {
        auto sel = select_subsequence(fact2(), SelectionMode::Thm6, 4);
        CHECK(*sel.entry(1).index == 7);
        // ratio j+2 > 2^4 * 9! forces j = 16*362880 - 1.
        CHECK(*sel.entry(2).index == 5806079);
        CHECK_FALSE(sel.entry(2).modulus.has_value());  // ~1.2e8 bits, above the cap
        CHECK_FALSE(sel.entry(3).index.has_value());    // threshold not materializable
        CHECK(sel.entry(3).index_lb > BigInt("1000000000000"));
        CHECK(sel.entry(3).tail_certified);
        auto j = sel.to_json();
        CHECK(j["indices"][1] == "5806079");
        CHECK(j["indices"][2].is_null());
    }
    SUBCASE("window-checked list family") {
        std::vector<BigInt> mods{3};
        for (int i = 0; i < 19; ++i) mods.push_back(mods.back() * 9);
        auto ex = ModulusSequence::explicit_list(mods);
        auto sel = select_subsequence(ex, SelectionMode::Prop5, 1);
        CHECK(*sel.entry(1).index == 2);
        CHECK_FALSE(sel.entry(1).tail_certified);
        CHECK(sel.horizon > 0);
        CHECK_THROWS_AS(select_subsequence(ex, SelectionMode::Prop5, 2), GrowthTooSlowError);
    }
    SUBCASE("thm6 on the tower family") {
        auto sel = select_subsequence(tower(), SelectionMode::Thm6, 4);
        CHECK(*sel.entry(1).index == 2);
        CHECK(*sel.entry(2).index == 3);
        CHECK(*sel.entry(3).index == 4);
        CHECK(*sel.entry(4).index == 5);
        for (int k = 1; k <= 4; ++k) CHECK(sel.entry(k).modulus.has_value());
    }
}

TEST_CASE("theta(eta) construction") {
    auto sel = select_subsequence(fact2(), SelectionMode::Prop5, 3);

    auto zero = theta_of_eta(word({0, 0, 0}), sel);
    CHECK(zero.theta.is_zero());
    CHECK(zero.theta_exact);

    auto first = theta_of_eta(word({1}), sel);
    CHECK(first.theta.value() == BigRat(1, factorial(9)));
    // Next selected index is known: truncation bound is 2/m_{j_2}.
    CHECK(first.truncation_err == BigRat(2, factorial(17)));

    auto two = theta_of_eta(word({1, 1}), sel);
    CHECK(two.theta.value() == BigRat(1, factorial(9)) + BigRat(1, factorial(17)));

    CHECK_THROWS_AS(theta_of_eta(word({1, 1, 1, 1}), sel), SelectionTooShallowError);
}

TEST_CASE("distinct eta words give distinct points") {
    auto sel = select_subsequence(fact2(), SelectionMode::Prop5, 10);
    std::vector<BigRat> thetas;
    for (unsigned long w = 0; w < (1ul << 10); ++w) {
        std::vector<std::uint8_t> eta(10);
        for (int k = 0; k < 10; ++k) eta[k] = (w >> k) & 1;
        thetas.push_back(theta_of_eta(eta, sel).theta.value());
    }
    std::sort(thetas.begin(), thetas.end());
    for (size_t i = 1; i < thetas.size(); ++i) CHECK(thetas[i - 1] < thetas[i]);
}

TEST_CASE("pointwise bound on ||m_j theta(eta)||") {
    auto sel = select_subsequence(fact2(), SelectionMode::Prop5, 4);
    auto seq = fact2();
    for (unsigned long w = 0; w < 16; ++w) {
        std::vector<std::uint8_t> eta(4);
        for (int k = 0; k < 4; ++k) eta[k] = (w >> k) & 1;
        auto pt = theta_of_eta(eta, sel);
        for (long j = 1; j <= 40; ++j) {
            BigRat d = modone::dist_nearest_int(modone::times_int_mod1(pt.theta, seq->modulus(j)));
            CHECK(d <= mtheta_bound(sel, j));
            CHECK(d <= BigRat(1, 4));
        }
    }
}

TEST_CASE("summed square norms stay below the block majorant") {
    auto sel = select_subsequence(fact2(), SelectionMode::Prop5, 4);
    auto pt = theta_of_eta(word({1, 1, 1, 1}), sel);
    auto rep = spectral::h2_diagnostic(*fact2(), pt.theta, 70);

    BigRat block_majorant(0);
    for (int k = 1; k <= 4; ++k) {
        BigRat r(*sel.entry(k).prev_modulus, *sel.entry(k).modulus);
        r.canonicalize();
        block_majorant += 8 * r * r;
    }
    BigRat geo(0);
    for (int k = 1; k <= 4; ++k) geo += BigRat(1, pow_ui(4, k));

    CHECK(rep.total_exact < block_majorant);
    CHECK(block_majorant < geo);
    CHECK(geo < BigRat(85, 256) + BigRat(1, 1000000));
    CHECK(rep.apparently_bounded);

    // The tail majorant used by the limit evaluator matches the block sums.
    auto maj = eta_tail_majorant(pt);
    auto b8 = maj(8);
    REQUIRE(b8.has_value());
    BigRat expect = 8 * (BigRat(1, 17 * 17) + BigRat(1, 33 * 33) + BigRat(1, 65 * 65));
    CHECK(*b8 == expect);
    CHECK(*maj(64) == 0);
}

TEST_CASE("fourier coefficients of the fair-bit measure") {
    auto sel = select_subsequence(fact2(), SelectionMode::Prop5, 3);

    auto one = mu_hat(sel, 0, 3);
    CHECK(one.re.to_double() == 1.0);
    CHECK(one.im.to_double() == 0.0);

    // s divisible by every selected modulus.
    auto div = mu_hat(sel, factorial(33), 3);
    CHECK(div.re.to_double() == doctest::Approx(1.0).epsilon(1e-30));
    CHECK(std::abs(div.im.to_double()) < 1e-30);

    // s = m_{j_1}/2 kills the first factor.
    auto zero = mu_hat(sel, factorial(9) / 2, 1);
    CHECK(zero.abs().to_double() < 1e-70);
}

TEST_CASE("monte carlo cross-check of mu_hat") {
    auto sel = select_subsequence(fact2(), SelectionMode::Prop5, 3);

    auto exact0 = mu_hat_mc(sel, 0, 3, 1000, 42);
    CHECK(exact0.value.re.to_double() == 1.0);
    CHECK(exact0.std_err == 0.0);

    auto single = mu_hat_mc(sel, 12345, 3, 1, 7);
    CHECK(single.value.abs().to_double() == doctest::Approx(1.0).epsilon(1e-30));

    // Determinism: same seed, same estimate.
    auto a = mu_hat_mc(sel, 98017920, 3, 4096, 5);
    auto b = mu_hat_mc(sel, 98017920, 3, 4096, 5);
    CHECK(a.value.identical(b.value));

    int failures = 0, runs = 0;
    for (BigInt s : {BigInt(1), BigInt(12345), BigInt(362880), BigInt(98017920)}) {
        Complex exact = mu_hat(sel, s, 3);
        for (std::uint64_t seed = 1; seed <= 12; ++seed) {
            auto mc = mu_hat_mc(sel, s, 3, 4096, seed);
            Complex diff = mc.value - exact;
            double d = diff.abs().to_double();
            ++runs;
            if (d > 4 * mc.std_err + 1e-30) ++failures;
        }
    }
    CHECK(runs == 48);
    CHECK(failures <= 1);  // 4-sigma misses should be rare
}

TEST_CASE("wiener averages") {
    auto seq = fact2();
    auto sel = select_subsequence(seq, SelectionMode::Prop5, 3);

    auto trivial = wiener_average(*seq, sel, 50, 0);
    CHECK(trivial.mean_coeff.re.to_double() == 1.0);
    CHECK(trivial.mean_sq.to_double() == 1.0);

    for (long long N : {81, 729}) {
        auto est = wiener_average(*seq, sel, N, 3);
        CHECK(est.mean_sq.to_double() >= est.mean_coeff.norm2().to_double() - 1e-15);
        CHECK(est.mean_sq.to_double() > 0);
    }

    // Exhaustive eta-average of the limit values as the oracle for the mean
    // coefficient at finite N.
    spectral::LimitPolicy policy;
    double expectL = 0;
    for (unsigned long w = 0; w < 8; ++w) {
        std::vector<std::uint8_t> eta(3);
        for (int k = 0; k < 3; ++k) eta[k] = (w >> k) & 1;
        auto pt = theta_of_eta(eta, sel);
        auto L = spectral::limit_L(*seq, pt.theta, policy);
        REQUIRE(L.cls == spectral::SpectralClass::PositiveConverged);
        expectL += L.value;
    }
    expectL /= 8;
    CHECK(expectL > 0.85);

    auto est = wiener_average(*seq, sel, 6561, 3);
    CHECK(std::abs(est.mean_coeff.re.to_double() - expectL) < 0.04);
    CHECK(std::abs(est.mean_coeff.im.to_double()) < 0.01);

    // Monte-Carlo variant: deterministic and consistent with the exact rows.
    auto mc1 = wiener_average_mc(*seq, sel, 729, 3, 8192, 11);
    auto mc2 = wiener_average_mc(*seq, sel, 729, 3, 8192, 11);
    CHECK(mc1.mean_coeff.identical(mc2.mean_coeff));
    auto exact729 = wiener_average(*seq, sel, 729, 3);
    Complex diff = mc1.mean_coeff - exact729.mean_coeff;
    CHECK(diff.abs().to_double() <= 5 * mc1.std_err + 1e-12);
    CHECK(mc1.mean_sq.to_double() >= mc1.mean_coeff.norm2().to_double() - 1e-12);
}

TEST_CASE("orbit-distribution coefficients approach 1 along the selection") {
    auto seq = tower();
    auto sel = select_subsequence(seq, SelectionMode::Thm6, 4);
    auto pt = theta_of_eta(word({1, 1, 1, 1}), sel);
    REQUIRE(pt.theta_exact);

    spectral::LimitPolicy policy;
    auto at0 = nu_hat(*seq, pt.theta, 0, policy);
    CHECK(at0.value == 1.0);
    CHECK(at0.cls == spectral::SpectralClass::PositiveConverged);

    double prev = 0;
    for (int n = 1; n <= 3; ++n) {
        auto nu = nu_hat(*seq, pt.theta, *sel.entry(n).modulus, policy);
        CHECK(nu.cls == spectral::SpectralClass::PositiveConverged);
        CHECK(std::abs(nu.value) <= 1.0 + 1e-15);
        CHECK(nu.value > prev);
        prev = nu.value;
    }
    CHECK(prev > 0.99);

    SplitMix64 rng(29);
    for (int i = 0; i < 10; ++i) {
        auto nu = nu_hat(*seq, pt.theta, BigInt(rng.next() % 1000000), policy);
        CHECK(std::abs(nu.value) <= 1.0 + 1e-15);
    }
}

TEST_CASE("dirichlet report, exact route on the tower family") {
    auto seq = tower();
    auto sel = select_subsequence(seq, SelectionMode::Thm6, 4);
    auto pt = theta_of_eta(word({1, 1, 1, 1}), sel);
    auto rows = dirichlet_check(pt, 3);
    REQUIRE(rows.size() == 3);

    spectral::LimitPolicy policy;
    double prev_lower = 0, prev_value = 0;
    for (const auto& row : rows) {
        CHECK(row.exact);
        CHECK(row.tail_sum < row.tail_bound);
        CHECK(row.L_lower > prev_lower);
        CHECK(row.L_value > prev_value);
        CHECK(row.L_lower <= row.L_value + 1e-12);
        prev_lower = row.L_lower;
        prev_value = row.L_value;
        // The reported value matches an independent limit evaluation.
        auto nu = nu_hat(*seq, pt.theta, *sel.entry(row.n).modulus, policy);
        CHECK(std::abs(nu.value - row.L_value) < 1e-9);
    }
    CHECK(rows[2].L_value > 0.99);

    CHECK_THROWS_AS(dirichlet_check(pt, 5), SelectionTooShallowError);

    auto zeros = theta_of_eta(word({0, 0, 0, 0}), sel);
    auto zrows = dirichlet_check(zeros, 3);
    for (const auto& row : zrows) {
        CHECK(row.tail_sum == 0);
        CHECK(row.L_value == 1.0);
    }
}

TEST_CASE("dirichlet certified bounds dominate the exact sums") {
    auto seq = tower();
    auto sel = select_subsequence(seq, SelectionMode::Thm6, 4);
    auto pt = theta_of_eta(word({1, 1, 1, 1}), sel);
    auto exact_rows = dirichlet_check(pt, 3);

    // Strip the materialized values; keep only the certified chain data.
    SubsequenceSelection stripped = sel;
    for (auto& e : stripped.entries) {
        BigInt lb = e.modulus ? *e.modulus : e.modulus_lb;
        e.modulus = std::nullopt;
        e.prev_modulus = std::nullopt;
        e.modulus_lb = lb;
    }
    EtaPoint blind = pt;
    blind.sel = stripped;
    blind.theta_exact = false;
    auto bound_rows = dirichlet_check(blind, 3);

    for (int i = 0; i < 3; ++i) {
        CHECK_FALSE(bound_rows[i].exact);
        CHECK(exact_rows[i].tail_sum <= bound_rows[i].tail_sum);
        CHECK(bound_rows[i].tail_sum < bound_rows[i].tail_bound);
        CHECK(bound_rows[i].L_lower <= exact_rows[i].L_lower + 1e-12);
    }
}

TEST_CASE("dirichlet report on the factorial family") {
    auto seq = fact2();
    auto sel = select_subsequence(seq, SelectionMode::Thm6, 4);
    auto pt = theta_of_eta(word({1, 1, 1, 1}), sel);
    auto rows = dirichlet_check(pt, 3);
    REQUIRE(rows.size() == 3);

    // Certified bounds derived from the selection thresholds alone:
    // row 1: 8/4^4 (1/81 + 1) + tiny; row 2: 8/4^5; row 3: 8/4^6.
    CHECK(Real::of_rat(rows[0].tail_sum - BigRat(41, 1296), 128).abs().to_double() < 1e-12);
    CHECK(Real::of_rat(rows[1].tail_sum - BigRat(1, 128), 128).abs().to_double() < 1e-12);
    CHECK(Real::of_rat(rows[2].tail_sum - BigRat(1, 512), 128).abs().to_double() < 1e-12);

    CHECK(rows[0].L_lower == doctest::Approx(0.583683).epsilon(1e-4));
    CHECK(rows[1].L_lower == doctest::Approx(0.897192).epsilon(1e-4));
    CHECK(rows[2].L_lower == doctest::Approx(0.974298).epsilon(1e-4));
    CHECK(rows[2].L_lower >= 0.97);

    for (const auto& row : rows) {
        CHECK(row.tail_sum < row.tail_bound);
        CHECK_FALSE(row.exact);
    }
}
