#include <doctest.h>

#include <cmath>

#include "goodseq/measures.hpp"
#include "goodseq/spectral.hpp"

using namespace goodseq;
using namespace goodseq::spectral;
using goodseq::lacunary::ModulusSequence;
using goodseq::modone::Angle;

namespace {

std::shared_ptr<ModulusSequence> geo3() { return ModulusSequence::geometric(3); }
std::shared_ptr<ModulusSequence> fact2() { return ModulusSequence::factorial_shift(2); }

// Independent product oracle: exact rational reduction done with plain
// mpq arithmetic here, cosines through libm doubles.
double product_oracle(const ModulusSequence& m, const BigRat& theta, int K) {
    double prod = 1.0;
    for (int j = 1; j <= K; ++j) {
        BigRat t = frac_part(BigRat(m.modulus(j)) * theta);
        double td = t.get_d();
        prod *= (1.0 + 2.0 * std::cos(2.0 * M_PI * td)) / 3.0;
    }
    return prod;
}

Angle theta_111() {
    BigRat t = BigRat(1, factorial(9)) + BigRat(1, factorial(17)) + BigRat(1, factorial(33));
    return Angle::rational(t);
}

}  // namespace

TEST_CASE("partial products") {
    auto ones = partial_products(*geo3(), Angle::rational(0, 1), 6);
    for (const auto& v : ones) CHECK(v.to_double() == 1.0);

    auto z = partial_products(*geo3(), Angle::rational(1, 9), 5);
    CHECK(z[0].to_double() == 1.0);
    for (int k = 1; k < 5; ++k) CHECK(z[k].is_zero());

    auto w = partial_products(*geo3(), Angle::rational(1, 27), 3);
    CHECK(w[0].to_double() == 1.0);
    // (1 + 2 cos(2 pi / 9)) / 3
    CHECK(w[1].to_double() == doctest::Approx(0.84402962874598537).epsilon(1e-14));
    CHECK(w[2].is_zero());
}

TEST_CASE("partial product range invariant") {
    SplitMix64 rng(3);
    for (int i = 0; i < 20; ++i) {
        BigInt q = 2 + rng.next() % 999;
        BigInt p = rng.next() % q.get_ui();
        auto fam = (i % 2) ? geo3() : fact2();
        auto L = partial_products(*fam, Angle::rational(p, q), 16);
        CHECK(L[0].to_double() == 1.0);
        for (size_t k = 1; k < L.size(); ++k) {
            CHECK(L[k].to_double() <= 1.0 + 1e-30);
            CHECK(L[k].to_double() >= -1.0 / 3.0 - 1e-30);
        }
    }
}

TEST_CASE("limit function classification") {
    LimitPolicy policy;

    auto one = limit_L(*geo3(), Angle::rational(0, 1), policy);
    CHECK(one.cls == SpectralClass::PositiveConverged);
    CHECK(one.value == 1.0);

    auto third = limit_L(*geo3(), Angle::rational(1, 3), policy);
    CHECK(third.cls == SpectralClass::PositiveConverged);
    CHECK(third.value == 1.0);

    auto ninth = limit_L(*geo3(), Angle::rational(1, 9), policy);
    CHECK(ninth.cls == SpectralClass::ZeroExact);
    CHECK(ninth.value == 0.0);

    auto half = limit_L(*geo3(), Angle::rational(1, 2), policy);
    CHECK(half.cls == SpectralClass::ZeroByNonpositiveFactors);
    CHECK(half.value == 0.0);
    CHECK(half.tail_bound <= policy.tail_tol * 2);

    // theta(1,1,1) over the factorial family: integral tail from j = 31.
    auto pos = limit_L(*fact2(), theta_111(), policy);
    CHECK(pos.cls == SpectralClass::PositiveConverged);
    CHECK(pos.truncation_k == 31);
    CHECK(pos.value > 0.5);
    CHECK(pos.value == doctest::Approx(product_oracle(*fact2(), theta_111().value(), 40))
                           .epsilon(1e-9));

    // Without a usable horizon the result is an honest truncation.
    Angle awkward = Angle::rational(1000003, 2000033);  // prime-ish denominator
    auto trunc = limit_L(*geo3(), awkward, LimitPolicy{8, 1e-12, 256});
    CHECK(trunc.cls == SpectralClass::Truncated);
}

TEST_CASE("direct averages, exact path") {
    EvalPolicy ep;
    auto est = direct_average(*geo3(), Angle::rational(0, 1), 57, ep);
    CHECK(est.average.re.to_double() == 1.0);
    CHECK(est.average.im.to_double() == 0.0);

    auto third = direct_average(*geo3(), Angle::rational(1, 3), 100, ep);
    CHECK(third.average.re.to_double() == 1.0);

    auto half = direct_average(*geo3(), Angle::rational(1, 2), 4, ep);
    CHECK(half.sum.re.is_zero());
    CHECK(half.sum.im.is_zero());
}

TEST_CASE("block decomposition equals direct summation") {
    EvalPolicy ep;

    auto b0 = block_average(*geo3(), Angle::rational(0, 1), 13, ep);
    CHECK(b0.sum.re.to_double() == 13.0);
    CHECK(b0.sum.im.to_double() == 0.0);

    auto bh = block_average(*geo3(), Angle::rational(1, 2), 4, ep);
    auto dh = direct_average(*geo3(), Angle::rational(1, 2), 4, ep);
    CHECK(bh.sum.identical(dh.sum));

    // Random rational angles: bit-for-bit equality on the dense path.
    SplitMix64 rng(17);
    for (int i = 0; i < 40; ++i) {
        std::shared_ptr<ModulusSequence> fam;
        switch (i % 4) {
            case 0: fam = ModulusSequence::geometric(3 + rng.next() % 7); break;
            case 1: fam = ModulusSequence::factorial_shift(1 + rng.next() % 3); break;
            case 2: fam = ModulusSequence::custom(2, [](long j) { return two_pow(2 * j + 1); }); break;
            default: fam = ModulusSequence::explicit_list({BigInt(4), BigInt(16), BigInt(64),
                                                           BigInt(256), BigInt(1024), BigInt(4096),
                                                           BigInt(16384), BigInt(65536)});
        }
        BigInt q = 2 + rng.next() % 1999;
        BigInt p = rng.next() % q.get_ui();
        long long N = 1 + static_cast<long long>(rng.next() % 3000);
        if (i % 4 == 3) N = std::min<long long>(N, 3280);  // finite family
        Angle t = Angle::rational(p, q);
        auto d = direct_average(*fam, t, N, ep);
        auto b = block_average(*fam, t, N, ep);
        CHECK(d.sum.identical(b.sum));
        CHECK(d.average.identical(b.average));
    }

    // Factorial family, denominator up to 10^4, N = 10^4.
    auto d = direct_average(*fact2(), Angle::rational(7919, 9973), 10000, ep);
    auto b = block_average(*fact2(), Angle::rational(7919, 9973), 10000, ep);
    CHECK(d.sum.identical(b.sum));

    // Dyadic angles use the per-term route; agreement within stated error.
    SplitMix64 rng2(23);
    for (int i = 0; i < 5; ++i) {
        BigInt mant = 0;
        for (int w = 0; w < 4; ++w) mant = (mant << 64) + rng2.next();
        Angle t = Angle::dyadic(mant, 256);
        long long N = 500 + static_cast<long long>(rng2.next() % 1500);
        auto dd = direct_average(*fact2(), t, N, ep);
        auto bb = block_average(*fact2(), t, N, ep);
        Complex diff = dd.average - bb.average;
        CHECK(diff.abs().to_double() <= dd.err + bb.err);
        CHECK(diff.abs().to_double() <= 1e-12);
    }
}

TEST_CASE("circle subgroup diagnostics") {
    auto zero = h2_diagnostic(*geo3(), Angle::rational(1, 3), 20);
    CHECK(zero.total_exact == 0);
    CHECK(zero.apparently_bounded);

    auto div = h2_diagnostic(*geo3(), Angle::rational(1, 2), 20);
    CHECK(div.total_exact == BigRat(20, 4));
    CHECK_FALSE(div.apparently_bounded);
    CHECK(div.flag_value == doctest::Approx(0.25));
}

TEST_CASE("weyl sanity at a generic dyadic angle") {
    Real sqrt2(256);
    mpfr_sqrt_ui(sqrt2.raw(), 2, MPFR_RNDN);
    mpfr_sub_ui(sqrt2.raw(), sqrt2.raw(), 1, MPFR_RNDN);
    Angle t = Angle::dyadic_of_real(sqrt2, 256);

    auto rep = h2_diagnostic(*geo3(), t, 40);
    CHECK_FALSE(rep.apparently_bounded);

    auto est = direct_average(*geo3(), t, 59049, {});
    CHECK(est.average.abs().to_double() < 0.1);
}

TEST_CASE("finite-N averages settle toward the limit value") {
    LimitPolicy policy;
    auto L = limit_L(*fact2(), theta_111(), policy);
    REQUIRE(L.cls == SpectralClass::PositiveConverged);
    double prev = 2.0;
    for (long long N : {81, 729, 6561, 59049}) {
        auto est = direct_average(*fact2(), theta_111(), N, {});
        Complex delta = est.average;
        delta.re -= Real::of_double(L.value);
        double d = delta.abs().to_double();
        CHECK(d <= prev * 1.05 + 1e-9);
        prev = d;
    }
}

TEST_CASE("spectrum scan") {
    std::vector<Angle> grid;
    for (int i = 0; i < 27; ++i) grid.push_back(Angle::rational(i, 27));

    ScanPolicy policy;
    policy.threads = 2;
    auto rows = spectrum_scan(*geo3(), grid, policy);
    REQUIRE(rows.size() == 27);
    int nonzero = 0;
    for (int i = 0; i < 27; ++i) {
        REQUIRE(rows[i].value.has_value());
        if (rows[i].value->value != 0.0) {
            ++nonzero;
            CHECK(i % 9 == 0);  // multiples of 1/3
            CHECK(rows[i].value->cls == SpectralClass::PositiveConverged);
        } else {
            CHECK(rows[i].value->cls == SpectralClass::ZeroExact);
        }
    }
    CHECK(nonzero == 3);

    // Deterministic output across thread counts.
    policy.navg = 100;
    policy.check_blocks = true;
    auto r1 = spectrum_scan(*geo3(), grid, policy);
    policy.threads = 7;
    auto r7 = spectrum_scan(*geo3(), grid, policy);
    REQUIRE(r1.size() == r7.size());
    for (size_t i = 0; i < r1.size(); ++i) {
        CHECK(r1[i].value->value == r7[i].value->value);
        CHECK(r1[i].avg->sum.identical(r7[i].avg->sum));
        CHECK(r1[i].block_matches);
        CHECK(r7[i].block_matches);
    }

    // Per-row failures are captured, not fatal.
    std::vector<Angle> mixed{Angle::rational(0, 1), Angle::dyadic(BigInt(123456789), 64)};
    auto rows2 = spectrum_scan(*geo3(), mixed, ScanPolicy{});
    CHECK_FALSE(rows2[0].error.has_value());
    CHECK(rows2[1].error.has_value());
}
