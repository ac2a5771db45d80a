#include "goodseq/angle.hpp"

#include <nlohmann/json.hpp>

#include "goodseq/errors.hpp"

namespace goodseq::modone {

Angle Angle::rational(const BigInt& p, const BigInt& q) {
    if (q == 0) throw ConfigError("angle denominator must be nonzero");
    return rational(BigRat(p, q));
}

Angle Angle::rational(const BigRat& v) {
    Angle a;
    a.kind_ = AngleKind::Rational;
    BigRat r = v;
    r.canonicalize();
    a.value_ = frac_part(r);
    return a;
}

Angle Angle::dyadic(const BigInt& mantissa, long bits) {
    return dyadic(mantissa, bits, bits);
}

Angle Angle::dyadic(const BigInt& mantissa, long bits, long effective_bits) {
    if (bits < 64) throw ConfigError("dyadic angle needs >= 64 bits");
    Angle a;
    a.kind_ = AngleKind::Dyadic;
    a.bits_ = bits;
    a.eff_bits_ = effective_bits;
    BigInt m = mod_floor(mantissa, two_pow(bits));
    a.value_ = BigRat(m, two_pow(bits));
    a.value_.canonicalize();
    return a;
}

Angle Angle::dyadic_of_real(const Real& x, long bits) {
    Real scaled = x;
    mpfr_mul_2exp(scaled.raw(), scaled.raw(), bits, MPFR_RNDN);
    BigInt m;
    mpfr_get_z(m.get_mpz_t(), scaled.raw(), MPFR_RNDD);
    return dyadic(m, bits);
}

Angle Angle::parse(const std::string& text) {
    auto slash = text.find('/');
    try {
        if (slash != std::string::npos) {
            BigInt p(text.substr(0, slash));
            BigInt q(text.substr(slash + 1));
            return rational(p, q);
        }
        auto dot = text.find('.');
        if (dot != std::string::npos) {
            std::string digits = text.substr(0, dot) + text.substr(dot + 1);
            long frac_len = static_cast<long>(text.size() - dot - 1);
            if (digits.empty()) throw ConfigError("empty angle literal");
            BigInt p(digits);
            return rational(p, pow_ui(10, frac_len));
        }
        return rational(BigInt(text), 1);
    } catch (const std::invalid_argument&) {
        throw ConfigError("cannot parse angle: " + text);
    }
}

BigInt Angle::mantissa() const {
    if (kind_ != AngleKind::Dyadic) throw ConfigError("not a dyadic angle");
    BigInt m = value_.get_num() * (two_pow(bits_) / value_.get_den());
    return m;
}

std::string Angle::repr() const {
    if (kind_ == AngleKind::Rational)
        return value_.get_num().get_str() + "/" + value_.get_den().get_str();
    return "dyadic(0x" + mantissa().get_str(16) + ":" + std::to_string(bits_) + ")";
}

Angle times_int_mod1(const Angle& theta, const BigInt& s) {
    if (s < 0) throw ConfigError("times_int_mod1 needs s >= 0");
    if (theta.kind() == AngleKind::Rational) {
        const BigRat& v = theta.value();
        BigInt p = mod_floor(s * v.get_num(), v.get_den());
        return Angle::rational(p, v.get_den());
    }
    long need = bit_length(s) + 64;
    if (theta.bits() < need)
        throw InsufficientPrecisionError(
            "dyadic angle has " + std::to_string(theta.bits()) +
            " bits, multiplier needs >= " + std::to_string(need));
    BigInt m = mod_floor(s * theta.mantissa(), two_pow(theta.bits()));
    return Angle::dyadic(m, theta.bits(), theta.effective_bits() - bit_length(s));
}

BigRat dist_nearest_int(const Angle& t) {
    const BigRat& v = t.value();  // already in [0,1)
    BigRat other = BigRat(1) - v;
    return v <= other ? v : other;
}

Real cos_2pi(const BigRat& t, mpfr_prec_t prec) {
    // t = 0 and t = 1/2 evaluate exactly; elsewhere multiply by 2*pi with
    // guard bits, giving |err| <= 2^-(prec+20)-ish, well under the advertised
    // 2^-(prec-8).
    if (t == 0) return Real::of_long(1, prec);
    if (t.get_den() == 2) return Real::of_long(-1, prec);
    mpfr_prec_t work = prec + 32;
    Real arg = Real::of_rat(t, work);
    Real tau = Real::pi(work);
    mpfr_mul_2exp(tau.raw(), tau.raw(), 1, MPFR_RNDN);
    arg *= tau;
    Real out(prec);
    mpfr_cos(out.raw(), arg.raw(), MPFR_RNDN);
    return out;
}

void unit_exp_rat(const BigRat& t, mpfr_prec_t prec, Complex* out) {
    out->re = Real(prec);
    out->im = Real(prec);
    if (t == 0) {
        mpfr_set_ui(out->re.raw(), 1, MPFR_RNDN);
        return;
    }
    if (t.get_den() == 2) {  // t = 1/2
        mpfr_set_si(out->re.raw(), -1, MPFR_RNDN);
        return;
    }
    if (t.get_den() == 4) {  // t = 1/4 or 3/4
        mpfr_set_si(out->im.raw(), t.get_num() == 1 ? 1 : -1, MPFR_RNDN);
        return;
    }
    mpfr_prec_t work = prec + 32;
    Real arg = Real::of_rat(t, work);
    Real tau = Real::pi(work);
    mpfr_mul_2exp(tau.raw(), tau.raw(), 1, MPFR_RNDN);
    arg *= tau;
    Real s(prec), c(prec);
    mpfr_sin_cos(s.raw(), c.raw(), arg.raw(), MPFR_RNDN);
    out->re = std::move(c);
    out->im = std::move(s);
}

BoundedComplex unit_exp(const Angle& t, mpfr_prec_t prec) {
    BoundedComplex r{Complex(prec), 0.0};
    unit_exp_rat(t.value(), prec, &r.value);
    r.err = std::ldexp(1.0, -static_cast<int>(prec) + 8);
    return r;
}

nlohmann::json angle_to_json(const Angle& a) {
    nlohmann::json j;
    if (a.kind() == AngleKind::Rational) {
        j["rational"] = {a.numerator().get_str(), a.denominator().get_str()};
    } else {
        j["dyadic"] = {{"mantissa_hex", a.mantissa().get_str(16)},
                       {"bits", a.bits()}};
    }
    return j;
}

Angle angle_from_json(const nlohmann::json& j) {
    if (j.contains("rational")) {
        const auto& arr = j.at("rational");
        return Angle::rational(BigInt(arr.at(0).get<std::string>()),
                               BigInt(arr.at(1).get<std::string>()));
    }
    if (j.contains("dyadic")) {
        const auto& d = j.at("dyadic");
        BigInt m;
        if (m.set_str(d.at("mantissa_hex").get<std::string>(), 16) != 0)
            throw ConfigError("bad dyadic mantissa");
        return Angle::dyadic(m, d.at("bits").get<long>());
    }
    throw ConfigError("angle JSON needs 'rational' or 'dyadic'");
}

}  // namespace goodseq::modone
