#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "goodseq/bigint.hpp"
#include "goodseq/real.hpp"

// Exact arithmetic on the circle R/Z. A point is held as a reduced rational
// in [0, 1). The two representations differ only in contract: a Rational is
// exact ground truth, a Dyadic (mantissa / 2^bits) stands in for a real
// number known to `bits` binary digits, and integer multiplication consumes
// effective bits that callers can audit.

namespace goodseq::modone {

enum class AngleKind { Rational, Dyadic };

class Angle {
  public:
    // Zero angle (rational).
    Angle() : kind_(AngleKind::Rational), value_(0), bits_(0), eff_bits_(0) {}

    // p/q reduced mod 1. q must be nonzero; sign and excess integer part are
    // normalized away.
    static Angle rational(const BigInt& p, const BigInt& q);
    static Angle rational(const BigRat& v);
    // mantissa / 2^bits with mantissa reduced mod 2^bits. bits >= 64.
    static Angle dyadic(const BigInt& mantissa, long bits);
    static Angle dyadic(const BigInt& mantissa, long bits, long effective_bits);
    // Nearest dyadic at `bits` below an arbitrary MPFR value (used by tests
    // and the CLI to make irrational-looking inputs).
    static Angle dyadic_of_real(const Real& x, long bits);
    // Decimal string: "p/q", "0.375", or an integer. Always exact rational.
    static Angle parse(const std::string& text);

    AngleKind kind() const { return kind_; }
    bool is_rational() const { return kind_ == AngleKind::Rational; }
    // Reduced value in [0,1); exact for both representations.
    const BigRat& value() const { return value_; }
    const BigInt& numerator() const { return value_.get_num(); }
    const BigInt& denominator() const { return value_.get_den(); }

    // Dyadic metadata.
    long bits() const { return bits_; }
    long effective_bits() const { return eff_bits_; }
    BigInt mantissa() const;

    bool is_zero() const { return value_ == 0; }
    // Short exact rendering: "p/q" or "dyadic(<hex>,<bits>)".
    std::string repr() const;

    friend bool operator==(const Angle& a, const Angle& b) {
        return a.value_ == b.value_;
    }

  private:
    AngleKind kind_;
    BigRat value_;
    long bits_;
    long eff_bits_;
};

// theta * s mod 1. Exact on both paths. For a Dyadic input the precondition
// bits >= bit_length(s) + 64 is enforced (InsufficientPrecisionError
// otherwise) and the effective-bit budget is reduced by bit_length(s).
Angle times_int_mod1(const Angle& theta, const BigInt& s);

// Distance to the nearest integer, min(t, 1-t). Exact.
BigRat dist_nearest_int(const Angle& t);

struct BoundedComplex {
    Complex value;
    double err;  // absolute error bound; |value| <= 1 + err
};

// e^{2 pi i t} at the given working precision. err <= 2^-(prec-8).
BoundedComplex unit_exp(const Angle& t, mpfr_prec_t prec = Real::kDefaultPrec);

// Same evaluation for a raw rational in [0,1) without an Angle wrapper.
void unit_exp_rat(const BigRat& t, mpfr_prec_t prec, Complex* out);

// cos(2 pi t). t any exact rational.
Real cos_2pi(const BigRat& t, mpfr_prec_t prec);

// {"rational": ["p","q"]} or {"dyadic": {"mantissa_hex": "...", "bits": n}}.
nlohmann::json angle_to_json(const Angle& a);
Angle angle_from_json(const nlohmann::json& j);

}  // namespace goodseq::modone
