#pragma once

#include <mpfr.h>

#include <string>
#include <utility>

#include "goodseq/bigint.hpp"

namespace goodseq {

// Thin RAII wrapper around mpfr_t. Every value carries its own precision;
// binary operations round to the larger of the two operand precisions
// (MPFR_RNDN unless stated otherwise). All operations are deterministic,
// which the CLI byte-identical-output contract relies on.
class Real {
  public:
    static constexpr mpfr_prec_t kDefaultPrec = 256;

    explicit Real(mpfr_prec_t prec = kDefaultPrec) {
        mpfr_init2(v_, prec);
        mpfr_set_zero(v_, 1);
    }
    Real(const Real& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    Real(Real&& o) noexcept {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_swap(v_, o.v_);
    }
    Real& operator=(const Real& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    Real& operator=(Real&& o) noexcept {
        if (this != &o) mpfr_swap(v_, o.v_);
        return *this;
    }
    ~Real() { mpfr_clear(v_); }

    static Real of_long(long x, mpfr_prec_t prec = kDefaultPrec) {
        Real r(prec);
        mpfr_set_si(r.v_, x, MPFR_RNDN);
        return r;
    }
    static Real of_double(double x, mpfr_prec_t prec = kDefaultPrec) {
        Real r(prec);
        mpfr_set_d(r.v_, x, MPFR_RNDN);
        return r;
    }
    static Real of_int(const BigInt& z, mpfr_prec_t prec = kDefaultPrec) {
        Real r(prec);
        mpfr_set_z(r.v_, z.get_mpz_t(), MPFR_RNDN);
        return r;
    }
    static Real of_rat(const BigRat& q, mpfr_prec_t prec = kDefaultPrec,
                       mpfr_rnd_t rnd = MPFR_RNDN) {
        Real r(prec);
        mpfr_set_q(r.v_, q.get_mpq_t(), rnd);
        return r;
    }
    static Real pi(mpfr_prec_t prec = kDefaultPrec, mpfr_rnd_t rnd = MPFR_RNDN) {
        Real r(prec);
        mpfr_const_pi(r.v_, rnd);
        return r;
    }

    mpfr_prec_t prec() const { return mpfr_get_prec(v_); }
    mpfr_ptr raw() { return v_; }
    mpfr_srcptr raw() const { return v_; }

    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    // Fixed significant-digit decimal rendering ("%.<sig>Rg").
    std::string str(int sig_digits = 17) const;

    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }

    Real& operator+=(const Real& o) {
        grow(o.prec());
        mpfr_add(v_, v_, o.v_, MPFR_RNDN);
        return *this;
    }
    Real& operator-=(const Real& o) {
        grow(o.prec());
        mpfr_sub(v_, v_, o.v_, MPFR_RNDN);
        return *this;
    }
    Real& operator*=(const Real& o) {
        grow(o.prec());
        mpfr_mul(v_, v_, o.v_, MPFR_RNDN);
        return *this;
    }
    Real& operator/=(const Real& o) {
        grow(o.prec());
        mpfr_div(v_, v_, o.v_, MPFR_RNDN);
        return *this;
    }

    friend Real operator+(Real a, const Real& b) { return a += b; }
    friend Real operator-(Real a, const Real& b) { return a -= b; }
    friend Real operator*(Real a, const Real& b) { return a *= b; }
    friend Real operator/(Real a, const Real& b) { return a /= b; }

    Real operator-() const {
        Real r(prec());
        mpfr_neg(r.v_, v_, MPFR_RNDN);
        return r;
    }
    Real abs() const {
        Real r(prec());
        mpfr_abs(r.v_, v_, MPFR_RNDN);
        return r;
    }

    Real& mul_si(long x) {
        mpfr_mul_si(v_, v_, x, MPFR_RNDN);
        return *this;
    }
    Real& div_si(long x) {
        mpfr_div_si(v_, v_, x, MPFR_RNDN);
        return *this;
    }
    Real& div_ull(unsigned long long x) {
        mpfr_div_ui(v_, v_, static_cast<unsigned long>(x), MPFR_RNDN);
        return *this;
    }
    Real& mul_int(const BigInt& z) {
        mpfr_mul_z(v_, v_, z.get_mpz_t(), MPFR_RNDN);
        return *this;
    }

    int cmp(const Real& o) const { return mpfr_cmp(v_, o.v_); }
    int cmp(double x) const { return mpfr_cmp_d(v_, x); }
    friend bool operator<(const Real& a, const Real& b) { return a.cmp(b) < 0; }
    friend bool operator<=(const Real& a, const Real& b) { return a.cmp(b) <= 0; }
    friend bool operator>(const Real& a, const Real& b) { return a.cmp(b) > 0; }
    friend bool operator>=(const Real& a, const Real& b) { return a.cmp(b) >= 0; }
    friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }

  private:
    void grow(mpfr_prec_t p) {
        if (p > prec()) mpfr_prec_round(v_, p, MPFR_RNDN);
    }
    mpfr_t v_;
};

struct Complex {
    Real re, im;

    explicit Complex(mpfr_prec_t prec = Real::kDefaultPrec) : re(prec), im(prec) {}
    Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}

    static Complex one(mpfr_prec_t prec) {
        Complex c(prec);
        mpfr_set_ui(c.re.raw(), 1, MPFR_RNDN);
        return c;
    }

    Complex& operator+=(const Complex& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    Complex& operator-=(const Complex& o) {
        re -= o.re;
        im -= o.im;
        return *this;
    }
    friend Complex operator+(Complex a, const Complex& b) { return a += b; }
    friend Complex operator-(Complex a, const Complex& b) { return a -= b; }
    friend Complex operator*(const Complex& a, const Complex& b) {
        Complex r(std::max(a.re.prec(), b.re.prec()));
        r.re = a.re * b.re - a.im * b.im;
        r.im = a.re * b.im + a.im * b.re;
        return r;
    }

    Complex conj() const {
        Complex r = *this;
        r.im = -r.im;
        return r;
    }
    Real norm2() const { return re * re + im * im; }
    Real abs() const {
        Real r(re.prec());
        Real n = norm2();
        mpfr_sqrt(r.raw(), n.raw(), MPFR_RNDN);
        return r;
    }
    Complex& scale_si(long x) {
        re.mul_si(x);
        im.mul_si(x);
        return *this;
    }
    Complex& scale(const Real& x) {
        re *= x;
        im *= x;
        return *this;
    }
    Complex& div_ull(unsigned long long x) {
        re.div_ull(x);
        im.div_ull(x);
        return *this;
    }

    bool identical(const Complex& o) const { return re == o.re && im == o.im; }
};

}  // namespace goodseq
