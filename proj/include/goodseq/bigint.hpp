#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace goodseq {

using BigInt = mpz_class;
using BigRat = mpq_class;

// Number of bits in |z|; bit_length(0) == 0.
inline long bit_length(const BigInt& z) {
    if (z == 0) return 0;
    return static_cast<long>(mpz_sizeinbase(z.get_mpz_t(), 2));
}

inline BigInt pow_ui(const BigInt& base, unsigned long e) {
    BigInt r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

inline BigInt pow3(unsigned long k) { return pow_ui(3, k); }

inline BigInt two_pow(unsigned long k) {
    BigInt r = 1;
    r <<= k;
    return r;
}

inline BigInt factorial(unsigned long n) {
    BigInt r;
    mpz_fac_ui(r.get_mpz_t(), n);
    return r;
}

// Floor mod: result in [0, m), m > 0.
inline BigInt mod_floor(const BigInt& a, const BigInt& m) {
    BigInt r;
    mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

// Reduce a rational into [0, 1) (subtract the floor).
inline BigRat frac_part(const BigRat& x) {
    BigInt fl;
    mpz_fdiv_q(fl.get_mpz_t(), x.get_num().get_mpz_t(), x.get_den().get_mpz_t());
    BigRat r = x - BigRat(fl);
    r.canonicalize();
    return r;
}

inline std::string to_dec(const BigInt& z) { return z.get_str(); }

// SplitMix64. Deterministic across platforms; used for all seeded sampling.
// Every Monte-Carlo task derives its own stream as SplitMix64(seed ^ golden*task).
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t task_seed(std::uint64_t seed, std::uint64_t task_index) {
        SplitMix64 g(seed ^ (0x9e3779b97f4a7c15ULL * (task_index + 1)));
        return g.next();
    }

  private:
    std::uint64_t state_;
};

}  // namespace goodseq
