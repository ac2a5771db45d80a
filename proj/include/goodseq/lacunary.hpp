#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "goodseq/bigint.hpp"
#include "goodseq/errors.hpp"

// Lacunary modulus families m_1 < m_2 < ... with m_{j+1}/m_j >= 3, and the
// increasing integer sequence they generate: block k contributes the 3^{k-1}
// numbers m_k + sum_j w_j m_j with digits w_j in {-1,0,+1}.

namespace goodseq::lacunary {

enum class FamilyKind { Explicit, Geometric, FactorialShift, Custom };

// Generator of integer ratios r_j = m_{j+1}/m_j for Custom families.
using RatioGen = std::function<BigInt(long j)>;

class ModulusSequence {
  public:
    static std::shared_ptr<ModulusSequence> explicit_list(std::vector<BigInt> moduli);
    static std::shared_ptr<ModulusSequence> geometric(const BigInt& base);
    static std::shared_ptr<ModulusSequence> factorial_shift(long offset);
    // m_1 = first, m_{j+1} = m_j * ratio(j). limit < 0 means unbounded.
    static std::shared_ptr<ModulusSequence> custom(const BigInt& first, RatioGen ratio,
                                                   long limit = -1);

    // m_j, 1-based. Lazily generated and memoized; throws ModuliExhaustedError
    // past the end of a finite family. Safe under concurrent readers.
    const BigInt& modulus(long j) const;
    // sum_{i<=j} m_i, memoized alongside the moduli.
    const BigInt& prefix_sum(long j) const;

    FamilyKind kind() const { return kind_; }
    // Number of available moduli, or -1 when unbounded.
    long length() const { return limit_; }
    bool is_finite() const { return limit_ >= 0; }

    // True when m_j | m_{j+1} holds for every j by construction (geometric,
    // factorial, and integer-ratio custom families). Explicit lists are
    // checked only over their finite extent and report false.
    bool structurally_divisible() const { return kind_ != FamilyKind::Explicit; }
    // True when ratio(j) = m_j/m_{j-1} is provably nondecreasing in j for the
    // whole (infinite) family, so "for all j >= J" conditions can be certified
    // by checking them at J alone.
    bool ratios_certified_nondecreasing() const {
        return kind_ == FamilyKind::Geometric || kind_ == FamilyKind::FactorialShift;
    }

    struct RatioSolve {
        enum class Status { Found, NeverCertified, WindowLimited } status;
        BigInt index;    // least j >= lo with ratio(i) > bound for all i >= j
        bool certified;  // true when the tail condition is certified beyond any horizon
    };
    // Least index j >= lo such that m_i/m_{i-1} > bound for every i >= j.
    // Families with a certified ratio formula solve symbolically (the index
    // may be astronomically large); window families scan up to `horizon` and
    // report WindowLimited when no suffix of the window qualifies.
    RatioSolve least_index_with_ratio_above(const BigInt& bound, const BigInt& lo,
                                            long horizon) const;

    // Family parameters (for symbolic consumers and serialization).
    const BigInt& geometric_base() const { return base_; }
    long factorial_offset() const { return offset_; }

    std::string describe() const;
    nlohmann::json to_json() const;
    static std::shared_ptr<ModulusSequence> from_json(const nlohmann::json& j);
    // "geometric:3", "factorial:2", "explicit:3,9,27", "custom:4,5,6".
    static std::shared_ptr<ModulusSequence> parse(const std::string& text);

  private:
    ModulusSequence() = default;
    void validate_next(const BigInt& prev, const BigInt& next) const;
    void extend_locked(long j) const;

    FamilyKind kind_ = FamilyKind::Explicit;
    BigInt base_;          // geometric
    long offset_ = 0;      // factorial shift
    RatioGen ratio_;       // custom
    long limit_ = -1;
    mutable std::mutex mu_;
    mutable std::vector<BigInt> cache_;
    mutable std::vector<BigInt> prefix_;
};

// Address of one element of the generated sequence: block k plus the k-1
// balanced-ternary digits, digit j multiplying m_j (digit k-1 most
// significant).
struct BalancedTernaryIndex {
    long k = 1;
    std::vector<std::int8_t> digits;  // length k-1, entries in {-1,0,+1}
};

enum class ConditionVerdict { A1Plausible, A2Holds, Neither, Both };

// Finite-horizon diagnostic for the summability / divisibility growth
// conditions. Never a proof: the verdict reports window behavior only.
struct ConditionReport {
    long horizon = 0;
    BigRat a1_partial_sum;        // sum_{j<K} (m_j/m_{j+1})^2, exact
    bool a1_terms_summable_hint = false;  // consecutive terms decay by >= 2x
    bool a2_divisible = false;
    bool a2_ratio_increasing = false;
    ConditionVerdict verdict = ConditionVerdict::Neither;
};

ConditionReport check_conditions(const ModulusSequence& m, long K);

BigInt index_to_element(const ModulusSequence& m, const BalancedTernaryIndex& idx);

// Combinatorial rank <-> index bijection (independent of the moduli).
// rank_to_index(n): block k with (3^{k-1}-1)/2 < n <= (3^k-1)/2, offset
// written in ternary most-significant-first, digits shifted to {-1,0,+1}.
BalancedTernaryIndex rank_to_index(long long n);
long long index_to_rank(const BalancedTernaryIndex& idx);

BigInt element_at(const ModulusSequence& m, long long n);

// #(S intersect [1,x]) by block arithmetic plus a digit-DP rank search; never
// enumerates.
BigInt count_up_to(const ModulusSequence& m, const BigInt& x);

// Forward iterator over s_1, s_2, ...; O(1) amortized big-int work per step.
class ElementStream {
  public:
    explicit ElementStream(const ModulusSequence& m);
    const BigInt& value() const { return value_; }
    long long rank() const { return n_; }
    long block() const { return k_; }
    const std::vector<std::int8_t>& digits() const { return digits_; }
    void next();

  private:
    void enter_block(long k);
    const ModulusSequence* m_;
    long long n_ = 1;
    long k_ = 1;
    std::vector<std::int8_t> digits_;
    BigInt value_;
};

std::vector<BigInt> enumerate_stream(const ModulusSequence& m, long long N);

}  // namespace goodseq::lacunary
