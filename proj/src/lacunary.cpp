#include "goodseq/lacunary.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

namespace goodseq::lacunary {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

}  // namespace

std::shared_ptr<ModulusSequence> ModulusSequence::explicit_list(std::vector<BigInt> moduli) {
    if (moduli.empty()) throw ConfigError("explicit family needs at least one modulus");
    auto m = std::shared_ptr<ModulusSequence>(new ModulusSequence());
    m->kind_ = FamilyKind::Explicit;
    m->limit_ = static_cast<long>(moduli.size());
    BigInt prev = 0;
    for (const BigInt& v : moduli) {
        if (v <= 0) throw NonPositiveError("modulus " + v.get_str() + " is not positive");
        if (prev != 0) m->validate_next(prev, v);
        prev = v;
    }
    m->cache_ = std::move(moduli);
    m->prefix_.reserve(m->cache_.size());
    BigInt run = 0;
    for (const BigInt& v : m->cache_) m->prefix_.push_back(run += v);
    return m;
}

std::shared_ptr<ModulusSequence> ModulusSequence::geometric(const BigInt& base) {
    if (base < 3) throw RatioTooSmallError("geometric base must be >= 3, got " + base.get_str());
    auto m = std::shared_ptr<ModulusSequence>(new ModulusSequence());
    m->kind_ = FamilyKind::Geometric;
    m->base_ = base;
    return m;
}

std::shared_ptr<ModulusSequence> ModulusSequence::factorial_shift(long offset) {
    if (offset < 1)
        throw RatioTooSmallError("factorial shift needs offset >= 1 (first ratio is offset+2)");
    auto m = std::shared_ptr<ModulusSequence>(new ModulusSequence());
    m->kind_ = FamilyKind::FactorialShift;
    m->offset_ = offset;
    return m;
}

std::shared_ptr<ModulusSequence> ModulusSequence::custom(const BigInt& first, RatioGen ratio,
                                                         long limit) {
    if (first <= 0) throw NonPositiveError("first modulus must be positive");
    if (!ratio) throw ConfigError("custom family needs a ratio generator");
    auto m = std::shared_ptr<ModulusSequence>(new ModulusSequence());
    m->kind_ = FamilyKind::Custom;
    m->ratio_ = std::move(ratio);
    m->limit_ = limit;
    m->cache_.push_back(first);
    m->prefix_.push_back(first);
    return m;
}

void ModulusSequence::validate_next(const BigInt& prev, const BigInt& next) const {
    if (next <= 0) throw NonPositiveError("modulus " + next.get_str() + " is not positive");
    if (next <= prev)
        throw NotIncreasingError("moduli must strictly increase: " + prev.get_str() + " then " +
                                 next.get_str());
    if (next < 3 * prev)
        throw RatioTooSmallError("ratio below 3: " + next.get_str() + "/" + prev.get_str());
}

void ModulusSequence::extend_locked(long j) const {
    while (static_cast<long>(cache_.size()) < j) {
        long next_j = static_cast<long>(cache_.size()) + 1;
        if (limit_ >= 0 && next_j > limit_)
            throw ModuliExhaustedError("family has only " + std::to_string(limit_) + " moduli");
        BigInt v;
        switch (kind_) {
            case FamilyKind::Geometric:
                v = cache_.empty() ? base_ : BigInt(cache_.back() * base_);
                break;
            case FamilyKind::FactorialShift:
                v = cache_.empty() ? factorial(static_cast<unsigned long>(1 + offset_))
                                   : BigInt(cache_.back() * (next_j + offset_));
                break;
            case FamilyKind::Custom: {
                BigInt r = ratio_(next_j - 1);
                if (r < 3)
                    throw RatioTooSmallError("custom ratio r_" + std::to_string(next_j - 1) +
                                             " = " + r.get_str() + " < 3");
                v = cache_.back() * r;
                break;
            }
            case FamilyKind::Explicit:
                throw ModuliExhaustedError("explicit family exhausted");
        }
        if (!cache_.empty()) validate_next(cache_.back(), v);
        prefix_.push_back(prefix_.empty() ? v : BigInt(prefix_.back() + v));
        cache_.push_back(std::move(v));
    }
}

const BigInt& ModulusSequence::modulus(long j) const {
    if (j < 1) throw ConfigError("modulus index must be >= 1");
    std::lock_guard<std::mutex> lock(mu_);
    extend_locked(j);
    return cache_[j - 1];
}

const BigInt& ModulusSequence::prefix_sum(long j) const {
    if (j < 1) throw ConfigError("prefix index must be >= 1");
    std::lock_guard<std::mutex> lock(mu_);
    extend_locked(j);
    return prefix_[j - 1];
}

ModulusSequence::RatioSolve ModulusSequence::least_index_with_ratio_above(const BigInt& bound,
                                                                          const BigInt& lo,
                                                                          long horizon) const {
    BigInt start = lo < 2 ? BigInt(2) : lo;
    if (kind_ == FamilyKind::Geometric) {
        if (base_ > bound) return {RatioSolve::Status::Found, start, true};
        return {RatioSolve::Status::NeverCertified, 0, false};
    }
    if (kind_ == FamilyKind::FactorialShift) {
        // ratio(j) = j + offset, strictly increasing.
        BigInt j = bound - offset_ + 1;
        if (j < start) j = start;
        return {RatioSolve::Status::Found, j, true};
    }
    // Window families: require the condition over [j, horizon] and report the
    // check as horizon-limited.
    if (limit_ >= 0) horizon = std::min(horizon, limit_);
    if (start > horizon) return {RatioSolve::Status::WindowLimited, 0, false};
    long first = static_cast<long>(start.get_si());
    long best = -1;
    for (long j = horizon; j >= first; --j) {
        if (modulus(j) > bound * modulus(j - 1))
            best = j;
        else
            break;
    }
    if (best < 0) return {RatioSolve::Status::WindowLimited, 0, false};
    return {RatioSolve::Status::Found, best, false};
}

ConditionReport check_conditions(const ModulusSequence& m, long K) {
    if (K < 2) throw ConfigError("check_conditions needs K >= 2");
    ConditionReport rep;
    rep.horizon = K;
    rep.a1_partial_sum = 0;
    rep.a2_divisible = true;
    rep.a2_ratio_increasing = true;
    rep.a1_terms_summable_hint = true;
    BigRat prev_term;
    bool have_prev = false;
    for (long j = 1; j < K; ++j) {
        const BigInt& a = m.modulus(j);
        const BigInt& b = m.modulus(j + 1);
        BigRat term(a * a, b * b);
        term.canonicalize();
        rep.a1_partial_sum += term;
        if (have_prev && 2 * term > prev_term) rep.a1_terms_summable_hint = false;
        prev_term = term;
        have_prev = true;
        if (b % a != 0) rep.a2_divisible = false;
        if (j + 2 <= K && !(m.modulus(j + 2) * a > b * b)) rep.a2_ratio_increasing = false;
    }
    bool a1 = rep.a1_terms_summable_hint;
    bool a2 = rep.a2_divisible && rep.a2_ratio_increasing;
    rep.verdict = a1 && a2   ? ConditionVerdict::Both
                  : a1       ? ConditionVerdict::A1Plausible
                  : a2       ? ConditionVerdict::A2Holds
                             : ConditionVerdict::Neither;
    return rep;
}

BigInt index_to_element(const ModulusSequence& m, const BalancedTernaryIndex& idx) {
    if (idx.k < 1) throw ConfigError("block index must be >= 1");
    if (static_cast<long>(idx.digits.size()) != idx.k - 1)
        throw ConfigError("index needs exactly k-1 digits");
    BigInt v = m.modulus(idx.k);
    for (long j = 1; j <= idx.k - 1; ++j) {
        int d = idx.digits[j - 1];
        if (d < -1 || d > 1) throw ConfigError("digit out of {-1,0,1}");
        if (d != 0) v += d * m.modulus(j);
    }
    return v;
}

namespace {

// (3^k - 1) / 2, valid for k <= 39 in signed 64-bit.
long long cum_count(long k) {
    long long p = 1;
    for (long i = 0; i < k; ++i) p *= 3;
    return (p - 1) / 2;
}

}  // namespace

BalancedTernaryIndex rank_to_index(long long n) {
    if (n < 1) throw ConfigError("rank must be >= 1");
    long k = 1;
    while (cum_count(k) < n) {
        ++k;
        if (k > 39) throw ConfigError("rank too large");
    }
    long long o = n - 1 - cum_count(k - 1);
    BalancedTernaryIndex idx;
    idx.k = k;
    idx.digits.assign(k - 1, 0);
    long long p = 1;
    for (long i = 0; i < k - 2; ++i) p *= 3;
    for (long pos = k - 1; pos >= 1; --pos) {
        long long d = o / p;
        o -= d * p;
        idx.digits[pos - 1] = static_cast<std::int8_t>(d - 1);
        p /= 3;
    }
    return idx;
}

long long index_to_rank(const BalancedTernaryIndex& idx) {
    long long o = 0;
    long long p = 1;
    for (long j = 1; j <= idx.k - 1; ++j) {
        o += (idx.digits[j - 1] + 1) * p;
        p *= 3;
    }
    return cum_count(idx.k - 1) + o + 1;
}

BigInt element_at(const ModulusSequence& m, long long n) {
    return index_to_element(m, rank_to_index(n));
}

namespace {

// Number of digit vectors (w_1..w_d) with sum w_i m_i <= t. The blocks
// [d*m_j - S, d*m_j + S] for the three digit choices are disjoint because
// S = sum_{i<j} m_i < m_j / 2, so at most one branch is partial per level.
BigInt count_tail_at_most(const ModulusSequence& m, long d, BigInt t) {
    BigInt cnt = 0;
    for (long j = d; j >= 1; --j) {
        BigInt s_below = j >= 2 ? m.prefix_sum(j - 1) : BigInt(0);
        bool descended = false;
        for (int dig = -1; dig <= 1; ++dig) {
            BigInt rest = t - dig * m.modulus(j);
            if (rest >= s_below) {
                cnt += pow3(j - 1);
            } else if (rest >= -s_below) {
                t = rest;
                descended = true;
                break;
            }
        }
        if (!descended) return cnt;
    }
    if (t >= 0) cnt += 1;
    return cnt;
}

}  // namespace

BigInt count_up_to(const ModulusSequence& m, const BigInt& x) {
    if (x < 0) throw ConfigError("count_up_to needs x >= 0");
    BigInt count = 0;
    for (long k = 1;; ++k) {
        if (m.is_finite() && k > m.length()) break;
        const BigInt& mk = m.modulus(k);
        BigInt spread = k >= 2 ? m.prefix_sum(k - 1) : BigInt(0);
        if (x < mk - spread) break;
        if (x >= mk + spread) {
            count += pow3(k - 1);
            continue;
        }
        count += count_tail_at_most(m, k - 1, x - mk);
        break;
    }
    return count;
}

ElementStream::ElementStream(const ModulusSequence& m) : m_(&m) { enter_block(1); }

void ElementStream::enter_block(long k) {
    k_ = k;
    digits_.assign(k - 1, -1);
    value_ = m_->modulus(k);
    if (k >= 2) value_ -= m_->prefix_sum(k - 1);
}

void ElementStream::next() {
    ++n_;
    for (long j = 1; j <= k_ - 1; ++j) {
        if (digits_[j - 1] < 1) {
            digits_[j - 1] += 1;
            value_ += m_->modulus(j);
            if (j >= 2) value_ -= 2 * m_->prefix_sum(j - 1);
            std::fill(digits_.begin(), digits_.begin() + (j - 1), -1);
            return;
        }
    }
    enter_block(k_ + 1);
}

std::vector<BigInt> enumerate_stream(const ModulusSequence& m, long long N) {
    if (N < 1) throw ConfigError("enumerate_stream needs N >= 1");
    std::vector<BigInt> out;
    out.reserve(static_cast<size_t>(N));
    ElementStream st(m);
    for (long long i = 0; i < N; ++i) {
        out.push_back(st.value());
        if (i + 1 < N) st.next();
    }
    return out;
}

std::string ModulusSequence::describe() const {
    switch (kind_) {
        case FamilyKind::Geometric:
            return "geometric:" + base_.get_str();
        case FamilyKind::FactorialShift:
            return "factorial:" + std::to_string(offset_);
        case FamilyKind::Explicit: {
            std::string s = "explicit:";
            for (size_t i = 0; i < cache_.size(); ++i) {
                if (i) s += ',';
                s += cache_[i].get_str();
            }
            return s;
        }
        case FamilyKind::Custom:
            return "custom(first=" + cache_[0].get_str() + ")";
    }
    return "?";
}

nlohmann::json ModulusSequence::to_json() const {
    nlohmann::json j;
    switch (kind_) {
        case FamilyKind::Geometric:
            j["family"] = "geometric";
            j["base"] = base_.get_str();
            break;
        case FamilyKind::FactorialShift:
            j["family"] = "factorial_shift";
            j["offset"] = offset_;
            break;
        case FamilyKind::Explicit: {
            j["family"] = "explicit";
            auto arr = nlohmann::json::array();
            for (const BigInt& v : cache_) arr.push_back(v.get_str());
            j["moduli"] = arr;
            break;
        }
        case FamilyKind::Custom: {
            j["family"] = "custom";
            j["first"] = cache_[0].get_str();
            auto arr = nlohmann::json::array();
            long n = limit_ >= 0 ? limit_ : static_cast<long>(cache_.size());
            {
                std::lock_guard<std::mutex> lock(mu_);
                extend_locked(n);
            }
            for (long i = 2; i <= n; ++i) arr.push_back(BigInt(cache_[i - 1] / cache_[i - 2]).get_str());
            j["ratios"] = arr;
            break;
        }
    }
    return j;
}

std::shared_ptr<ModulusSequence> ModulusSequence::from_json(const nlohmann::json& j) {
    const std::string fam = j.at("family").get<std::string>();
    if (fam == "geometric") return geometric(BigInt(j.at("base").get<std::string>()));
    if (fam == "factorial_shift") return factorial_shift(j.at("offset").get<long>());
    if (fam == "explicit") {
        std::vector<BigInt> mods;
        for (const auto& v : j.at("moduli")) mods.emplace_back(v.get<std::string>());
        return explicit_list(std::move(mods));
    }
    if (fam == "custom") {
        BigInt first(j.at("first").get<std::string>());
        auto ratios = std::make_shared<std::vector<BigInt>>();
        for (const auto& v : j.at("ratios")) ratios->emplace_back(v.get<std::string>());
        long limit = static_cast<long>(ratios->size()) + 1;
        return custom(
            first,
            [ratios](long i) -> BigInt {
                if (i < 1 || i > static_cast<long>(ratios->size()))
                    throw ModuliExhaustedError("custom ratio list exhausted");
                return (*ratios)[i - 1];
            },
            limit);
    }
    throw ConfigError("unknown family: " + fam);
}

std::shared_ptr<ModulusSequence> ModulusSequence::parse(const std::string& text) {
    auto colon = text.find(':');
    std::string head = colon == std::string::npos ? text : text.substr(0, colon);
    std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
    try {
        if (head == "geometric") return geometric(BigInt(rest));
        if (head == "factorial") return factorial_shift(std::stol(rest));
        if (head == "explicit") {
            std::vector<BigInt> mods;
            for (const auto& tok : split(rest, ',')) mods.emplace_back(tok);
            return explicit_list(std::move(mods));
        }
        if (head == "custom") {
            auto colon2 = rest.find(':');
            if (colon2 == std::string::npos)
                throw ConfigError("custom family syntax: custom:<m1>:<r1,r2,...>");
            nlohmann::json j;
            j["family"] = "custom";
            j["first"] = rest.substr(0, colon2);
            auto arr = nlohmann::json::array();
            for (const auto& tok : split(rest.substr(colon2 + 1), ',')) arr.push_back(tok);
            j["ratios"] = arr;
            return from_json(j);
        }
    } catch (const std::invalid_argument&) {
        throw ConfigError("bad family descriptor: " + text);
    }
    throw ConfigError("unknown family descriptor: " + text);
}

}  // namespace goodseq::lacunary
