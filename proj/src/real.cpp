#include "goodseq/real.hpp"

#include <cstdio>
#include <vector>

namespace goodseq {

std::string Real::str(int sig_digits) const {
    char buf[128];
    int n = mpfr_snprintf(buf, sizeof buf, "%.*Rg", sig_digits, v_);
    if (n >= 0 && static_cast<size_t>(n) < sizeof buf) return std::string(buf, n);
    std::vector<char> big(n + 1);
    mpfr_snprintf(big.data(), big.size(), "%.*Rg", sig_digits, v_);
    return std::string(big.data());
}

}  // namespace goodseq
