#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "goodseq/measures.hpp"
#include "goodseq/spectral.hpp"

// CSV / JSON emission. CSV uses ',' separators, '.' decimal point, LF line
// endings, and prints floating-point numbers with 17 significant digits; the
// JSON documents carry the same rows with the same key order.

namespace goodseq::format {

using Json = nlohmann::ordered_json;

std::string fmt17(double x);
std::string fmt17(const Real& x);
std::string fmt17(const BigRat& x);

std::string gen_csv(const std::vector<BigInt>& values, long long first_rank = 1);
Json gen_json(const std::vector<BigInt>& values, long long first_rank = 1);

std::string scan_csv(const std::vector<spectral::ScanRow>& rows, bool block_column);
Json scan_json(const std::vector<spectral::ScanRow>& rows, bool block_column);

std::string wiener_csv(const std::vector<measures::WienerEstimate>& rows);
Json wiener_json(const std::vector<measures::WienerEstimate>& rows);

std::string dirichlet_csv(const std::vector<measures::DirichletRow>& rows);
Json dirichlet_json(const std::vector<measures::DirichletRow>& rows);

}  // namespace goodseq::format
