#include <doctest.h>

#include "goodseq/format.hpp"

using namespace goodseq;
using namespace goodseq::format;

TEST_CASE("17-significant-digit rendering") {
    CHECK(fmt17(1.0) == "1");
    CHECK(fmt17(0.1) == "0.10000000000000001");
    CHECK(fmt17(Real::of_rat(BigRat(1, 3), 128)) == "0.33333333333333333");
}

TEST_CASE("csv schemas") {
    auto seq = lacunary::ModulusSequence::geometric(3);
    auto vals = lacunary::enumerate_stream(*seq, 4);
    CHECK(gen_csv(vals) == "n,s\n1,3\n2,6\n3,9\n4,12\n");

    std::vector<modone::Angle> angles{modone::Angle::rational(0, 1)};
    spectral::ScanPolicy policy;
    policy.navg = 9;
    auto rows = spectral::spectrum_scan(*seq, angles, policy);
    std::string csv = scan_csv(rows, false);
    CHECK(csv.substr(0, csv.find('\n')) ==
          "theta,repr,L,classification,truncation_k,tail_bound,avg_re,avg_im,avg_err,N");
    CHECK(csv.find("positive_converged") != std::string::npos);
    CHECK(csv.find("\r") == std::string::npos);  // LF only

    auto fam = lacunary::ModulusSequence::factorial_shift(2);
    auto sel = measures::select_subsequence(fam, measures::SelectionMode::Prop5, 2);
    std::vector<measures::WienerEstimate> wrows{measures::wiener_average(*fam, sel, 81, 2)};
    std::string wcsv = wiener_csv(wrows);
    CHECK(wcsv.substr(0, wcsv.find('\n')) == "N,mean_re,mean_im,mean_sq,method,std_err");
    CHECK(wcsv.find("exact_product") != std::string::npos);

    auto jj = wiener_json(wrows);
    CHECK(jj.is_array());
    CHECK(jj[0]["N"] == 81);

    auto tsel = measures::select_subsequence(fam, measures::SelectionMode::Thm6, 4);
    auto pt = measures::theta_of_eta({1, 1, 1, 1}, tsel);
    auto drows = measures::dirichlet_check(pt, 2);
    std::string dcsv = dirichlet_csv(drows);
    CHECK(dcsv.substr(0, dcsv.find('\n')) == "n,L_lower,L_value,tail_sum,tail_bound");
    CHECK(std::count(dcsv.begin(), dcsv.end(), '\n') == 3);
}

TEST_CASE("identical inputs render identical bytes") {
    auto seq = lacunary::ModulusSequence::geometric(3);
    std::vector<modone::Angle> grid;
    for (int i = 0; i < 9; ++i) grid.push_back(modone::Angle::rational(i, 9));
    spectral::ScanPolicy p1;
    p1.threads = 1;
    p1.navg = 50;
    spectral::ScanPolicy p4 = p1;
    p4.threads = 4;
    CHECK(scan_csv(spectral::spectrum_scan(*seq, grid, p1), false) ==
          scan_csv(spectral::spectrum_scan(*seq, grid, p4), false));
    CHECK(scan_json(spectral::spectrum_scan(*seq, grid, p1), false).dump() ==
          scan_json(spectral::spectrum_scan(*seq, grid, p4), false).dump());
}
