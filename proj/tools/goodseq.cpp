// Command-line front end: experiment configuration, subcommand dispatch, and
// CSV/JSON emission for the lacunary-sequence toolkit.
//
// Exit codes: 0 success, 2 configuration or validation error, 3 computation
// error (precision exhaustion, growth failures discovered mid-run).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "goodseq/format.hpp"
#include "goodseq/measures.hpp"
#include "goodseq/spectral.hpp"

namespace gs = goodseq;
using gs::BigInt;
using gs::lacunary::ModulusSequence;
using gs::modone::Angle;

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_path;
    bool json = false;
    bool csv = false;
};

// Flat key/value store fed by --config (JSON object) and --set overrides.
class ConfigStore {
  public:
    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw gs::ConfigError("cannot open config file: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw gs::ConfigError(std::string("bad config JSON: ") + e.what());
        }
        if (!j.is_object()) throw gs::ConfigError("config file must hold a JSON object");
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it.value().is_array()) {
                std::vector<std::string> items;
                for (const auto& v : it.value()) items.push_back(scalar(v));
                lists_[it.key()] = items;
            } else {
                values_[it.key()] = scalar(it.value());
            }
        }
    }

    void apply_sets(const std::vector<std::string>& sets) {
        for (const auto& kv : sets) {
            auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw gs::ConfigError("--set expects key=value, got: " + kv);
            values_[kv.substr(0, eq)] = kv.substr(eq + 1);
        }
    }

    std::optional<std::string> get(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        return it->second;
    }
    std::optional<std::vector<std::string>> get_list(const std::string& key) const {
        auto it = lists_.find(key);
        if (it != lists_.end()) return it->second;
        if (auto v = get(key)) return std::vector<std::string>{*v};
        return std::nullopt;
    }

  private:
    static std::string scalar(const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    }
    std::map<std::string, std::string> values_;
    std::map<std::string, std::vector<std::string>> lists_;
};

// Command-line value if the user typed it, else config value, else default.
template <typename T>
void merge(const CLI::Option* opt, const ConfigStore& store, const std::string& key, T& slot) {
    if (opt && opt->count() > 0) return;
    if (auto v = store.get(key)) {
        std::stringstream ss(*v);
        ss >> slot;
        if (ss.fail()) throw gs::ConfigError("bad config value for " + key + ": " + *v);
    }
}

void merge(const CLI::Option* opt, const ConfigStore& store, const std::string& key,
           std::string& slot) {
    if (opt && opt->count() > 0) return;
    if (auto v = store.get(key)) slot = *v;
}

void merge(const CLI::Option* opt, const ConfigStore& store, const std::string& key, bool& slot) {
    if (opt && opt->count() > 0) return;
    if (auto v = store.get(key)) slot = (*v == "true" || *v == "1");
}

void merge(const CLI::Option* opt, const ConfigStore& store, const std::string& key,
           std::vector<std::string>& slot) {
    if (opt && opt->count() > 0) return;
    if (auto v = store.get_list(key)) slot = *v;
}

void write_output(const std::string& path, const std::string& body) {
    if (path.empty() || path == "-") {
        std::fwrite(body.data(), 1, body.size(), stdout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw gs::ConfigError("cannot open output file: " + path);
    out << body;
}

std::string render(bool json, const std::string& csv_body, const gs::format::Json& json_body) {
    if (!json) return csv_body;
    return json_body.dump(2) + "\n";
}

gs::measures::SelectionMode parse_mode(const std::string& mode) {
    if (mode == "prop5") return gs::measures::SelectionMode::Prop5;
    if (mode == "thm6") return gs::measures::SelectionMode::Thm6;
    throw gs::ConfigError("mode must be prop5 or thm6, got: " + mode);
}

std::vector<std::uint8_t> parse_eta(const std::string& eta) {
    std::vector<std::uint8_t> out;
    for (char c : eta) {
        if (c != '0' && c != '1') throw gs::ConfigError("eta must be a 0/1 word");
        out.push_back(c == '1');
    }
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"lacunary good-sequence toolkit"};
    app.require_subcommand(1);

    CommonOpts common;
    app.add_option("--config", common.config_path, "JSON config file with flat keys");
    app.add_option("--set", common.sets, "override a config key: --set key=value");

    // gen ------------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "enumerate the generated sequence");
    std::string g_family;
    long long g_n = 0, g_at = 0;
    std::string g_upto;
    auto* gen_family = gen->add_option("--family", g_family, "family descriptor");
    auto* gen_n = gen->add_option("--n", g_n, "emit s_1..s_N");
    auto* gen_at = gen->add_option("--at", g_at, "emit the single element s_n");
    auto* gen_upto = gen->add_option("--upto", g_upto, "count elements <= x");
    auto* gen_json_f = gen->add_flag("--json", common.json, "JSON output");
    gen->add_flag("--csv", common.csv, "CSV output (default)");
    auto* gen_out = gen->add_option("-o,--out", common.out_path, "output path");

    // scan -----------------------------------------------------------------
    auto* scan = app.add_subcommand("scan", "evaluate L(theta) over an angle set");
    std::string s_family, s_mode = "prop5";
    std::vector<std::string> s_thetas;
    long s_grid = 0;
    int s_etak = 0;
    long long s_navg = 0;
    bool s_check_blocks = false;
    int s_kmax = 64;
    double s_tail_tol = 1e-12;
    long s_prec = 256;
    auto* scan_family = scan->add_option("--family", s_family, "family descriptor");
    auto* scan_theta = scan->add_option("--theta", s_thetas, "angle (p/q or decimal), repeatable");
    auto* scan_grid = scan->add_option("--grid", s_grid, "scan the grid {i/Q}");
    auto* scan_etak = scan->add_option("--eta-k", s_etak, "scan all eta words of this depth");
    auto* scan_mode = scan->add_option("--mode", s_mode, "selection mode for --eta-k");
    auto* scan_navg = scan->add_option("--navg", s_navg, "also compute direct averages at N");
    auto* scan_chk = scan->add_flag("--check-blocks", s_check_blocks,
                                    "verify block decomposition against direct sums");
    auto* scan_kmax = scan->add_option("--kmax", s_kmax, "partial-product horizon");
    auto* scan_tt = scan->add_option("--tail-tol", s_tail_tol, "tail certification tolerance");
    auto* scan_prec = scan->add_option("--prec", s_prec, "working precision bits");
    auto* scan_json_f = scan->add_flag("--json", common.json, "JSON output");
    scan->add_flag("--csv", common.csv, "CSV output (default)");
    auto* scan_out = scan->add_option("-o,--out", common.out_path, "output path");

    // measure ----------------------------------------------------------------
    auto* meas = app.add_subcommand("measure", "Wiener averages of the fair-bit measure");
    std::string m_family, m_mode = "prop5";
    int m_K = 3;
    std::vector<std::string> m_Ns;
    unsigned long m_mc = 0;
    long long m_seed = -1;
    long m_prec = 256;
    auto* meas_family = meas->add_option("--family", m_family, "family descriptor");
    auto* meas_mode = meas->add_option("--mode", m_mode, "selection mode");
    auto* meas_K = meas->add_option("--K", m_K, "selection depth");
    auto* meas_N = meas->add_option("--N", m_Ns, "average length(s), repeatable");
    auto* meas_mc = meas->add_option("--mc", m_mc, "add a Monte-Carlo row with M samples");
    auto* meas_seed = meas->add_option("--seed", m_seed, "RNG seed (required with --mc)");
    auto* meas_prec = meas->add_option("--prec", m_prec, "working precision bits");
    auto* meas_json_f = meas->add_flag("--json", common.json, "JSON output");
    meas->add_flag("--csv", common.csv, "CSV output (default)");
    auto* meas_out = meas->add_option("-o,--out", common.out_path, "output path");

    // dirichlet ---------------------------------------------------------------
    auto* dir = app.add_subcommand("dirichlet", "certified Dirichlet-property report");
    std::string d_family, d_eta = "1111";
    int d_K = 4, d_nmax = 3;
    long d_prec = 256;
    auto* dir_family = dir->add_option("--family", d_family, "family descriptor");
    auto* dir_K = dir->add_option("--K", d_K, "selection depth");
    auto* dir_eta = dir->add_option("--eta", d_eta, "binary eta word");
    auto* dir_nmax = dir->add_option("--nmax", d_nmax, "number of report rows");
    auto* dir_prec = dir->add_option("--prec", d_prec, "working precision bits");
    auto* dir_json_f = dir->add_flag("--json", common.json, "JSON output");
    dir->add_flag("--csv", common.csv, "CSV output (default)");
    auto* dir_out = dir->add_option("-o,--out", common.out_path, "output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    ConfigStore store;
    if (!common.config_path.empty()) store.load_file(common.config_path);
    store.apply_sets(common.sets);

    if (gen->parsed()) {
        merge(gen_family, store, "family", g_family);
        merge(gen_n, store, "n", g_n);
        merge(gen_at, store, "at", g_at);
        merge(gen_upto, store, "upto", g_upto);
        merge(gen_json_f, store, "json", common.json);
        merge(gen_out, store, "out", common.out_path);
        if (g_family.empty()) throw gs::ConfigError("gen needs --family");
        auto fam = ModulusSequence::parse(g_family);
        if (!g_upto.empty()) {
            BigInt x(g_upto);
            BigInt c = gs::lacunary::count_up_to(*fam, x);
            if (common.json) {
                gs::format::Json j;
                j["x"] = x.get_str();
                j["count"] = c.get_str();
                write_output(common.out_path, j.dump(2) + "\n");
            } else {
                write_output(common.out_path, "x,count\n" + x.get_str() + "," + c.get_str() + "\n");
            }
            return 0;
        }
        if (g_at > 0) {
            std::vector<BigInt> vals{gs::lacunary::element_at(*fam, g_at)};
            write_output(common.out_path, render(common.json, gs::format::gen_csv(vals, g_at),
                                                 gs::format::gen_json(vals, g_at)));
            return 0;
        }
        if (g_n < 1) throw gs::ConfigError("gen needs --n, --at or --upto");
        auto vals = gs::lacunary::enumerate_stream(*fam, g_n);
        write_output(common.out_path,
                     render(common.json, gs::format::gen_csv(vals), gs::format::gen_json(vals)));
        return 0;
    }

    if (scan->parsed()) {
        merge(scan_family, store, "family", s_family);
        merge(scan_theta, store, "theta", s_thetas);
        merge(scan_grid, store, "grid", s_grid);
        merge(scan_etak, store, "eta_k", s_etak);
        merge(scan_mode, store, "mode", s_mode);
        merge(scan_navg, store, "navg", s_navg);
        merge(scan_chk, store, "check_blocks", s_check_blocks);
        merge(scan_kmax, store, "kmax", s_kmax);
        merge(scan_tt, store, "tail_tol", s_tail_tol);
        merge(scan_prec, store, "prec", s_prec);
        merge(scan_json_f, store, "json", common.json);
        merge(scan_out, store, "out", common.out_path);
        if (s_family.empty()) throw gs::ConfigError("scan needs --family");
        auto fam = ModulusSequence::parse(s_family);

        std::vector<Angle> angles;
        std::vector<gs::spectral::TailMajorant> majorants;
        for (const auto& t : s_thetas) angles.push_back(Angle::parse(t));
        if (s_grid > 0)
            for (long i = 0; i < s_grid; ++i) angles.push_back(Angle::rational(i, s_grid));
        majorants.resize(angles.size());
        if (s_etak > 0) {
            auto sel = gs::measures::select_subsequence(fam, parse_mode(s_mode), s_etak);
            for (unsigned long w = 0; w < (1ul << s_etak); ++w) {
                std::vector<std::uint8_t> eta(s_etak);
                for (int k = 0; k < s_etak; ++k) eta[k] = (w >> k) & 1;
                auto pt = gs::measures::theta_of_eta(eta, sel);
                angles.push_back(pt.theta);
                majorants.push_back(gs::measures::eta_tail_majorant(pt));
            }
        }
        if (angles.empty()) throw gs::ConfigError("scan needs --theta, --grid or --eta-k");

        gs::spectral::ScanPolicy policy;
        policy.limit.k_max = s_kmax;
        policy.limit.tail_tol = s_tail_tol;
        policy.limit.prec = s_prec;
        policy.eval.prec = s_prec;
        if (s_navg > 0) policy.navg = s_navg;
        policy.check_blocks = s_check_blocks;
        auto rows = gs::spectral::spectrum_scan(*fam, angles, policy, &majorants);
        write_output(common.out_path,
                     render(common.json, gs::format::scan_csv(rows, s_check_blocks),
                            gs::format::scan_json(rows, s_check_blocks)));
        for (const auto& r : rows) {
            if (r.error) return 3;
            if (r.block_checked && !r.block_matches) return 3;
        }
        return 0;
    }

    if (meas->parsed()) {
        merge(meas_family, store, "family", m_family);
        merge(meas_mode, store, "mode", m_mode);
        merge(meas_K, store, "K", m_K);
        merge(meas_N, store, "N", m_Ns);
        merge(meas_mc, store, "mc", m_mc);
        merge(meas_seed, store, "seed", m_seed);
        merge(meas_prec, store, "prec", m_prec);
        merge(meas_json_f, store, "json", common.json);
        merge(meas_out, store, "out", common.out_path);
        if (m_family.empty()) throw gs::ConfigError("measure needs --family");
        if (m_Ns.empty()) throw gs::ConfigError("measure needs --N");
        if (m_mc > 0 && m_seed < 0)
            throw gs::ConfigError("--mc requires an explicit --seed (no wall-clock default)");
        auto fam = ModulusSequence::parse(m_family);
        auto sel = gs::measures::select_subsequence(fam, parse_mode(m_mode), m_K);
        std::vector<gs::measures::WienerEstimate> rows;
        for (const auto& ns : m_Ns) {
            long long N = std::stoll(ns);
            rows.push_back(gs::measures::wiener_average(*fam, sel, N, m_K, m_prec));
            if (m_mc > 0)
                rows.push_back(gs::measures::wiener_average_mc(
                    *fam, sel, N, m_K, m_mc, static_cast<std::uint64_t>(m_seed), m_prec));
        }
        write_output(common.out_path, render(common.json, gs::format::wiener_csv(rows),
                                             gs::format::wiener_json(rows)));
        return 0;
    }

    if (dir->parsed()) {
        merge(dir_family, store, "family", d_family);
        merge(dir_K, store, "K", d_K);
        merge(dir_eta, store, "eta", d_eta);
        merge(dir_nmax, store, "nmax", d_nmax);
        merge(dir_prec, store, "prec", d_prec);
        merge(dir_json_f, store, "json", common.json);
        merge(dir_out, store, "out", common.out_path);
        if (d_family.empty()) throw gs::ConfigError("dirichlet needs --family");
        auto fam = ModulusSequence::parse(d_family);
        auto sel = gs::measures::select_subsequence(fam, gs::measures::SelectionMode::Thm6, d_K);
        auto pt = gs::measures::theta_of_eta(parse_eta(d_eta), sel);
        auto rows = gs::measures::dirichlet_check(pt, d_nmax, d_prec);
        write_output(common.out_path, render(common.json, gs::format::dirichlet_csv(rows),
                                             gs::format::dirichlet_json(rows)));
        return 0;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const gs::InsufficientPrecisionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const gs::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const gs::RatioTooSmallError& e) {
        std::cerr << "error: RatioTooSmall: " << e.what() << "\n";
        return 2;
    } catch (const gs::NotIncreasingError& e) {
        std::cerr << "error: NotIncreasing: " << e.what() << "\n";
        return 2;
    } catch (const gs::NonPositiveError& e) {
        std::cerr << "error: NonPositive: " << e.what() << "\n";
        return 2;
    } catch (const gs::GrowthTooSlowError& e) {
        std::cerr << "error: GrowthTooSlow: " << e.what() << "\n";
        return 2;
    } catch (const gs::SelectionTooShallowError& e) {
        std::cerr << "error: SelectionTooShallow: " << e.what() << "\n";
        return 2;
    } catch (const gs::ModuliExhaustedError& e) {
        std::cerr << "error: ModuliExhausted: " << e.what() << "\n";
        return 2;
    } catch (const gs::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
