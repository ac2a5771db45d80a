#include "goodseq/format.hpp"

#include <cstdio>

namespace goodseq::format {

std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt17(const Real& x) { return x.str(17); }

std::string fmt17(const BigRat& x) { return Real::of_rat(x, 128).str(17); }

std::string gen_csv(const std::vector<BigInt>& values, long long first_rank) {
    std::string out = "n,s\n";
    for (size_t i = 0; i < values.size(); ++i) {
        out += std::to_string(first_rank + static_cast<long long>(i));
        out += ',';
        out += values[i].get_str();
        out += '\n';
    }
    return out;
}

Json gen_json(const std::vector<BigInt>& values, long long first_rank) {
    Json arr = Json::array();
    for (size_t i = 0; i < values.size(); ++i) {
        Json row;
        row["n"] = first_rank + static_cast<long long>(i);
        row["s"] = values[i].get_str();
        arr.push_back(std::move(row));
    }
    return arr;
}

namespace {

double angle_as_double(const modone::Angle& a) {
    return Real::of_rat(a.value(), 128).to_double();
}

const char* method_name(measures::WienerMethod m) {
    return m == measures::WienerMethod::ExactProduct ? "exact_product" : "monte_carlo";
}

}  // namespace

std::string scan_csv(const std::vector<spectral::ScanRow>& rows, bool block_column) {
    std::string out = "theta,repr,L,classification,truncation_k,tail_bound,avg_re,avg_im,avg_err,N";
    if (block_column) out += ",block_eq";
    out += '\n';
    for (const auto& r : rows) {
        out += fmt17(angle_as_double(r.theta));
        out += ',';
        out += r.repr;
        out += ',';
        if (r.error) {
            out += ",error:" + *r.error + ",,,,,,";
            if (block_column) out += ',';
            out += '\n';
            continue;
        }
        out += fmt17(r.value->value);
        out += ',';
        out += spectral::to_string(r.value->cls);
        out += ',';
        out += std::to_string(r.value->truncation_k);
        out += ',';
        out += fmt17(r.value->tail_bound);
        if (r.avg) {
            out += ',';
            out += fmt17(r.avg->average.re);
            out += ',';
            out += fmt17(r.avg->average.im);
            out += ',';
            out += fmt17(r.avg->err);
            out += ',';
            out += std::to_string(r.avg->n);
        } else {
            out += ",,,,";
        }
        if (block_column) {
            out += ',';
            out += r.block_checked ? (r.block_matches ? "1" : "0") : "";
        }
        out += '\n';
    }
    return out;
}

Json scan_json(const std::vector<spectral::ScanRow>& rows, bool block_column) {
    Json arr = Json::array();
    for (const auto& r : rows) {
        Json row;
        row["theta"] = angle_as_double(r.theta);
        row["repr"] = r.repr;
        if (r.error) {
            row["error"] = *r.error;
            arr.push_back(std::move(row));
            continue;
        }
        row["L"] = r.value->value;
        row["classification"] = spectral::to_string(r.value->cls);
        row["truncation_k"] = r.value->truncation_k;
        row["tail_bound"] = r.value->tail_bound;
        if (r.avg) {
            row["avg_re"] = r.avg->average.re.to_double();
            row["avg_im"] = r.avg->average.im.to_double();
            row["avg_err"] = r.avg->err;
            row["N"] = r.avg->n;
        }
        if (block_column && r.block_checked) row["block_eq"] = r.block_matches;
        arr.push_back(std::move(row));
    }
    return arr;
}

std::string wiener_csv(const std::vector<measures::WienerEstimate>& rows) {
    std::string out = "N,mean_re,mean_im,mean_sq,method,std_err\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n);
        out += ',';
        out += fmt17(r.mean_coeff.re);
        out += ',';
        out += fmt17(r.mean_coeff.im);
        out += ',';
        out += fmt17(r.mean_sq);
        out += ',';
        out += method_name(r.method);
        out += ',';
        out += fmt17(r.std_err);
        out += '\n';
    }
    return out;
}

Json wiener_json(const std::vector<measures::WienerEstimate>& rows) {
    Json arr = Json::array();
    for (const auto& r : rows) {
        Json row;
        row["N"] = r.n;
        row["mean_re"] = r.mean_coeff.re.to_double();
        row["mean_im"] = r.mean_coeff.im.to_double();
        row["mean_sq"] = r.mean_sq.to_double();
        row["method"] = method_name(r.method);
        row["std_err"] = r.std_err;
        if (r.method == measures::WienerMethod::MonteCarlo) {
            row["samples"] = r.mc_samples;
            row["seed"] = r.seed;
        }
        arr.push_back(std::move(row));
    }
    return arr;
}

std::string dirichlet_csv(const std::vector<measures::DirichletRow>& rows) {
    std::string out = "n,L_lower,L_value,tail_sum,tail_bound\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n);
        out += ',';
        out += fmt17(r.L_lower);
        out += ',';
        out += fmt17(r.L_value);
        out += ',';
        out += fmt17(r.tail_sum);
        out += ',';
        out += fmt17(r.tail_bound);
        out += '\n';
    }
    return out;
}

Json dirichlet_json(const std::vector<measures::DirichletRow>& rows) {
    Json arr = Json::array();
    for (const auto& r : rows) {
        Json row;
        row["n"] = r.n;
        row["L_lower"] = r.L_lower;
        row["L_value"] = r.L_value;
        row["tail_sum"] = Real::of_rat(r.tail_sum, 128).to_double();
        row["tail_bound"] = Real::of_rat(r.tail_bound, 128).to_double();
        row["exact"] = r.exact;
        arr.push_back(std::move(row));
    }
    return arr;
}

}  // namespace goodseq::format
