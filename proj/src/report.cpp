#include "hlab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "hlab/errors.hpp"

namespace hlab {

double BoundReport::max_ratio() const {
    double r = 0.0;
    for (const auto& row : rows) r = std::max(r, row.ratio);
    return r;
}

double BoundReport::min_positive_ratio() const {
    double r = 0.0;
    bool any = false;
    for (const auto& row : rows) {
        if (row.ratio > 0.0 && (!any || row.ratio < r)) {
            r = row.ratio;
            any = true;
        }
    }
    return any ? r : 0.0;
}

double BoundReport::log10_k_spread() const {
    std::map<int, double> per_k;
    for (const auto& row : rows) {
        auto it = per_k.find(row.k);
        if (it == per_k.end())
            per_k[row.k] = row.ratio;
        else
            it->second = std::max(it->second, row.ratio);
    }
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const auto& [k, r] : per_k) {
        if (r <= 0.0) continue;
        if (!any) {
            lo = hi = r;
            any = true;
        } else {
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
    }
    if (!any || lo <= 0.0) return 0.0;
    return std::log10(hi / lo);
}

std::string bound_report_csv_header() {
    return "estimate_id,alpha,delta,nu,a,m,k,t,lhs,rhs_unit_constant,ratio\n";
}

void append_bound_report_csv(std::string& out, const BoundReport& rep) {
    char line[320];
    for (const auto& r : rep.rows) {
        std::snprintf(line, sizeof line, "%s,%.17g,%.17g,%.17g,%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g\n",
                      rep.estimate_id.c_str(), rep.alpha, rep.delta, rep.nu, rep.a, rep.m, r.k, r.t, r.lhs,
                      r.rhs, r.ratio);
        out += line;
    }
}

void write_bound_report_csv(const std::string& path, const std::vector<BoundReport>& reps) {
    std::string out = bound_report_csv_header();
    for (const auto& rep : reps) append_bound_report_csv(out, rep);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw validation_error("cannot open " + path + " for writing");
    f << out;
}

void write_decay_csv(const std::string& path, const std::vector<DecayRow>& rows) {
    std::string out = "d,R,delta,p,seed,t,lhs_norm,bound_rhs,ratio\n";
    char line[320];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%s,%llu,%.17g,%.17g,%.17g,%.17g\n", r.d, r.R,
                      r.delta, r.p == 0 ? "inf" : std::to_string(r.p).c_str(),
                      static_cast<unsigned long long>(r.seed), r.t, r.lhs_norm, r.bound_rhs, r.ratio);
        out += line;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw validation_error("cannot open " + path + " for writing");
    f << out;
}

}  // namespace hlab
