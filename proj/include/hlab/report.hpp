#pragma once

#include <string>
#include <vector>

#include "hlab/heat.hpp"

namespace hlab {

// One measured-vs-predicted row of a paper-style estimate; rhs carries no
// calibrated constant (C = 1 convention), so the theorem content shows up
// as uniformity of the ratios, not as ratio <= 1.
struct BoundRow {
    int k = 0;
    double t = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;  // unit-constant right-hand side
    double ratio = 0.0;
};

struct BoundReport {
    std::string estimate_id;
    double alpha = 0.0, delta = 0.0, nu = 0.0, a = 1.0;
    int m = 0;
    double aux = 0.0;  // estimate-specific extra (E1: heat-term blow-up factor)
    std::vector<BoundRow> rows;

    double max_ratio() const;
    double min_positive_ratio() const;
    // log10 spread of per-k maxima (constants uniform in k <=> small spread)
    double log10_k_spread() const;
};

std::string bound_report_csv_header();
void append_bound_report_csv(std::string& out, const BoundReport& rep);
void write_bound_report_csv(const std::string& path, const std::vector<BoundReport>& reps);

void write_decay_csv(const std::string& path, const std::vector<DecayRow>& rows);

// CSV of a HolderEstimate: (k, band_center_frequency, sup_norm, weighted_value)
struct HolderEstimate;

}  // namespace hlab
