#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hlab/solver.hpp"

namespace hlab {

struct ParticleSet;  // tracer.hpp

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;  // in log space
    double stderr_slope = 0.0;
    double r2 = 0.0;
    std::size_t lo = 0, hi = 0;  // fitted index window [lo, hi)
};

// Ordinary least squares on (log abscissa, log value).
FitResult fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys);

struct StructureFunctionTable {
    std::string kind;  // spatial | eulerian_temporal | lagrangian
    int p = 2;
    std::vector<double> abscissae;  // separations or lags
    std::vector<double> values;     // <|increment|^p>^{1/p}
    FitResult fit;
};

// (slope, stderr) over an explicit index window; >= 4 points, positive values.
FitResult fit_exponent(const StructureFunctionTable& table, std::size_t lo, std::size_t hi);

// Widest log-interval with r^2 >= 0.98 (>= 4 points), ties broken toward more
// points and then the leftmost window.
FitResult fit_exponent_auto(const StructureFunctionTable& table);

// Monte-Carlo spatial structure function over (x, direction) samples.
StructureFunctionTable spatial_sf(const SpectralField& u_hat, int p, const std::vector<double>& separations,
                                  std::uint64_t seed, int samples = 10000);

enum class Frame { eulerian, lagrangian };

// Temporal structure functions: Eulerian uses fixed grid probe points across
// snapshots; Lagrangian uses recorded particle velocity histories. Lags are in
// units of the snapshot/history spacing times `lags[i]`.
StructureFunctionTable temporal_sf(const SnapshotSeries& series, int p, const std::vector<int>& lags,
                                   Frame frame, const ParticleSet* particles = nullptr,
                                   double t_min = 0.0);

void write_sf_csv(const std::string& path, const StructureFunctionTable& t);
void write_fit_json(const std::string& path, const StructureFunctionTable& t);

}  // namespace hlab
