#pragma once

#include <set>
#include <string>
#include <vector>

#include "hlab/filter_bank.hpp"
#include "hlab/report.hpp"
#include "hlab/solver.hpp"

namespace hlab {

// Coarse-graining stress R_{<=k} = P_{<=k}u (x) P_{<=k}u - P_{<=k}(u (x) u),
// symmetric d*d tensor carried on a doubled grid so the products are exact.
SpectralField reynolds_stress(const SpectralField& u_hat, const LPBank& bank, int k);

// Frequency-split pieces of the stress (high-high, mixed, low-low), written
// through the convolution-with-increment identity; they sum to the stress.
struct StressDecomposition {
    SpectralField hh, hl, lh, ll;
};
StressDecomposition stress_decomposition(const SpectralField& u_hat, const LPBank& bank, int k);

// Pressure on an arbitrary output grid (out_n >= grid n keeps the full
// quadratic spectrum).
SpectralField pressure_on(const SpectralField& u_hat, int out_n);

// Band forcing F_k = -P_k u . grad P_{<=k-1}u - grad P_k p
//                    + div R_{<=k} - div R_{<=k-1}, on the doubled grid.
SpectralField forcing_Fk(const SpectralField& u_hat, const LPBank& bank, int k);

// Residual of the band evolution identity at one snapshot, with the time
// derivative from a centered stencil across neighbouring snapshots.
struct ResidualResult {
    double residual_sup = 0.0;  // sup |d_t P_k u + P_{<=k}u.grad P_k u - nu lap P_k u - F_k|
    double scale_sup = 0.0;     // largest single-term sup (normalization)
    double relative() const { return scale_sup > 0.0 ? residual_sup / scale_sup : 0.0; }
};
ResidualResult lp_evolution_residual(const SnapshotSeries& series, const LPBank& bank, int k,
                                     std::size_t t_index);

enum class BandKind { band, lowpass, around };  // P_k, P_{<=k}, P_{[k-2,k+2]}

struct MaterialDerivField {
    int m = 0;
    int k = 0;
    int stencil_width = 1;  // snapshots touched by the time stencils
    SpectralField field;
};

// m-fold material derivative (d_t + P_{<=k}u . grad)^m applied to the
// requested projection of u, evaluated at snapshot t_index.
MaterialDerivField material_derivative(const SnapshotSeries& series, const LPBank& bank, int k, int m,
                                       std::size_t t_index, BandKind kind = BandKind::lowpass);

struct VerifyOptions {
    double alpha = 1.0 / 3.0;
    double a = 1.0;
    int m_max = 1;
    int k_lo = -1, k_hi = -1;  // analysis band range; defaults derived from the grid
    int time_stride = 1;       // sample every time_stride-th admissible snapshot
};

// Shared measured norms for one series.
struct SeriesNorms {
    double holder = 0.0;   // max over snapshots of holder_norm(u).value
    double sup = 0.0;      // max over snapshots of sup_norm(u)
    double t_wait = 0.0;   // a ||u||^{-2/(1+alpha)} nu^{(1-alpha)/(1+alpha)}
    double k_diss = 0.0;   // smallest band index at the dissipation scale
};
SeriesNorms series_norms(const SnapshotSeries& series, const LPBank& bank, double alpha, double a);

// Estimate ids: M1, M2, M3, M5, M6 (orders limited by admissibility).
std::vector<BoundReport> verify_M(const SnapshotSeries& series, const LPBank& bank,
                                  const std::set<std::string>& which, const VerifyOptions& opts);

BoundReport commutator_check(const SnapshotSeries& series, const LPBank& bank, const VerifyOptions& opts);  // CET
BoundReport forcing_check(const SnapshotSeries& series, const LPBank& bank, const VerifyOptions& opts);     // FK

// Temporal-increment check of u - e^{nu t lap}u0 (rows are lags; aux carries
// the a^{-alpha/2} ||u0||_holder heat factor).
BoundReport eulerian_check(const SnapshotSeries& series, const SpectralField& u0, const LPBank& bank,
                           double alpha, double a);

struct LpEnergyResult {
    BoundReport gronwall;          // measured ||P_k u||_p vs integrated envelope
    double max_transport_rel = 0;  // transport integral over its quadrature scale
    double min_quotient_ratio = 0; // dissipation quotient over 0.5*4pi^2(1+d)^{2k}
};
LpEnergyResult lp_energy_check(const SnapshotSeries& series, const LPBank& bank, int k, int p);

}  // namespace hlab
