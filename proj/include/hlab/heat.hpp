#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "hlab/field.hpp"

namespace hlab {

// Exact heat semigroup: multiply each coefficient by e^{-4 pi^2 nu t |xi|^2}.
SpectralField heat_evolve(const SpectralField& f, double nu, double t);

struct AnnulusSpec {
    double R = 4.0;
    double delta = 0.1;
    GridSpec grid;

    void validate() const;  // nonempty open lattice shell, shell inside Nyquist
};

// Lattice frequencies in the open shell R/(1+delta) < |xi| < R(1+delta),
// canonical half-space representatives.
std::vector<std::array<int, 2>> annulus_shell_modes(const AnnulusSpec& spec);

// Real scalar field with complex-Gaussian coefficients on the open shell.
SpectralField annulus_sample(const AnnulusSpec& spec, std::uint64_t seed);

// Quadrature of int (-lap f).f |f|^{p-2} / int |f|^p on a grid fine enough
// to resolve the degree-p integrand (capped; see dissipation_rate).
double dissipation_rate(const SpectralField& f, int p);

// Exact sup location: grid scan with spectral upsampling plus Newton ascent
// on the trigonometric interpolant of |f|^2.
struct SupPoint {
    double value = 0.0;                 // |f| at the point
    std::array<double, 2> x{0.0, 0.0};  // location in [0,1)^d
};
SupPoint sup_exact(const SpectralField& f, int refine = 2);

// -lap f . f / |f|^2 evaluated at the argmax of |f|.
double laplacian_at_max(const SpectralField& f);

// Band multiplier 4 pi^2 (|xi|^2 - R^2) phi((|xi|-R)/(R delta)), phi the
// smooth plateau cutoff with 1_{|x|<=1} <= phi <= 1_{|x|<=2}. Equals
// (-lap - 4 pi^2 R^2) on fields supported in the open annulus.
SpectralField multiplier_T(const SpectralField& f, const AnnulusSpec& spec);

// Measured shell constant: int(-lap f) f |f|^{p-2} / (R^2 int |f|^p) with
// R the outer support radius; C_shell must cover the realized support ratio.
double cp_probe(const SpectralField& f, int p, double C_shell);

// Adversarial search for annulus fields violating the eigenfunction-like
// lower bound at the max. Coordinate descent over shell coefficients from
// random restarts (optionally warm-started).
struct ProbeResult {
    bool delta_ok = false;
    double worst_ratio = 0.0;  // min over search of laplacian_at_max / (4 pi^2 R^2)
    SpectralField worst_field;
    std::uint64_t evaluations = 0;
};
ProbeResult probe_delta(double epsilon, const AnnulusSpec& spec, std::uint64_t budget, std::uint64_t seed,
                        const std::optional<SpectralField>& warm_start = std::nullopt);

// Heat-decay verification sweep over random annulus samples.
struct DecayRow {
    int d;
    double R, delta;
    int p;  // 0 encodes the sup norm
    std::uint64_t seed;
    double t, lhs_norm, bound_rhs, ratio;
};
struct DecayReport {
    double R = 0.0, delta = 0.0;
    int p = 0;  // 0 encodes the sup norm
    int samples = 0;
    double min_ratio = 0.0, max_ratio = 0.0;
    std::vector<DecayRow> rows;
};

// p = 0 means the sup norm; time grid is log-spaced in [1e-4/R^2, 1/R^2].
DecayReport decay_scan(const AnnulusSpec& spec, int samples, int p, std::uint64_t seed, int time_points = 9);

}  // namespace hlab
