#pragma once

#include <cstdint>
#include <vector>

#include "hlab/field.hpp"

namespace hlab {

// C-infinity step built from the exp(-1/t) mollifier: 0 for s<=0, 1 for s>=1,
// strictly monotone in between. All band profiles and the annulus multiplier
// cutoff are built from this one function, so results are reproducible
// bit-for-bit given (grid, delta).
double smooth_step(double s);

// (1+delta)-adic band filter bank. Band k has symbol
//   m_k(xi) = H(s - k + 1) - H(s - k),  s = log|xi| / log(1+delta),
// supported in (1+delta)^{k-1} < |xi| < (1+delta)^{k+1}; the sums telescope,
// so sum_k m_k(xi) = 1 for every nonzero lattice frequency and the low-pass
// symbol for P_{<=k} is exactly 1 - H(s-k). The xi=0 mean mode belongs to
// every low pass and to no band.
struct LPBank {
    double delta = 0.1;
    int k_min = 0;
    int k_max = 0;
    GridSpec grid;

    double log_base() const;
    double center(int k) const;                       // (1+delta)^k
    double band_symbol(double r, int k) const;        // m_k at |xi| = r
    double lowpass_symbol(double r, int k) const;     // symbol of P_{<=k}
};

LPBank make_bank(const GridSpec& grid, double delta);

SpectralField lp_project(const SpectralField& f, const LPBank& bank, int k);
SpectralField lp_leq(const SpectralField& f, const LPBank& bank, int k);
SpectralField lp_gt(const SpectralField& f, const LPBank& bank, int k);  // Id - P_{<=k}
SpectralField lp_band(const SpectralField& f, const LPBank& bank, int k1, int k2);

// Grid max of the pointwise Euclidean magnitude, with optional zero-padded
// spectral upsampling (refine in {1,2,4}).
double sup_norm(const SpectralField& f, int refine = 1);

struct HolderEstimate {
    struct Band {
        int k;
        double center;     // (1+delta)^k
        double sup;        // sup_norm(P_k f)
        double weighted;   // (1+delta)^{alpha k} * sup
    };
    double alpha = 0.0;
    double value = 0.0;  // max over bands of weighted
    std::vector<Band> per_band;
};

HolderEstimate holder_norm(const SpectralField& f, const LPBank& bank, double alpha, int refine = 2);

// Random lacunary test field with per-band sup amplitude (1+delta)^{-alpha k}
// on every band that owns a lattice mode close to its center, up to the band
// with center <= (2/3) * Nyquist. Divergence-free for d=2. The oracle value
// is the seminorm implied by the synthesis amplitudes themselves.
struct SynthField {
    SpectralField field;
    double oracle_seminorm = 0.0;
    int k_lo = 0, k_hi = 0;  // populated band range
};

SynthField synth_holder_field_with_oracle(const GridSpec& grid, const LPBank& bank, double alpha,
                                          std::uint64_t seed);
SpectralField synth_holder_field(const GridSpec& grid, const LPBank& bank, double alpha, std::uint64_t seed);

}  // namespace hlab
