#include "hlab/filter_bank.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "hlab/fft.hpp"
#include "hlab/rng.hpp"

namespace hlab {

double smooth_step(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    double a = std::exp(-1.0 / s);
    double b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
}

double LPBank::log_base() const { return std::log1p(delta); }

double LPBank::center(int k) const { return std::exp(k * log_base()); }

double LPBank::band_symbol(double r, int k) const {
    if (r <= 0.0) return 0.0;
    double s = std::log(r) / log_base();
    return smooth_step(s - k + 1.0) - smooth_step(s - k);
}

double LPBank::lowpass_symbol(double r, int k) const {
    if (r <= 0.0) return 1.0;  // mean mode rides with every low pass
    double s = std::log(r) / log_base();
    return 1.0 - smooth_step(s - k);
}

LPBank make_bank(const GridSpec& grid, double delta) {
    grid.validate();
    if (!(delta > 0.0)) throw validation_error("make_bank: delta must be positive");
    LPBank bank;
    bank.delta = delta;
    bank.grid = grid;
    bank.k_min = 0;
    bank.k_max = static_cast<int>(std::ceil(std::log(grid.max_freq_norm()) / std::log1p(delta)));

    // A band with no lattice shell directly below the Nyquist band means the
    // requested resolution cannot separate adjacent bands.
    if (bank.k_max >= 1) {
        int k = bank.k_max - 1;
        double lo = bank.center(k - 1), hi = bank.center(k + 1);
        bool found = false;
        std::size_t sz = grid.size();
        for (std::size_t idx = 0; idx < sz && !found; ++idx) {
            double r = std::sqrt(freq_norm2(freq_of_index(grid, idx)));
            if (r > lo && r < hi) found = true;
        }
        if (!found)
            throw validation_error("make_bank: band k_max-1 contains no lattice frequency; delta too small for this grid");
    }
    return bank;
}

namespace {

void check_band_range(const LPBank& bank, int k) {
    if (k < bank.k_min || k > bank.k_max) throw validation_error("band index out of realized range");
}

SpectralField apply_radial_symbol(const SpectralField& f, const std::function<double(double)>& sym) {
    SpectralField out = f;
    std::size_t sz = f.size();
    std::vector<double> w(sz);
    for (std::size_t idx = 0; idx < sz; ++idx) w[idx] = sym(std::sqrt(freq_norm2(freq_of_index(f.grid, idx))));
    for (int c = 0; c < f.components; ++c) {
        cplx* p = out.comp(c);
        for (std::size_t idx = 0; idx < sz; ++idx) p[idx] *= w[idx];
    }
    return out;
}

}  // namespace

SpectralField lp_project(const SpectralField& f, const LPBank& bank, int k) {
    check_band_range(bank, k);
    return apply_radial_symbol(f, [&](double r) { return bank.band_symbol(r, k); });
}

SpectralField lp_leq(const SpectralField& f, const LPBank& bank, int k) {
    check_band_range(bank, k);
    return apply_radial_symbol(f, [&](double r) { return bank.lowpass_symbol(r, k); });
}

SpectralField lp_gt(const SpectralField& f, const LPBank& bank, int k) {
    check_band_range(bank, k);
    return apply_radial_symbol(f, [&](double r) { return 1.0 - bank.lowpass_symbol(r, k); });
}

SpectralField lp_band(const SpectralField& f, const LPBank& bank, int k1, int k2) {
    if (k2 < k1) throw validation_error("lp_band: k2 < k1");
    int a = std::max(k1, bank.k_min), b = std::min(k2, bank.k_max);
    if (a > b) return SpectralField(f.grid, f.components);
    // telescoped band sum: H(s-a+1) - H(s-b)
    return apply_radial_symbol(f, [&](double r) {
        if (r <= 0.0) return 0.0;
        double s = std::log(r) / bank.log_base();
        return smooth_step(s - a + 1.0) - smooth_step(s - b);
    });
}

double sup_norm(const SpectralField& f, int refine) {
    if (refine != 1 && refine != 2 && refine != 4) throw validation_error("sup_norm: refine must be 1, 2 or 4");
    auto phys = to_physical_all(f, refine);
    std::size_t m = phys[0].size();
    double best = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (int c = 0; c < f.components; ++c) s += phys[c][i] * phys[c][i];
        best = std::max(best, s);
    }
    return std::sqrt(best);
}

HolderEstimate holder_norm(const SpectralField& f, const LPBank& bank, double alpha, int refine) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw validation_error("holder_norm: alpha must lie in (0,1)");
    HolderEstimate est;
    est.alpha = alpha;
    for (int k = bank.k_min; k <= bank.k_max; ++k) {
        double sup = sup_norm(lp_project(f, bank, k), refine);
        double w = std::pow(1.0 + bank.delta, alpha * k) * sup;
        est.per_band.push_back({k, bank.center(k), sup, w});
        est.value = std::max(est.value, w);
    }
    return est;
}

SynthField synth_holder_field_with_oracle(const GridSpec& grid, const LPBank& bank, double alpha,
                                          std::uint64_t seed) {
    grid.validate();
    if (!(alpha > 0.0 && alpha < 1.0)) throw validation_error("synth_holder_field: alpha must lie in (0,1)");
    double cutoff = (2.0 / 3.0) * (grid.n / 2);
    double lb = bank.log_base();
    int k_top = static_cast<int>(std::floor(std::log(cutoff) / lb));

    // Candidate lattice modes per band: canonical half-space representatives
    // whose log-radius sits within 0.15 of the band center, so essentially
    // all of the mode's weight lands in its own band.
    struct Cand {
        double dist;
        int xi0, xi1;
    };
    std::vector<std::vector<Cand>> buckets(k_top + 1);
    std::size_t sz = grid.size();
    for (std::size_t idx = 0; idx < sz; ++idx) {
        auto xi = freq_of_index(grid, idx);
        bool canonical = grid.d == 1 ? xi[0] > 0 : (xi[0] > 0 || (xi[0] == 0 && xi[1] > 0));
        if (!canonical) continue;
        double r = std::sqrt(freq_norm2(xi));
        if (r > cutoff || std::abs(xi[0]) >= grid.n / 2 || std::abs(xi[1]) >= grid.n / 2) continue;
        double s = std::log(r) / lb;
        int k = static_cast<int>(std::lround(s));
        if (k < 0 || k > k_top) continue;
        double dist = std::abs(s - k);
        if (dist <= 0.15) buckets[k].push_back({dist, xi[0], xi[1]});
    }

    SynthField out;
    int comps = grid.d == 2 ? 2 : 1;
    out.field = SpectralField(grid, comps);
    out.k_lo = -1;
    out.k_hi = -1;
    Rng rng(seed);
    for (int k = 0; k <= k_top; ++k) {
        auto& cands = buckets[k];
        if (cands.empty()) continue;
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.dist != b.dist) return a.dist < b.dist;
            if (a.xi0 != b.xi0) return a.xi0 < b.xi0;
            return a.xi1 < b.xi1;
        });
        // a couple dozen modes per band (all of them when the shell is
        // sparse), then the band is rescaled so its sup is exactly the
        // target amplitude
        std::size_t pool = std::min<std::size_t>(cands.size(), 48);
        std::size_t take = std::min<std::size_t>(pool, 24);
        std::vector<std::size_t> picks;
        while (picks.size() < take) {
            std::size_t c = rng.next_below(pool);
            bool dup = false;
            for (std::size_t q : picks) dup = dup || q == c;
            if (!dup) picks.push_back(c);
        }
        SpectralField band(grid, comps);
        for (std::size_t q : picks) {
            const Cand& c = cands[q];
            cplx coeff = 0.5 * std::polar(1.0, 2.0 * M_PI * rng.next_double());
            std::size_t ip = index_of_freq(grid, c.xi0, c.xi1);
            std::size_t im = index_of_freq(grid, -c.xi0, -c.xi1);
            if (grid.d == 1) {
                band.at(0, ip) += coeff;
                band.at(0, im) += std::conj(coeff);
            } else {
                double r = std::sqrt(static_cast<double>(c.xi0) * c.xi0 + static_cast<double>(c.xi1) * c.xi1);
                double e0 = -c.xi1 / r, e1 = c.xi0 / r;  // unit vector orthogonal to xi
                band.at(0, ip) += coeff * e0;
                band.at(1, ip) += coeff * e1;
                band.at(0, im) += std::conj(coeff) * e0;
                band.at(1, im) += std::conj(coeff) * e1;
            }
        }
        double amp = std::pow(1.0 + bank.delta, -alpha * k);
        double sup = sup_norm(band, 2);
        if (sup <= 0.0) continue;
        axpy(out.field, amp / sup, band);
        out.oracle_seminorm = std::max(out.oracle_seminorm, std::pow(1.0 + bank.delta, alpha * k) * amp);
        if (out.k_lo < 0) out.k_lo = k;
        out.k_hi = k;
    }
    return out;
}

SpectralField synth_holder_field(const GridSpec& grid, const LPBank& bank, double alpha, std::uint64_t seed) {
    return synth_holder_field_with_oracle(grid, bank, alpha, seed).field;
}

}  // namespace hlab
