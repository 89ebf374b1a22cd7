#include "hlab/heat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "hlab/fft.hpp"
#include "hlab/fft_detail.hpp"
#include "hlab/filter_bank.hpp"
#include "hlab/parallel.hpp"
#include "hlab/rng.hpp"

namespace hlab {

SpectralField heat_evolve(const SpectralField& f, double nu, double t) {
    if (t < 0.0) throw validation_error("heat_evolve: t must be nonnegative");
    if (nu < 0.0) throw validation_error("heat_evolve: nu must be nonnegative");
    SpectralField out = f;
    std::size_t sz = f.size();
    for (std::size_t idx = 0; idx < sz; ++idx) {
        double damp = std::exp(-4.0 * M_PI * M_PI * nu * t * freq_norm2(freq_of_index(f.grid, idx)));
        for (int c = 0; c < f.components; ++c) out.at(c, idx) *= damp;
    }
    return out;
}

void AnnulusSpec::validate() const {
    grid.validate();
    if (!(R > 0.0) || !(delta > 0.0)) throw validation_error("annulus: R and delta must be positive");
    if (R * (1.0 + delta) > grid.n / 2)
        throw validation_error("annulus: outer radius exceeds the grid Nyquist frequency");
    if (annulus_shell_modes(*this).empty()) throw validation_error("annulus: empty lattice shell");
}

std::vector<std::array<int, 2>> annulus_shell_modes(const AnnulusSpec& spec) {
    double lo = spec.R / (1.0 + spec.delta), hi = spec.R * (1.0 + spec.delta);
    std::vector<std::array<int, 2>> modes;
    std::size_t sz = spec.grid.size();
    for (std::size_t idx = 0; idx < sz; ++idx) {
        auto xi = freq_of_index(spec.grid, idx);
        bool canonical = spec.grid.d == 1 ? xi[0] > 0 : (xi[0] > 0 || (xi[0] == 0 && xi[1] > 0));
        if (!canonical) continue;
        double r = std::sqrt(freq_norm2(xi));
        if (r > lo && r < hi) modes.push_back(xi);
    }
    std::sort(modes.begin(), modes.end());
    return modes;
}

SpectralField annulus_sample(const AnnulusSpec& spec, std::uint64_t seed) {
    auto modes = annulus_shell_modes(spec);
    if (modes.empty()) throw validation_error("annulus_sample: empty lattice shell");
    SpectralField f(spec.grid, 1);
    Rng rng(seed);
    for (const auto& xi : modes) {
        cplx z = rng.next_complex_gaussian();
        f.at(0, index_of_freq(spec.grid, xi[0], xi[1])) = z;
        f.at(0, index_of_freq(spec.grid, -xi[0], -xi[1])) = std::conj(z);
    }
    return f;
}

namespace {

int max_dim_freq(const SpectralField& f) {
    int worst = 0;
    std::size_t sz = f.size();
    for (std::size_t idx = 0; idx < sz; ++idx) {
        bool live = false;
        for (int c = 0; c < f.components && !live; ++c) live = f.at(c, idx) != cplx{0.0, 0.0};
        if (!live) continue;
        auto xi = freq_of_index(f.grid, idx);
        worst = std::max({worst, std::abs(xi[0]), std::abs(xi[1])});
    }
    return worst;
}

// int (-lap f).f|f|^{p-2} and int |f|^p on an m-per-dim grid (mean over
// points; exact once m exceeds the integrand bandwidth).
std::pair<double, double> moments_at(const SpectralField& f, int p, int m) {
    auto vf = sampled_components(f, m);
    auto vl = sampled_components(laplacian(f), m);
    std::size_t sz = vf[0].size();
    double ip = 0.0, np = 0.0;
    for (std::size_t i = 0; i < sz; ++i) {
        double mag2 = 0.0, dot = 0.0;
        for (int c = 0; c < f.components; ++c) {
            mag2 += vf[c][i] * vf[c][i];
            dot += -vl[c][i] * vf[c][i];
        }
        double w = p == 2 ? 1.0 : std::pow(mag2, (p - 2) / 2.0);
        ip += dot * w;
        np += mag2 * w;
    }
    return {ip / sz, np / sz};
}

int quadrature_size(const SpectralField& f, int p) {
    int fmax = max_dim_freq(f);
    long want = static_cast<long>(p) * fmax + 1;
    long cap = f.grid.d == 1 ? 65536 : 1024;
    long m = std::min(want, cap);
    m = std::max<long>(m, f.grid.n);
    return detail::next_fast_size(static_cast<int>(m));
}

}  // namespace

double dissipation_rate(const SpectralField& f, int p) {
    if (l2_coeff_norm(f) == 0.0) throw validation_error("dissipation_rate: zero field");
    if (p < 2 || p % 2 != 0) throw validation_error("dissipation_rate: p must be an even integer >= 2");
    auto [ip, np] = moments_at(f, p, quadrature_size(f, p));
    return ip / np;
}

namespace {

struct ModeList {
    struct Mode {
        double xi0, xi1;
        std::vector<cplx> coeff;  // per component
    };
    int d = 1;
    int comps = 1;
    std::vector<Mode> modes;
};

ModeList gather_modes(const SpectralField& f) {
    ModeList ml;
    ml.d = f.grid.d;
    ml.comps = f.components;
    std::size_t sz = f.size();
    for (std::size_t idx = 0; idx < sz; ++idx) {
        bool live = false;
        for (int c = 0; c < f.components && !live; ++c) live = f.at(c, idx) != cplx{0.0, 0.0};
        if (!live) continue;
        auto xi = freq_of_index(f.grid, idx);
        ModeList::Mode m;
        m.xi0 = xi[0];
        m.xi1 = xi[1];
        m.coeff.resize(f.components);
        for (int c = 0; c < f.components; ++c) m.coeff[c] = f.at(c, idx);
        ml.modes.push_back(std::move(m));
    }
    return ml;
}

// f, grad f, hessian f per component at a point, by direct summation.
struct PointEval {
    std::vector<double> f;                    // comps
    std::vector<std::array<double, 2>> df;    // comps x d
    std::vector<std::array<double, 4>> d2f;   // comps x (d*d), row major
};

PointEval eval_point(const ModeList& ml, double x0, double x1) {
    PointEval pe;
    pe.f.assign(ml.comps, 0.0);
    pe.df.assign(ml.comps, {0.0, 0.0});
    pe.d2f.assign(ml.comps, {0.0, 0.0, 0.0, 0.0});
    for (const auto& m : ml.modes) {
        double phase = 2.0 * M_PI * (m.xi0 * x0 + m.xi1 * x1);
        cplx e = std::polar(1.0, phase);
        double w0 = 2.0 * M_PI * m.xi0, w1 = 2.0 * M_PI * m.xi1;
        for (int c = 0; c < ml.comps; ++c) {
            cplx v = m.coeff[c] * e;
            pe.f[c] += v.real();
            // d/dx_j adds factor i*w_j
            pe.df[c][0] += -w0 * v.imag();
            pe.df[c][1] += -w1 * v.imag();
            pe.d2f[c][0] += -w0 * w0 * v.real();
            pe.d2f[c][1] += -w0 * w1 * v.real();
            pe.d2f[c][2] += -w1 * w0 * v.real();
            pe.d2f[c][3] += -w1 * w1 * v.real();
        }
    }
    return pe;
}

double mag2_of(const PointEval& pe) {
    double s = 0.0;
    for (double v : pe.f) s += v * v;
    return s;
}

}  // namespace

SupPoint sup_exact(const SpectralField& f, int refine) {
    auto phys = to_physical_all(f, refine);
    int m = f.grid.n * refine;
    std::size_t sz = phys[0].size();
    std::size_t best_idx = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < sz; ++i) {
        double s = 0.0;
        for (int c = 0; c < f.components; ++c) s += phys[c][i] * phys[c][i];
        if (s > best) {
            best = s;
            best_idx = i;
        }
    }
    SupPoint sp;
    double x0, x1 = 0.0;
    if (f.grid.d == 1) {
        x0 = static_cast<double>(best_idx) / m;
    } else {
        x0 = static_cast<double>(best_idx / m) / m;
        x1 = static_cast<double>(best_idx % m) / m;
    }

    ModeList ml = gather_modes(f);
    double gx0 = x0, gx1 = x1, gval = best;
    // Newton ascent on |f|^2; fall back to the grid point on divergence.
    for (int it = 0; it < 20; ++it) {
        PointEval pe = eval_point(ml, x0, x1);
        double g = mag2_of(pe);
        double grad[2] = {0.0, 0.0};
        double hess[4] = {0.0, 0.0, 0.0, 0.0};
        for (int c = 0; c < ml.comps; ++c) {
            for (int j = 0; j < 2; ++j) grad[j] += 2.0 * pe.f[c] * pe.df[c][j];
            for (int j = 0; j < 4; ++j)
                hess[j] += 2.0 * (pe.df[c][j / 2] * pe.df[c][j % 2] + pe.f[c] * pe.d2f[c][j]);
        }
        double s0 = 0.0, s1 = 0.0;
        if (f.grid.d == 1) {
            if (hess[0] >= 0.0) break;
            s0 = -grad[0] / hess[0];
        } else {
            double det = hess[0] * hess[3] - hess[1] * hess[2];
            if (!(det > 0.0) || hess[0] >= 0.0) break;  // needs negative definite
            s0 = -(hess[3] * grad[0] - hess[1] * grad[1]) / det;
            s1 = -(hess[0] * grad[1] - hess[2] * grad[0]) / det;
        }
        double cell = 1.0 / m;
        if (!std::isfinite(s0) || !std::isfinite(s1) || std::abs(s0) > cell || std::abs(s1) > cell) break;
        x0 += s0;
        x1 += s1;
        PointEval pn = eval_point(ml, x0, x1);
        double gn = mag2_of(pn);
        if (!(gn >= g)) {
            x0 -= s0;
            x1 -= s1;
            break;
        }
        if (gn - g <= 1e-15 * std::max(1.0, gn)) break;
    }
    PointEval pf = eval_point(ml, x0, x1);
    double final_g = mag2_of(pf);
    if (final_g < gval) {
        x0 = gx0;
        x1 = gx1;
        final_g = gval;
    }
    sp.value = std::sqrt(final_g);
    sp.x = {x0 - std::floor(x0), x1 - std::floor(x1)};
    return sp;
}

double laplacian_at_max(const SpectralField& f) {
    if (l2_coeff_norm(f) == 0.0) throw validation_error("laplacian_at_max: zero field");
    SupPoint sp = sup_exact(f, 2);
    ModeList ml = gather_modes(f);
    PointEval pe = eval_point(ml, sp.x[0], sp.x[1]);
    double num = 0.0, den = 0.0;
    for (int c = 0; c < ml.comps; ++c) {
        double lap = pe.d2f[c][0] + (ml.d == 2 ? pe.d2f[c][3] : 0.0);
        num += -lap * pe.f[c];
        den += pe.f[c] * pe.f[c];
    }
    return num / den;
}

SpectralField multiplier_T(const SpectralField& f, const AnnulusSpec& spec) {
    SpectralField out = f;
    std::size_t sz = f.size();
    for (std::size_t idx = 0; idx < sz; ++idx) {
        double r = std::sqrt(freq_norm2(freq_of_index(f.grid, idx)));
        double arg = std::abs(r - spec.R) / (spec.R * spec.delta);
        double phi = 1.0 - smooth_step(arg - 1.0);
        double sym = 4.0 * M_PI * M_PI * (r * r - spec.R * spec.R) * phi;
        for (int c = 0; c < f.components; ++c) out.at(c, idx) *= sym;
    }
    return out;
}

double cp_probe(const SpectralField& f, int p, double C_shell) {
    if (p < 2 || p % 2 != 0) throw validation_error("cp_probe: p must be an even integer >= 2");
    if (!(C_shell >= 1.0)) throw validation_error("cp_probe: C_shell must be >= 1");
    double rmin = 0.0, rmax = 0.0;
    bool any = false;
    std::size_t sz = f.size();
    for (std::size_t idx = 0; idx < sz; ++idx) {
        bool live = false;
        for (int c = 0; c < f.components && !live; ++c) live = f.at(c, idx) != cplx{0.0, 0.0};
        if (!live) continue;
        double r = std::sqrt(freq_norm2(freq_of_index(f.grid, idx)));
        if (r == 0.0) throw validation_error("cp_probe: field has a mean mode; support must avoid xi=0");
        if (!any) {
            rmin = rmax = r;
            any = true;
        } else {
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
        }
    }
    if (!any) throw validation_error("cp_probe: zero field");
    // shell {R/C <= |xi| <= R} with R the outer radius
    if (rmin * C_shell < rmax * (1.0 - 1e-12))
        throw validation_error("cp_probe: support wider than the declared shell ratio");
    auto [ip, np] = moments_at(f, p, quadrature_size(f, p));
    return ip / (rmax * rmax * np);
}

ProbeResult probe_delta(double epsilon, const AnnulusSpec& spec, std::uint64_t budget, std::uint64_t seed,
                        const std::optional<SpectralField>& warm_start) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw validation_error("probe_delta: epsilon must lie in (0,1)");
    if (budget < 1) throw validation_error("probe_delta: budget must be >= 1");
    spec.validate();
    auto modes = annulus_shell_modes(spec);
    double scale = 4.0 * M_PI * M_PI * spec.R * spec.R;

    ProbeResult result;
    result.worst_ratio = std::numeric_limits<double>::infinity();

    auto objective = [&](const SpectralField& f) {
        result.evaluations += 1;
        return laplacian_at_max(f) / scale;
    };
    auto consider = [&](const SpectralField& f, double val) {
        if (val < result.worst_ratio) {
            result.worst_ratio = val;
            result.worst_field = f;
        }
    };

    // Coordinate descent over the real/imag parts of the half-space shell
    // coefficients, shrinking the step when a full sweep stalls.
    auto refine_from = [&](SpectralField f, std::uint64_t eval_cap) {
        double val = objective(f);
        consider(f, val);
        double step = 0.5;
        std::uint64_t used = 1;
        while (step > 1e-9 && used < eval_cap) {
            bool improved = false;
            for (const auto& xi : modes) {
                std::size_t ip = index_of_freq(spec.grid, xi[0], xi[1]);
                std::size_t im = index_of_freq(spec.grid, -xi[0], -xi[1]);
                for (int part = 0; part < 2 && used < eval_cap; ++part) {
                    for (double sign : {+1.0, -1.0}) {
                        if (used >= eval_cap) break;
                        cplx delta = part == 0 ? cplx{sign * step, 0.0} : cplx{0.0, sign * step};
                        SpectralField trial = f;
                        trial.at(0, ip) += delta;
                        trial.at(0, im) += std::conj(delta);
                        double tval = objective(trial);
                        ++used;
                        if (tval < val) {
                            f = std::move(trial);
                            val = tval;
                            consider(f, val);
                            improved = true;
                            break;
                        }
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
    };

    int restarts = std::max<std::uint64_t>(1, budget / 2000);
    std::uint64_t per_restart = budget / restarts;
    if (warm_start) {
        if (!(warm_start->grid == spec.grid)) throw validation_error("probe_delta: warm start grid mismatch");
        refine_from(*warm_start, per_restart);
    }
    for (int r = 0; r < restarts; ++r) {
        SpectralField f = annulus_sample(spec, split_seed(seed, "probe-restart", r));
        refine_from(std::move(f), per_restart);
    }
    result.delta_ok = result.worst_ratio >= 1.0 - epsilon;
    return result;
}

DecayReport decay_scan(const AnnulusSpec& spec, int samples, int p, std::uint64_t seed, int time_points) {
    spec.validate();
    if (samples < 1) throw validation_error("decay_scan: samples must be >= 1");
    if (p != 0 && (p < 2 || p % 2 != 0)) throw validation_error("decay_scan: p must be 0 (sup) or even >= 2");
    double R2 = spec.R * spec.R;
    std::vector<double> times(time_points);
    for (int i = 0; i < time_points; ++i) {
        double frac = time_points == 1 ? 0.0 : static_cast<double>(i) / (time_points - 1);
        times[i] = std::pow(10.0, -4.0 * (1.0 - frac)) / R2;  // log grid in [1e-4/R^2, 1/R^2]
    }

    DecayReport rep;
    rep.R = spec.R;
    rep.delta = spec.delta;
    rep.p = p;
    rep.samples = samples;
    std::vector<std::vector<DecayRow>> rows(samples);
    parallel_for(samples, [&](std::size_t s) {
        std::uint64_t sample_seed = split_seed(seed, "decay-sample", s);
        SpectralField f = annulus_sample(spec, sample_seed);
        double norm0;
        if (p == 0) {
            norm0 = sup_exact(f).value;
        } else {
            // || . ||_p via quadrature; p=2 equals the Parseval sum
            auto vals = sampled_components(f, quadrature_size(f, p));
            double acc = 0.0;
            for (double v : vals[0]) acc += std::pow(v * v, p / 2.0);
            norm0 = std::pow(acc / vals[0].size(), 1.0 / p);
        }
        for (double t : times) {
            SpectralField v = heat_evolve(f, 1.0, t);
            double nt;
            if (p == 0) {
                nt = sup_exact(v).value;
            } else {
                auto vals = sampled_components(v, quadrature_size(v, p));
                double acc = 0.0;
                for (double w : vals[0]) acc += std::pow(w * w, p / 2.0);
                nt = std::pow(acc / vals[0].size(), 1.0 / p);
            }
            double ratio = std::log(norm0 / nt) / (4.0 * M_PI * M_PI * R2 * t);
            double rhs = std::exp(-4.0 * M_PI * M_PI * 0.5 * R2 * t) * norm0;
            rows[s].push_back({spec.grid.d, spec.R, spec.delta, p, sample_seed, t, nt, rhs, ratio});
        }
    });
    bool first = true;
    for (auto& rs : rows) {
        for (auto& r : rs) {
            if (first) {
                rep.min_ratio = rep.max_ratio = r.ratio;
                first = false;
            } else {
                rep.min_ratio = std::min(rep.min_ratio, r.ratio);
                rep.max_ratio = std::max(rep.max_ratio, r.ratio);
            }
            rep.rows.push_back(r);
        }
    }
    return rep;
}

}  // namespace hlab
