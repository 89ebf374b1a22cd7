#include "hlab/tracer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "hlab/estimates.hpp"
#include "hlab/fft.hpp"
#include "hlab/parallel.hpp"
#include "hlab/rng.hpp"
#include "hlab/structure.hpp"

namespace hlab {

namespace {

constexpr std::size_t kDirectModeLimit = 10000;
constexpr int kPadFactor = 4;
constexpr int kStencil = 16;  // Lagrange points per dimension

// binomial barycentric weights for 16 equispaced nodes
const std::array<double, kStencil>& bary_weights() {
    static const std::array<double, kStencil> w = [] {
        std::array<double, kStencil> out{};
        double c = 1.0;
        for (int j = 0; j < kStencil; ++j) {
            out[j] = (j % 2 == 0 ? 1.0 : -1.0) * c;
            c = c * (kStencil - 1 - j) / (j + 1);
        }
        return out;
    }();
    return w;
}

// 1-D barycentric Lagrange on equispaced nodes f[0..15] at offset u in node
// units measured from node 7 (so u in [0,1) between nodes 7 and 8).
double lagrange16(const double* f, double u) {
    const auto& bw = bary_weights();
    double num = 0.0, den = 0.0;
    for (int j = 0; j < kStencil; ++j) {
        double dx = u - (j - 7);
        if (std::abs(dx) < 1e-13) return f[j];
        double w = bw[j] / dx;
        num += w * f[j];
        den += w;
    }
    return num / den;
}

}  // namespace

struct FieldEvaluator::Impl {
    int d = 1;
    int comps = 1;
    bool direct = false;

    // direct path
    struct Mode {
        double xi0, xi1;
        cplx c0, c1;
    };
    std::vector<Mode> modes;

    // padded path
    int m = 0;  // fine grid points per dim
    std::vector<std::vector<double>> fine;

    std::array<double, 2> eval(double x0, double x1) const {
        std::array<double, 2> out{0.0, 0.0};
        if (direct) {
            for (const auto& mo : modes) {
                cplx e = std::polar(1.0, 2.0 * M_PI * (mo.xi0 * x0 + mo.xi1 * x1));
                out[0] += (mo.c0 * e).real();
                if (comps > 1) out[1] += (mo.c1 * e).real();
            }
            return out;
        }
        double u0 = (x0 - std::floor(x0)) * m;
        double u1 = (x1 - std::floor(x1)) * m;
        int b0 = static_cast<int>(std::floor(u0));
        int b1 = static_cast<int>(std::floor(u1));
        double f0 = u0 - b0, f1 = u1 - b1;
        for (int c = 0; c < comps; ++c) {
            const auto& grid = fine[c];
            if (d == 1) {
                double row[kStencil];
                for (int j = 0; j < kStencil; ++j) row[j] = grid[((b0 + j - 7) % m + m) % m];
                out[c] = lagrange16(row, f0);
            } else {
                double col[kStencil];
                double row[kStencil];
                for (int i = 0; i < kStencil; ++i) {
                    int r = ((b0 + i - 7) % m + m) % m;
                    for (int j = 0; j < kStencil; ++j) row[j] = grid[static_cast<std::size_t>(r) * m + ((b1 + j - 7) % m + m) % m];
                    col[i] = lagrange16(row, f1);
                }
                out[c] = lagrange16(col, f0);
            }
        }
        return out;
    }
};

FieldEvaluator::FieldEvaluator(const SpectralField& f) {
    auto impl = std::make_shared<Impl>();
    impl->d = f.grid.d;
    impl->comps = f.components;
    comps_ = f.components;
    if (f.components > 2) throw validation_error("FieldEvaluator: supports at most 2 components");
    if (active_modes(f) <= kDirectModeLimit) {
        impl->direct = true;
        std::size_t sz = f.size();
        for (std::size_t idx = 0; idx < sz; ++idx) {
            cplx c0 = f.at(0, idx);
            cplx c1 = f.components > 1 ? f.at(1, idx) : cplx{0.0, 0.0};
            if (c0 == cplx{0.0, 0.0} && c1 == cplx{0.0, 0.0}) continue;
            auto xi = freq_of_index(f.grid, idx);
            impl->modes.push_back({static_cast<double>(xi[0]), static_cast<double>(xi[1]), c0, c1});
        }
    } else {
        impl->direct = false;
        impl->m = f.grid.n * kPadFactor;
        impl->fine = to_physical_all(f, kPadFactor);
    }
    impl_ = std::move(impl);
}

std::array<double, 2> FieldEvaluator::operator()(double x0, double x1) const { return impl_->eval(x0, x1); }

std::vector<std::array<double, 2>> eval_velocity(const SpectralField& u_hat,
                                                 const std::vector<std::array<double, 2>>& points) {
    FieldEvaluator ev(u_hat);
    std::vector<std::array<double, 2>> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = ev(points[i][0], points[i][1]);
    return out;
}

ParticleSet seed_particles(const GridSpec& grid, int count, std::uint64_t seed) {
    grid.validate();
    ParticleSet ps;
    ps.d = grid.d;
    Rng rng(seed);
    for (int i = 0; i < count; ++i) {
        double a = rng.next_double();
        double b = grid.d == 2 ? rng.next_double() : 0.0;
        ps.positions.push_back({a, b});
    }
    return ps;
}

namespace {

std::array<double, 2> wrap01(std::array<double, 2> x) {
    for (double& v : x) v -= std::floor(v);
    return x;
}

}  // namespace

double torus_distance(const std::array<double, 2>& a, const std::array<double, 2>& b, int d) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
        double diff = std::abs(a[j] - b[j]);
        diff = std::min(diff, 1.0 - diff);
        s += diff * diff;
    }
    return std::sqrt(s);
}

ParticleSet advect(const SnapshotSeries& series, const ParticleSet& particles, const LPBank* bank,
                   std::optional<int> band, int substeps) {
    if (series.count() < 2) throw validation_error("advect: series needs at least two snapshots");
    if (substeps < 1) throw validation_error("advect: substeps must be >= 1");
    if (band && !bank) throw validation_error("advect: coarse band requested without a bank");
    int d = series.grid.d;

    ParticleSet ps = particles;
    ps.d = d;
    if (band) {
        ps.k_coarse = *band;
        ps.twin_positions = ps.positions;
    }
    ps.history.assign(ps.count(), {});

    auto coarse_of = [&](const SpectralField& f) { return lp_leq(f, *bank, *band); };

    FieldEvaluator full_lo(series.fields[0]);
    std::optional<FieldEvaluator> coarse_lo;
    if (band) coarse_lo.emplace(coarse_of(series.fields[0]));

    // initial history entry
    for (std::size_t pi = 0; pi < ps.count(); ++pi) {
        ParticleSet::HistEntry e;
        e.t = series.times[0];
        e.x = ps.positions[pi];
        e.u = full_lo(e.x[0], e.x[1]);
        e.twin_x = band ? ps.twin_positions[pi] : e.x;
        ps.history[pi].push_back(e);
    }

    for (std::size_t seg = 0; seg + 1 < series.count(); ++seg) {
        FieldEvaluator full_hi(series.fields[seg + 1]);
        std::optional<FieldEvaluator> coarse_hi;
        if (band) coarse_hi.emplace(coarse_of(series.fields[seg + 1]));
        double t0 = series.times[seg], t1 = series.times[seg + 1];
        double h = (t1 - t0) / substeps;

        auto vel = [&](const FieldEvaluator& lo, const FieldEvaluator& hi, double t,
                       const std::array<double, 2>& x) {
            double w = (t - t0) / (t1 - t0);
            auto a = lo(x[0], x[1]);
            auto b = hi(x[0], x[1]);
            return std::array<double, 2>{(1 - w) * a[0] + w * b[0], (1 - w) * a[1] + w * b[1]};
        };
        auto rk4 = [&](const FieldEvaluator& lo, const FieldEvaluator& hi, std::array<double, 2> x) {
            for (int s = 0; s < substeps; ++s) {
                double t = t0 + s * h;
                auto k1 = vel(lo, hi, t, x);
                auto k2 = vel(lo, hi, t + h / 2, wrap01({x[0] + h / 2 * k1[0], x[1] + h / 2 * k1[1]}));
                auto k3 = vel(lo, hi, t + h / 2, wrap01({x[0] + h / 2 * k2[0], x[1] + h / 2 * k2[1]}));
                auto k4 = vel(lo, hi, t + h, wrap01({x[0] + h * k3[0], x[1] + h * k3[1]}));
                x[0] += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
                x[1] += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
                x = wrap01(x);
            }
            return x;
        };

        parallel_for(ps.count(), [&](std::size_t pi) {
            ps.positions[pi] = rk4(full_lo, full_hi, ps.positions[pi]);
            if (band) ps.twin_positions[pi] = rk4(*coarse_lo, *coarse_hi, ps.twin_positions[pi]);
            ParticleSet::HistEntry e;
            e.t = t1;
            e.x = ps.positions[pi];
            e.u = full_hi(e.x[0], e.x[1]);
            e.twin_x = band ? ps.twin_positions[pi] : e.x;
            ps.history[pi].push_back(e);
        });

        full_lo = std::move(full_hi);
        if (band) coarse_lo = std::move(coarse_hi);
    }
    return ps;
}

BoundReport gronwall_check(const SnapshotSeries& series, const ParticleSet& particles, int k, double t0,
                           double t_end, const LPBank& bank, double alpha) {
    if (particles.k_coarse != k) throw validation_error("gronwall_check: particles lack twins for this band");
    if (particles.history.empty() || particles.history[0].empty())
        throw validation_error("gronwall_check: empty particle history");
    SeriesNorms sn = series_norms(series, bank, alpha, 1.0);

    BoundReport rep;
    rep.estimate_id = "GRONWALL";
    rep.alpha = alpha;
    rep.delta = bank.delta;
    rep.nu = series.nu;
    double lam = std::pow(1.0 + bank.delta, (1.0 - alpha) * k) * sn.holder;
    double pref = std::pow(1.0 + bank.delta, -static_cast<double>(k));
    std::size_t steps = particles.history[0].size();
    for (std::size_t si = 0; si < steps; ++si) {
        double t = particles.history[0][si].t;
        if (t < t0 || t > t_end) continue;
        double lhs = 0.0;
        for (std::size_t pi = 0; pi < particles.count(); ++pi) {
            const auto& e = particles.history[pi][si];
            lhs = std::max(lhs, torus_distance(e.x, e.twin_x, particles.d));
        }
        double rhs = pref * (std::exp(lam * (t - t0)) - 1.0);
        rep.rows.push_back({k, t, lhs, rhs, rhs > 0.0 ? lhs / rhs : 0.0});
    }
    if (rep.rows.empty()) throw validation_error("gronwall_check: no history samples in [t0, t_end]");
    return rep;
}

TrajHolderReport traj_holder(const ParticleSet& particles, int m, double alpha, double a, double nu,
                             double u_norm) {
    if (m != 1 && m != 2) throw validation_error("traj_holder: m must be 1 or 2");
    if (particles.history.empty() || particles.history[0].size() < 8)
        throw validation_error("traj_holder: histories too short");
    int d = particles.d;
    std::size_t steps = particles.history[0].size();
    double dt = particles.history[0][1].t - particles.history[0][0].t;

    double t_wait = a * std::pow(u_norm, -2.0 / (1.0 + alpha)) * std::pow(nu, (1.0 - alpha) / (1.0 + alpha));

    // per-particle series of x^{(m)} samples: m=1 velocity, m=2 centered
    // difference at lag 4 dt
    int margin = m == 1 ? 0 : 2;
    std::vector<std::vector<std::array<double, 2>>> v(particles.count());
    std::vector<double> times;
    for (std::size_t si = margin; si + margin < steps; ++si) times.push_back(particles.history[0][si].t);
    for (std::size_t pi = 0; pi < particles.count(); ++pi) {
        for (std::size_t si = margin; si + margin < steps; ++si) {
            const auto& h = particles.history[pi];
            std::array<double, 2> val{};
            if (m == 1) {
                val = h[si].u;
            } else {
                double span = h[si + 2].t - h[si - 2].t;
                for (int c = 0; c < d; ++c) val[c] = (h[si + 2].u[c] - h[si - 2].u[c]) / span;
            }
            v[pi].push_back(val);
        }
    }

    std::size_t first_ok = times.size();
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] >= t_wait) {
            first_ok = i;
            break;
        }
    }
    if (first_ok + 8 > times.size())
        throw validation_error("traj_holder: too few admissible samples past the waiting threshold");

    std::size_t usable = times.size() - first_ok;
    TrajHolderReport rep;
    rep.m = m;
    rep.a_parameter = a;
    double h_exp = 1.0 / (1.0 - alpha);
    double beta = h_exp - m;
    rep.log_correction_used = std::abs(h_exp - std::round(h_exp)) < 1e-12 && std::abs(beta - 1.0) < 1e-12;
    rep.exponent_target = beta;

    std::vector<double> lag_x, inc_y;
    // cap lags at an eighth of the admissible span so every lag keeps a full
    // population of (t, t+lag) pairs
    std::size_t lag_cap = std::max<std::size_t>(usable / 8, 4);
    for (std::size_t lag = 1; lag < lag_cap; lag = std::max(lag + 1, lag * 3 / 2)) {
        double worst = 0.0;
        for (std::size_t pi = 0; pi < particles.count(); ++pi) {
            for (std::size_t i = first_ok; i + lag < times.size(); ++i) {
                double s = 0.0;
                for (int c = 0; c < d; ++c) {
                    double diff = v[pi][i + lag][c] - v[pi][i][c];
                    s += diff * diff;
                }
                worst = std::max(worst, std::sqrt(s));
            }
        }
        if (worst > 0.0) {
            double tau = lag * dt;
            lag_x.push_back(tau);
            inc_y.push_back(worst);
            rep.measured_pairs.emplace_back(tau, worst);
        }
    }
    if (lag_x.size() < 4) throw validation_error("traj_holder: too few lag points for a fit");

    std::vector<double> abscissa = lag_x;
    if (rep.log_correction_used) {
        for (double& tau : abscissa) {
            double logm = std::min(std::log(u_norm * tau), 0.0);
            tau = tau * (1.0 - logm);
        }
    }
    FitResult fit = fit_power_law(abscissa, inc_y);
    rep.fitted_slope = fit.slope;
    rep.fit_stderr = fit.stderr_slope;
    rep.constant_estimate = std::exp(fit.intercept) / std::pow(u_norm, h_exp);
    return rep;
}

double cluster_volume_ratio(const std::vector<std::array<double, 2>>& before,
                            const std::vector<std::array<double, 2>>& after) {
    if (before.size() != after.size() || before.size() < 3)
        throw validation_error("cluster_volume_ratio: need matched clusters of >= 3 points");
    // least-squares affine map on centered clouds (2x2 normal equations);
    // displacements are unwrapped to the nearest periodic image
    std::size_t n = before.size();
    std::array<double, 2> mb{0, 0}, ma{0, 0};
    std::vector<std::array<double, 2>> disp(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < 2; ++c) {
            double dv = after[i][c] - before[i][c];
            dv -= std::round(dv);
            disp[i][c] = before[i][c] + dv;
            mb[c] += before[i][c];
            ma[c] += disp[i][c];
        }
    }
    for (int c = 0; c < 2; ++c) {
        mb[c] /= n;
        ma[c] /= n;
    }
    double sxx = 0, sxy = 0, syy = 0;
    double bxx = 0, bxy = 0, byx = 0, byy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double x0 = before[i][0] - mb[0], x1 = before[i][1] - mb[1];
        double y0 = disp[i][0] - ma[0], y1 = disp[i][1] - ma[1];
        sxx += x0 * x0;
        sxy += x0 * x1;
        syy += x1 * x1;
        bxx += y0 * x0;
        bxy += y0 * x1;
        byx += y1 * x0;
        byy += y1 * x1;
    }
    double det = sxx * syy - sxy * sxy;
    if (std::abs(det) < 1e-14) throw validation_error("cluster_volume_ratio: degenerate cluster");
    double a00 = (bxx * syy - bxy * sxy) / det;
    double a01 = (bxy * sxx - bxx * sxy) / det;
    double a10 = (byx * syy - byy * sxy) / det;
    double a11 = (byy * sxx - byx * sxy) / det;
    return a00 * a11 - a01 * a10;
}

void write_trajectory_csv(const std::string& path, const ParticleSet& particles) {
    std::string out;
    bool twins = particles.k_coarse >= 0;
    out = particles.d == 1 ? "particle_id,t,x_1,u_1" : "particle_id,t,x_1,x_2,u_1,u_2";
    if (twins) out += particles.d == 1 ? ",twin_x_1" : ",twin_x_1,twin_x_2";
    out += "\n";
    char line[320];
    for (std::size_t pi = 0; pi < particles.count(); ++pi) {
        for (const auto& e : particles.history[pi]) {
            if (particles.d == 1)
                std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g", pi, e.t, e.x[0], e.u[0]);
            else
                std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g", pi, e.t, e.x[0], e.x[1],
                              e.u[0], e.u[1]);
            out += line;
            if (twins) {
                if (particles.d == 1)
                    std::snprintf(line, sizeof line, ",%.17g", e.twin_x[0]);
                else
                    std::snprintf(line, sizeof line, ",%.17g,%.17g", e.twin_x[0], e.twin_x[1]);
                out += line;
            }
            out += "\n";
        }
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw validation_error("cannot open " + path + " for writing");
    f << out;
}

}  // namespace hlab
