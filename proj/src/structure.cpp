#include "hlab/structure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "hlab/fft.hpp"
#include "hlab/rng.hpp"
#include "hlab/tracer.hpp"

namespace hlab {

FitResult fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 4)
        throw validation_error("fit_power_law: need at least 4 points");
    std::size_t n = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw validation_error("fit_power_law: nonpositive value in fit window");
        double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-14) throw validation_error("fit_power_law: degenerate abscissae");
    FitResult fr;
    fr.slope = (n * sxy - sx * sy) / det;
    fr.intercept = (sy - fr.slope * sx) / n;
    double ss_res = 0, ss_tot = 0, mean_y = sy / n;
    for (std::size_t i = 0; i < n; ++i) {
        double ly = std::log(ys[i]);
        double pred = fr.intercept + fr.slope * std::log(xs[i]);
        ss_res += (ly - pred) * (ly - pred);
        ss_tot += (ly - mean_y) * (ly - mean_y);
    }
    fr.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    double var = n > 2 ? ss_res / (n - 2) : 0.0;
    fr.stderr_slope = std::sqrt(var * n / det);
    fr.lo = 0;
    fr.hi = n;
    return fr;
}

FitResult fit_exponent(const StructureFunctionTable& table, std::size_t lo, std::size_t hi) {
    if (hi > table.abscissae.size() || lo >= hi) throw validation_error("fit_exponent: bad window");
    if (hi - lo < 4) throw validation_error("fit_exponent: need at least 4 points in the window");
    std::vector<double> xs(table.abscissae.begin() + lo, table.abscissae.begin() + hi);
    std::vector<double> ys(table.values.begin() + lo, table.values.begin() + hi);
    FitResult fr = fit_power_law(xs, ys);
    fr.lo = lo;
    fr.hi = hi;
    return fr;
}

FitResult fit_exponent_auto(const StructureFunctionTable& table) {
    std::size_t n = table.abscissae.size();
    bool found = false;
    FitResult best;
    double best_span = -1.0;
    for (std::size_t lo = 0; lo + 4 <= n; ++lo) {
        for (std::size_t hi = lo + 4; hi <= n; ++hi) {
            bool positive = true;
            for (std::size_t i = lo; i < hi && positive; ++i) positive = table.values[i] > 0.0;
            if (!positive) continue;
            FitResult fr = fit_exponent(table, lo, hi);
            if (fr.r2 < 0.98) continue;
            double span = std::log(table.abscissae[hi - 1] / table.abscissae[lo]);
            bool better = span > best_span + 1e-12 ||
                          (std::abs(span - best_span) <= 1e-12 && hi - lo > best.hi - best.lo);
            if (!found || better) {
                best = fr;
                best_span = span;
                found = true;
            }
        }
    }
    if (!found) throw validation_error("fit_exponent_auto: no window reaches r^2 >= 0.98");
    return best;
}

StructureFunctionTable spatial_sf(const SpectralField& u_hat, int p, const std::vector<double>& separations,
                                  std::uint64_t seed, int samples) {
    if (p < 1 || p > 4) throw validation_error("spatial_sf: p must be 1..4");
    if (samples < 1) throw validation_error("spatial_sf: samples must be positive");
    for (double s : separations)
        if (!(s > 0.0 && s < 0.5)) throw validation_error("spatial_sf: separations must lie in (0, 1/2)");

    FieldEvaluator ev(u_hat);
    int d = u_hat.grid.d;
    Rng rng(seed);
    std::vector<std::array<double, 2>> xs(samples);
    std::vector<std::array<double, 2>> dirs(samples);
    for (int i = 0; i < samples; ++i) {
        xs[i] = {rng.next_double(), d == 2 ? rng.next_double() : 0.0};
        if (d == 1) {
            dirs[i] = {rng.next_double() < 0.5 ? -1.0 : 1.0, 0.0};
        } else {
            double ang = 2.0 * M_PI * rng.next_double();
            dirs[i] = {std::cos(ang), std::sin(ang)};
        }
    }

    StructureFunctionTable table;
    table.kind = "spatial";
    table.p = p;
    table.abscissae = separations;
    table.values.resize(separations.size());
    for (std::size_t li = 0; li < separations.size(); ++li) {
        double ell = separations[li];
        double acc = 0.0;
        for (int i = 0; i < samples; ++i) {
            auto a = ev(xs[i][0], xs[i][1]);
            auto b = ev(xs[i][0] + ell * dirs[i][0], xs[i][1] + ell * dirs[i][1]);
            double mag2 = 0.0;
            for (int c = 0; c < d; ++c) mag2 += (b[c] - a[c]) * (b[c] - a[c]);
            acc += std::pow(mag2, p / 2.0);
        }
        table.values[li] = std::pow(acc / samples, 1.0 / p);
    }
    return table;
}

StructureFunctionTable temporal_sf(const SnapshotSeries& series, int p, const std::vector<int>& lags,
                                   Frame frame, const ParticleSet* particles, double t_min) {
    if (p < 1 || p > 4) throw validation_error("temporal_sf: p must be 1..4");
    StructureFunctionTable table;
    table.p = p;
    if (frame == Frame::eulerian) {
        table.kind = "eulerian_temporal";
        std::size_t count = series.count();
        for (int lag : lags)
            if (lag < 1 || static_cast<std::size_t>(lag) >= count)
                throw validation_error("temporal_sf: lag exceeds the series span");
        int d = series.grid.d;
        std::vector<std::vector<std::vector<double>>> phys(count);
        for (std::size_t i = 0; i < count; ++i) phys[i] = to_physical_all(series.fields[i], 1);
        std::size_t gsz = phys[0][0].size();
        std::size_t first = 0;
        while (first < count && series.times[first] < t_min) ++first;
        for (int lag : lags) {
            double acc = 0.0;
            std::size_t terms = 0;
            for (std::size_t i = first; i + lag < count; ++i) {
                for (std::size_t q = 0; q < gsz; ++q) {
                    double mag2 = 0.0;
                    for (int c = 0; c < d; ++c) {
                        double diff = phys[i + lag][c][q] - phys[i][c][q];
                        mag2 += diff * diff;
                    }
                    acc += std::pow(mag2, p / 2.0);
                    ++terms;
                }
            }
            if (terms == 0) throw validation_error("temporal_sf: no admissible pairs for a lag");
            table.abscissae.push_back(lag * series.dt_snap);
            table.values.push_back(std::pow(acc / terms, 1.0 / p));
        }
    } else {
        table.kind = "lagrangian";
        if (!particles || particles->history.empty())
            throw validation_error("temporal_sf: lagrangian frame requires particle histories");
        std::size_t steps = particles->history[0].size();
        for (int lag : lags)
            if (lag < 1 || static_cast<std::size_t>(lag) >= steps)
                throw validation_error("temporal_sf: lag exceeds the history span");
        double dt = particles->history[0][1].t - particles->history[0][0].t;
        int d = particles->d;
        std::size_t first = 0;
        while (first < steps && particles->history[0][first].t < t_min) ++first;
        for (int lag : lags) {
            double acc = 0.0;
            std::size_t terms = 0;
            for (std::size_t pi = 0; pi < particles->count(); ++pi) {
                const auto& h = particles->history[pi];
                for (std::size_t i = first; i + lag < steps; ++i) {
                    double mag2 = 0.0;
                    for (int c = 0; c < d; ++c) {
                        double diff = h[i + lag].u[c] - h[i].u[c];
                        mag2 += diff * diff;
                    }
                    acc += std::pow(mag2, p / 2.0);
                    ++terms;
                }
            }
            if (terms == 0) throw validation_error("temporal_sf: no admissible pairs for a lag");
            table.abscissae.push_back(lag * dt);
            table.values.push_back(std::pow(acc / terms, 1.0 / p));
        }
    }
    return table;
}

void write_sf_csv(const std::string& path, const StructureFunctionTable& t) {
    std::string out = "kind,p,abscissa,value\n";
    char line[160];
    for (std::size_t i = 0; i < t.abscissae.size(); ++i) {
        std::snprintf(line, sizeof line, "%s,%d,%.17g,%.17g\n", t.kind.c_str(), t.p, t.abscissae[i],
                      t.values[i]);
        out += line;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw validation_error("cannot open " + path + " for writing");
    f << out;
}

void write_fit_json(const std::string& path, const StructureFunctionTable& t) {
    char buf[360];
    std::snprintf(buf, sizeof buf,
                  "{\n  \"slope\": %.17g,\n  \"stderr\": %.17g,\n  \"window\": [%.17g, %.17g],\n  \"r2\": %.17g\n}\n",
                  t.fit.slope, t.fit.stderr_slope,
                  t.abscissae.empty() ? 0.0 : t.abscissae[t.fit.lo],
                  t.abscissae.empty() ? 0.0 : t.abscissae[t.fit.hi == 0 ? 0 : t.fit.hi - 1], t.fit.r2);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw validation_error("cannot open " + path + " for writing");
    f << buf;
}

}  // namespace hlab
