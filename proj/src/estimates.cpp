#include "hlab/estimates.hpp"

#include <cmath>
#include <functional>

#include "hlab/fft.hpp"
#include "hlab/fft_detail.hpp"
#include "hlab/heat.hpp"

namespace hlab {

namespace {

// (b . grad) c, alias-free, result restricted to out_n. b is a d-vector,
// c has any component count.
SpectralField advect_product(const SpectralField& b, const SpectralField& c, int out_n) {
    int d = b.grid.d;
    if (b.components != d) throw validation_error("advect_product: advecting field must be a d-vector");
    int m = detail::next_fast_size(b.grid.n / 2 + c.grid.n / 2 + out_n / 2 + 2);
    std::size_t msz = d == 1 ? m : static_cast<std::size_t>(m) * m;
    auto pb = sampled_components(b, m);
    auto pg = sampled_components(gradient(c), m);  // (i,j) -> d_j c_i
    GridSpec og{d, out_n};
    SpectralField out(og, c.components);
    std::vector<cplx> buf(msz), spec(msz);
    double scale = 1.0 / static_cast<double>(msz);
    for (int i = 0; i < c.components; ++i) {
        for (std::size_t q = 0; q < msz; ++q) {
            double acc = 0.0;
            for (int j = 0; j < d; ++j) acc += pb[j][q] * pg[i * d + j][q];
            buf[q] = cplx{acc, 0.0};
        }
        detail::dft(d, m, buf.data(), spec.data(), -1);
        for (std::size_t q = 0; q < msz; ++q) spec[q] *= scale;
        auto cut = detail::restrict_to(spec.data(), d, m, out_n);
        std::copy(cut.begin(), cut.end(), out.comp(i));
    }
    return out;
}

// Pointwise tensor transpose for d*d-component fields.
SpectralField tensor_transpose(const SpectralField& f) {
    int d = f.grid.d;
    if (f.components != d * d) throw validation_error("tensor_transpose: expects d*d components");
    SpectralField out = f;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            std::copy(f.comp(i * d + j), f.comp(i * d + j) + f.size(), out.comp(j * d + i));
    return out;
}

int default_k_lo(const LPBank& bank) {
    // first band whose center clears a few lattice shells
    int k = bank.k_min;
    while (k < bank.k_max && bank.center(k) < 4.0) ++k;
    return k;
}

int default_k_hi(const LPBank& bank) {
    double cut = (2.0 / 3.0) * (bank.grid.n / 2);
    int k = bank.k_max;
    while (k > bank.k_min && bank.center(k) > cut) --k;
    return k;
}

}  // namespace

SpectralField reynolds_stress(const SpectralField& u_hat, const LPBank& bank, int k) {
    int n2 = 2 * u_hat.grid.n;
    SpectralField ul = lp_leq(u_hat, bank, k);
    SpectralField low_low = outer_product(ul, ul, n2);
    SpectralField uu = lp_leq(outer_product(u_hat, u_hat, n2), bank, k);
    return low_low - uu;
}

StressDecomposition stress_decomposition(const SpectralField& u_hat, const LPBank& bank, int k) {
    int n2 = 2 * u_hat.grid.n;
    SpectralField A = lp_leq(u_hat, bank, k);        // P_{<=k} u
    SpectralField B = u_hat - A;                     // P_{>k} u
    SpectralField PB = lp_leq(B, bank, k);           // P_{<=k} P_{>k} u (transition band)
    SpectralField PA = lp_leq(A, bank, k);           // P_{<=k}^2 u

    StressDecomposition out;
    out.hh = -1.0 * lp_leq(outer_product(B, B, n2), bank, k);
    // int phi(y) B(x-y) (x) (A(x-y) - A(x)) dy  ==  P(B (x) A) - (P B)(x) (x) A(x)
    out.hl = -1.0 * (lp_leq(outer_product(B, A, n2), bank, k) - outer_product(PB, A, n2));
    out.lh = tensor_transpose(out.hl);
    SpectralField paa = lp_leq(outer_product(A, A, n2), bank, k);
    SpectralField cross = outer_product(A, PA, n2);
    out.ll = -1.0 * (paa - cross - tensor_transpose(cross) + outer_product(A, A, n2));
    return out;
}

SpectralField pressure_on(const SpectralField& u_hat, int out_n) {
    int d = u_hat.grid.d;
    if (u_hat.components != d) throw validation_error("pressure: expects a d-component vector field");
    SpectralField uu = outer_product(u_hat, u_hat, out_n);
    GridSpec og{d, out_n};
    SpectralField p(og, 1);
    std::size_t sz = p.size();
    for (std::size_t idx = 0; idx < sz; ++idx) {
        auto xi = freq_of_index(og, idx);
        double nrm2 = freq_norm2(xi);
        if (nrm2 == 0.0) continue;
        cplx acc{0.0, 0.0};
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) acc += static_cast<double>(xi[i]) * xi[j] * uu.at(i * d + j, idx);
        p.at(0, idx) = -acc / nrm2;
    }
    return p;
}

SpectralField forcing_Fk(const SpectralField& u_hat, const LPBank& bank, int k) {
    if (k - 1 < bank.k_min) throw validation_error("forcing_Fk: k-1 below the realized band range");
    int n2 = 2 * u_hat.grid.n;
    SpectralField uk = lp_project(u_hat, bank, k);
    SpectralField ulow = lp_leq(u_hat, bank, k - 1);
    SpectralField term1 = advect_product(uk, ulow, n2);

    SpectralField p = pressure_on(u_hat, n2);
    SpectralField gp = gradient(lp_project(p, bank, k));

    SpectralField divR = divergence(reynolds_stress(u_hat, bank, k));
    SpectralField divRm = divergence(reynolds_stress(u_hat, bank, k - 1));

    SpectralField f = divR - divRm;
    axpy(f, -1.0, term1);
    axpy(f, -1.0, gp);
    return f;
}

MaterialDerivField material_derivative(const SnapshotSeries& series, const LPBank& bank, int k, int m,
                                       std::size_t t_index, BandKind kind) {
    if (m < 0 || m > 2) throw validation_error("material_derivative: m must be 0, 1 or 2");
    if (t_index < static_cast<std::size_t>(m) || t_index + m >= series.count())
        throw validation_error("material_derivative: t_index too close to the series boundary for the stencil");
    int n2 = 2 * series.grid.n;

    std::function<SpectralField(std::size_t, int)> eval = [&](std::size_t ti, int order) -> SpectralField {
        const SpectralField& u = series.fields[ti];
        if (order == 0) {
            SpectralField proj = kind == BandKind::band      ? lp_project(u, bank, k)
                                 : kind == BandKind::lowpass ? lp_leq(u, bank, k)
                                                             : lp_band(u, bank, k - 2, k + 2);
            return regrid(proj, n2);
        }
        SpectralField prev = eval(ti, order - 1);
        SpectralField plus = eval(ti + 1, order - 1);
        SpectralField minus = eval(ti - 1, order - 1);
        double h = series.times[ti + 1] - series.times[ti];
        SpectralField dt_part = (1.0 / (2.0 * h)) * (plus - minus);
        SpectralField adv = advect_product(lp_leq(u, bank, k), prev, n2);
        return dt_part + adv;
    };

    MaterialDerivField out;
    out.m = m;
    out.k = k;
    out.stencil_width = 2 * m + 1;
    out.field = eval(t_index, m);
    return out;
}

ResidualResult lp_evolution_residual(const SnapshotSeries& series, const LPBank& bank, int k,
                                     std::size_t t_index) {
    if (t_index < 1 || t_index + 1 >= series.count())
        throw validation_error("lp_evolution_residual: need one snapshot on each side");
    int n2 = 2 * series.grid.n;
    const SpectralField& u = series.fields[t_index];
    double h = series.times[t_index + 1] - series.times[t_index];

    SpectralField uk_p = regrid(lp_project(series.fields[t_index + 1], bank, k), n2);
    SpectralField uk_m = regrid(lp_project(series.fields[t_index - 1], bank, k), n2);
    SpectralField ddt = (1.0 / (2.0 * h)) * (uk_p - uk_m);

    SpectralField uk = lp_project(u, bank, k);
    SpectralField adv = advect_product(lp_leq(u, bank, k), uk, n2);
    SpectralField visc = series.nu * regrid(laplacian(uk), n2);
    SpectralField fk = forcing_Fk(u, bank, k);

    SpectralField res = ddt + adv;
    axpy(res, -1.0, visc);
    axpy(res, -1.0, fk);

    ResidualResult rr;
    rr.residual_sup = sup_norm(res, 1);
    rr.scale_sup = std::max({sup_norm(ddt, 1), sup_norm(adv, 1), sup_norm(visc, 1), sup_norm(fk, 1)});
    return rr;
}

SeriesNorms series_norms(const SnapshotSeries& series, const LPBank& bank, double alpha, double a) {
    SeriesNorms sn;
    for (std::size_t i = 0; i < series.count(); ++i) {
        sn.holder = std::max(sn.holder, holder_norm(series.fields[i], bank, alpha, 1).value);
        sn.sup = std::max(sn.sup, sup_norm(series.fields[i], 1));
    }
    sn.t_wait = a * std::pow(sn.holder, -2.0 / (1.0 + alpha)) *
                std::pow(series.nu, (1.0 - alpha) / (1.0 + alpha));
    // dissipation scale: (1+delta)^k >= ||u||^{1/(1+alpha)} nu^{-1/(1+alpha)}
    double target = std::pow(sn.holder, 1.0 / (1.0 + alpha)) * std::pow(series.nu, -1.0 / (1.0 + alpha));
    sn.k_diss = std::log(target) / bank.log_base();
    return sn;
}

namespace {

struct SweepGrid {
    std::vector<int> ks;
    std::vector<std::size_t> tis;  // admissible snapshot indices
    SeriesNorms norms;
};

SweepGrid make_sweep(const SnapshotSeries& series, const LPBank& bank, const VerifyOptions& opts,
                     int stencil_margin) {
    SweepGrid sw;
    sw.norms = series_norms(series, bank, opts.alpha, opts.a);
    int klo = opts.k_lo >= 0 ? opts.k_lo : default_k_lo(bank);
    int khi = opts.k_hi >= 0 ? opts.k_hi : default_k_hi(bank);
    for (int k = klo; k <= khi; ++k) sw.ks.push_back(k);
    int stride = std::max(1, opts.time_stride);
    for (std::size_t i = stencil_margin; i + stencil_margin < series.count(); ++i) {
        if (series.times[i] < sw.norms.t_wait) continue;
        if ((i - stencil_margin) % stride != 0) continue;
        sw.tis.push_back(i);
    }
    return sw;
}

double band_pow(const LPBank& bank, double exponent, int k) {
    return std::pow(1.0 + bank.delta, exponent * k);
}

}  // namespace

std::vector<BoundReport> verify_M(const SnapshotSeries& series, const LPBank& bank,
                                  const std::set<std::string>& which, const VerifyOptions& opts) {
    double alpha = opts.alpha, a = opts.a;
    int m_cap_main = static_cast<int>(std::ceil(2.0 * alpha / (1.0 - alpha) + 1.0)) - 1;  // m < 2a/(1-a)+1
    int m_cap_aux = static_cast<int>(std::ceil(2.0 * alpha / (1.0 - alpha))) - 1;         // m < 2a/(1-a)
    m_cap_main = std::min(m_cap_main, opts.m_max);
    m_cap_aux = std::min(m_cap_aux, opts.m_max);

    std::vector<BoundReport> reports;
    auto wants = [&](const std::string& id) { return which.empty() || which.count(id) > 0; };
    SweepGrid sw = make_sweep(series, bank, opts, std::max(1, opts.m_max));
    if (sw.tis.empty())
        throw validation_error(
            "verify_M: no admissible snapshots past the waiting threshold t >= " +
            std::to_string(sw.norms.t_wait) + " (run too short or nu too large)");
    const double u = sw.norms.holder;

    auto new_report = [&](const std::string& id, int m) {
        BoundReport rep;
        rep.estimate_id = id;
        rep.alpha = alpha;
        rep.delta = bank.delta;
        rep.nu = series.nu;
        rep.a = a;
        rep.m = m;
        return rep;
    };

    for (int m = 0; m <= m_cap_main; ++m) {
        BoundReport m1 = new_report("M1", m), m2 = new_report("M2", m), m3 = new_report("M3", m);
        double am = std::pow(a, -m) + 1.0;
        for (int k : sw.ks) {
            double rhs1 = am * std::pow(u, m + 1) * band_pow(bank, m * (1.0 - alpha) - alpha, k);
            double rhs3 = am * std::pow(u, m + 1) * band_pow(bank, (m + 1) * (1.0 - alpha), k);
            for (std::size_t ti : sw.tis) {
                double t = series.times[ti];
                if (wants("M1")) {
                    double lhs = sup_norm(material_derivative(series, bank, k, m, ti, BandKind::around).field, 1);
                    m1.rows.push_back({k, t, lhs, rhs1, lhs / rhs1});
                }
                if (wants("M2")) {
                    SpectralField hi = material_derivative(series, bank, k + 1, m, ti, BandKind::lowpass).field;
                    SpectralField lo = material_derivative(series, bank, k, m, ti, BandKind::lowpass).field;
                    double lhs = sup_norm(hi - lo, 1);
                    m2.rows.push_back({k, t, lhs, rhs1, lhs / rhs1});
                }
                if (wants("M3")) {
                    double lhs = sup_norm(
                        gradient(material_derivative(series, bank, k, m, ti, BandKind::lowpass).field), 1);
                    m3.rows.push_back({k, t, lhs, rhs3, lhs / rhs3});
                }
            }
        }
        if (wants("M1")) reports.push_back(std::move(m1));
        if (wants("M2")) reports.push_back(std::move(m2));
        if (wants("M3")) reports.push_back(std::move(m3));
    }

    for (int m = 0; m <= m_cap_aux; ++m) {
        BoundReport m5 = new_report("M5", m), m6 = new_report("M6", m);
        int n2 = 2 * series.grid.n;
        if (wants("M5") && m == 0) {
            for (int k : sw.ks) {
                double rhs5 = (std::pow(a, -m) + 1.0) * std::pow(u, m + 2) *
                              band_pow(bank, (m + 1) * (1.0 - alpha) - alpha, k);
                for (std::size_t ti : sw.tis) {
                    const SpectralField& uf = series.fields[ti];
                    double lp = sup_norm(gradient(lp_band(pressure_on(uf, n2), bank, k - 2, k + 2)), 1);
                    double lr = sup_norm(gradient(reynolds_stress(uf, bank, k)), 1);
                    double lhs = lp + lr;
                    m5.rows.push_back({k, series.times[ti], lhs, rhs5, lhs / rhs5});
                }
            }
        }
        if (wants("M6") && m == 0) {
            // dissipation-scale bands run past the data cutoff up to the last
            // band with lattice content
            int k6_lo = std::max(sw.ks.empty() ? bank.k_min : sw.ks.front(),
                                 static_cast<int>(std::ceil(sw.norms.k_diss)));
            int k6_hi = static_cast<int>(
                std::floor(std::log(bank.grid.max_freq_norm() / (1.0 + bank.delta)) / bank.log_base()));
            k6_hi = std::min(k6_hi, bank.k_max);
            for (int k = k6_lo; k <= k6_hi; ++k) {
                double rhs6 = (std::pow(a, -(m + 1)) + 1.0) * std::pow(u, m + 2) / series.nu *
                              band_pow(bank, -2.0 + (m + 1) * (1.0 - alpha) - alpha, k);
                for (std::size_t ti : sw.tis) {
                    double lhs = sup_norm(lp_project(series.fields[ti], bank, k), 1);
                    m6.rows.push_back({k, series.times[ti], lhs, rhs6, lhs / rhs6});
                }
            }
        }
        if (wants("M5")) reports.push_back(std::move(m5));
        if (wants("M6")) {
            if (m6.rows.empty() && which.count("M6") && m == 0)
                throw validation_error("verify_M: M6 has no admissible dissipation-scale bands on this grid");
            reports.push_back(std::move(m6));
        }
    }
    return reports;
}

BoundReport commutator_check(const SnapshotSeries& series, const LPBank& bank, const VerifyOptions& opts) {
    SweepGrid sw = make_sweep(series, bank, opts, 0);
    BoundReport rep;
    rep.estimate_id = "CET";
    rep.alpha = opts.alpha;
    rep.delta = bank.delta;
    rep.nu = series.nu;
    rep.a = opts.a;
    const double u2 = sw.norms.holder * sw.norms.holder;
    for (int k : sw.ks) {
        double rhs = u2 * band_pow(bank, -2.0 * opts.alpha, k);
        for (std::size_t ti : sw.tis) {
            double lhs = sup_norm(reynolds_stress(series.fields[ti], bank, k), 1);
            rep.rows.push_back({k, series.times[ti], lhs, rhs, lhs / rhs});
        }
    }
    return rep;
}

BoundReport forcing_check(const SnapshotSeries& series, const LPBank& bank, const VerifyOptions& opts) {
    SweepGrid sw = make_sweep(series, bank, opts, 0);
    BoundReport rep;
    rep.estimate_id = "FK";
    rep.alpha = opts.alpha;
    rep.delta = bank.delta;
    rep.nu = series.nu;
    rep.a = opts.a;
    const double u2 = sw.norms.holder * sw.norms.holder;
    for (int k : sw.ks) {
        if (k - 1 < bank.k_min) continue;
        double rhs = u2 * band_pow(bank, 1.0 - 2.0 * opts.alpha, k);
        for (std::size_t ti : sw.tis) {
            double lhs = sup_norm(forcing_Fk(series.fields[ti], bank, k), 1);
            rep.rows.push_back({k, series.times[ti], lhs, rhs, lhs / rhs});
        }
    }
    return rep;
}

BoundReport eulerian_check(const SnapshotSeries& series, const SpectralField& u0, const LPBank& bank,
                           double alpha, double a) {
    if (series.count() < 2) throw validation_error("eulerian_check: series too short");
    if (series.times.front() != 0.0) throw validation_error("eulerian_check: series must include t=0");
    SeriesNorms sn = series_norms(series, bank, alpha, a);

    // utld(t) = u(t) - e^{nu t lap} u0 per snapshot
    std::vector<SpectralField> utld;
    utld.reserve(series.count());
    for (std::size_t i = 0; i < series.count(); ++i)
        utld.push_back(series.fields[i] - heat_evolve(u0, series.nu, series.times[i]));

    BoundReport rep;
    rep.estimate_id = "E1";
    rep.alpha = alpha;
    rep.delta = bank.delta;
    rep.nu = series.nu;
    rep.a = a;
    rep.aux = std::pow(a, -alpha / 2.0) * holder_norm(u0, bank, alpha, 1).value;

    // log-spaced subset of snapshot lags
    std::size_t count = series.count();
    std::vector<std::size_t> lags;
    for (std::size_t lag = 1; lag < count; lag = std::max(lag + 1, lag * 3 / 2)) lags.push_back(lag);
    double scale = std::pow(sn.sup, alpha) * sn.holder;
    for (std::size_t lag : lags) {
        double h = series.dt_snap * lag;
        double lhs = 0.0;
        for (std::size_t i = 0; i + lag < count; ++i) lhs = std::max(lhs, sup_norm(utld[i + lag] - utld[i], 1));
        double rhs = scale * std::pow(h, alpha);
        rep.rows.push_back({0, h, lhs, rhs, rhs > 0.0 ? lhs / rhs : 0.0});
    }
    return rep;
}

LpEnergyResult lp_energy_check(const SnapshotSeries& series, const LPBank& bank, int k, int p) {
    if (p < 2 || p % 2 != 0 || p > 16) throw validation_error("lp_energy_check: p must be even, 2..16");
    double band_top = bank.center(k + 1);
    long need = static_cast<long>(p) * static_cast<long>(std::ceil(band_top)) + 1;
    long cap = series.grid.d == 1 ? 65536 : 1024;
    if (need > cap) throw validation_error("lp_energy_check: quadrature resolution insufficient for this p,k");
    int m = detail::next_fast_size(static_cast<int>(std::max<long>(need, series.grid.n)));
    std::size_t msz = series.grid.d == 1 ? m : static_cast<std::size_t>(m) * m;

    LpEnergyResult out;
    out.gronwall.estimate_id = "LP-ENERGY";
    out.gronwall.delta = bank.delta;
    out.gronwall.nu = series.nu;
    out.gronwall.m = p;
    out.max_transport_rel = 0.0;
    out.min_quotient_ratio = 0.0;

    std::vector<double> norms(series.count()), quotients(series.count()), fknorms(series.count());
    for (std::size_t ti = 0; ti < series.count(); ++ti) {
        const SpectralField& u = series.fields[ti];
        SpectralField uk = lp_project(u, bank, k);
        SpectralField ulow = lp_leq(u, bank, k);

        auto vk = sampled_components(uk, m);
        auto vlap = sampled_components(laplacian(uk), m);
        auto vlow = sampled_components(ulow, m);
        auto vgrad = sampled_components(gradient(uk), m);
        int d = series.grid.d;

        double np = 0.0, ip = 0.0, transport = 0.0, tscale = 0.0;
        for (std::size_t q = 0; q < msz; ++q) {
            double mag2 = 0.0, dot = 0.0, adv = 0.0, low = 0.0;
            for (int c = 0; c < d; ++c) {
                mag2 += vk[c][q] * vk[c][q];
                dot += -vlap[c][q] * vk[c][q];
            }
            for (int c = 0; c < d; ++c) {
                double a_c = 0.0;
                for (int j = 0; j < d; ++j) a_c += vlow[j][q] * vgrad[c * d + j][q];
                adv += a_c * vk[c][q];
                low += vlow[c][q] * vlow[c][q];
            }
            double w = p == 2 ? 1.0 : std::pow(mag2, (p - 2) / 2.0);
            np += mag2 * w;
            ip += dot * w;
            transport += adv * w;
            tscale += std::sqrt(low) * std::sqrt(mag2) * w;  // |P<=k u| |grad..| scale proxy
        }
        np /= msz;
        ip /= msz;
        transport /= msz;
        tscale /= msz;
        norms[ti] = std::pow(np, 1.0 / p);
        quotients[ti] = np > 0.0 ? ip / np : 0.0;
        fknorms[ti] = k - 1 >= bank.k_min ? sup_norm(forcing_Fk(u, bank, k), 1) : 0.0;
        if (tscale > 0.0) out.max_transport_rel = std::max(out.max_transport_rel, std::abs(transport) / tscale);

        double qref = 0.5 * 4.0 * M_PI * M_PI * bank.center(k) * bank.center(k);
        double qr = quotients[ti] / qref;
        if (ti == 0 || qr < out.min_quotient_ratio) out.min_quotient_ratio = qr;
    }

    // envelope: g' = -nu Q(t) g + ||F_k||_inf, calibrated at the first snapshot
    double g = norms[0];
    out.gronwall.rows.push_back({k, series.times[0], norms[0], g, 1.0});
    int sub = 16;
    for (std::size_t ti = 1; ti < series.count(); ++ti) {
        double h = (series.times[ti] - series.times[ti - 1]) / sub;
        for (int s = 0; s < sub; ++s) {
            double frac0 = static_cast<double>(s) / sub, frac1 = static_cast<double>(s + 1) / sub;
            auto lam = [&](double f) {
                return series.nu * (quotients[ti - 1] * (1 - f) + quotients[ti] * f);
            };
            auto force = [&](double f) { return fknorms[ti - 1] * (1 - f) + fknorms[ti] * f; };
            auto rhs = [&](double f, double val) { return -lam(f) * val + force(f); };
            double k1 = rhs(frac0, g);
            double k2 = rhs(0.5 * (frac0 + frac1), g + 0.5 * h * k1);
            double k3 = rhs(0.5 * (frac0 + frac1), g + 0.5 * h * k2);
            double k4 = rhs(frac1, g + h * k3);
            g += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        }
        out.gronwall.rows.push_back({k, series.times[ti], norms[ti], g, g > 0.0 ? norms[ti] / g : 0.0});
    }
    return out;
}

}  // namespace hlab
