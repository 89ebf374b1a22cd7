#include "hlab/solver.hpp"

#include <cmath>
#include <cstdio>

#include "hlab/fft.hpp"
#include "hlab/fft_detail.hpp"
#include "hlab/filter_bank.hpp"

namespace hlab {

SpectralField leray_project(const SpectralField& v) {
    int d = v.grid.d;
    if (v.components != d) throw validation_error("leray_project: expects a d-component vector field");
    SpectralField out = v;
    std::size_t sz = v.size();
    for (std::size_t idx = 0; idx < sz; ++idx) {
        auto xi = freq_of_index(v.grid, idx);
        double n2 = freq_norm2(xi);
        if (n2 == 0.0) continue;
        cplx dot{0.0, 0.0};
        for (int j = 0; j < d; ++j) dot += static_cast<double>(xi[j]) * v.at(j, idx);
        for (int j = 0; j < d; ++j) out.at(j, idx) -= static_cast<double>(xi[j]) * dot / n2;
    }
    return out;
}

namespace {

// u . grad u with 2/3-rule padding; exact for all retained modes.
SpectralField advection(const SpectralField& u) {
    int d = u.grid.d;
    int n = u.grid.n;
    int m = detail::next_fast_size(3 * n / 2 + 1);
    std::size_t msz = d == 1 ? m : static_cast<std::size_t>(m) * m;

    SpectralField grads = gradient(u);  // d*d components, (i,j) -> d_j u_i
    auto phys_u = sampled_components(u, m);
    auto phys_g = sampled_components(grads, m);

    SpectralField adv(u.grid, d);
    std::vector<cplx> buf(msz), spec(msz);
    double scale = 1.0 / static_cast<double>(msz);
    for (int i = 0; i < d; ++i) {
        for (std::size_t q = 0; q < msz; ++q) {
            double acc = 0.0;
            for (int j = 0; j < d; ++j) acc += phys_u[j][q] * phys_g[i * d + j][q];
            buf[q] = cplx{acc, 0.0};
        }
        detail::dft(d, m, buf.data(), spec.data(), -1);
        for (std::size_t q = 0; q < msz; ++q) spec[q] *= scale;
        auto cut = detail::restrict_to(spec.data(), d, m, n);
        std::copy(cut.begin(), cut.end(), adv.comp(i));
    }
    return adv;
}

std::vector<double> viscous_factor(const GridSpec& g, double nu, double dt) {
    std::size_t sz = g.size();
    std::vector<double> e(sz);
    for (std::size_t idx = 0; idx < sz; ++idx)
        e[idx] = std::exp(-4.0 * M_PI * M_PI * nu * dt * freq_norm2(freq_of_index(g, idx)));
    return e;
}

void scale_by(SpectralField& f, const std::vector<double>& w) {
    std::size_t sz = f.size();
    for (int c = 0; c < f.components; ++c) {
        cplx* p = f.comp(c);
        for (std::size_t idx = 0; idx < sz; ++idx) p[idx] *= w[idx];
    }
}

}  // namespace

SpectralField nonlinear_rhs(const SpectralField& u_hat) {
    return leray_project(-1.0 * advection(u_hat));
}

SpectralField pressure(const SpectralField& u_hat) {
    int d = u_hat.grid.d;
    if (u_hat.components != d) throw validation_error("pressure: expects a d-component vector field");
    SpectralField uu = outer_product(u_hat, u_hat, u_hat.grid.n);
    SpectralField p(u_hat.grid, 1);
    std::size_t sz = p.size();
    for (std::size_t idx = 0; idx < sz; ++idx) {
        auto xi = freq_of_index(p.grid, idx);
        double n2 = freq_norm2(xi);
        if (n2 == 0.0) continue;
        cplx acc{0.0, 0.0};
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) acc += static_cast<double>(xi[i]) * xi[j] * uu.at(i * d + j, idx);
        p.at(0, idx) = -acc / n2;
    }
    return p;
}

SolverState step(const SolverState& state, double dt) {
    if (!(dt > 0.0)) throw validation_error("step: dt must be positive");
    const SpectralField& u = state.u_hat;
    double maxu = sup_norm(u, 1);
    double dx = 1.0 / u.grid.n;
    if (maxu > 0.0 && dt > 0.5 * dx / maxu)
        throw validation_error("step: advective CFL violated (dt > 0.5 dx / max|u|)");

    auto Eh = viscous_factor(u.grid, state.nu, dt / 2.0);
    auto Ef = viscous_factor(u.grid, state.nu, dt);
    auto N = [&](const SpectralField& v) {
        if (!state.nonlinear) return SpectralField(v.grid, v.components);
        return nonlinear_rhs(v);
    };

    SpectralField k1 = N(u);

    SpectralField u1 = u;
    axpy(u1, dt / 2.0, k1);
    scale_by(u1, Eh);
    SpectralField k2 = N(u1);

    SpectralField u2 = u;
    scale_by(u2, Eh);
    axpy(u2, dt / 2.0, k2);
    SpectralField k3 = N(u2);

    SpectralField u3 = u;
    scale_by(u3, Ef);
    SpectralField k3h = k3;
    scale_by(k3h, Eh);
    axpy(u3, dt, k3h);
    SpectralField k4 = N(u3);

    SpectralField out = u;
    scale_by(out, Ef);
    SpectralField k1f = k1;
    scale_by(k1f, Ef);
    axpy(out, dt / 6.0, k1f);
    SpectralField k23 = k2 + k3;
    scale_by(k23, Eh);
    axpy(out, dt / 3.0, k23);
    axpy(out, dt / 6.0, k4);

    if (has_nan(out)) {
        char msg[128];
        std::snprintf(msg, sizeof msg, "step: NaN detected at t=%.6g (step %ld, nu=%.3g, dt=%.3g)",
                      state.t, state.step_count, state.nu, dt);
        throw property_error(msg);
    }
    SolverState next = state;
    next.u_hat = std::move(out);
    next.t = state.t + dt;
    next.step_count = state.step_count + 1;
    return next;
}

SnapshotSeries run(const SpectralField& u0, double nu, double t_end, double dt, int snapshot_every,
                   const RunOptions& opts) {
    if (!(nu > 0.0)) throw validation_error("run: nu must be positive");
    if (!(t_end > 0.0) || !(dt > 0.0)) throw validation_error("run: t_end and dt must be positive");
    if (snapshot_every < 1) throw validation_error("run: snapshot_every must be >= 1");
    long n_steps = std::lround(t_end / dt);
    if (std::abs(n_steps * dt - t_end) > 1e-9 * std::max(1.0, t_end))
        throw validation_error("run: dt must divide t_end");
    if (n_steps % snapshot_every != 0)
        throw validation_error("run: dt*snapshot_every must divide t_end");

    SolverState st;
    st.u_hat = u0;
    st.nu = nu;
    st.nonlinear = opts.nonlinear;
    if (divergence_defect(u0) > 1e-10) {
        std::fprintf(stderr, "hlab: initial data not divergence-free (defect %.3g); projecting\n",
                     divergence_defect(u0));
        st.u_hat = leray_project(u0);
    }

    SnapshotSeries series;
    series.grid = u0.grid;
    series.nu = nu;
    series.solver_dt = dt;
    series.snapshot_every = snapshot_every;
    series.dt_snap = dt * snapshot_every;
    series.times.push_back(0.0);
    series.fields.push_back(st.u_hat);
    series.energies.push_back(energy(st.u_hat));

    double e_prev = series.energies.back();
    for (long s = 1; s <= n_steps; ++s) {
        st = step(st, dt);
        double e = energy(st.u_hat);
        if (e > e_prev + 1e-8 * std::max(1.0, e_prev))
            throw property_error("run: kinetic energy increased beyond tolerance");
        e_prev = e;
        if (s % snapshot_every == 0) {
            series.times.push_back(s * dt);
            series.fields.push_back(st.u_hat);
            series.energies.push_back(e);
        }
    }
    return series;
}

}  // namespace hlab
