#pragma once

#include <string>
#include <vector>

#include "hlab/field.hpp"

namespace hlab {

// Fourier-space projection onto divergence-free fields (xi=0 passes through).
SpectralField leray_project(const SpectralField& v);

// -Proj(u . grad u), products formed on a 2/3-rule zero-padded grid.
SpectralField nonlinear_rhs(const SpectralField& u_hat);

// p = (-lap)^{-1} d_i d_j (u^i u^j), mean zero.
SpectralField pressure(const SpectralField& u_hat);

struct SolverState {
    SpectralField u_hat;  // 2-component, divergence-free
    double t = 0.0;
    double nu = 1e-3;
    long step_count = 0;
    bool nonlinear = true;  // false: pure transport-free heat flow (test hook)
};

// One integrating-factor RK4 step; the viscous factor is exact, so with the
// nonlinearity disabled this reproduces heat_evolve.
SolverState step(const SolverState& state, double dt);

struct SnapshotSeries {
    GridSpec grid;
    double nu = 0.0;
    double solver_dt = 0.0;
    int snapshot_every = 1;
    double dt_snap = 0.0;  // time between stored snapshots
    std::string dealias = "pad-2/3";
    std::vector<double> times;
    std::vector<SpectralField> fields;
    std::vector<double> energies;

    std::size_t count() const { return times.size(); }
};

struct RunOptions {
    bool nonlinear = true;
};

// Deterministic trajectory with snapshot recording; includes the t=0 state.
// Energy must be nonincreasing along the run (checked).
SnapshotSeries run(const SpectralField& u0, double nu, double t_end, double dt, int snapshot_every,
                   const RunOptions& opts = {});

}  // namespace hlab
