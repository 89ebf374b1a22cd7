// Command-line front end: every module is exposed as a subcommand, and
// `pipeline` chains them into the full verification run. Exit codes:
// 0 ok, 1 invalid input, 2 a checked property failed.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "hlab/checkpoint.hpp"
#include "hlab/config.hpp"
#include "hlab/estimates.hpp"
#include "hlab/heat.hpp"
#include "hlab/parallel.hpp"
#include "hlab/rng.hpp"
#include "hlab/structure.hpp"
#include "hlab/tracer.hpp"

namespace fs = std::filesystem;
using namespace hlab;

namespace {

constexpr const char* kVersion = "hlab 1.0";

// Creates the directory tree for a run and removes it again if the run
// throws, so failed runs leave no partial outputs behind.
class OutputDir {
  public:
    explicit OutputDir(std::string path) : path_(std::move(path)) {
        existed_ = fs::exists(path_);
        fs::create_directories(path_);
    }
    ~OutputDir() {
        if (!committed_ && !existed_) {
            std::error_code ec;
            fs::remove_all(path_, ec);
        }
    }
    const std::string& path() const { return path_; }
    void commit() { committed_ = true; }

  private:
    std::string path_;
    bool existed_ = false;
    bool committed_ = false;
};

void finalize_manifest(const std::string& dir, std::uint64_t cfg_hash) {
    Manifest man;
    man.version = kVersion;
    man.config_hash = cfg_hash;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string rel = fs::relative(entry.path(), dir).string();
        if (rel == "manifest.txt") continue;
        man.files.emplace_back(rel, hash_file(entry.path().string()));
    }
    write_manifest(dir, man);
}

ExperimentConfig cli_config(const std::string& config_path, const std::vector<std::string>& sets,
                            bool require_core) {
    std::vector<std::string> errors;
    std::set<std::string> present;
    ExperimentConfig cfg = config_path.empty() ? parse_config("", errors, sets, &present)
                                               : load_config(config_path, errors, sets, &present);
    for (const auto& ov : sets) {
        auto eq = ov.find('=');
        if (eq != std::string::npos) present.insert(ov.substr(0, eq));
    }
    if (require_core) {
        auto missing = missing_core_keys(present);
        errors.insert(errors.end(), missing.begin(), missing.end());
    }
    auto more = validate_config(cfg);
    errors.insert(errors.end(), more.begin(), more.end());
    if (!errors.empty()) {
        for (const auto& e : errors) std::fprintf(stderr, "config: %s\n", e.c_str());
        throw validation_error("invalid configuration (" + std::to_string(errors.size()) + " problems)");
    }
    return cfg;
}

SpectralField initial_data(const ExperimentConfig& cfg, const LPBank& bank) {
    SpectralField u0 = cfg.amplitude * synth_holder_field(cfg.grid(), bank, cfg.alpha,
                                                          split_seed(cfg.seed, "initial-data"));
    return leray_project(u0);
}

int mid_band(const LPBank& bank) {
    double target = std::sqrt(4.0 * (2.0 / 3.0) * (bank.grid.n / 2));
    int k = bank.k_min;
    while (k < bank.k_max && bank.center(k) < target) ++k;
    return k;
}

std::string nu_dir_name(double nu) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "nu_%.6g", nu);
    return buf;
}

SnapshotSeries run_one(const ExperimentConfig& cfg, const LPBank& bank, double nu) {
    SpectralField u0 = initial_data(cfg, bank);
    return run(u0, nu, cfg.t_end, cfg.dt, cfg.snapshot_every);
}

void do_verify(const ExperimentConfig& cfg, const SnapshotSeries& series, const LPBank& bank,
               const std::string& out_dir) {
    std::vector<BoundReport> reports;
    std::set<std::string> m_set;
    for (const auto& e : cfg.estimates)
        if (e == "M1" || e == "M2" || e == "M3" || e == "M5" || e == "M6") m_set.insert(e);
    for (double a : cfg.a) {
        VerifyOptions opts;
        opts.alpha = cfg.alpha;
        opts.a = a;
        for (const auto& e : cfg.estimates) {
            if (e == "CET") reports.push_back(commutator_check(series, bank, opts));
            if (e == "FK") reports.push_back(forcing_check(series, bank, opts));
            if (e == "E1")
                reports.push_back(eulerian_check(series, series.fields.front(), bank, cfg.alpha, a));
        }
        if (!m_set.empty()) {
            auto ms = verify_M(series, bank, m_set, opts);
            reports.insert(reports.end(), ms.begin(), ms.end());
        }
        if (std::find(cfg.estimates.begin(), cfg.estimates.end(), "LP-ENERGY") != cfg.estimates.end()) {
            int k = cfg.k_band >= 0 ? cfg.k_band : mid_band(bank);
            for (int p : cfg.p) {
                if (p % 2 != 0) continue;
                reports.push_back(lp_energy_check(series, bank, k, p).gronwall);
            }
        }
    }
    write_bound_report_csv(out_dir + "/bounds.csv", reports);
}

void do_traj(const ExperimentConfig& cfg, const SnapshotSeries& series, const LPBank& bank, int k,
             std::uint64_t seed, const std::string& out_dir) {
    ParticleSet seeds = seed_particles(series.grid, cfg.particles, seed);
    ParticleSet moved = advect(series, seeds, &bank, k);
    write_trajectory_csv(out_dir + "/trajectories.csv", moved);
    BoundReport rep = gronwall_check(series, moved, k, series.times.front(), series.times.back(), bank,
                                     cfg.alpha);
    write_bound_report_csv(out_dir + "/gronwall.csv", {rep});
}

void do_structfun(const ExperimentConfig& cfg, const SnapshotSeries& series, const LPBank& bank,
                  const std::string& kind, int p, std::uint64_t seed, const std::string& out_dir) {
    StructureFunctionTable table;
    if (kind == "spatial") {
        std::vector<double> seps;
        for (double l = 2.0 / series.grid.n; l < 0.25; l *= 1.5) seps.push_back(l);
        table = spatial_sf(series.fields.back(), p, seps, split_seed(seed, "spatial-sf"));
    } else if (kind == "eulerian") {
        std::vector<int> lags;
        for (int l : cfg.lags)
            if (static_cast<std::size_t>(l) < series.count()) lags.push_back(l);
        table = temporal_sf(series, p, lags, Frame::eulerian);
    } else if (kind == "lagrangian") {
        ParticleSet seeds = seed_particles(series.grid, cfg.particles, split_seed(seed, "sf-particles"));
        ParticleSet moved = advect(series, seeds);
        std::vector<int> lags;
        for (int l : cfg.lags)
            if (static_cast<std::size_t>(l) < series.count()) lags.push_back(l);
        table = temporal_sf(series, p, lags, Frame::lagrangian, &moved);
    } else {
        throw validation_error("structfun: kind must be spatial, eulerian or lagrangian");
    }
    try {
        table.fit = fit_exponent_auto(table);
    } catch (const validation_error&) {
        // no window reaches the r^2 target; leave the default (empty) fit
    }
    write_sf_csv(out_dir + "/sf_" + kind + "_p" + std::to_string(p) + ".csv", table);
    write_fit_json(out_dir + "/fit_" + kind + "_p" + std::to_string(p) + ".json", table);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral estimate laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "config file");
    app.add_option("--set", sets, "override config entries (section.key=value)");

    auto* lp = app.add_subcommand("lp-analyze", "band analysis of a field");
    std::string lp_field;
    lp->add_option("--field", lp_field, "HLAB checkpoint to analyze (default: synthetic field)");

    auto* hd = app.add_subcommand("heat-decay", "thin-annulus decay verification");
    int hd_d = 1, hd_samples = 50, hd_n = 64;
    double hd_R = 8.0, hd_delta = 0.02;
    std::uint64_t hd_seed = 1;
    hd->add_option("--d", hd_d);
    hd->add_option("--R", hd_R);
    hd->add_option("--delta", hd_delta);
    hd->add_option("--samples", hd_samples);
    hd->add_option("--n", hd_n);
    hd->add_option("--seed", hd_seed);

    auto* pd = app.add_subcommand("probe-delta", "adversarial search for decay violations");
    double pd_eps = 0.5, pd_R = 16.0, pd_delta = 0.02;
    int pd_d = 1, pd_n = 64;
    std::uint64_t pd_budget = 10000, pd_seed = 1;
    pd->add_option("--epsilon", pd_eps);
    pd->add_option("--R", pd_R);
    pd->add_option("--delta", pd_delta);
    pd->add_option("--d", pd_d);
    pd->add_option("--n", pd_n);
    pd->add_option("--budget", pd_budget);
    pd->add_option("--seed", pd_seed);

    auto* nr = app.add_subcommand("ns-run", "solver run(s) over the configured viscosities");

    auto* tj = app.add_subcommand("traj", "particle advection and coarse-flow comparison");
    std::string tj_series;
    int tj_k = -1, tj_particles = -1;
    std::uint64_t tj_seed = 0;
    bool tj_seed_set = false;
    tj->add_option("--series", tj_series)->required();
    tj->add_option("--k", tj_k);
    tj->add_option("--particles", tj_particles);
    tj->add_option("--seed", tj_seed)->each([&](const std::string&) { tj_seed_set = true; });

    auto* vf = app.add_subcommand("verify", "estimate verification on a stored series");
    std::string vf_series, vf_estimates;
    double vf_alpha = -1.0, vf_a = -1.0;
    vf->add_option("--series", vf_series)->required();
    vf->add_option("--estimates", vf_estimates, "comma list, e.g. CET,FK,M6,E1");
    vf->add_option("--alpha", vf_alpha);
    vf->add_option("--a", vf_a);

    auto* sf = app.add_subcommand("structfun", "structure functions from a stored series");
    std::string sf_series, sf_kind = "spatial";
    int sf_p = 2;
    sf->add_option("--series", sf_series)->required();
    sf->add_option("--kind", sf_kind);
    sf->add_option("--p", sf_p);

    auto* pl = app.add_subcommand("pipeline", "full run: solver sweep, verify, traj, structfun");

    CLI11_PARSE(app, argc, argv);

    try {
        bool config_driven = nr->parsed() || pl->parsed();
        ExperimentConfig cfg = cli_config(config_path, sets, config_driven);

        if (lp->parsed()) {
            OutputDir out(cfg.output_dir + "/lp-analyze");
            GridSpec grid = cfg.grid();
            LPBank bank = make_bank(grid, cfg.delta);
            SpectralField f = lp_field.empty() ? initial_data(cfg, bank) : read_field(lp_field);
            if (!lp_field.empty() && !(f.grid == grid)) bank = make_bank(f.grid, cfg.delta);
            HolderEstimate est = holder_norm(f, bank, cfg.alpha);
            write_holder_csv(out.path() + "/holder.csv", est);
            std::printf("holder seminorm (alpha=%.4f): %.6g over bands [%d, %d]\n", cfg.alpha, est.value,
                        bank.k_min, bank.k_max);
            finalize_manifest(out.path(), config_hash(cfg));
            out.commit();
            return 0;
        }

        if (hd->parsed()) {
            OutputDir out(cfg.output_dir + "/heat-decay");
            AnnulusSpec spec{hd_R, hd_delta, GridSpec{hd_d, hd_n}};
            spec.validate();
            std::vector<DecayRow> rows;
            bool ok = true;
            double hi_limit = (1.0 + hd_delta) * (1.0 + hd_delta) + 1e-6;
            for (int p : {2, 0}) {
                DecayReport rep = decay_scan(spec, hd_samples, p, hd_seed);
                rows.insert(rows.end(), rep.rows.begin(), rep.rows.end());
                std::printf("p=%s: ratio range [%.4f, %.4f] over %d samples\n", p == 0 ? "inf" : "2",
                            rep.min_ratio, rep.max_ratio, hd_samples);
                ok = ok && rep.min_ratio >= 0.5 && rep.max_ratio <= hi_limit;
            }
            write_decay_csv(out.path() + "/decay.csv", rows);
            finalize_manifest(out.path(), config_hash(cfg));
            out.commit();
            if (!ok) {
                std::fprintf(stderr, "heat-decay: decay ratios escaped [0.5, (1+delta)^2]\n");
                return 2;
            }
            return 0;
        }

        if (pd->parsed()) {
            OutputDir out(cfg.output_dir + "/probe-delta");
            AnnulusSpec spec{pd_R, pd_delta, GridSpec{pd_d, pd_n}};
            spec.validate();
            ProbeResult res = probe_delta(pd_eps, spec, pd_budget, pd_seed);
            write_field(out.path() + "/witness.hlab", res.worst_field);
            std::printf("worst ratio %.6g after %llu evaluations; delta_ok=%s\n", res.worst_ratio,
                        static_cast<unsigned long long>(res.evaluations), res.delta_ok ? "true" : "false");
            finalize_manifest(out.path(), config_hash(cfg));
            out.commit();
            return res.delta_ok ? 0 : 2;
        }

        if (nr->parsed()) {
            if (cfg.d != 2) throw validation_error("ns-run: the solver is 2-D only");
            OutputDir out(cfg.output_dir);
            LPBank bank = make_bank(cfg.grid(), cfg.delta);
            for (double nu : cfg.nu) {
                SnapshotSeries series = run_one(cfg, bank, nu);
                save_series(out.path() + "/" + nu_dir_name(nu), series);
                std::printf("nu=%.6g: %zu snapshots, energy %.6g -> %.6g\n", nu, series.count(),
                            series.energies.front(), series.energies.back());
            }
            finalize_manifest(out.path(), config_hash(cfg));
            out.commit();
            return 0;
        }

        if (tj->parsed()) {
            SnapshotSeries series = load_series(tj_series);
            LPBank bank = make_bank(series.grid, cfg.delta);
            if (tj_particles > 0) cfg.particles = tj_particles;
            OutputDir out(cfg.output_dir + "/traj");
            int k = tj_k >= 0 ? tj_k : mid_band(bank);
            do_traj(cfg, series, bank, k, tj_seed_set ? tj_seed : split_seed(cfg.seed, "traj"), out.path());
            finalize_manifest(out.path(), config_hash(cfg));
            out.commit();
            return 0;
        }

        if (vf->parsed()) {
            SnapshotSeries series = load_series(vf_series);
            LPBank bank = make_bank(series.grid, cfg.delta);
            if (vf_alpha > 0.0) cfg.alpha = vf_alpha;
            if (vf_a > 0.0) cfg.a = {vf_a};
            if (!vf_estimates.empty()) {
                cfg.estimates.clear();
                std::stringstream ss(vf_estimates);
                std::string item;
                while (std::getline(ss, item, ',')) cfg.estimates.push_back(item);
                auto errs = validate_config(cfg);
                if (!errs.empty()) throw validation_error("verify: " + errs.front());
            }
            OutputDir out(cfg.output_dir + "/verify");
            do_verify(cfg, series, bank, out.path());
            finalize_manifest(out.path(), config_hash(cfg));
            out.commit();
            return 0;
        }

        if (sf->parsed()) {
            SnapshotSeries series = load_series(sf_series);
            LPBank bank = make_bank(series.grid, cfg.delta);
            OutputDir out(cfg.output_dir + "/structfun");
            do_structfun(cfg, series, bank, sf_kind, sf_p, cfg.seed, out.path());
            finalize_manifest(out.path(), config_hash(cfg));
            out.commit();
            return 0;
        }

        if (pl->parsed()) {
            if (cfg.d != 2) throw validation_error("pipeline: the solver is 2-D only");
            OutputDir out(cfg.output_dir);
            LPBank bank = make_bank(cfg.grid(), cfg.delta);
            int k = cfg.k_band >= 0 ? cfg.k_band : mid_band(bank);

            // independent (nu, analysis) tasks, each owning its subdirectory
            std::vector<std::string> summary_lines(cfg.nu.size());
            parallel_for(cfg.nu.size(), [&](std::size_t ni) {
                double nu = cfg.nu[ni];
                std::string sub = out.path() + "/" + nu_dir_name(nu);
                SnapshotSeries series = run_one(cfg, bank, nu);
                save_series(sub + "/series", series);
                fs::create_directories(sub);
                do_verify(cfg, series, bank, sub);
                do_traj(cfg, series, bank, k, split_seed(cfg.seed, "traj", ni), sub);
                do_structfun(cfg, series, bank, "spatial", 2, cfg.seed, sub);
                do_structfun(cfg, series, bank, "eulerian", 2, cfg.seed, sub);
                do_structfun(cfg, series, bank, "lagrangian", 2, cfg.seed, sub);
                char line[160];
                std::snprintf(line, sizeof line, "%.6g,%zu,%.6g,%.6g\n", nu, series.count(),
                              series.energies.front(), series.energies.back());
                summary_lines[ni] = line;
            });
            std::string summary = "nu,snapshots,energy_initial,energy_final\n";
            for (const auto& l : summary_lines) summary += l;
            std::ofstream sf_out(out.path() + "/summary.csv", std::ios::binary);
            sf_out << summary;
            sf_out.close();
            finalize_manifest(out.path(), config_hash(cfg));
            out.commit();
            return 0;
        }
    } catch (const validation_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const property_error& e) {
        std::fprintf(stderr, "property violation: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
