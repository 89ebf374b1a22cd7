#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "hlab/grid.hpp"

namespace hlab {

// Flat "key = value" config with [sections]; '#' starts a comment.
struct ExperimentConfig {
    // [grid]
    int d = 2;
    int n = 128;
    // [bank]
    double delta = 0.1;
    // [solver]
    std::vector<double> nu = {1e-3};
    double dt = 1e-4;
    double t_end = 0.02;
    int snapshot_every = 10;
    std::uint64_t seed = 1;
    double alpha = 1.0 / 3.0;
    double amplitude = 0.02;  // holder-seminorm scale of the initial data
    std::string dealias = "pad-2/3";
    // [analysis]
    std::vector<std::string> estimates = {"CET", "FK", "M3", "M6", "E1"};
    std::vector<double> a = {1.0};
    std::vector<int> p = {2, 8};
    int particles = 100;
    std::vector<int> lags = {1, 2, 3, 5, 8, 13, 21};
    int k_band = -1;  // traj/lp-energy band; -1 derives a mid band
    // [output]
    std::string output_dir = "out";

    GridSpec grid() const { return GridSpec{d, n}; }
};

// Parse; collects every field-level problem into `errors` (empty on success).
// `present` (optional) receives the section.key names seen in the input.
ExperimentConfig parse_config(const std::string& text, std::vector<std::string>& errors,
                              const std::vector<std::string>& overrides = {},
                              std::set<std::string>* present = nullptr);
ExperimentConfig load_config(const std::string& path, std::vector<std::string>& errors,
                             const std::vector<std::string>& overrides = {},
                             std::set<std::string>* present = nullptr);

// Keys a config-driven run (ns-run, pipeline) must state explicitly.
std::vector<std::string> missing_core_keys(const std::set<std::string>& present);

// Canonical serialization; parse(serialize(parse(x))) == parse(x).
std::string serialize_config(const ExperimentConfig& cfg);

// Cross-field validation against module preconditions; returns diagnostics.
std::vector<std::string> validate_config(const ExperimentConfig& cfg);

std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace hlab
