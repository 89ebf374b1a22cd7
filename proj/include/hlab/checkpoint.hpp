#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hlab/filter_bank.hpp"
#include "hlab/solver.hpp"

namespace hlab {

// Field checkpoint: magic "HLAB", u32 version, u32 d, u32 n, u32 components,
// then per component the coefficients in row-major xi (FFT index) order as
// little-endian float64 (re, im) pairs.
void write_field(const std::string& path, const SpectralField& f);
SpectralField read_field(const std::string& path);

// Snapshot series directory: manifest.txt plus one checkpoint per snapshot.
void save_series(const std::string& dir, const SnapshotSeries& series);
SnapshotSeries load_series(const std::string& dir);

void write_holder_csv(const std::string& path, const HolderEstimate& est);

// Output-tree manifest: config hash, tool version, per-file content hashes.
struct Manifest {
    std::uint64_t config_hash = 0;
    std::string version;
    std::vector<std::pair<std::string, std::uint64_t>> files;  // relative path, fnv1a of bytes
};
void write_manifest(const std::string& dir, const Manifest& m);
std::uint64_t hash_file(const std::string& path);

}  // namespace hlab
