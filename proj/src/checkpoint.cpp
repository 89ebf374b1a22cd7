#include "hlab/checkpoint.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hlab/rng.hpp"

namespace fs = std::filesystem;

namespace hlab {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_field(const std::string& path, const SpectralField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw validation_error("cannot open " + path + " for writing");
    os.write("HLAB", 4);
    put_u32(os, 1);
    put_u32(os, static_cast<std::uint32_t>(f.grid.d));
    put_u32(os, static_cast<std::uint32_t>(f.grid.n));
    put_u32(os, static_cast<std::uint32_t>(f.components));
    // assumes a little-endian host (the only supported target)
    os.write(reinterpret_cast<const char*>(f.coeffs.data()),
             static_cast<std::streamsize>(f.coeffs.size() * sizeof(cplx)));
    if (!os) throw validation_error("short write to " + path);
}

SpectralField read_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw validation_error("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "HLAB", 4) != 0) throw validation_error(path + ": not an HLAB checkpoint");
    std::uint32_t version = get_u32(is);
    if (version != 1) throw validation_error(path + ": unsupported checkpoint version");
    GridSpec g;
    g.d = static_cast<int>(get_u32(is));
    g.n = static_cast<int>(get_u32(is));
    int comps = static_cast<int>(get_u32(is));
    g.validate();
    SpectralField f(g, comps);
    is.read(reinterpret_cast<char*>(f.coeffs.data()),
            static_cast<std::streamsize>(f.coeffs.size() * sizeof(cplx)));
    if (!is) throw validation_error(path + ": truncated checkpoint");
    return f;
}

void save_series(const std::string& dir, const SnapshotSeries& series) {
    fs::create_directories(dir);
    std::ostringstream man;
    man << "format = hlab-series-v1\n";
    man << "d = " << series.grid.d << "\n";
    man << "n = " << series.grid.n << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", series.nu);
    man << "nu = " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", series.solver_dt);
    man << "solver_dt = " << buf << "\n";
    man << "snapshot_every = " << series.snapshot_every << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", series.dt_snap);
    man << "dt_snap = " << buf << "\n";
    man << "dealias = " << series.dealias << "\n";
    man << "count = " << series.count() << "\n";
    for (std::size_t i = 0; i < series.count(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", series.times[i]);
        man << "time." << i << " = " << buf << "\n";
        std::snprintf(buf, sizeof buf, "%.17g", series.energies[i]);
        man << "energy." << i << " = " << buf << "\n";
    }
    std::ofstream mf(fs::path(dir) / "manifest.txt", std::ios::binary);
    if (!mf) throw validation_error("cannot write series manifest in " + dir);
    mf << man.str();
    for (std::size_t i = 0; i < series.count(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%06zu.hlab", i);
        write_field((fs::path(dir) / name).string(), series.fields[i]);
    }
}

SnapshotSeries load_series(const std::string& dir) {
    std::ifstream mf(fs::path(dir) / "manifest.txt");
    if (!mf) throw validation_error(dir + ": missing series manifest");
    SnapshotSeries series;
    std::size_t count = 0;
    std::string line;
    std::vector<std::pair<std::string, std::string>> kv;
    while (std::getline(mf, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
        };
        trim(key);
        trim(val);
        kv.emplace_back(key, val);
    }
    auto get = [&](const std::string& key) -> std::string {
        for (const auto& [k, v] : kv)
            if (k == key) return v;
        throw validation_error(dir + ": manifest missing key " + key);
    };
    if (get("format") != "hlab-series-v1") throw validation_error(dir + ": unknown series format");
    series.grid.d = std::stoi(get("d"));
    series.grid.n = std::stoi(get("n"));
    series.nu = std::stod(get("nu"));
    series.solver_dt = std::stod(get("solver_dt"));
    series.snapshot_every = std::stoi(get("snapshot_every"));
    series.dt_snap = std::stod(get("dt_snap"));
    series.dealias = get("dealias");
    count = std::stoul(get("count"));
    for (std::size_t i = 0; i < count; ++i) {
        series.times.push_back(std::stod(get("time." + std::to_string(i))));
        series.energies.push_back(std::stod(get("energy." + std::to_string(i))));
        char name[32];
        std::snprintf(name, sizeof name, "snap_%06zu.hlab", i);
        series.fields.push_back(read_field((fs::path(dir) / name).string()));
    }
    for (std::size_t i = 1; i < series.times.size(); ++i)
        if (!(series.times[i] > series.times[i - 1]))
            throw validation_error(dir + ": snapshot times are not strictly increasing");
    return series;
}

void write_holder_csv(const std::string& path, const HolderEstimate& est) {
    std::string out = "k,band_center_frequency,sup_norm,weighted_value\n";
    char line[160];
    for (const auto& b : est.per_band) {
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g\n", b.k, b.center, b.sup, b.weighted);
        out += line;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw validation_error("cannot open " + path + " for writing");
    f << out;
}

std::uint64_t hash_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw validation_error("cannot hash missing file " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (is) {
        is.read(buf, sizeof buf);
        std::streamsize got = is.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

void write_manifest(const std::string& dir, const Manifest& m) {
    std::ostringstream os;
    os << "format = hlab-manifest-v1\n";
    os << "version = " << m.version << "\n";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(m.config_hash));
    os << "config_hash = " << buf << "\n";
    auto files = m.files;
    std::sort(files.begin(), files.end());
    for (const auto& [rel, h] : files) {
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        os << "file " << buf << " " << rel << "\n";
    }
    std::ofstream f(fs::path(dir) / "manifest.txt", std::ios::binary);
    if (!f) throw validation_error("cannot write manifest in " + dir);
    f << os.str();
}

}  // namespace hlab
