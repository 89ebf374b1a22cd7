#include "hlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "hlab/rng.hpp"

namespace hlab {

namespace {

std::string trim(std::string s) {
    s.erase(0, s.find_first_not_of(" \t"));
    s.erase(s.find_last_not_of(" \t\r") + 1);
    return s;
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

struct KvMap {
    std::map<std::string, std::string> kv;  // "section.key" -> value

    bool has(const std::string& key) const { return kv.count(key) > 0; }
    std::string get(const std::string& key) const { return kv.at(key); }
};

KvMap parse_kv(const std::string& text, std::vector<std::string>& errors) {
    KvMap m;
    std::stringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back("line " + std::to_string(lineno) + ": malformed section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty()) {
            errors.push_back("line " + std::to_string(lineno) + ": empty key");
            continue;
        }
        m.kv[section.empty() ? key : section + "." + key] = val;
    }
    return m;
}

template <typename T>
bool parse_num(const std::string& s, T& out) {
    std::stringstream ss(s);
    ss >> out;
    return !ss.fail() && ss.eof();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, std::vector<std::string>& errors,
                              const std::vector<std::string>& overrides, std::set<std::string>* present) {
    KvMap m = parse_kv(text, errors);
    if (present)
        for (const auto& [k, v] : m.kv) present->insert(k);
    for (const auto& ov : overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos) {
            errors.push_back("override '" + ov + "': expected section.key=value");
            continue;
        }
        m.kv[trim(ov.substr(0, eq))] = trim(ov.substr(eq + 1));
    }

    ExperimentConfig cfg;
    auto want_int = [&](const std::string& key, int& out) {
        if (!m.has(key)) return;
        if (!parse_num(m.get(key), out)) errors.push_back(key + ": not an integer");
    };
    auto want_u64 = [&](const std::string& key, std::uint64_t& out) {
        if (!m.has(key)) return;
        if (!parse_num(m.get(key), out)) errors.push_back(key + ": not an unsigned integer");
    };
    auto want_double = [&](const std::string& key, double& out) {
        if (!m.has(key)) return;
        if (!parse_num(m.get(key), out)) errors.push_back(key + ": not a number");
    };
    auto want_double_list = [&](const std::string& key, std::vector<double>& out) {
        if (!m.has(key)) return;
        std::vector<double> vals;
        for (const auto& item : split_list(m.get(key))) {
            double v;
            if (!parse_num(item, v)) {
                errors.push_back(key + ": '" + item + "' is not a number");
                return;
            }
            vals.push_back(v);
        }
        out = vals;
    };
    auto want_int_list = [&](const std::string& key, std::vector<int>& out) {
        if (!m.has(key)) return;
        std::vector<int> vals;
        for (const auto& item : split_list(m.get(key))) {
            int v;
            if (!parse_num(item, v)) {
                errors.push_back(key + ": '" + item + "' is not an integer");
                return;
            }
            vals.push_back(v);
        }
        out = vals;
    };

    want_int("grid.d", cfg.d);
    want_int("grid.n", cfg.n);
    want_double("bank.delta", cfg.delta);
    want_double_list("solver.nu", cfg.nu);
    want_double("solver.dt", cfg.dt);
    want_double("solver.t_end", cfg.t_end);
    want_int("solver.snapshot_every", cfg.snapshot_every);
    want_u64("solver.seed", cfg.seed);
    want_double("solver.alpha", cfg.alpha);
    want_double("solver.amplitude", cfg.amplitude);
    if (m.has("solver.dealias")) cfg.dealias = m.get("solver.dealias");
    if (m.has("analysis.estimates")) cfg.estimates = split_list(m.get("analysis.estimates"));
    want_double_list("analysis.a", cfg.a);
    want_int_list("analysis.p", cfg.p);
    want_int("analysis.particles", cfg.particles);
    want_int_list("analysis.lags", cfg.lags);
    want_int("analysis.k_band", cfg.k_band);
    if (m.has("output.dir")) cfg.output_dir = m.get("output.dir");
    return cfg;
}

ExperimentConfig load_config(const std::string& path, std::vector<std::string>& errors,
                             const std::vector<std::string>& overrides, std::set<std::string>* present) {
    std::ifstream f(path);
    if (!f) {
        errors.push_back("cannot open config file " + path);
        return {};
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), errors, overrides, present);
}

std::vector<std::string> missing_core_keys(const std::set<std::string>& present) {
    std::vector<std::string> missing;
    for (const char* key : {"grid.d", "grid.n", "bank.delta", "solver.nu", "solver.dt", "solver.t_end",
                            "solver.seed"})
        if (!present.count(key)) missing.push_back(std::string(key) + ": required key missing");
    return missing;
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    os << "[grid]\n";
    os << "d = " << cfg.d << "\n";
    os << "n = " << cfg.n << "\n\n";
    os << "[bank]\n";
    os << "delta = " << num(cfg.delta) << "\n\n";
    os << "[solver]\n";
    os << "nu = ";
    for (std::size_t i = 0; i < cfg.nu.size(); ++i) os << (i ? ", " : "") << num(cfg.nu[i]);
    os << "\n";
    os << "dt = " << num(cfg.dt) << "\n";
    os << "t_end = " << num(cfg.t_end) << "\n";
    os << "snapshot_every = " << cfg.snapshot_every << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "alpha = " << num(cfg.alpha) << "\n";
    os << "amplitude = " << num(cfg.amplitude) << "\n";
    os << "dealias = " << cfg.dealias << "\n\n";
    os << "[analysis]\n";
    os << "estimates = ";
    for (std::size_t i = 0; i < cfg.estimates.size(); ++i) os << (i ? ", " : "") << cfg.estimates[i];
    os << "\n";
    os << "a = ";
    for (std::size_t i = 0; i < cfg.a.size(); ++i) os << (i ? ", " : "") << num(cfg.a[i]);
    os << "\n";
    os << "p = ";
    for (std::size_t i = 0; i < cfg.p.size(); ++i) os << (i ? ", " : "") << cfg.p[i];
    os << "\n";
    os << "particles = " << cfg.particles << "\n";
    os << "lags = ";
    for (std::size_t i = 0; i < cfg.lags.size(); ++i) os << (i ? ", " : "") << cfg.lags[i];
    os << "\n";
    os << "k_band = " << cfg.k_band << "\n\n";
    os << "[output]\n";
    os << "dir = " << cfg.output_dir << "\n";
    return os.str();
}

std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
    std::vector<std::string> errors;
    if (cfg.d != 1 && cfg.d != 2) errors.push_back("grid.d: must be 1 or 2");
    if (cfg.n < 8 || (cfg.n & (cfg.n - 1)) != 0) errors.push_back("grid.n: must be a power of two >= 8");
    if (!(cfg.delta > 0.0)) errors.push_back("bank.delta: must be positive");
    if (cfg.nu.empty()) errors.push_back("solver.nu: need at least one viscosity");
    for (double nu : cfg.nu)
        if (!(nu > 0.0)) errors.push_back("solver.nu: viscosities must be positive");
    if (!(cfg.dt > 0.0)) errors.push_back("solver.dt: must be positive");
    if (!(cfg.t_end > 0.0)) errors.push_back("solver.t_end: must be positive");
    if (cfg.snapshot_every < 1) errors.push_back("solver.snapshot_every: must be >= 1");
    if (cfg.dt > 0.0 && cfg.t_end > 0.0) {
        long n_steps = std::lround(cfg.t_end / cfg.dt);
        if (std::abs(n_steps * cfg.dt - cfg.t_end) > 1e-9 * std::max(1.0, cfg.t_end))
            errors.push_back("solver.dt: must divide t_end");
        else if (n_steps % std::max(1, cfg.snapshot_every) != 0)
            errors.push_back("solver.snapshot_every: dt*snapshot_every must divide t_end");
    }
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) errors.push_back("solver.alpha: must lie in (0,1)");
    if (!(cfg.amplitude > 0.0)) errors.push_back("solver.amplitude: must be positive");
    if (cfg.dealias != "pad-2/3") errors.push_back("solver.dealias: only 'pad-2/3' is implemented");
    const std::vector<std::string> known = {"E1", "CET", "FK", "M1", "M2", "M3", "M5", "M6", "LP-ENERGY"};
    for (const auto& e : cfg.estimates)
        if (std::find(known.begin(), known.end(), e) == known.end())
            errors.push_back("analysis.estimates: unknown estimate '" + e + "'");
    if (cfg.a.empty()) errors.push_back("analysis.a: need at least one value");
    for (double a : cfg.a)
        if (!(a > 0.0)) errors.push_back("analysis.a: values must be positive");
    for (int p : cfg.p)
        if (p < 1 || p > 16) errors.push_back("analysis.p: values must lie in 1..16");
    if (cfg.particles < 1) errors.push_back("analysis.particles: must be >= 1");
    for (int lag : cfg.lags)
        if (lag < 1) errors.push_back("analysis.lags: lags must be >= 1");
    if (cfg.output_dir.empty()) errors.push_back("output.dir: must not be empty");
    return errors;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) { return fnv1a(serialize_config(cfg)); }

}  // namespace hlab
