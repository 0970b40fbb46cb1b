// SPDX-License-Identifier: Apache-2.0
#include "giniflow/io.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "giniflow/density.hpp"

namespace giniflow {

namespace fs = std::filesystem;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("file not found: " + path);
    return nlohmann::json::parse(in);
}

namespace {

std::FILE* open_or_throw(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (f == nullptr) throw std::runtime_error("cannot open " + path + " for writing");
    return f;
}

}  // namespace

void write_pde_trajectory_csv(const std::string& path, const PdeTrajectory& tr) {
    std::FILE* f = open_or_throw(path);
    std::fprintf(f, "t,gini,m0,m1,m4\n");
    for (std::size_t i = 0; i < tr.t.size(); ++i)
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g\n", tr.t[i], tr.gini[i], tr.m0[i], tr.m1[i],
                     tr.m4[i]);
    std::fclose(f);
}

void write_snapshots(const std::string& dir, const PdeTrajectory& tr) {
    ensure_dir(dir);
    std::FILE* idx = open_or_throw((fs::path(dir) / "index.csv").string());
    std::fprintf(idx, "index,t,file\n");
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "rho_%06zu.csv", k);
        // Snapshots may carry roundoff-level negatives; store them verbatim.
        DensityField d(tr.grid, tr.snapshots[k], 1e-9);
        write_density_csv((fs::path(dir) / name).string(), d);
        std::fprintf(idx, "%zu,%.17g,%s\n", k, tr.snapshot_t[k], name);
    }
    std::fclose(idx);
}

PdeTrajectory read_snapshots(const std::string& dir, double gamma, const std::string& kernel) {
    std::ifstream idx(fs::path(dir) / "index.csv");
    if (!idx) throw std::runtime_error("snapshot index not found in " + dir);
    std::string line;
    std::getline(idx, line);
    std::vector<double> ts;
    std::vector<std::vector<double>> snaps;
    std::optional<Grid> grid;
    while (std::getline(idx, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b, c;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        std::getline(ss, c);
        const DensityField d = read_density_csv((fs::path(dir) / c).string());
        if (!grid) grid = d.grid();
        ts.push_back(std::stod(b));
        snaps.push_back(d.values());
    }
    if (!grid) throw std::runtime_error("no snapshots listed in " + dir);
    PdeTrajectory tr{*grid, gamma, kernel};
    tr.snapshot_t = std::move(ts);
    tr.snapshots = std::move(snaps);
    return tr;
}

void write_abm_csv(const std::string& path, const AbmTrajectory& tr) {
    std::FILE* f = open_or_throw(path);
    std::fprintf(f, "t,gini,min_wealth,total_wealth\n");
    for (const auto& r : tr.records)
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", r.t, r.gini, r.min_wealth, r.total_wealth);
    std::fclose(f);
}

void write_ensemble_csv(const std::string& path, const EnsembleTrajectory& e) {
    std::FILE* f = open_or_throw(path);
    std::fprintf(f, "t,mean_gini,stderr_gini\n");
    for (std::size_t i = 0; i < e.t.size(); ++i)
        std::fprintf(f, "%.17g,%.17g,%.17g\n", e.t[i], e.mean_gini[i], e.stderr_gini[i]);
    std::fclose(f);
}

}  // namespace giniflow
