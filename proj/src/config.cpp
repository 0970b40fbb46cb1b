// SPDX-License-Identifier: Apache-2.0
#include "giniflow/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "giniflow/exchange.hpp"

namespace giniflow {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void reject_unknown(const json& j, const std::string& where, const std::set<std::string>& known) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("unknown key '" + (where.empty() ? "" : where + ".") + it.key() + "'");
}

double get_number(const json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field + ": expected a number");
    return j.get<double>();
}

std::size_t get_count(const json& j, const std::string& field) {
    if (!j.is_number_integer() && !j.is_number_unsigned())
        throw ConfigError(field + ": expected a non-negative integer");
    const auto v = j.get<std::int64_t>();
    if (v < 0) throw ConfigError(field + ": expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

std::string get_string(const json& j, const std::string& field) {
    if (!j.is_string()) throw ConfigError(field + ": expected a string");
    return j.get<std::string>();
}

template <class F>
void maybe(const json& j, const char* key, F&& f) {
    if (j.contains(key)) f(j.at(key));
}

InitialDensitySpec parse_density(const json& j, const std::string& base_dir) {
    InitialDensitySpec s;
    if (j.is_string()) {
        s.kind = j.get<std::string>();
    } else {
        reject_unknown(j, "initial_density", {"kind", "a", "b", "center", "width", "path"});
        if (!j.contains("kind")) throw ConfigError("initial_density.kind: missing");
        s.kind = get_string(j.at("kind"), "initial_density.kind");
        maybe(j, "a", [&](const json& v) { s.a = get_number(v, "initial_density.a"); });
        maybe(j, "b", [&](const json& v) { s.b = get_number(v, "initial_density.b"); });
        maybe(j, "center", [&](const json& v) { s.center = get_number(v, "initial_density.center"); });
        maybe(j, "width", [&](const json& v) { s.width = get_number(v, "initial_density.width"); });
        maybe(j, "path", [&](const json& v) { s.path = get_string(v, "initial_density.path"); });
    }
    if (s.kind == "csv") {
        if (s.path.empty()) throw ConfigError("initial_density.path: required for kind 'csv'");
        fs::path p(s.path);
        if (p.is_relative()) p = fs::path(base_dir) / p;
        s.path = p.lexically_normal().string();
        if (!fs::exists(p)) throw ConfigError("initial_density.path: file not found: " + s.path);
    } else if (s.kind != "exponential" && s.kind != "uniform" && s.kind != "bump") {
        throw ConfigError("initial_density.kind: unknown '" + s.kind +
                          "' (exponential, uniform, bump, csv)");
    }
    return s;
}

}  // namespace

RunConfig config_from_json(const json& root, const std::string& base_dir) {
    const json& j = root.is_object() && root.contains("manifest_version") ? root.at("config") : root;
    reject_unknown(j, "", {"model", "grid", "gamma", "abm", "pde", "initial_density", "outputs",
                           "seed", "metric"});
    RunConfig c;
    maybe(j, "model", [&](const json& v) { c.model = get_string(v, "model"); });
    maybe(j, "gamma", [&](const json& v) { c.gamma = get_number(v, "gamma"); });
    maybe(j, "outputs", [&](const json& v) { c.outputs = get_string(v, "outputs"); });
    maybe(j, "seed", [&](const json& v) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            throw ConfigError("seed: expected a non-negative integer");
        c.seed = v.get<std::uint64_t>();
    });
    maybe(j, "grid", [&](const json& g) {
        reject_unknown(g, "grid", {"w_max", "n_cells"});
        maybe(g, "w_max", [&](const json& v) { c.w_max = get_number(v, "grid.w_max"); });
        maybe(g, "n_cells", [&](const json& v) { c.n_cells = get_count(v, "grid.n_cells"); });
    });
    maybe(j, "abm", [&](const json& a) {
        reject_unknown(a, "abm", {"n_agents", "dt", "T", "record_every", "n_seeds",
                                  "pairs_per_agent", "initial"});
        maybe(a, "n_agents", [&](const json& v) { c.abm_n_agents = get_count(v, "abm.n_agents"); });
        maybe(a, "dt", [&](const json& v) { c.abm_dt = get_number(v, "abm.dt"); });
        maybe(a, "T", [&](const json& v) { c.abm_T = get_number(v, "abm.T"); });
        maybe(a, "record_every",
              [&](const json& v) { c.abm_record_every = get_count(v, "abm.record_every"); });
        maybe(a, "n_seeds", [&](const json& v) { c.abm_n_seeds = get_count(v, "abm.n_seeds"); });
        maybe(a, "pairs_per_agent",
              [&](const json& v) { c.abm_pairs_per_agent = get_number(v, "abm.pairs_per_agent"); });
        maybe(a, "initial", [&](const json& v) { c.abm_initial = get_string(v, "abm.initial"); });
    });
    maybe(j, "pde", [&](const json& p) {
        reject_unknown(p, "pde", {"dt", "T", "safety", "snapshot_every"});
        maybe(p, "dt", [&](const json& v) {
            if (v.is_string()) {
                if (v.get<std::string>() != "auto")
                    throw ConfigError("pde.dt: expected a number or \"auto\"");
                c.pde_dt.reset();
            } else {
                c.pde_dt = get_number(v, "pde.dt");
            }
        });
        maybe(p, "T", [&](const json& v) { c.pde_T = get_number(v, "pde.T"); });
        maybe(p, "safety", [&](const json& v) { c.pde_safety = get_number(v, "pde.safety"); });
        maybe(p, "snapshot_every",
              [&](const json& v) { c.pde_snapshot_every = get_count(v, "pde.snapshot_every"); });
    });
    maybe(j, "metric", [&](const json& m) {
        reject_unknown(m, "metric", {"transport_trials", "fourth_moment_paths"});
        maybe(m, "transport_trials",
              [&](const json& v) { c.transport_trials = get_count(v, "metric.transport_trials"); });
        maybe(m, "fourth_moment_paths", [&](const json& v) {
            c.fourth_moment_paths = get_count(v, "metric.fourth_moment_paths");
        });
    });
    maybe(j, "initial_density",
          [&](const json& v) { c.initial_density = parse_density(v, base_dir); });
    validate(c);
    return c;
}

void validate(const RunConfig& c) {
    try {
        kernel_by_name(c.model);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    if (!(c.gamma > 0.0 && c.gamma < 1.0))
        throw ConfigError("gamma: must lie in (0, 1), got " + std::to_string(c.gamma));
    if (!(c.w_max > 0.0)) throw ConfigError("grid.w_max: must be > 0");
    if (c.n_cells < 3)
        throw ConfigError("grid.n_cells: must be >= 3, got " + std::to_string(c.n_cells));
    if (c.abm_n_agents < 2) throw ConfigError("abm.n_agents: must be >= 2");
    if (!(c.abm_dt > 0.0 && c.abm_dt < 1.0)) throw ConfigError("abm.dt: must lie in (0, 1)");
    if (!(c.gamma * c.abm_dt < 1.0)) throw ConfigError("abm.dt: gamma * dt must be < 1");
    if (!(c.abm_T > 0.0)) throw ConfigError("abm.T: must be > 0");
    if (c.abm_record_every < 1) throw ConfigError("abm.record_every: must be >= 1");
    if (c.abm_n_seeds < 1) throw ConfigError("abm.n_seeds: must be >= 1");
    if (!(c.abm_pairs_per_agent > 0.0)) throw ConfigError("abm.pairs_per_agent: must be > 0");
    if (c.abm_initial != "density" && c.abm_initial != "ones")
        throw ConfigError("abm.initial: must be \"density\" or \"ones\"");
    if (c.pde_dt && !(*c.pde_dt > 0.0)) throw ConfigError("pde.dt: must be > 0 or \"auto\"");
    if (!(c.pde_T > 0.0)) throw ConfigError("pde.T: must be > 0");
    if (!(c.pde_safety > 0.0 && c.pde_safety <= 1.0)) throw ConfigError("pde.safety: must lie in (0, 1]");
    if (c.initial_density.kind == "uniform" &&
        !(c.initial_density.a >= 0.0 && c.initial_density.b > c.initial_density.a))
        throw ConfigError("initial_density: need 0 <= a < b");
    if (c.initial_density.kind == "bump" && !(c.initial_density.width > 0.0))
        throw ConfigError("initial_density.width: must be > 0");
    if (c.transport_trials < 1) throw ConfigError("metric.transport_trials: must be >= 1");
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": JSON parse error: " + e.what());
    }
    const auto dir = fs::path(path).parent_path();
    return config_from_json(j, dir.empty() ? "." : dir.string());
}

json to_json(const RunConfig& c) {
    json d;
    d["kind"] = c.initial_density.kind;
    if (c.initial_density.kind == "uniform") {
        d["a"] = c.initial_density.a;
        d["b"] = c.initial_density.b;
    } else if (c.initial_density.kind == "bump") {
        d["center"] = c.initial_density.center;
        d["width"] = c.initial_density.width;
    } else if (c.initial_density.kind == "csv") {
        d["path"] = fs::absolute(c.initial_density.path).lexically_normal().string();
    }
    json j;
    j["model"] = c.model;
    j["grid"] = {{"w_max", c.w_max}, {"n_cells", c.n_cells}};
    j["gamma"] = c.gamma;
    j["abm"] = {{"n_agents", c.abm_n_agents}, {"dt", c.abm_dt},
                {"T", c.abm_T}, {"record_every", c.abm_record_every},
                {"n_seeds", c.abm_n_seeds}, {"pairs_per_agent", c.abm_pairs_per_agent},
                {"initial", c.abm_initial}};
    j["pde"] = {{"dt", c.pde_dt ? json(*c.pde_dt) : json("auto")},
                {"T", c.pde_T},
                {"safety", c.pde_safety},
                {"snapshot_every", c.pde_snapshot_every}};
    j["initial_density"] = d;
    j["outputs"] = c.outputs;
    j["seed"] = c.seed;
    j["metric"] = {{"transport_trials", c.transport_trials},
                   {"fourth_moment_paths", c.fourth_moment_paths}};
    return j;
}

Grid make_grid(const RunConfig& c) { return Grid(c.w_max, c.n_cells); }

DensityField make_initial_density(const RunConfig& c) {
    const auto& s = c.initial_density;
    if (s.kind == "csv") {
        DensityField raw = read_density_csv(s.path);
        std::vector<double> v = raw.values();
        const double m0 = raw.m0();
        if (!(m0 > 0.0)) throw ConfigError("initial_density: CSV density has no mass");
        for (double& x : v) x /= m0;
        DensityField d(raw.grid(), std::move(v));
        if (!d.in_m1(1e-6))
            throw ConfigError("initial_density: CSV density has mean " + std::to_string(d.m1()) +
                              " after mass normalisation; M1 requires mean 1 within 1e-6");
        return d;
    }
    const Grid g = make_grid(c);
    if (s.kind == "uniform") return uniform_density(g, s.a, s.b);
    if (s.kind == "bump") return bump_density(g, s.center, s.width);
    return exponential_density(g);
}

SimConfig to_sim_config(const RunConfig& c) {
    SimConfig s;
    s.n_agents = c.abm_n_agents;
    s.gamma = c.gamma;
    s.dt = c.abm_dt;
    s.T = c.abm_T;
    s.seed = c.seed;
    s.record_every = c.abm_record_every;
    s.pairs_per_agent = c.abm_pairs_per_agent;
    return s;
}

SchemeConfig to_scheme_config(const RunConfig& c) {
    SchemeConfig s;
    s.dt = c.pde_dt;
    s.T = c.pde_T;
    s.safety = c.pde_safety;
    s.snapshot_every = c.pde_snapshot_every;
    return s;
}

std::vector<double> initial_wealths(const RunConfig& c) {
    if (c.abm_initial == "ones") return std::vector<double>(c.abm_n_agents, 1.0);
    return sample_wealths(make_initial_density(c), c.abm_n_agents);
}

}  // namespace giniflow
