#include "sar3d/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sar3d/forward.hpp"

namespace sar3d {

using nlohmann::json;

SolverConfig SolverSettings::resolve(double echo_scale) const {
    SolverConfig cfg;
    cfg.lambda = lambda_relative ? lambda * echo_scale : lambda;
    cfg.mu = mu_relative ? mu * echo_scale : mu;
    cfg.theta = theta;
    cfg.t_max = t_max;
    cfg.eps = eps;
    cfg.inner_j = inner_j;
    cfg.cg_tol = cg_tol;
    cfg.cg_max = cg_max;
    return cfg;
}

const SolverSettings& RunConfig::settings_for(const std::string& method) const {
    const auto it = solver_by_method.find(method);
    return it == solver_by_method.end() ? solver_common : it->second;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument("config: " + path + ": " + what);
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            fail(path.empty() ? key : path + "." + key, "unknown key");
}

double get_num(const json& obj, const std::string& path, const std::string& key, double dflt) {
    if (!obj.contains(key)) return dflt;
    if (!obj[key].is_number()) fail(path + "." + key, "expected a number");
    return obj[key].get<double>();
}

std::int64_t get_int(const json& obj, const std::string& path, const std::string& key,
                     std::int64_t dflt) {
    if (!obj.contains(key)) return dflt;
    if (!obj[key].is_number_integer()) fail(path + "." + key, "expected an integer");
    return obj[key].get<std::int64_t>();
}

bool get_bool(const json& obj, const std::string& path, const std::string& key, bool dflt) {
    if (!obj.contains(key)) return dflt;
    if (!obj[key].is_boolean()) fail(path + "." + key, "expected a boolean");
    return obj[key].get<bool>();
}

std::string get_str(const json& obj, const std::string& path, const std::string& key,
                    const std::string& dflt) {
    if (!obj.contains(key)) return dflt;
    if (!obj[key].is_string()) fail(path + "." + key, "expected a string");
    return obj[key].get<std::string>();
}

// SNR entries are numbers or the string "inf" for the noise-free case.
double parse_snr(const json& v, const std::string& path) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string() && (v == "inf" || v == "+inf")) return kSnrClean;
    fail(path, "expected a number or \"inf\"");
}

const std::set<std::string> kSolverKeys = {"lambda", "lambda_rel", "mu",      "mu_rel",
                                           "theta",  "t_max",      "eps",     "inner_j",
                                           "cg_tol", "cg_max"};

SolverSettings parse_solver_settings(const json& obj, const std::string& path,
                                     SolverSettings base) {
    if (obj.contains("lambda") && obj.contains("lambda_rel"))
        fail(path, "lambda and lambda_rel are mutually exclusive");
    if (obj.contains("mu") && obj.contains("mu_rel"))
        fail(path, "mu and mu_rel are mutually exclusive");
    if (obj.contains("lambda")) {
        base.lambda = get_num(obj, path, "lambda", 0);
        base.lambda_relative = false;
    }
    if (obj.contains("lambda_rel")) {
        base.lambda = get_num(obj, path, "lambda_rel", 0);
        base.lambda_relative = true;
    }
    if (obj.contains("mu")) {
        base.mu = get_num(obj, path, "mu", 0);
        base.mu_relative = false;
    }
    if (obj.contains("mu_rel")) {
        base.mu = get_num(obj, path, "mu_rel", 0);
        base.mu_relative = true;
    }
    base.theta = get_num(obj, path, "theta", base.theta);
    base.t_max = int(get_int(obj, path, "t_max", base.t_max));
    base.eps = get_num(obj, path, "eps", base.eps);
    base.inner_j = int(get_int(obj, path, "inner_j", base.inner_j));
    base.cg_tol = get_num(obj, path, "cg_tol", base.cg_tol);
    base.cg_max = int(get_int(obj, path, "cg_max", base.cg_max));

    if (!(base.lambda > 0)) fail(path, "lambda must be positive");
    if (!(base.mu > 0)) fail(path, "mu must be positive");
    if (base.theta <= 1) fail(path, "theta must be > 1");
    if (base.t_max < 1) fail(path, "t_max must be >= 1");
    if (!(base.eps > 0)) fail(path, "eps must be positive");
    if (base.inner_j < 1) fail(path, "inner_j must be >= 1");
    if (!(base.cg_tol > 0) || base.cg_max < 1) fail(path, "bad cg settings");
    return base;
}

json parse_override_value(const std::string& text) {
    json v = json::parse(text, nullptr, false);
    if (v.is_discarded()) return json(text);  // plain string
    return v;
}

void apply_override(json& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw std::invalid_argument("--set expects key=value, got: " + assignment);
    const std::string path = assignment.substr(0, eq);
    json* node = &root;
    std::size_t start = 0;
    for (;;) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty()) throw std::invalid_argument("--set: empty key segment in " + path);
        if (dot == std::string::npos) {
            (*node)[key] = parse_override_value(assignment.substr(eq + 1));
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

const std::set<std::string> kMethodNames = {"mf", "l1", "mcp", "pnp", "red_admm", "red_gap"};

// Tuned harness defaults; user "solver" common keys override these, and
// "solver.<method>" sections override both.
SolverSettings builtin_method_defaults(const std::string& method) {
    SolverSettings s;
    if (method == "l1" || method == "mcp") {
        s.lambda = 0.1;
        s.mu = 1.0;
    } else if (method == "pnp") {
        s.mu = 0.5;
    } else if (method == "red_admm") {
        s.lambda = 0.5;
        s.mu = 0.5;
    } else if (method == "red_gap") {
        s.lambda = 1.0;
        s.lambda_relative = false;
    }
    return s;
}

} // namespace

RunConfig parse_config(const std::string& json_text, const std::vector<std::string>& overrides) {
    json root = json::parse(json_text);
    for (const std::string& o : overrides) apply_override(root, o);

    check_keys(root, "", {"scene", "geometry", "waveform", "sampling", "noise", "seeds",
                          "methods", "solver", "denoiser", "output"});
    RunConfig cfg;

    // scene
    if (!root.contains("scene")) fail("scene", "missing section");
    const json& scene = root["scene"];
    check_keys(scene, "scene", {"preset", "seed", "grid"});
    cfg.scene_preset_name = get_str(scene, "scene", "preset", "wireframe");
    scene_preset_from_name(cfg.scene_preset_name);  // validates
    if (!scene.contains("seed")) fail("scene.seed", "seeds must be explicit");
    cfg.scene_seed = std::uint64_t(get_int(scene, "scene", "seed", 0));
    if (!scene.contains("grid")) fail("scene.grid", "missing");
    const json& grid = scene["grid"];
    check_keys(grid, "scene.grid", {"dims", "spacing", "origin"});
    std::array<std::uint32_t, 3> dims;
    std::array<double, 3> spacing;
    if (!grid.contains("dims") || !grid["dims"].is_array() || grid["dims"].size() != 3)
        fail("scene.grid.dims", "expected [nx, ny, nz]");
    if (!grid.contains("spacing") || !grid["spacing"].is_array() || grid["spacing"].size() != 3)
        fail("scene.grid.spacing", "expected [dx, dy, dz]");
    for (int a = 0; a < 3; ++a) {
        if (!grid["dims"][a].is_number_integer() || grid["dims"][a].get<std::int64_t>() < 1)
            fail("scene.grid.dims", "entries must be positive integers");
        dims[a] = grid["dims"][a].get<std::uint32_t>();
        spacing[a] = grid["spacing"][a].get<double>();
    }
    if (!grid.contains("origin") || (grid["origin"].is_string() && grid["origin"] == "center")) {
        cfg.grid = SceneGrid::centered(dims, spacing);
    } else if (grid["origin"].is_array() && grid["origin"].size() == 3) {
        std::array<double, 3> origin;
        for (int a = 0; a < 3; ++a) origin[a] = grid["origin"][a].get<double>();
        cfg.grid = SceneGrid(dims, spacing, origin);
    } else {
        fail("scene.grid.origin", "expected \"center\" or [x, y, z]");
    }

    // geometry
    if (!root.contains("geometry")) fail("geometry", "missing section");
    const json& geom = root["geometry"];
    check_keys(geom, "geometry", {"n_az", "n_el", "size_az", "size_el", "standoff"});
    cfg.n_az = std::uint32_t(get_int(geom, "geometry", "n_az", 8));
    cfg.n_el = std::uint32_t(get_int(geom, "geometry", "n_el", 8));
    cfg.size_az = get_num(geom, "geometry", "size_az", 0.6);
    cfg.size_el = get_num(geom, "geometry", "size_el", 0.6);
    cfg.standoff = get_num(geom, "geometry", "standoff", 1.0);

    // waveform
    if (!root.contains("waveform")) fail("waveform", "missing section");
    const json& wf = root["waveform"];
    check_keys(wf, "waveform", {"carrier_hz", "bandwidth_hz", "n_freq"});
    cfg.waveform = Waveform(get_num(wf, "waveform", "carrier_hz", 3.75e10),
                            get_num(wf, "waveform", "bandwidth_hz", 1.2e9),
                            std::uint32_t(get_int(wf, "waveform", "n_freq", 8)));

    // sampling / noise / seeds / methods
    if (!root.contains("sampling")) fail("sampling", "missing section");
    check_keys(root["sampling"], "sampling", {"sr"});
    if (!root["sampling"].contains("sr") || !root["sampling"]["sr"].is_array())
        fail("sampling.sr", "expected a list");
    for (const json& v : root["sampling"]["sr"]) {
        const double sr = v.get<double>();
        if (!(sr > 0) || sr > 1) fail("sampling.sr", "entries must be in (0, 1]");
        cfg.sr_list.push_back(sr);
    }
    if (cfg.sr_list.empty()) fail("sampling.sr", "list is empty");

    if (!root.contains("noise")) fail("noise", "missing section");
    check_keys(root["noise"], "noise", {"snr_db"});
    if (!root["noise"].contains("snr_db") || !root["noise"]["snr_db"].is_array())
        fail("noise.snr_db", "expected a list");
    for (const json& v : root["noise"]["snr_db"])
        cfg.snr_list.push_back(parse_snr(v, "noise.snr_db"));
    if (cfg.snr_list.empty()) fail("noise.snr_db", "list is empty");

    if (!root.contains("seeds") || !root["seeds"].is_array() || root["seeds"].empty())
        fail("seeds", "an explicit non-empty seed list is required");
    for (const json& v : root["seeds"]) {
        if (!v.is_number_integer()) fail("seeds", "entries must be integers");
        cfg.seeds.push_back(v.get<std::uint64_t>());
    }

    if (root.contains("methods")) {
        if (!root["methods"].is_array()) fail("methods", "expected a list");
        for (const json& v : root["methods"]) {
            const std::string name = v.get<std::string>();
            method_from_name(name);  // validates
            cfg.methods.push_back(name);
        }
    } else {
        cfg.methods = {"mf", "l1", "mcp", "pnp", "red_admm", "red_gap"};
    }
    if (cfg.methods.empty()) fail("methods", "list is empty");

    // solver
    json solver = root.contains("solver") ? root["solver"] : json::object();
    {
        std::set<std::string> allowed = kSolverKeys;
        allowed.insert(kMethodNames.begin(), kMethodNames.end());
        check_keys(solver, "solver", allowed);
        json common = solver;
        for (const std::string& m : kMethodNames) common.erase(m);
        cfg.solver_common = parse_solver_settings(common, "solver", SolverSettings{});
        for (const std::string& m : kMethodNames) {
            SolverSettings base =
                parse_solver_settings(common, "solver", builtin_method_defaults(m));
            if (solver.contains(m)) {
                check_keys(solver[m], "solver." + m, kSolverKeys);
                base = parse_solver_settings(solver[m], "solver." + m, base);
            }
            cfg.solver_by_method[m] = base;
        }
    }

    // denoiser
    json dn = root.contains("denoiser") ? root["denoiser"] : json::object();
    check_keys(dn, "denoiser",
               {"kind", "radius", "sigma", "patch_radius", "search_radius", "h", "h_scale",
                "command", "deterministic"});
    cfg.denoiser.kind = denoiser_kind_from_name(get_str(dn, "denoiser", "kind", "nlm3d"));
    cfg.denoiser.radius = int(get_int(dn, "denoiser", "radius", 1));
    cfg.denoiser.sigma = get_num(dn, "denoiser", "sigma", 0.8);
    cfg.denoiser.patch_radius = int(get_int(dn, "denoiser", "patch_radius", 1));
    cfg.denoiser.search_radius = int(get_int(dn, "denoiser", "search_radius", 2));
    cfg.denoiser.h = get_num(dn, "denoiser", "h", 0.0);
    cfg.denoiser.h_scale = get_num(dn, "denoiser", "h_scale", 2.5);
    cfg.denoiser.command = get_str(dn, "denoiser", "command", "");
    cfg.denoiser.deterministic = get_bool(dn, "denoiser", "deterministic", false);
    if (cfg.denoiser.kind == DenoiserKind::external && cfg.denoiser.command.empty())
        fail("denoiser.command", "required for external denoisers");

    // output
    json out = root.contains("output") ? root["output"] : json::object();
    check_keys(out, "output", {"dir", "timings", "volumes"});
    cfg.out_dir = get_str(out, "output", "dir", "out");
    cfg.timings = get_bool(out, "output", "timings", false);
    cfg.write_volumes = get_bool(out, "output", "volumes", true);

    return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), overrides);
}

std::string config_to_json(const RunConfig& cfg) {
    json root;
    root["scene"]["preset"] = cfg.scene_preset_name;
    root["scene"]["seed"] = cfg.scene_seed;
    root["scene"]["grid"]["dims"] = cfg.grid.dims;
    root["scene"]["grid"]["spacing"] = cfg.grid.spacing;
    root["scene"]["grid"]["origin"] = cfg.grid.origin;
    root["geometry"] = {{"n_az", cfg.n_az},
                        {"n_el", cfg.n_el},
                        {"size_az", cfg.size_az},
                        {"size_el", cfg.size_el},
                        {"standoff", cfg.standoff}};
    root["waveform"] = {{"carrier_hz", cfg.waveform.carrier_hz},
                        {"bandwidth_hz", cfg.waveform.bandwidth_hz},
                        {"n_freq", cfg.waveform.n_freq}};
    root["sampling"]["sr"] = cfg.sr_list;
    for (double snr : cfg.snr_list) {
        if (std::isinf(snr))
            root["noise"]["snr_db"].push_back("inf");
        else
            root["noise"]["snr_db"].push_back(snr);
    }
    root["seeds"] = cfg.seeds;
    root["methods"] = cfg.methods;

    auto solver_json = [](const SolverSettings& s) {
        json j;
        j[s.lambda_relative ? "lambda_rel" : "lambda"] = s.lambda;
        j[s.mu_relative ? "mu_rel" : "mu"] = s.mu;
        j["theta"] = s.theta;
        j["t_max"] = s.t_max;
        j["eps"] = s.eps;
        j["inner_j"] = s.inner_j;
        j["cg_tol"] = s.cg_tol;
        j["cg_max"] = s.cg_max;
        return j;
    };
    root["solver"] = solver_json(cfg.solver_common);
    for (const auto& [m, s] : cfg.solver_by_method) root["solver"][m] = solver_json(s);

    root["denoiser"] = {{"kind", to_string(cfg.denoiser.kind)},
                        {"radius", cfg.denoiser.radius},
                        {"sigma", cfg.denoiser.sigma},
                        {"patch_radius", cfg.denoiser.patch_radius},
                        {"search_radius", cfg.denoiser.search_radius},
                        {"h", cfg.denoiser.h},
                        {"h_scale", cfg.denoiser.h_scale},
                        {"command", cfg.denoiser.command},
                        {"deterministic", cfg.denoiser.deterministic}};
    root["output"] = {{"dir", cfg.out_dir}, {"timings", cfg.timings},
                      {"volumes", cfg.write_volumes}};
    return root.dump(2) + "\n";
}

std::string default_config_json() {
    json root = json::parse(R"({
  "scene": {"preset": "wireframe", "seed": 7, "grid": {"dims": [16, 16, 16], "spacing": [0.05, 0.05, 0.05], "origin": "center"}},
  "geometry": {"n_az": 8, "n_el": 8, "size_az": 0.6, "size_el": 0.6, "standoff": 1.0},
  "waveform": {"carrier_hz": 3.75e10, "bandwidth_hz": 1.2e9, "n_freq": 8},
  "sampling": {"sr": [0.75, 0.5, 0.25, 0.15]},
  "noise": {"snr_db": [20]},
  "seeds": [0, 1, 2],
  "methods": ["mf", "l1", "mcp", "pnp", "red_admm", "red_gap"],
  "solver": {},
  "denoiser": {"kind": "nlm3d"},
  "output": {"dir": "out"}
})");
    return root.dump(2) + "\n";
}

} // namespace sar3d
