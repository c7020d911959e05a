#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sar3d/denoise.hpp"
#include "sar3d/model.hpp"
#include "sar3d/solvers.hpp"

namespace sar3d {

/// Per-method solver knobs. lambda/mu may be given relative to
/// max|A^H y| of the cell (the usual choice for l1/mcp/pnp/red_admm) or as
/// absolute values (red_gap's weight is dimensionless).
struct SolverSettings {
    double lambda = 0.1;
    bool lambda_relative = true;
    double mu = 1.0;
    bool mu_relative = true;
    double theta = 4.0;
    int t_max = 50;
    double eps = 1e-3;
    int inner_j = 3;
    double cg_tol = 1e-6;
    int cg_max = 200;

    /// Absolute-valued SolverConfig for a cell with the given echo scale.
    SolverConfig resolve(double echo_scale) const;
};

struct RunConfig {
    // scene
    std::string scene_preset_name = "wireframe";
    std::uint64_t scene_seed = 0;
    SceneGrid grid;
    // geometry + waveform
    std::uint32_t n_az = 8, n_el = 8;
    double size_az = 0.6, size_el = 0.6, standoff = 1.0;
    Waveform waveform;
    // experiment grid
    std::vector<double> sr_list;
    std::vector<double> snr_list;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> methods;
    // solvers
    SolverSettings solver_common;
    std::map<std::string, SolverSettings> solver_by_method;  // resolved, one per method
    DenoiserSpec denoiser;
    // output
    std::string out_dir = "out";
    bool timings = false;
    bool write_volumes = true;

    const SolverSettings& settings_for(const std::string& method) const;
};

/// Parses and validates a config JSON document; unknown keys are rejected
/// with their full path. `overrides` are dotted key=value assignments applied
/// before validation (the CLI's --set).
RunConfig parse_config(const std::string& json_text,
                       const std::vector<std::string>& overrides = {});

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Serialized echo of a parsed config (stable key order, round-trips).
std::string config_to_json(const RunConfig& cfg);

/// The documented desk-scale default experiment.
std::string default_config_json();

} // namespace sar3d
