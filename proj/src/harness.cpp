#include "sar3d/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "sar3d/metrics.hpp"
#include "sar3d/rng.hpp"
#include "sar3d/version.hpp"

namespace sar3d {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

std::string hash_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot hash: " + path.string());
    std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

std::string snr_label(double snr) { return std::isinf(snr) ? "inf" : format_double(snr); }

std::string cell_tag(double sr, double snr, std::uint64_t seed) {
    return "sr" + format_double(sr) + "_snr" + snr_label(snr) + "_seed" + std::to_string(seed);
}

std::string scene_id(const RunConfig& cfg) {
    return cfg.scene_preset_name + "_seed" + std::to_string(cfg.scene_seed);
}

void write_manifest(const RunConfig& cfg, const std::vector<fs::path>& artifacts,
                    const std::string& command) {
    json m;
    m["tool"] = "sar3d";
    m["version"] = kVersion;
    m["command"] = command;
    m["config"] = json::parse(config_to_json(cfg));
    for (const fs::path& p : artifacts)
        m["artifacts"][p.filename().string()] = hash_file(p);
    std::ofstream f(fs::path(cfg.out_dir) / "manifest.json");
    f << m.dump(2) << "\n";
}

double echo_scale(const MeasurementOperator& A, const cvec& y) {
    const cvec aty = A.apply_adjoint(y);
    double peak = 0.0;
    for (const cx& z : aty) peak = std::max(peak, std::abs(z));
    return peak > 0.0 ? peak : 1.0;
}

std::string sanitize_status(std::string msg) {
    for (char& c : msg)
        if (c == ',' || c == '\n') c = ';';
    return "error:" + msg;
}

} // namespace

Reflectivity build_scene(const RunConfig& cfg) {
    return scene_preset(scene_preset_from_name(cfg.scene_preset_name), cfg.grid, cfg.scene_seed);
}

ArrayGeometry build_geometry(const RunConfig& cfg) {
    return make_planar_array(cfg.n_az, cfg.n_el, cfg.size_az, cfg.size_el, cfg.standoff);
}

MeasurementOperator build_operator(const RunConfig& cfg, bool explicit_matrix) {
    return MeasurementOperator::build(build_geometry(cfg), cfg.waveform, cfg.grid,
                                      explicit_matrix);
}

ReconstructionResult run_method(const std::string& method, const MeasurementOperator& A,
                                const cvec& y, const RunConfig& cfg) {
    const Method m = method_from_name(method);
    if (m == Method::mf) return matched_filter(A, y, cfg.grid);

    const SolverConfig solver_cfg = cfg.settings_for(method).resolve(echo_scale(A, y));
    switch (m) {
        case Method::l1:
        case Method::mcp: return admm_reg(A, y, cfg.grid, m, solver_cfg);
        case Method::pnp: return pnp_admm(A, y, cfg.grid, cfg.denoiser, solver_cfg);
        case Method::red_admm: return red_admm(A, y, cfg.grid, cfg.denoiser, solver_cfg);
        case Method::red_gap: return red_gap(A, y, cfg.grid, cfg.denoiser, solver_cfg);
        default: throw std::invalid_argument("run_method: bad method");
    }
}

void simulate(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const fs::path out(cfg.out_dir);
    std::vector<fs::path> artifacts;

    const Reflectivity scene = build_scene(cfg);
    const MeasurementOperator A = build_operator(cfg);
    EchoVector clean = apply_forward(A, scene);
    clean.prov.scene_id = scene_id(cfg);

    write_volume((out / "scene.vol").string(), scene);
    artifacts.push_back(out / "scene.vol");
    write_echo((out / "echo_clean.ech").string(), clean);
    artifacts.push_back(out / "echo_clean.ech");

    for (double sr : cfg.sr_list)
        for (std::uint64_t seed : cfg.seeds) {
            const SamplingMask mask =
                make_mask(std::uint32_t(A.total_rows()), sr, seed);
            const fs::path mask_path =
                out / ("mask_sr" + format_double(sr) + "_seed" + std::to_string(seed) + ".msk");
            write_mask(mask_path.string(), mask);
            artifacts.push_back(mask_path);
            const EchoVector masked = subsample(clean, mask);
            for (double snr : cfg.snr_list) {
                EchoVector noisy =
                    std::isinf(snr) ? masked : add_noise(masked, snr, seed);
                const fs::path echo_path = out / ("echo_" + cell_tag(sr, snr, seed) + ".ech");
                write_echo(echo_path.string(), noisy);
                artifacts.push_back(echo_path);
            }
        }

    const fs::path cfg_path = out / "config.json";
    std::ofstream(cfg_path) << config_to_json(cfg);
    artifacts.push_back(cfg_path);
    write_manifest(cfg, artifacts, "simulate");
}

namespace {

ResultRow run_cell(const RunConfig& cfg, const Reflectivity& scene,
                   const MeasurementOperator& A_masked, const EchoVector& noisy,
                   const std::string& method, double sr, double snr, std::uint64_t seed,
                   std::vector<fs::path>& artifacts) {
    ResultRow row;
    row.method = method;
    row.sr = sr;
    row.snr_db = snr;
    row.seed = std::int64_t(seed);

    const auto t0 = std::chrono::steady_clock::now();
    const ReconstructionResult rec = run_method(method, A_masked, noisy.values, cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const MetricReport metric = evaluate_metrics(scene, rec.volume);
    row.psnr_db = metric.psnr_db;
    row.ssim = metric.ssim;
    row.nmse = metric.nmse;
    row.iterations = std::int64_t(rec.trace.records.size());
    row.final_residual =
        rec.trace.records.empty() ? 0.0 : rec.trace.records.back().residual;
    row.wall_seconds = cfg.timings ? wall : 0.0;
    if (rec.trace.diverged) row.status = "error:diverged";

    const fs::path out(cfg.out_dir);
    const std::string tag = method + "_" + cell_tag(sr, snr, seed);
    write_trace((out / ("trace_" + tag + ".csv")).string(), rec.trace);
    if (cfg.write_volumes) {
        const fs::path vol = out / ("recon_" + tag + ".vol");
        write_volume(vol.string(), rec.volume);
        artifacts.push_back(vol);
    }
    return row;
}

} // namespace

std::vector<ResultRow> sweep(const RunConfig& cfg, bool* all_ok) {
    fs::create_directories(cfg.out_dir);
    const fs::path out(cfg.out_dir);
    std::vector<fs::path> artifacts;

    const Reflectivity scene = build_scene(cfg);
    write_volume((out / "scene.vol").string(), scene);
    artifacts.push_back(out / "scene.vol");

    const MeasurementOperator A = build_operator(cfg);
    EchoVector clean = apply_forward(A, scene);
    clean.prov.scene_id = scene_id(cfg);

    std::vector<ResultRow> rows;
    bool ok = true;
    for (double sr : cfg.sr_list)
        for (std::uint64_t seed : cfg.seeds) {
            const SamplingMask mask = make_mask(std::uint32_t(A.total_rows()), sr, seed);
            const MeasurementOperator A_masked = A.subsample(mask);
            const EchoVector masked = subsample(clean, mask);
            for (double snr : cfg.snr_list) {
                const EchoVector noisy =
                    std::isinf(snr) ? masked : add_noise(masked, snr, seed);
                for (const std::string& method : cfg.methods) {
                    ResultRow row;
                    try {
                        row = run_cell(cfg, scene, A_masked, noisy, method, sr, snr, seed,
                                       artifacts);
                    } catch (const std::exception& e) {
                        row.method = method;
                        row.sr = sr;
                        row.snr_db = snr;
                        row.seed = std::int64_t(seed);
                        row.status = sanitize_status(e.what());
                    }
                    if (row.status != "ok") ok = false;
                    rows.push_back(std::move(row));
                }
            }
        }

    const fs::path results = out / "results.csv";
    write_results(results.string(), rows);
    artifacts.push_back(results);
    const fs::path cfg_path = out / "config.json";
    std::ofstream(cfg_path) << config_to_json(cfg);
    artifacts.push_back(cfg_path);
    write_manifest(cfg, artifacts, "sweep");

    if (all_ok) *all_ok = ok;
    return rows;
}

ResultRow reconstruct_one(const RunConfig& cfg, const std::string& method) {
    fs::create_directories(cfg.out_dir);
    const fs::path out(cfg.out_dir);
    std::vector<fs::path> artifacts;

    const Reflectivity scene = build_scene(cfg);
    const MeasurementOperator A = build_operator(cfg);
    EchoVector clean = apply_forward(A, scene);
    clean.prov.scene_id = scene_id(cfg);

    const double sr = cfg.sr_list.front();
    const double snr = cfg.snr_list.front();
    const std::uint64_t seed = cfg.seeds.front();
    const SamplingMask mask = make_mask(std::uint32_t(A.total_rows()), sr, seed);
    const MeasurementOperator A_masked = A.subsample(mask);
    const EchoVector masked = subsample(clean, mask);
    const EchoVector noisy = std::isinf(snr) ? masked : add_noise(masked, snr, seed);

    write_volume((out / "scene.vol").string(), scene);
    artifacts.push_back(out / "scene.vol");
    ResultRow row = run_cell(cfg, scene, A_masked, noisy, method, sr, snr, seed, artifacts);
    write_results((out / "results.csv").string(), {row});
    artifacts.push_back(out / "results.csv");
    write_manifest(cfg, artifacts, "reconstruct");
    return row;
}

std::vector<cvec> sample_red_iterates(const MeasurementOperator& A, const cvec& y,
                                      const SceneGrid& grid, const DenoiserSpec& spec,
                                      SolverConfig cfg, const std::vector<int>& ts) {
    // The solver is deterministic, so a run capped at t iterations reproduces
    // the first t iterates of a longer run; eps is disabled to prevent early
    // stops from desynchronizing prefixes.
    cfg.eps = 1e-300;
    std::vector<cvec> iterates;
    for (int t : ts) {
        SolverConfig c = cfg;
        c.t_max = t;
        iterates.push_back(red_admm(A, y, grid, spec, c).volume.values);
    }
    return iterates;
}

DiagnoseReport diagnose(const RunConfig& cfg) {
    DiagnoseReport report;
    std::string text;

    const Reflectivity scene = build_scene(cfg);
    const MeasurementOperator A = build_operator(cfg);
    const double sr = cfg.sr_list.front();
    const std::uint64_t seed = cfg.seeds.front();
    const MeasurementOperator A_masked =
        A.subsample(make_mask(std::uint32_t(A.total_rows()), sr, seed));
    EchoVector clean = apply_forward(A_masked, scene);
    const double snr = cfg.snr_list.front();
    const EchoVector noisy = std::isinf(snr) ? clean : add_noise(clean, snr, seed);
    const cvec& y = noisy.values;

    // Adjoint identity <Ax, y> = <x, A^H y> on a random pair.
    {
        Rng rng(derive_seed(cfg.scene_seed, 0xd1a6ull));
        cvec x(A_masked.cols()), w(A_masked.rows());
        for (cx& z : x) z = rng.complex_normal();
        for (cx& z : w) z = rng.complex_normal();
        const cvec ax = A_masked.apply(x);
        const cvec atw = A_masked.apply_adjoint(w);
        cx lhs(0, 0), rhs(0, 0);
        for (std::size_t i = 0; i < ax.size(); ++i) lhs += std::conj(ax[i]) * w[i];
        for (std::size_t i = 0; i < x.size(); ++i) rhs += std::conj(x[i]) * atw[i];
        double axn = 0, wn = 0;
        for (const cx& z : ax) axn += std::norm(z);
        for (const cx& z : w) wn += std::norm(z);
        report.adjoint_rel_err = std::abs(lhs - rhs) / std::max(1e-300, std::sqrt(axn * wn));
        report.adjoint_ok = report.adjoint_rel_err < 1e-10;
        text += std::string(report.adjoint_ok ? "[pass] " : "[warn] ") +
                "adjoint identity rel err " + format_double(report.adjoint_rel_err) + "\n";
    }

    const SolverConfig solver_cfg =
        cfg.settings_for("red_admm").resolve(echo_scale(A_masked, y));

    // Gradient identity of the RED objective, strict for gaussian3d.
    {
        DenoiserSpec gauss;
        gauss.kind = DenoiserKind::gaussian3d;
        const cvec v = matched_filter(A_masked, y, cfg.grid).volume.values;
        auto f = [&](const cvec& u) {
            cvec au(A_masked.rows());
            A_masked.apply(std::span<const cx>(u), std::span<cx>(au));
            double acc = 0;
            for (std::size_t i = 0; i < au.size(); ++i) acc += std::norm(y[i] - au[i]);
            return 0.5 * acc;
        };
        auto f_grad = [&](const cvec& u) {
            cvec au(A_masked.rows());
            A_masked.apply(std::span<const cx>(u), std::span<cx>(au));
            for (std::size_t i = 0; i < au.size(); ++i) au[i] -= y[i];
            return A_masked.apply_adjoint(au);
        };
        report.grad = red_gradient_check(gauss, v, cfg.grid.dims, f, f_grad, solver_cfg.lambda,
                                         6, cfg.scene_seed);
        report.grad_ok = report.grad.max_rel_err < 1e-5;
        text += std::string(report.grad_ok ? "[pass] " : "[warn] ") +
                "RED gradient identity (gaussian3d) max rel err " +
                format_double(report.grad.max_rel_err) + "\n";
    }

    // Cyclic monotonicity of the configured denoiser over solver iterates.
    {
        const auto iterates =
            sample_red_iterates(A_masked, y, cfg.grid, cfg.denoiser, solver_cfg, {1, 2, 4, 6});
        report.cyclic_score = cyclic_monotonicity_score(cfg.denoiser, iterates, cfg.grid.dims);
        report.cyclic_warn = report.cyclic_score < 0.0;
        text += std::string(!report.cyclic_warn ? "[pass] " : "[warn] ") +
                "cyclic monotonicity score (" + to_string(cfg.denoiser.kind) + ") " +
                format_double(report.cyclic_score) + "\n";
        if (report.cyclic_warn)
            text += "[warn] negative score: denoiser is not cyclically firmly nonexpansive "
                    "on these iterates; RED convergence guarantees do not apply\n";

        DenoiserSpec identity;
        report.identity_cyclic_score =
            cyclic_monotonicity_score(identity, iterates, cfg.grid.dims);
        text += std::string(report.identity_cyclic_score == 0.0 ? "[pass] " : "[warn] ") +
                "cyclic monotonicity score (identity) " +
                format_double(report.identity_cyclic_score) + "\n";
    }

    report.all_pass = report.adjoint_ok && report.grad_ok && !report.cyclic_warn &&
                      report.identity_cyclic_score == 0.0;
    report.text = text;

    fs::create_directories(cfg.out_dir);
    std::ofstream(fs::path(cfg.out_dir) / "diagnose.txt") << text;
    return report;
}

} // namespace sar3d
