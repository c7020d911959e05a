#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sar3d/config.hpp"
#include "sar3d/denoise.hpp"
#include "sar3d/forward.hpp"
#include "sar3d/harness.hpp"
#include "sar3d/io.hpp"
#include "sar3d/metrics.hpp"
#include "sar3d/model.hpp"
#include "sar3d/parallel.hpp"
#include "sar3d/prox.hpp"
#include "sar3d/solvers.hpp"
#include "sar3d/version.hpp"

namespace py = pybind11;
using namespace sar3d;

namespace {

cvec to_cvec(const py::array_t<cx, py::array::c_style | py::array::forcecast>& a) {
    const auto* p = a.data();
    return cvec(p, p + a.size());
}

py::array_t<cx> from_cvec(const cvec& v) {
    py::array_t<cx> out(v.size());
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::array_t<cx> volume_array(const Reflectivity& r) {
    const auto& d = r.grid.dims;
    py::array_t<cx> out({py::ssize_t(d[2]), py::ssize_t(d[1]), py::ssize_t(d[0])});
    std::copy(r.values.begin(), r.values.end(), out.mutable_data());
    return out;
}

} // namespace

PYBIND11_MODULE(_sar3d, m) {
    m.doc() = "Array SAR 3D sparse imaging: forward model, solvers, metrics";
    m.attr("__version__") = kVersion;

    py::class_<SceneGrid>(m, "SceneGrid")
        .def(py::init<std::array<std::uint32_t, 3>, std::array<double, 3>,
                      std::array<double, 3>>(),
             py::arg("dims"), py::arg("spacing"), py::arg("origin"))
        .def_static("centered", &SceneGrid::centered, py::arg("dims"), py::arg("spacing"))
        .def_readonly("dims", &SceneGrid::dims)
        .def_readonly("spacing", &SceneGrid::spacing)
        .def_readonly("origin", &SceneGrid::origin)
        .def_property_readonly("voxel_count", &SceneGrid::voxel_count);

    py::class_<ArrayGeometry>(m, "ArrayGeometry")
        .def_property_readonly("elements",
                               [](const ArrayGeometry& g) {
                                   py::array_t<double> out(
                                       {py::ssize_t(g.elements.size()), py::ssize_t(3)});
                                   auto* p = out.mutable_data();
                                   for (const Vec3& e : g.elements) {
                                       *p++ = e.x;
                                       *p++ = e.y;
                                       *p++ = e.z;
                                   }
                                   return out;
                               })
        .def_readonly("aperture_az", &ArrayGeometry::aperture_az)
        .def_readonly("aperture_el", &ArrayGeometry::aperture_el);

    py::class_<Waveform>(m, "Waveform")
        .def(py::init<double, double, std::uint32_t, double>(), py::arg("carrier_hz"),
             py::arg("bandwidth_hz"), py::arg("n_freq"), py::arg("c") = 2.99792458e8)
        .def_readonly("carrier_hz", &Waveform::carrier_hz)
        .def_readonly("bandwidth_hz", &Waveform::bandwidth_hz)
        .def_readonly("n_freq", &Waveform::n_freq)
        .def("frequency", &Waveform::frequency)
        .def("wavenumber", &Waveform::wavenumber);

    py::class_<Reflectivity>(m, "Reflectivity")
        .def(py::init([](const SceneGrid& g, py::array_t<cx> values) {
                 return Reflectivity(g, to_cvec(values));
             }),
             py::arg("grid"), py::arg("values"))
        .def_readonly("grid", &Reflectivity::grid)
        .def_property_readonly("values",
                               [](const Reflectivity& r) { return from_cvec(r.values); })
        .def_property_readonly("volume", &volume_array,
                               "values as a (nz, ny, nx) complex array");

    m.def("make_planar_array", &make_planar_array, py::arg("n_az"), py::arg("n_el"),
          py::arg("size_az"), py::arg("size_el"), py::arg("standoff"));
    m.def(
        "scene_preset",
        [](const std::string& name, const SceneGrid& grid, std::uint64_t seed) {
            return scene_preset(scene_preset_from_name(name), grid, seed);
        },
        py::arg("name"), py::arg("grid"), py::arg("seed"));
    m.def("voxel_positions", [](const SceneGrid& g) {
        py::array_t<double> out({py::ssize_t(g.voxel_count()), py::ssize_t(3)});
        auto* p = out.mutable_data();
        for (const Vec3& v : voxel_positions(g)) {
            *p++ = v.x;
            *p++ = v.y;
            *p++ = v.z;
        }
        return out;
    });

    py::class_<SamplingMask>(m, "SamplingMask")
        .def_property_readonly("kept_rows",
                               [](const SamplingMask& m_) {
                                   return py::array_t<std::uint32_t>(
                                       py::ssize_t(m_.kept_rows.size()), m_.kept_rows.data());
                               })
        .def_readonly("sr", &SamplingMask::sr)
        .def_readonly("seed", &SamplingMask::seed);
    m.def("make_mask", &make_mask, py::arg("total_rows"), py::arg("sr"), py::arg("seed"));

    py::class_<MeasurementOperator>(m, "MeasurementOperator")
        .def_static("build", &MeasurementOperator::build, py::arg("geometry"),
                    py::arg("waveform"), py::arg("grid"), py::arg("explicit_matrix") = true,
                    py::arg("memory_budget_bytes") = MeasurementOperator::kDefaultBudget)
        .def_property_readonly("rows", &MeasurementOperator::rows)
        .def_property_readonly("cols", &MeasurementOperator::cols)
        .def_property_readonly("total_rows", &MeasurementOperator::total_rows)
        .def_property_readonly("is_explicit", &MeasurementOperator::is_explicit)
        .def("entry", &MeasurementOperator::entry, py::arg("i"), py::arg("n"))
        .def("apply",
             [](const MeasurementOperator& op, py::array_t<cx> x) {
                 return from_cvec(op.apply(to_cvec(x)));
             })
        .def("apply_adjoint",
             [](const MeasurementOperator& op, py::array_t<cx> y) {
                 return from_cvec(op.apply_adjoint(to_cvec(y)));
             })
        .def("subsample", &MeasurementOperator::subsample, py::arg("mask"));

    m.def(
        "add_noise",
        [](py::array_t<cx> clean, double snr_db, std::uint64_t seed) {
            EchoVector e;
            e.values = to_cvec(clean);
            return from_cvec(add_noise(e, snr_db, seed).values);
        },
        py::arg("clean"), py::arg("snr_db"), py::arg("seed"));

    m.def("soft_threshold", &soft_threshold, py::arg("v"), py::arg("lam"));
    m.def("mcp_threshold", &mcp_threshold, py::arg("v"), py::arg("lam"), py::arg("theta"));
    m.def(
        "mcp_penalty",
        [](py::array_t<cx> x, double lam, double theta) {
            return mcp_penalty(to_cvec(x), lam, theta);
        },
        py::arg("x"), py::arg("lam"), py::arg("theta"));

    py::class_<DenoiserSpec>(m, "DenoiserSpec")
        .def(py::init([](const std::string& kind, int radius, double sigma, int patch_radius,
                         int search_radius, double h, double h_scale, const std::string& command,
                         bool deterministic) {
                 DenoiserSpec s;
                 s.kind = denoiser_kind_from_name(kind);
                 s.radius = radius;
                 s.sigma = sigma;
                 s.patch_radius = patch_radius;
                 s.search_radius = search_radius;
                 s.h = h;
                 s.h_scale = h_scale;
                 s.command = command;
                 s.deterministic = deterministic;
                 return s;
             }),
             py::arg("kind") = "identity", py::arg("radius") = 1, py::arg("sigma") = 0.8,
             py::arg("patch_radius") = 1, py::arg("search_radius") = 2, py::arg("h") = 0.0,
             py::arg("h_scale") = 2.5, py::arg("command") = "", py::arg("deterministic") = false)
        .def_property_readonly("kind",
                               [](const DenoiserSpec& s) { return to_string(s.kind); });

    m.def(
        "denoise",
        [](const DenoiserSpec& spec, py::array_t<cx> v, Dims dims) {
            return from_cvec(denoise(spec, to_cvec(v), dims));
        },
        py::arg("spec"), py::arg("v"), py::arg("dims"));
    m.def(
        "red_energy",
        [](const DenoiserSpec& spec, py::array_t<cx> v, Dims dims) {
            return red_energy(spec, to_cvec(v), dims);
        },
        py::arg("spec"), py::arg("v"), py::arg("dims"));
    m.def(
        "cyclic_monotonicity_score",
        [](const DenoiserSpec& spec, const std::vector<py::array_t<cx>>& points, Dims dims) {
            std::vector<cvec> pts;
            pts.reserve(points.size());
            for (const auto& p : points) pts.push_back(to_cvec(p));
            return cyclic_monotonicity_score(spec, pts, dims);
        },
        py::arg("spec"), py::arg("points"), py::arg("dims"));

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_readwrite("lam", &SolverConfig::lambda)
        .def_readwrite("mu", &SolverConfig::mu)
        .def_readwrite("theta", &SolverConfig::theta)
        .def_readwrite("t_max", &SolverConfig::t_max)
        .def_readwrite("eps", &SolverConfig::eps)
        .def_readwrite("inner_j", &SolverConfig::inner_j)
        .def_readwrite("cg_tol", &SolverConfig::cg_tol)
        .def_readwrite("cg_max", &SolverConfig::cg_max);

    py::class_<TraceRecord>(m, "TraceRecord")
        .def_readonly("t", &TraceRecord::t)
        .def_readonly("residual", &TraceRecord::residual)
        .def_readonly("data_fidelity", &TraceRecord::data_fidelity)
        .def_readonly("prior_value", &TraceRecord::prior_value)
        .def_readonly("wall_seconds", &TraceRecord::wall_seconds);

    py::class_<SolverTrace>(m, "SolverTrace")
        .def_readonly("records", &SolverTrace::records)
        .def_readonly("diverged", &SolverTrace::diverged)
        .def_readonly("cg_warning", &SolverTrace::cg_warning);

    py::class_<ReconstructionResult>(m, "ReconstructionResult")
        .def_property_readonly("volume",
                               [](const ReconstructionResult& r) { return volume_array(r.volume); })
        .def_property_readonly("values",
                               [](const ReconstructionResult& r) { return from_cvec(r.volume.values); })
        .def_readonly("trace", &ReconstructionResult::trace)
        .def_readonly("method", &ReconstructionResult::method);

    m.def(
        "matched_filter",
        [](const MeasurementOperator& A, py::array_t<cx> y, const SceneGrid& grid) {
            return matched_filter(A, to_cvec(y), grid);
        },
        py::arg("A"), py::arg("y"), py::arg("grid"));
    m.def(
        "admm_reg",
        [](const MeasurementOperator& A, py::array_t<cx> y, const SceneGrid& grid,
           const std::string& prox_kind, const SolverConfig& cfg) {
            return admm_reg(A, to_cvec(y), grid, method_from_name(prox_kind), cfg);
        },
        py::arg("A"), py::arg("y"), py::arg("grid"), py::arg("prox_kind"), py::arg("cfg"));
    m.def(
        "pnp_admm",
        [](const MeasurementOperator& A, py::array_t<cx> y, const SceneGrid& grid,
           const DenoiserSpec& spec, const SolverConfig& cfg) {
            return pnp_admm(A, to_cvec(y), grid, spec, cfg);
        },
        py::arg("A"), py::arg("y"), py::arg("grid"), py::arg("spec"), py::arg("cfg"));
    m.def(
        "red_admm",
        [](const MeasurementOperator& A, py::array_t<cx> y, const SceneGrid& grid,
           const DenoiserSpec& spec, const SolverConfig& cfg) {
            return red_admm(A, to_cvec(y), grid, spec, cfg);
        },
        py::arg("A"), py::arg("y"), py::arg("grid"), py::arg("spec"), py::arg("cfg"));
    m.def(
        "red_gap",
        [](const MeasurementOperator& A, py::array_t<cx> y, const SceneGrid& grid,
           const DenoiserSpec& spec, const SolverConfig& cfg) {
            return red_gap(A, to_cvec(y), grid, spec, cfg);
        },
        py::arg("A"), py::arg("y"), py::arg("grid"), py::arg("spec"), py::arg("cfg"));

    m.def("psnr", [](py::array_t<cx> a, py::array_t<cx> b) { return psnr(to_cvec(a), to_cvec(b)); });
    m.def("ssim", [](py::array_t<cx> a, py::array_t<cx> b) { return ssim(to_cvec(a), to_cvec(b)); });
    m.def("nmse", [](py::array_t<cx> a, py::array_t<cx> b) { return nmse(to_cvec(a), to_cvec(b)); });

    m.def("write_volume", [](const std::string& path, const Reflectivity& v) { write_volume(path, v); });
    m.def("read_volume", [](const std::string& path) { return read_volume(path); });

    m.def("default_config_json", &default_config_json);
    m.def(
        "sweep",
        [](const std::string& config_json, const std::vector<std::string>& overrides) {
            const RunConfig cfg = parse_config(config_json, overrides);
            bool ok = false;
            const auto rows = sweep(cfg, &ok);
            py::list out;
            for (const ResultRow& r : rows) {
                py::dict d;
                d["method"] = r.method;
                d["sr"] = r.sr;
                d["snr_db"] = r.snr_db;
                d["seed"] = r.seed;
                d["psnr_db"] = r.psnr_db;
                d["ssim"] = r.ssim;
                d["nmse"] = r.nmse;
                d["iterations"] = r.iterations;
                d["final_residual"] = r.final_residual;
                d["status"] = r.status;
                out.append(std::move(d));
            }
            return out;
        },
        py::arg("config_json"), py::arg("overrides") = std::vector<std::string>{});

    m.def("set_num_threads", &set_num_threads);
    m.def("num_threads", &num_threads);
}
