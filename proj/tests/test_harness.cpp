#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "sar3d/harness.hpp"
#include "sar3d/metrics.hpp"
#include "sar3d/rng.hpp"

using namespace sar3d;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("sar3d_harness_" + std::to_string(Rng(std::random_device{}()).uniform_below(1u << 30)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string dir(const std::string& name) const { return (path / name).string(); }
};

std::string tiny_config(const std::string& out_dir) {
    return R"({
      "scene": {"preset": "point_grid", "seed": 3,
                "grid": {"dims": [6, 6, 6], "spacing": [0.06, 0.06, 0.06], "origin": "center"}},
      "geometry": {"n_az": 3, "n_el": 3, "size_az": 0.5, "size_el": 0.5, "standoff": 1.0},
      "waveform": {"carrier_hz": 3.75e10, "bandwidth_hz": 1.2e9, "n_freq": 3},
      "sampling": {"sr": [1.0]},
      "noise": {"snr_db": ["inf"]},
      "seeds": [0],
      "methods": ["mf"],
      "solver": {"t_max": 15, "cg_tol": 1e-8},
      "denoiser": {"kind": "nlm3d"},
      "output": {"dir": ")" +
           out_dir + R"("}
    })";
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("simulate: clean-echo identity and artifact determinism") {
    TempDir tmp;
    const RunConfig cfg = parse_config(tiny_config(tmp.dir("a")));
    simulate(cfg);

    SUBCASE("full-rate noise-free echo equals the forward map exactly") {
        const Reflectivity scene = read_volume(tmp.dir("a") + "/scene.vol");
        const EchoVector clean = read_echo(tmp.dir("a") + "/echo_clean.ech");
        const EchoVector cell = read_echo(tmp.dir("a") + "/echo_sr1_snrinf_seed0.ech");
        const MeasurementOperator A = build_operator(cfg);
        const cvec expect = A.apply(scene.values);
        CHECK(clean.values == expect);
        CHECK(cell.values == expect);
    }

    SUBCASE("repeat run produces identical bytes") {
        const RunConfig cfg_b = parse_config(tiny_config(tmp.dir("b")));
        simulate(cfg_b);
        for (const char* name :
             {"/scene.vol", "/echo_clean.ech", "/echo_sr1_snrinf_seed0.ech",
              "/mask_sr1_seed0.msk", "/results.csv"}) {
            const std::string fa = tmp.dir("a") + name, fb = tmp.dir("b") + name;
            if (!fs::exists(fa)) continue;  // results.csv is a sweep artifact
            CHECK(slurp(fa) == slurp(fb));
        }
    }

    SUBCASE("quarter-rate echo keeps round(0.25 * M) samples") {
        const RunConfig cfg_c =
            parse_config(tiny_config(tmp.dir("c")), {"sampling.sr=[0.25]", "noise.snr_db=[20]"});
        simulate(cfg_c);
        const EchoVector cell = read_echo(tmp.dir("c") + "/echo_sr0.25_snr20_seed0.ech");
        const MeasurementOperator A = build_operator(cfg_c);
        CHECK(cell.values.size() == std::size_t(std::llround(0.25 * double(A.total_rows()))));
        CHECK(cell.prov.sr == 0.25);
        CHECK(cell.prov.snr_db == 20.0);
    }

    SUBCASE("manifest lists artifacts with hashes") {
        const std::string manifest = slurp(tmp.dir("a") + "/manifest.json");
        CHECK(manifest.find("scene.vol") != std::string::npos);
        CHECK(manifest.find("fnv64:") != std::string::npos);
        CHECK(manifest.find("\"version\"") != std::string::npos);
    }
}

TEST_CASE("sweep: one method and one cell yields one ok row") {
    TempDir tmp;
    const RunConfig cfg = parse_config(tiny_config(tmp.dir("s")));
    bool all_ok = false;
    const auto rows = sweep(cfg, &all_ok);
    CHECK(all_ok);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].method == "mf");
    CHECK(rows[0].status == "ok");
    CHECK(rows[0].psnr_db > 0.0);

    const auto parsed = read_results(tmp.dir("s") + "/results.csv");
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0] == rows[0]);
    CHECK(fs::exists(tmp.dir("s") + "/trace_mf_sr1_snrinf_seed0.csv"));
    CHECK(fs::exists(tmp.dir("s") + "/recon_mf_sr1_snrinf_seed0.vol"));
}

TEST_CASE("sweep: grid size and byte-identical replay") {
    TempDir tmp;
    const std::vector<std::string> overrides = {
        "sampling.sr=[1.0,0.5]", "seeds=[0,1]", "methods=[\"mf\",\"l1\"]",
        "noise.snr_db=[20]"};
    const RunConfig cfg_a =
        parse_config(tiny_config(tmp.dir("a")), overrides);
    const RunConfig cfg_b =
        parse_config(tiny_config(tmp.dir("b")), overrides);

    bool ok_a = false, ok_b = false;
    const auto rows_a = sweep(cfg_a, &ok_a);
    const auto rows_b = sweep(cfg_b, &ok_b);
    CHECK(ok_a);
    CHECK(rows_a.size() == 2 * 2 * 2);  // sr x seed x method

    CHECK(slurp(tmp.dir("a") + "/results.csv") == slurp(tmp.dir("b") + "/results.csv"));
    CHECK(slurp(tmp.dir("a") + "/scene.vol") == slurp(tmp.dir("b") + "/scene.vol"));
    for (const auto& row : rows_a) {
        const std::string name = "/recon_" + row.method + "_sr" + format_double(row.sr) +
                                 "_snr20_seed" + std::to_string(row.seed) + ".vol";
        CHECK(slurp(tmp.dir("a") + name) == slurp(tmp.dir("b") + name));
    }
}

TEST_CASE("sweep: a failing cell is recorded and the sweep continues") {
    TempDir tmp;
    // external denoiser command that always fails; pnp cell errors, mf succeeds
    const RunConfig cfg = parse_config(
        tiny_config(tmp.dir("f")),
        {"methods=[\"mf\",\"pnp\"]", "denoiser.kind=external",
         "denoiser.command=\"false\"", "denoiser.deterministic=true"});
    bool all_ok = true;
    const auto rows = sweep(cfg, &all_ok);
    CHECK(!all_ok);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].status == "ok");
    CHECK(rows[1].status.substr(0, 6) == "error:");
    // the table still parses
    const auto parsed = read_results(tmp.dir("f") + "/results.csv");
    CHECK(parsed.size() == 2);
}

TEST_CASE("reconstruct_one runs a single cell") {
    TempDir tmp;
    const RunConfig cfg = parse_config(tiny_config(tmp.dir("r")), {"solver.t_max=10"});
    const ResultRow row = reconstruct_one(cfg, "l1");
    CHECK(row.method == "l1");
    CHECK(row.status == "ok");
    CHECK(row.iterations >= 1);
    CHECK(fs::exists(tmp.dir("r") + "/recon_l1_sr1_snrinf_seed0.vol"));
}

TEST_CASE("diagnose") {
    TempDir tmp;
    SUBCASE("identity denoiser passes everything with zero scores") {
        const RunConfig cfg =
            parse_config(tiny_config(tmp.dir("d1")), {"denoiser.kind=identity"});
        const DiagnoseReport rep = diagnose(cfg);
        CHECK(rep.adjoint_ok);
        CHECK(rep.grad_ok);
        CHECK(rep.cyclic_score == 0.0);
        CHECK(!rep.cyclic_warn);
        CHECK(rep.identity_cyclic_score == 0.0);
        CHECK(rep.all_pass);
        CHECK(fs::exists(tmp.dir("d1") + "/diagnose.txt"));
    }
    SUBCASE("default nlm3d run reports adjoint and gradient health") {
        const RunConfig cfg = parse_config(tiny_config(tmp.dir("d2")),
                                           {"sampling.sr=[0.5]", "noise.snr_db=[10]"});
        const DiagnoseReport rep = diagnose(cfg);
        CHECK(rep.adjoint_ok);
        CHECK(rep.adjoint_rel_err < 1e-10);
        CHECK(rep.grad_ok);
        CHECK(rep.grad.max_rel_err < 1e-5);
        CHECK(rep.identity_cyclic_score == 0.0);
    }
}

TEST_CASE("fnv1a64 is stable") {
    CHECK(fnv1a64("") == 14695981039346656037ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("hello") == fnv1a64("hello"));
    CHECK(fnv1a64("hello") != fnv1a64("hellp"));
}
