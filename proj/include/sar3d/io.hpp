#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sar3d/forward.hpp"
#include "sar3d/model.hpp"
#include "sar3d/solvers.hpp"

namespace sar3d {

// Binary artifacts are little-endian with fixed 7-byte magics:
//   SARVOL1  volume: dims 3xu32, spacing+origin 6xf64, payload N x (f32 re, f32 im)
//   SARECH1  echo:   count u32, sr f64, snr_db f64, seed i64, scene-id string,
//                    payload count x (f64 re, f64 im)
//   SARMSK1  mask:   kept u32, sr f64, seed u64, kept x u32
// Text artifacts (traces, results tables) are CSV with a header row; floats
// are written in shortest exact form so tables replay byte-identically.

void write_volume(const std::string& path, const Reflectivity& v);
Reflectivity read_volume(const std::string& path);

void write_echo(const std::string& path, const EchoVector& echo);
EchoVector read_echo(const std::string& path);

void write_mask(const std::string& path, const SamplingMask& mask);
SamplingMask read_mask(const std::string& path);

void write_trace(const std::string& path, const SolverTrace& trace);

/// One sweep result per (method, sr, snr, seed) cell.
struct ResultRow {
    std::string method;
    double sr = 1.0;
    double snr_db = 0.0;
    std::int64_t seed = 0;
    double psnr_db = 0.0;
    double ssim = 0.0;
    double nmse = 0.0;
    std::int64_t iterations = 0;
    double final_residual = 0.0;
    double wall_seconds = 0.0;
    std::string status = "ok";

    bool operator==(const ResultRow&) const = default;
};

void write_results(const std::string& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results(const std::string& path);

std::string format_double(double v);

} // namespace sar3d
