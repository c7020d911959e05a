#include "sar3d/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sar3d {

namespace {

constexpr char kVolMagic[] = "SARVOL1";
constexpr char kEchoMagic[] = "SARECH1";
constexpr char kMaskMagic[] = "SARMSK1";
constexpr std::size_t kMagicLen = 7;

// Little-endian packing, independent of host byte order.
void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(char((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(char((v >> (8 * i)) & 0xff));
}
void put_f64(std::string& buf, double v) { put_u64(buf, std::bit_cast<std::uint64_t>(v)); }
void put_f32(std::string& buf, float v) {
    const auto u = std::bit_cast<std::uint32_t>(v);
    put_u32(buf, u);
}

class Reader {
public:
    Reader(std::string data, std::string path) : data_(std::move(data)), path_(std::move(path)) {}

    std::size_t offset() const { return pos_; }

    void expect_magic(const char* magic) {
        if (data_.size() < kMagicLen || std::memcmp(data_.data(), magic, kMagicLen) != 0)
            throw FormatError(path_ + ": bad magic", 0);
        pos_ = kMagicLen;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(data_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    void expect_end() {
        if (pos_ != data_.size())
            throw FormatError(path_ + ": trailing bytes", pos_);
    }
    void need(std::size_t n) {
        if (pos_ + n > data_.size())
            throw FormatError(path_ + ": truncated payload", data_.size());
    }

private:
    std::string data_;
    std::string path_;
    std::size_t pos_ = 0;
};

void write_file(const std::string& path, const std::string& data) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write(data.data(), std::streamsize(data.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return std::move(ss).str();
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_volume(const std::string& path, const Reflectivity& v) {
    std::string buf;
    buf.reserve(kMagicLen + 12 + 48 + 8 * v.values.size());
    buf.append(kVolMagic, kMagicLen);
    for (int a = 0; a < 3; ++a) put_u32(buf, v.grid.dims[a]);
    for (int a = 0; a < 3; ++a) put_f64(buf, v.grid.spacing[a]);
    for (int a = 0; a < 3; ++a) put_f64(buf, v.grid.origin[a]);
    for (const cx& z : v.values) {
        put_f32(buf, float(z.real()));
        put_f32(buf, float(z.imag()));
    }
    write_file(path, buf);
}

Reflectivity read_volume(const std::string& path) {
    Reader r(read_file(path), path);
    r.expect_magic(kVolMagic);
    const std::size_t header_off = r.offset();
    std::array<std::uint32_t, 3> dims;
    for (auto& d : dims) d = r.u32();
    std::array<double, 3> spacing, origin;
    for (auto& s : spacing) s = r.f64();
    for (auto& o : origin) o = r.f64();

    const std::uint64_t n = std::uint64_t(dims[0]) * dims[1] * dims[2];
    if (n == 0 || n > (std::uint64_t(1) << 31))
        throw FormatError(path + ": bad dims", header_off);
    SceneGrid grid;
    try {
        grid = SceneGrid(dims, spacing, origin);
    } catch (const std::invalid_argument& e) {
        throw FormatError(path + ": invalid header: " + e.what(), header_off);
    }

    r.need(8 * n);
    cvec values(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const float re = r.f32();
        const float im = r.f32();
        values[i] = cx(re, im);
    }
    r.expect_end();
    return Reflectivity(grid, std::move(values));
}

void write_echo(const std::string& path, const EchoVector& echo) {
    std::string buf;
    buf.append(kEchoMagic, kMagicLen);
    put_u32(buf, std::uint32_t(echo.values.size()));
    put_f64(buf, echo.prov.sr);
    put_f64(buf, echo.prov.snr_db);
    put_u64(buf, std::uint64_t(echo.prov.seed));
    put_u32(buf, std::uint32_t(echo.prov.scene_id.size()));
    buf += echo.prov.scene_id;
    for (const cx& z : echo.values) {
        put_f64(buf, z.real());
        put_f64(buf, z.imag());
    }
    write_file(path, buf);
}

EchoVector read_echo(const std::string& path) {
    Reader r(read_file(path), path);
    r.expect_magic(kEchoMagic);
    const std::uint32_t n = r.u32();
    EchoVector echo;
    echo.prov.sr = r.f64();
    echo.prov.snr_db = r.f64();
    echo.prov.seed = std::int64_t(r.u64());
    echo.prov.scene_id = r.bytes(r.u32());
    echo.values.resize(n);
    for (auto& z : echo.values) {
        const double re = r.f64();
        const double im = r.f64();
        z = cx(re, im);
    }
    r.expect_end();
    return echo;
}

void write_mask(const std::string& path, const SamplingMask& mask) {
    std::string buf;
    buf.append(kMaskMagic, kMagicLen);
    put_u32(buf, std::uint32_t(mask.kept_rows.size()));
    put_f64(buf, mask.sr);
    put_u64(buf, mask.seed);
    for (std::uint32_t i : mask.kept_rows) put_u32(buf, i);
    write_file(path, buf);
}

SamplingMask read_mask(const std::string& path) {
    Reader r(read_file(path), path);
    r.expect_magic(kMaskMagic);
    const std::uint32_t k = r.u32();
    SamplingMask mask;
    mask.sr = r.f64();
    mask.seed = r.u64();
    mask.kept_rows.resize(k);
    for (auto& i : mask.kept_rows) i = r.u32();
    r.expect_end();
    return mask;
}

void write_trace(const std::string& path, const SolverTrace& trace) {
    std::string buf = "t,residual,data_fidelity,prior_value,wall_seconds\n";
    for (const TraceRecord& rec : trace.records) {
        buf += std::to_string(rec.t);
        buf += ',';
        buf += format_double(rec.residual);
        buf += ',';
        buf += format_double(rec.data_fidelity);
        buf += ',';
        buf += format_double(rec.prior_value);
        buf += ',';
        buf += format_double(rec.wall_seconds);
        buf += '\n';
    }
    write_file(path, buf);
}

namespace {

const char* kResultsHeader =
    "method,sr,snr_db,seed,psnr_db,ssim,nmse,iterations,final_residual,wall_seconds,status";

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

double parse_double(const std::string& s, const std::string& path, std::size_t line_no) {
    // std::from_chars on GCC rejects "inf"; fall back to strtod semantics.
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw std::runtime_error(path + ": bad number '" + s + "' on line " +
                                 std::to_string(line_no));
    return v;
}

} // namespace

void write_results(const std::string& path, const std::vector<ResultRow>& rows) {
    std::string buf = kResultsHeader;
    buf += '\n';
    for (const ResultRow& r : rows) {
        buf += r.method;
        buf += ',';
        buf += format_double(r.sr);
        buf += ',';
        buf += format_double(r.snr_db);
        buf += ',';
        buf += std::to_string(r.seed);
        buf += ',';
        buf += format_double(r.psnr_db);
        buf += ',';
        buf += format_double(r.ssim);
        buf += ',';
        buf += format_double(r.nmse);
        buf += ',';
        buf += std::to_string(r.iterations);
        buf += ',';
        buf += format_double(r.final_residual);
        buf += ',';
        buf += format_double(r.wall_seconds);
        buf += ',';
        buf += r.status;
        buf += '\n';
    }
    write_file(path, buf);
}

std::vector<ResultRow> read_results(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader)
        throw std::runtime_error(path + ": missing or unexpected results header");
    std::vector<ResultRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 11)
            throw std::runtime_error(path + ": bad column count on line " +
                                     std::to_string(line_no));
        ResultRow r;
        r.method = f[0];
        r.sr = parse_double(f[1], path, line_no);
        r.snr_db = parse_double(f[2], path, line_no);
        r.seed = std::stoll(f[3]);
        r.psnr_db = parse_double(f[4], path, line_no);
        r.ssim = parse_double(f[5], path, line_no);
        r.nmse = parse_double(f[6], path, line_no);
        r.iterations = std::stoll(f[7]);
        r.final_residual = parse_double(f[8], path, line_no);
        r.wall_seconds = parse_double(f[9], path, line_no);
        r.status = f[10];
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace sar3d
