#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace sar3d {

using cx = std::complex<double>;
using cvec = std::vector<cx>;

/// Raised when an explicit operator would exceed the configured memory budget.
class ResourceLimitError : public std::runtime_error {
public:
    explicit ResourceLimitError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised on malformed binary/text artifacts; carries the byte offset of the defect.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
          byte_offset(offset) {}
    std::size_t byte_offset;
};

inline double sq(double v) { return v * v; }

} // namespace sar3d
