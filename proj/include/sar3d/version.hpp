#pragma once

namespace sar3d {
inline constexpr const char* kVersion = "0.1.0";
}
