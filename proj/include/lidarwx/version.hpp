#pragma once

namespace lidarwx {
inline constexpr const char* kVersion = "0.1.0";
}
