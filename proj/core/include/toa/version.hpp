#pragma once

namespace toa {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace toa
