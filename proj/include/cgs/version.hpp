#pragma once

namespace cgs {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cgs
