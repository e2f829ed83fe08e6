#pragma once

namespace cmjlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cmjlab
