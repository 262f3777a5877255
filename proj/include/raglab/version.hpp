#pragma once

namespace raglab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace raglab
