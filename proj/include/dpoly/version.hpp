#pragma once

namespace dpoly {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dpoly
