#pragma once

namespace groundgap {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace groundgap
