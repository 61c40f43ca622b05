#pragma once

namespace marq {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace marq
