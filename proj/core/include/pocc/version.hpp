#pragma once

namespace pocc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pocc
