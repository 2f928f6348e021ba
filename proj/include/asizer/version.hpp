#pragma once

namespace asizer {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace asizer
