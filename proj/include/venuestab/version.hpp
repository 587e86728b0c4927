#pragma once

namespace venuestab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace venuestab
