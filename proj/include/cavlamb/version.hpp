#pragma once

namespace cavlamb {

inline constexpr const char* version = "0.1.0";

} // namespace cavlamb
