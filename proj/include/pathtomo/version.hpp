#pragma once

namespace pathtomo {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace pathtomo
