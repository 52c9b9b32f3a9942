#pragma once

namespace rfbm {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace rfbm
