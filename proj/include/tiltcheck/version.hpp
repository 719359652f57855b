#pragma once

namespace tiltcheck {

inline constexpr const char* kToolName = "tiltcheck";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace tiltcheck
