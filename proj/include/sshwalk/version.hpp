#pragma once

namespace sshwalk {

inline constexpr const char* kToolkitVersion = "1.0.0";
/// Bumped whenever a CSV/JSON layout changes.
inline constexpr int kFormatVersion = 1;

}  // namespace sshwalk
