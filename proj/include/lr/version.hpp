#pragma once

namespace lr {

inline constexpr const char* library_version = "0.1.0";
// Bumped whenever a CLI output or manifest layout changes.
inline constexpr int file_format_version = 1;

}  // namespace lr
