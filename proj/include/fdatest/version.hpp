#pragma once

namespace fdatest {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kProgram = "fdatest";

}  // namespace fdatest
