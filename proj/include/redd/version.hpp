#pragma once

namespace redd {

inline constexpr const char* kToolName = "redd";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace redd
