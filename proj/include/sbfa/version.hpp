#pragma once

namespace sbfa {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sbfa
