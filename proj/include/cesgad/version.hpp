#pragma once

#include <string_view>

namespace cesgad {

inline constexpr std::string_view kToolkitName = "cesgad";
inline constexpr std::string_view kToolkitVersion = "0.1.0";

}  // namespace cesgad
