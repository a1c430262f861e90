#pragma once

#include <string_view>

namespace sechlab {

inline constexpr std::string_view kToolName = "sechlab";
inline constexpr std::string_view kToolVersion = "0.1.0";

} // namespace sechlab
