#pragma once

namespace vitalgrade {

inline constexpr const char* kVersion = "1.0.0";

} // namespace vitalgrade
