#pragma once

namespace demest {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace demest
