#pragma once

namespace regmdp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace regmdp
