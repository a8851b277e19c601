#pragma once

namespace sdlab {

inline constexpr const char* kToolVersion = "0.1.0";

} // namespace sdlab
