#pragma once

namespace ppctl {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ppctl
