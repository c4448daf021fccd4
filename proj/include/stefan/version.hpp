#pragma once

namespace stefan {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace stefan
