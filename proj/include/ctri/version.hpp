#pragma once

namespace ctri {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ctri
