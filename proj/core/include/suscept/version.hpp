#pragma once

namespace suscept {

inline constexpr const char* kVersion = "0.1.0";

} // namespace suscept
