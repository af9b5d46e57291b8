#pragma once

namespace diffcert {

inline constexpr const char* kVersion = "0.1.0";

} // namespace diffcert
