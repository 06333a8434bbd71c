#pragma once

namespace sddete {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace sddete
