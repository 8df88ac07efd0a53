#pragma once

namespace rydsim {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace rydsim
