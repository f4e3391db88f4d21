#pragma once

namespace hypscatter {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hypscatter
