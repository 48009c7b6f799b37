#pragma once

namespace psrl {

inline constexpr const char* kCodeVersion = "0.1.0";
inline constexpr unsigned kCheckpointFormatVersion = 1;

}  // namespace psrl
