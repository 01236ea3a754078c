#pragma once

namespace schedpred {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace schedpred
