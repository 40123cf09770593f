#pragma once

namespace gazehmm {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace gazehmm
