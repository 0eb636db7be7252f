#pragma once

namespace xproab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace xproab
