#pragma once

namespace flexonc {

inline constexpr const char* version = "0.1.0";

} // namespace flexonc
