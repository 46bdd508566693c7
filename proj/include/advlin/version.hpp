#pragma once

namespace advlin {
inline constexpr const char* version_string = "0.1.0";
}
