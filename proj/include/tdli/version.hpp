#pragma once

// Artifact version, stamped into result metadata so files identify the code
// that wrote them.

namespace tdli {

inline constexpr const char* version_string = "0.1.0";

} // namespace tdli
