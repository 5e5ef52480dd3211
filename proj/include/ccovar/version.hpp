#pragma once

namespace ccovar {

/// Library version; also stamped into run manifests and cache keys.
inline constexpr const char* kVersion = "1.0.0";

}  // namespace ccovar
