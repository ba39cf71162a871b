#pragma once

namespace irt {

inline constexpr const char* kToolName = "irt-arena";
inline constexpr const char* kToolVersion = "0.1.0";

// Identifier of the pseudo-random scheme used by the synthesis module.
// Recorded in output metadata so recovery experiments stay reproducible.
inline constexpr const char* kGeneratorId = "splitmix64-boxmuller-v1";

} // namespace irt
