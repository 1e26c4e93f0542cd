#pragma once

namespace fastgcrnn {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kCheckpointMagic = "FGCRNN1\n";
inline constexpr int kGraphFormatVersion = 1;
inline constexpr int kFlowFormatVersion = 1;

}  // namespace fastgcrnn
