#pragma once

namespace qdiff {
inline constexpr const char* kVersion = "0.1.0";
}
