#pragma once

#include <cstdint>

namespace fact5w {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// Feature-vector layout id; bumped whenever the 65-column order changes.
inline constexpr const char* kFeatureLayoutVersion = "fv65.v1";

/// Binary checkpoint format version.
inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

/// Embedding store format version (manifest header).
inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;

inline constexpr const char* kStopwordListVersion = "stopwords_en.v1";

} // namespace fact5w
