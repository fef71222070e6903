#pragma once

#include <filesystem>
#include <string>

#include "reidkit/types.hpp"

namespace reidkit {

/// Two-file embedding store.
///
/// `<name>.meta.jsonl` holds a header line
///   {"magic":"REIDSTORE","version":1,"dim":D,"count":N}
/// followed by N record lines
///   {"record_id":..,"fish_id":..,"species":..,"arrangement":..,
///    "viewpoint":..,"split":..,"row":..}
/// and `<name>.f32` holds the N x D row-major float32 little-endian matrix.
struct StorePaths {
  std::filesystem::path meta;
  std::filesystem::path blob;

  /// `<name>.meta.jsonl` and `<name>.f32`.
  static StorePaths from_name(const std::string& name);
};

inline constexpr const char* kStoreMagic = "REIDSTORE";
inline constexpr int kStoreVersion = 1;

void write_store(const EmbeddingSet& set, const StorePaths& paths);

/// Throws Error with kMagicMismatch, kBlobLengthMismatch, kNonFiniteValue,
/// kDuplicateRecordId, kRowOutOfRange or kMalformedMetadata.
EmbeddingSet read_store(const StorePaths& paths);

}  // namespace reidkit
