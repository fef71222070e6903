#include "reidkit/store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "reidkit/error.hpp"

namespace reidkit {

namespace {

using ordered_json = nlohmann::ordered_json;

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0x000000FFu) << 24) | ((v & 0x0000FF00u) << 8) |
        ((v & 0x00FF0000u) >> 8) | ((v & 0xFF000000u) >> 24);
  }
  return v;
}

std::string meta_error(const std::filesystem::path& path, std::size_t line,
                       const std::string& what) {
  return path.string() + ":" + std::to_string(line) + ": " + what;
}

template <typename T>
T required(const nlohmann::json& obj, const char* key, const std::filesystem::path& path,
           std::size_t line) {
  if (!obj.contains(key)) {
    throw Error(ErrorCode::kMalformedMetadata,
                meta_error(path, line, std::string("missing field \"") + key + "\""));
  }
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kMalformedMetadata,
                meta_error(path, line, std::string("bad type for field \"") + key + "\""));
  }
}

}  // namespace

StorePaths StorePaths::from_name(const std::string& name) {
  return {name + ".meta.jsonl", name + ".f32"};
}

void write_store(const EmbeddingSet& set, const StorePaths& paths) {
  if (set.dim() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "cannot write a store with dim 0");
  }
  std::ofstream meta(paths.meta, std::ios::binary | std::ios::trunc);
  if (!meta) throw Error(ErrorCode::kIo, "cannot open " + paths.meta.string());

  ordered_json header;
  header["magic"] = kStoreMagic;
  header["version"] = kStoreVersion;
  header["dim"] = set.dim();
  header["count"] = set.size();
  meta << header.dump() << '\n';

  for (std::size_t row = 0; row < set.size(); ++row) {
    const auto& r = set[row];
    ordered_json line;
    line["record_id"] = r.record_id;
    line["fish_id"] = r.fish_id;
    line["species"] = r.species;
    line["arrangement"] = to_string(r.condition.arrangement);
    line["viewpoint"] = to_string(r.condition.viewpoint);
    line["split"] = to_string(r.split);
    line["row"] = row;
    meta << line.dump() << '\n';
  }
  if (!meta) throw Error(ErrorCode::kIo, "write failed: " + paths.meta.string());

  std::ofstream blob(paths.blob, std::ios::binary | std::ios::trunc);
  if (!blob) throw Error(ErrorCode::kIo, "cannot open " + paths.blob.string());
  std::vector<std::uint32_t> words(set.dim());
  for (const auto& r : set.records()) {
    for (std::size_t k = 0; k < set.dim(); ++k) {
      words[k] = to_little_endian(std::bit_cast<std::uint32_t>(r.vector[k]));
    }
    blob.write(reinterpret_cast<const char*>(words.data()),
               static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
  }
  if (!blob) throw Error(ErrorCode::kIo, "write failed: " + paths.blob.string());
}

EmbeddingSet read_store(const StorePaths& paths) {
  std::ifstream meta(paths.meta, std::ios::binary);
  if (!meta) throw Error(ErrorCode::kIo, "cannot open " + paths.meta.string());

  std::vector<std::string> lines;
  for (std::string line; std::getline(meta, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) {
    throw Error(ErrorCode::kMagicMismatch, paths.meta.string() + ": missing header line");
  }

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(lines[0]);
  } catch (const nlohmann::json::parse_error&) {
    throw Error(ErrorCode::kMagicMismatch,
                meta_error(paths.meta, 1, "header is not a JSON object"));
  }
  if (!header.is_object() || !header.contains("magic") ||
      header["magic"] != kStoreMagic) {
    throw Error(ErrorCode::kMagicMismatch,
                meta_error(paths.meta, 1, "magic mismatch (expected REIDSTORE)"));
  }
  const auto version = required<int>(header, "version", paths.meta, 1);
  if (version != kStoreVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                meta_error(paths.meta, 1, "unsupported version " + std::to_string(version)));
  }
  const auto dim = required<std::int64_t>(header, "dim", paths.meta, 1);
  const auto count = required<std::int64_t>(header, "count", paths.meta, 1);
  if (dim <= 0 || count < 0) {
    throw Error(ErrorCode::kMalformedMetadata,
                meta_error(paths.meta, 1, "dim must be positive and count non-negative"));
  }
  const auto n = static_cast<std::size_t>(count);
  const auto d = static_cast<std::size_t>(dim);
  if (lines.size() - 1 != n) {
    throw Error(ErrorCode::kMalformedMetadata,
                paths.meta.string() + ": header count " + std::to_string(n) + " but " +
                    std::to_string(lines.size() - 1) + " record lines");
  }

  std::ifstream blob(paths.blob, std::ios::binary | std::ios::ate);
  if (!blob) throw Error(ErrorCode::kIo, "cannot open " + paths.blob.string());
  const auto blob_size = static_cast<std::size_t>(blob.tellg());
  const std::size_t expected = n * d * sizeof(float);
  if (blob_size != expected) {
    throw Error(ErrorCode::kBlobLengthMismatch,
                paths.blob.string() + ": blob length mismatch (expected " +
                    std::to_string(expected) + " bytes, got " + std::to_string(blob_size) +
                    ")");
  }
  blob.seekg(0);
  std::vector<std::uint32_t> words(n * d);
  blob.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(expected));
  if (!blob && n * d > 0) throw Error(ErrorCode::kIo, "read failed: " + paths.blob.string());

  std::vector<EmbeddingRecord> records(n);
  std::vector<bool> row_seen(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t line_no = i + 2;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(lines[i + 1]);
    } catch (const nlohmann::json::parse_error&) {
      throw Error(ErrorCode::kMalformedMetadata, meta_error(paths.meta, line_no, "invalid JSON"));
    }
    if (!obj.is_object()) {
      throw Error(ErrorCode::kMalformedMetadata,
                  meta_error(paths.meta, line_no, "record line is not an object"));
    }
    const auto row = required<std::int64_t>(obj, "row", paths.meta, line_no);
    if (row < 0 || static_cast<std::size_t>(row) >= n) {
      throw Error(ErrorCode::kRowOutOfRange,
                  meta_error(paths.meta, line_no,
                             "row out of range (" + std::to_string(row) + " >= count " +
                                 std::to_string(n) + ")"));
    }
    if (row_seen[static_cast<std::size_t>(row)]) {
      throw Error(ErrorCode::kMalformedMetadata,
                  meta_error(paths.meta, line_no, "row " + std::to_string(row) + " referenced twice"));
    }
    row_seen[static_cast<std::size_t>(row)] = true;

    auto& rec = records[i];
    const auto id = required<std::int64_t>(obj, "record_id", paths.meta, line_no);
    if (id < 0) {
      throw Error(ErrorCode::kMalformedMetadata,
                  meta_error(paths.meta, line_no, "record_id must be non-negative"));
    }
    rec.record_id = static_cast<std::uint64_t>(id);
    rec.fish_id = required<std::string>(obj, "fish_id", paths.meta, line_no);
    rec.species = required<std::string>(obj, "species", paths.meta, line_no);
    const auto arrangement = parse_arrangement(required<std::string>(obj, "arrangement", paths.meta, line_no));
    const auto viewpoint = parse_viewpoint(required<std::string>(obj, "viewpoint", paths.meta, line_no));
    const auto split = parse_split(required<std::string>(obj, "split", paths.meta, line_no));
    if (!arrangement || !viewpoint || !split) {
      throw Error(ErrorCode::kMalformedMetadata,
                  meta_error(paths.meta, line_no, "unknown arrangement/viewpoint/split value"));
    }
    rec.condition = {*arrangement, *viewpoint};
    rec.split = *split;

    rec.vector.resize(d);
    const std::size_t base = static_cast<std::size_t>(row) * d;
    for (std::size_t k = 0; k < d; ++k) {
      const float v = std::bit_cast<float>(to_little_endian(words[base + k]));
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFiniteValue,
                    paths.blob.string() + ": NaN/Inf in blob at row " + std::to_string(row) +
                        ", column " + std::to_string(k));
      }
      rec.vector[k] = v;
    }
  }

  EmbeddingSet set(d);
  for (auto& rec : records) {
    try {
      set.add(std::move(rec));
    } catch (const Error& e) {
      throw Error(e.code(), paths.meta.string() + ": " + e.what());
    }
  }
  return set;
}

}  // namespace reidkit
