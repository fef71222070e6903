#include "reidkit/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "reidkit/error.hpp"
#include "reidkit/matrix.hpp"

namespace reidkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kEmptyDomain: return "empty domain";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kMagicMismatch: return "magic mismatch";
    case ErrorCode::kVersionMismatch: return "version mismatch";
    case ErrorCode::kBlobLengthMismatch: return "blob length mismatch";
    case ErrorCode::kNonFiniteValue: return "non-finite value";
    case ErrorCode::kDuplicateRecordId: return "duplicate record_id";
    case ErrorCode::kRowOutOfRange: return "row out of range";
    case ErrorCode::kMalformedMetadata: return "malformed metadata";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kEmptyMask: return "empty mask";
    case ErrorCode::kDegenerateStd: return "degenerate std";
    case ErrorCode::kInsufficientIdentities: return "insufficient identities";
    case ErrorCode::kNoValidQueries: return "no valid queries";
    case ErrorCode::kEmptyGallery: return "empty gallery";
    case ErrorCode::kConfig: return "config error";
    case ErrorCode::kImageDecode: return "image decode error";
  }
  return "unknown error";
}

const std::array<Condition, 4>& all_conditions() {
  static const std::array<Condition, 4> kAll = {{
      {Arrangement::kSeparated, Viewpoint::kInitial},
      {Arrangement::kSeparated, Viewpoint::kFlipped},
      {Arrangement::kTouched, Viewpoint::kInitial},
      {Arrangement::kTouched, Viewpoint::kFlipped},
  }};
  return kAll;
}

std::size_t condition_index(Condition c) {
  return (c.arrangement == Arrangement::kTouched ? 2 : 0) +
         (c.viewpoint == Viewpoint::kFlipped ? 1 : 0);
}

std::string_view to_string(Arrangement a) {
  return a == Arrangement::kSeparated ? "separated" : "touched";
}

std::string_view to_string(Viewpoint v) {
  return v == Viewpoint::kInitial ? "initial" : "flipped";
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

std::string condition_label(Condition c) {
  std::string out = c.arrangement == Arrangement::kSeparated ? "Separated" : "Touched";
  out += c.viewpoint == Viewpoint::kInitial ? "-Initial" : "-Flipped";
  return out;
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

}  // namespace

std::optional<Arrangement> parse_arrangement(std::string_view s) {
  if (s == "separated") return Arrangement::kSeparated;
  if (s == "touched") return Arrangement::kTouched;
  return std::nullopt;
}

std::optional<Viewpoint> parse_viewpoint(std::string_view s) {
  if (s == "initial") return Viewpoint::kInitial;
  if (s == "flipped") return Viewpoint::kFlipped;
  return std::nullopt;
}

std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  return std::nullopt;
}

std::optional<Condition> parse_condition(std::string_view s) {
  const std::string key = lower(s);
  if (key.size() == 2) {
    const auto a = key[0] == 's'   ? std::optional(Arrangement::kSeparated)
                   : key[0] == 't' ? std::optional(Arrangement::kTouched)
                                   : std::nullopt;
    const auto v = key[1] == 'i'   ? std::optional(Viewpoint::kInitial)
                   : key[1] == 'f' ? std::optional(Viewpoint::kFlipped)
                                   : std::nullopt;
    if (a && v) return Condition{*a, *v};
    return std::nullopt;
  }
  const auto dash = key.find_first_of("-_ ");
  if (dash == std::string::npos) return std::nullopt;
  const auto a = parse_arrangement(std::string_view(key).substr(0, dash));
  const auto v = parse_viewpoint(std::string_view(key).substr(dash + 1));
  if (a && v) return Condition{*a, *v};
  return std::nullopt;
}

EmbeddingSet::EmbeddingSet(std::size_t dim, std::vector<EmbeddingRecord> records)
    : dim_(dim) {
  records_.reserve(records.size());
  for (auto& r : records) add(std::move(r));
}

void EmbeddingSet::add(EmbeddingRecord record) {
  if (record.vector.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "record " + std::to_string(record.record_id) + " has length " +
                    std::to_string(record.vector.size()) + ", expected " +
                    std::to_string(dim_));
  }
  for (float v : record.vector) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "record " + std::to_string(record.record_id) + " contains NaN/Inf");
    }
  }
  if (!ids_.insert(record.record_id).second) {
    throw Error(ErrorCode::kDuplicateRecordId,
                "duplicate record_id " + std::to_string(record.record_id));
  }
  records_.push_back(std::move(record));
}

EmbeddingSet EmbeddingSet::filter(Split split) const {
  EmbeddingSet out(dim_);
  for (const auto& r : records_) {
    if (r.split == split) out.add(r);
  }
  return out;
}

LabelCodes encode_labels(std::span<const std::string> labels) {
  LabelCodes out;
  out.names.assign(labels.begin(), labels.end());
  std::sort(out.names.begin(), out.names.end());
  out.names.erase(std::unique(out.names.begin(), out.names.end()), out.names.end());
  std::map<std::string_view, std::int32_t> index;
  for (std::size_t i = 0; i < out.names.size(); ++i) {
    index.emplace(out.names[i], static_cast<std::int32_t>(i));
  }
  out.codes.reserve(labels.size());
  for (const auto& l : labels) out.codes.push_back(index.at(l));
  return out;
}

std::vector<std::string> fish_ids(const EmbeddingSet& set) {
  std::vector<std::string> out;
  out.reserve(set.size());
  for (const auto& r : set.records()) out.push_back(r.fish_id);
  return out;
}

Matrix to_matrix(const EmbeddingSet& set) {
  Matrix m(set.size(), set.dim());
  for (std::size_t i = 0; i < set.size(); ++i) {
    std::copy(set[i].vector.begin(), set[i].vector.end(), m.row(i).begin());
  }
  return m;
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace reidkit
