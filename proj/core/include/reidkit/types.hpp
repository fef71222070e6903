#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace reidkit {

enum class Arrangement { kSeparated, kTouched };
enum class Viewpoint { kInitial, kFlipped };
enum class Split { kTrain, kVal, kTest };

/// Capture condition: arrangement (occlusion) crossed with viewpoint (side).
struct Condition {
  Arrangement arrangement = Arrangement::kSeparated;
  Viewpoint viewpoint = Viewpoint::kInitial;

  friend bool operator==(const Condition&, const Condition&) = default;
};

/// The four conditions in canonical order: SI, SF, TI, TF.
const std::array<Condition, 4>& all_conditions();

/// Position of `c` in all_conditions().
std::size_t condition_index(Condition c);

std::string_view to_string(Arrangement a);
std::string_view to_string(Viewpoint v);
std::string_view to_string(Split s);
/// "Separated-Initial" etc.
std::string condition_label(Condition c);

std::optional<Arrangement> parse_arrangement(std::string_view s);
std::optional<Viewpoint> parse_viewpoint(std::string_view s);
std::optional<Split> parse_split(std::string_view s);
/// Accepts "SI", "separated-initial", "Separated-Initial" and friends.
std::optional<Condition> parse_condition(std::string_view s);

struct EmbeddingRecord {
  std::uint64_t record_id = 0;
  std::string fish_id;
  std::string species;
  Condition condition;
  Split split = Split::kTrain;
  std::vector<float> vector;

  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

/// Dimension-homogeneous record collection. Record order is the canonical
/// index order used by samplers, miners and rankers.
class EmbeddingSet {
 public:
  explicit EmbeddingSet(std::size_t dim = 0) : dim_(dim) {}

  /// Validates dimension, finiteness and record_id uniqueness.
  EmbeddingSet(std::size_t dim, std::vector<EmbeddingRecord> records);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  const std::vector<EmbeddingRecord>& records() const noexcept { return records_; }
  const EmbeddingRecord& operator[](std::size_t i) const { return records_[i]; }

  void add(EmbeddingRecord record);

  /// Records whose split equals `split`, in original order.
  EmbeddingSet filter(Split split) const;

  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;

 private:
  std::size_t dim_;
  std::vector<EmbeddingRecord> records_;
  std::set<std::uint64_t> ids_;
};

/// Maps opaque string labels to dense integer codes in lexicographic order.
struct LabelCodes {
  std::vector<std::int32_t> codes;  // one per input label
  std::vector<std::string> names;   // code -> label, sorted
};

LabelCodes encode_labels(std::span<const std::string> labels);

std::vector<std::string> fish_ids(const EmbeddingSet& set);

}  // namespace reidkit
