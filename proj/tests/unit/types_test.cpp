#include <cmath>
#include <limits>

#include "reidkit/matrix.hpp"
#include "reidkit/types.hpp"
#include "test_util.hpp"

namespace reidkit {
namespace {

EmbeddingRecord rec(std::uint64_t id, std::string fish, std::vector<float> v) {
  return {id, std::move(fish), "sp", {}, Split::kTrain, std::move(v)};
}

TEST(Types, ConditionOrderAndLabels) {
  const auto& c = all_conditions();
  EXPECT_EQ(condition_label(c[0]), "Separated-Initial");
  EXPECT_EQ(condition_label(c[1]), "Separated-Flipped");
  EXPECT_EQ(condition_label(c[2]), "Touched-Initial");
  EXPECT_EQ(condition_label(c[3]), "Touched-Flipped");
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(condition_index(c[i]), i);
}

TEST(Types, ParseCondition) {
  EXPECT_EQ(parse_condition("TF"), (Condition{Arrangement::kTouched, Viewpoint::kFlipped}));
  EXPECT_EQ(parse_condition("separated-initial"), all_conditions()[0]);
  EXPECT_EQ(parse_condition("Touched-Initial"), all_conditions()[2]);
  EXPECT_FALSE(parse_condition("XY"));
  EXPECT_FALSE(parse_condition("sideways"));
}

TEST(Types, EncodeLabelsIsLexicographic) {
  const std::vector<std::string> labels = {"b", "a", "c", "a", "b"};
  const auto enc = encode_labels(labels);
  EXPECT_EQ(enc.names, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(enc.codes, (std::vector<std::int32_t>{1, 0, 2, 0, 1}));
}

TEST(Types, SetRejectsBadRecords) {
  EmbeddingSet set(2);
  set.add(rec(1, "a", {1, 2}));
  EXPECT_REIDKIT_ERROR(set.add(rec(1, "b", {1, 2})), ErrorCode::kDuplicateRecordId);
  EXPECT_REIDKIT_ERROR(set.add(rec(2, "b", {1})), ErrorCode::kDimensionMismatch);
  EXPECT_REIDKIT_ERROR(set.add(rec(3, "b", {1, std::numeric_limits<float>::quiet_NaN()})),
                       ErrorCode::kNonFiniteValue);
  EXPECT_REIDKIT_ERROR(set.add(rec(4, "b", {std::numeric_limits<float>::infinity(), 0})),
                       ErrorCode::kNonFiniteValue);
  EXPECT_EQ(set.size(), 1u);
}

TEST(Types, FilterKeepsOrder) {
  EmbeddingSet set(1);
  for (std::uint64_t i = 0; i < 6; ++i) {
    auto r = rec(i, "f", {float(i)});
    r.split = static_cast<Split>(i % 3);
    set.add(r);
  }
  const auto val = set.filter(Split::kVal);
  ASSERT_EQ(val.size(), 2u);
  EXPECT_EQ(val[0].record_id, 1u);
  EXPECT_EQ(val[1].record_id, 4u);
}

TEST(Types, MatrixHelpers) {
  EmbeddingSet set(2, {rec(0, "a", {1, 2}), rec(1, "b", {3, 4})});
  const Matrix m = to_matrix(set);
  EXPECT_EQ(m(1, 0), 3.0);
  const std::vector<std::size_t> rows = {1, 1, 0};
  const Matrix g = gather_rows(m, rows);
  EXPECT_EQ(g.rows(), 3u);
  EXPECT_EQ(g(0, 1), 4.0);
  EXPECT_EQ(g(2, 0), 1.0);
}

}  // namespace
}  // namespace reidkit
