#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "reidkit/rng.hpp"
#include "test_util.hpp"

namespace reidkit {
namespace {

TEST(Rng, FirstDrawFromSeedZero) {
  Rng rng(0);
  EXPECT_EQ(rng.next(), 0xE220A8397B1DCDAFULL);
}

TEST(Rng, MatchesGoldenStreams) {
  std::ifstream in(test::data_dir() / "splitmix64_golden.txt");
  ASSERT_TRUE(in);
  int streams = 0;
  for (std::string line; std::getline(in, line);) {
    std::istringstream row(line);
    std::uint64_t seed = 0;
    row >> seed;
    Rng rng(seed);
    std::string hex;
    while (row >> hex) EXPECT_EQ(rng.next(), std::stoull(hex, nullptr, 16)) << "seed " << seed;
    ++streams;
  }
  EXPECT_EQ(streams, 3);
}

TEST(Rng, ShuffleMatchesGolden) {
  std::ifstream in(test::data_dir() / "shuffle_golden.txt");
  ASSERT_TRUE(in);
  for (std::string line; std::getline(in, line);) {
    std::istringstream row(line);
    std::uint64_t seed = 0;
    std::size_t n = 0;
    row >> seed >> n;
    std::vector<std::size_t> expected(n);
    for (auto& v : expected) row >> v;
    Rng rng(seed);
    EXPECT_EQ(shuffle(rng, n), expected) << "seed " << seed;
  }
}

TEST(Rng, SameSeedSameStream) {
  Rng a(1234), b(1234);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next(), b.next());
}

TEST(Rng, ShuffleIsPermutation) {
  Rng rng(99);
  for (std::size_t n : {1u, 2u, 3u, 17u, 256u, 10000u}) {
    auto p = shuffle(rng, n);
    std::sort(p.begin(), p.end());
    std::vector<std::size_t> id(n);
    std::iota(id.begin(), id.end(), 0);
    EXPECT_EQ(p, id);
  }
}

TEST(Rng, ShuffleInPlaceUsesSameDraws) {
  Rng a(5), b(5);
  const auto perm = shuffle(a, 20);
  std::vector<std::size_t> items(20);
  std::iota(items.begin(), items.end(), 0);
  shuffle_in_place(b, items);
  EXPECT_EQ(perm, items);
  EXPECT_EQ(a.state(), b.state());
}

TEST(Rng, ShuffleEmptyThrows) {
  Rng rng(0);
  EXPECT_REIDKIT_ERROR(shuffle(rng, 0), ErrorCode::kEmptyDomain);
}

TEST(Rng, SplitIsSeededFromOneDraw) {
  Rng parent(7), copy(7);
  Rng child = parent.split();
  Rng expected(copy.next());
  EXPECT_EQ(child.next(), expected.next());
  EXPECT_EQ(parent.state(), copy.state());
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(3);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 0.01);
}

TEST(Rng, NormalMoments) {
  Rng rng(11);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = normal(rng);
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

}  // namespace
}  // namespace reidkit
