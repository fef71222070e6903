#include "reidkit/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "reidkit/error.hpp"

namespace reidkit {

std::vector<std::size_t> shuffle(Rng& rng, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kEmptyDomain, "empty domain");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  shuffle_in_place(rng, perm);
  return perm;
}

double normal(Rng& rng) {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace reidkit
