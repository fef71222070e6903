#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "reidkit/matrix.hpp"
#include "reidkit/rng.hpp"

namespace reidkit {

/// Symmetric n x n matrix of Euclidean distances with a zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return d_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {d_.data() + i * n_, n_}; }

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

/// d[i][j] = sqrt(sum_k (X[i][k] - X[j][k])^2), accumulated in double over
/// explicit differences. Rows are processed in cache-sized blocks; only the
/// upper triangle is computed and mirrored.
DistanceMatrix pairwise_euclidean(const Matrix& x);

/// Euclidean distance between two rows.
double euclidean(std::span<const double> a, std::span<const double> b);

struct PKConfig {
  std::size_t p = 4;  // identities per batch
  std::size_t k = 4;  // instances per identity

  std::size_t batch_size() const noexcept { return p * k; }
  /// Throws unless p >= 2 and k >= 2.
  void validate() const;
};

/// One identity-balanced batch: P*K indices, identity-major (K consecutive
/// entries per identity).
using Batch = std::vector<std::size_t>;

/// Draws one PK batch. `labels` holds one dense identity code per record.
///
/// Identities are the distinct codes in ascending order; P of them are taken
/// from the front of a shuffle of that list. For each, K instances (record
/// indices ascending) are taken from the front of a shuffle of its instance
/// list, or, when it has fewer than K instances, K draws `next() % count` with
/// replacement. Throws kInsufficientIdentities when fewer than P identities
/// exist.
Batch pk_sample(std::span<const std::int32_t> labels, const PKConfig& cfg, Rng& rng);

/// One epoch of PK batches: every identity is visited once in shuffled order,
/// grouped P at a time; a trailing group with fewer than P identities is
/// dropped. Instance selection follows pk_sample().
std::vector<Batch> pk_epoch(std::span<const std::int32_t> labels, const PKConfig& cfg,
                            Rng& rng);

struct Triplet {
  std::uint32_t anchor = 0;
  std::uint32_t positive = 0;
  std::uint32_t negative = 0;

  friend auto operator<=>(const Triplet&, const Triplet&) = default;
};

enum class MiningStrategy { kHard, kSemiHard };

/// Every (a, p, n) with label(a) == label(p) != label(n), a != p and
/// d[a][n] < d[a][p], ordered by (a, p, n). `margin` is not used by the
/// predicate.
std::vector<Triplet> mine_hard(const DistanceMatrix& d, std::span<const std::int32_t> labels,
                               double margin);

/// Every (a, p, n) with d[a][p] < d[a][n] < d[a][p] + margin, ordered by (a, p, n).
std::vector<Triplet> mine_semihard(const DistanceMatrix& d,
                                   std::span<const std::int32_t> labels, double margin);

std::vector<Triplet> mine(MiningStrategy strategy, const DistanceMatrix& d,
                          std::span<const std::int32_t> labels, double margin);

/// Number of (a, p, n) with label(a) == label(p) != label(n) and a != p.
std::size_t count_candidate_triplets(std::span<const std::int32_t> labels);

/// Mean of max(0, d(a,p) - d(a,n) + margin) over `triplets`, Euclidean on the
/// rows of `x`. Zero for an empty list.
double triplet_loss(const Matrix& x, std::span<const Triplet> triplets, double margin);

}  // namespace reidkit
