#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "reidkit/matrix.hpp"
#include "reidkit/mining.hpp"
#include "reidkit/rng.hpp"
#include "reidkit/types.hpp"

namespace reidkit {

/// Learnable projection y = x W + b followed by L2 normalization.
struct LinearHead {
  Matrix weight;             // d_in x d_out
  std::vector<double> bias;  // d_out

  std::size_t d_in() const noexcept { return weight.rows(); }
  std::size_t d_out() const noexcept { return weight.cols(); }

  friend bool operator==(const LinearHead&, const LinearHead&) = default;
};

/// W ~ U(-1/sqrt(d_in), 1/sqrt(d_in)) drawn row-major from `rng`, b = 0.
LinearHead init_head(std::size_t d_in, std::size_t d_out, Rng& rng);

struct TrainConfig {
  double margin = 0.5;
  double learning_rate = 1e-5;
  double weight_decay = 1e-4;
  std::size_t epochs = 300;
  double plateau_factor = 0.2;
  std::size_t plateau_patience = 10;
  PKConfig pk{4, 4};
  std::uint64_t seed = 0;
  std::size_t embed_dim = 512;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  MiningStrategy mining = MiningStrategy::kHard;

  void validate() const;
};

/// Added to TrainConfig::seed to seed the fixed validation batches.
inline constexpr std::uint64_t kValidationSeedOffset = 0x76616C;

inline constexpr double kNormEpsilon = 1e-12;
inline constexpr double kPlateauThreshold = 1e-8;

struct OptimizerState {
  Matrix m_weight, v_weight;
  std::vector<double> m_bias, v_bias;
  std::uint64_t step = 0;
  double learning_rate = 0.0;
  double best_val_loss = 0.0;  // +inf until the first plateau_update
  std::size_t epochs_since_improvement = 0;
  std::size_t lr_reductions = 0;
};

OptimizerState make_optimizer_state(const LinearHead& head, const TrainConfig& cfg);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double learning_rate = 0.0;  // rate used during the epoch
  std::size_t active_triplets = 0;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

using TrainHistory = std::vector<EpochStats>;

/// Projects the rows of `x` and L2-normalizes each output as y / (|y| + 1e-12).
Matrix head_forward(const LinearHead& head, const Matrix& x);

struct HeadGradients {
  Matrix weight;
  std::vector<double> bias;
};

struct LossAndGradients {
  double loss = 0.0;
  HeadGradients grad;
  std::size_t active = 0;   // triplets with a positive hinge
  std::size_t skipped = 0;  // active triplets dropped at a zero distance
};

/// Mean triplet margin loss on normalized head outputs and its exact gradient
/// with respect to W and b. Triplets whose hinge is zero contribute nothing;
/// active triplets with d(a,p) = 0 or d(a,n) = 0 are counted in `skipped` and
/// left out of the gradient (their loss still counts).
LossAndGradients loss_backward(const LinearHead& head, const Matrix& x,
                               std::span<const Triplet> triplets, double margin);

/// Decoupled weight decay Adam. The bias is exempt from decay.
///   m = b1 m + (1-b1) g;  v = b2 v + (1-b2) g^2
///   theta = theta (1 - lr wd) - lr mhat / (sqrt(vhat) + eps)
void adamw_step(LinearHead& head, const HeadGradients& grad, OptimizerState& state,
                const TrainConfig& cfg);

/// Reduce-on-plateau. Returns true when the learning rate was reduced.
bool plateau_update(OptimizerState& state, double val_loss, const TrainConfig& cfg);

/// Mean batch loss over `batches` with mining but no parameter updates. Each
/// batch contributes the hinge summed over its mined triplets divided by the
/// number of candidate triplets in the batch, so the value keeps falling as
/// violations disappear (a mean over hard triplets alone never drops below
/// the margin).
double batch_loss(const LinearHead& head, const Matrix& x, std::span<const std::int32_t> labels,
                  std::span<const Batch> batches, const TrainConfig& cfg);

/// Validation loss of `head` on `val` over the fixed seeded validation batches.
double validation_loss(const LinearHead& head, const EmbeddingSet& val, const TrainConfig& cfg);

struct TrainResult {
  LinearHead head;
  TrainHistory history;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Trains a head on frozen features. Deterministic in cfg.seed: the run stream
/// initializes the head, then each epoch draws one child stream for its PK
/// batches. Validation batches are fixed for the whole run.
TrainResult train(const EmbeddingSet& train_set, const EmbeddingSet& val_set,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// `<name>.meta.json` ({"magic":"REIDHEAD","version":1,"d_in":..,"d_out":..})
/// and `<name>.f32` (W row-major, then b; float32 little-endian).
void write_head(const LinearHead& head, const std::string& name);
LinearHead read_head(const std::string& name);

/// Head outputs as a new set with the same metadata.
EmbeddingSet project(const LinearHead& head, const EmbeddingSet& set);

}  // namespace reidkit
