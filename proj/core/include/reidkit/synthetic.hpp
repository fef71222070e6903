#pragma once

#include <cstddef>
#include <cstdint>

#include "reidkit/types.hpp"

namespace reidkit {

/// Gaussian identity clusters in a small latent space, pushed through a fixed
/// random linear map into feature space.
///
/// Latent vectors have `signal_dim` identity coordinates and `nuisance_dim`
/// coordinates of pure per-instance noise. Identity centres are species
/// centres plus per-identity offsets, so rank-1 confusions tend to stay
/// inside a species. With conditions enabled, instance i of an identity gets
/// condition all_conditions()[i * 4 / instances]; flipped instances are
/// shifted by a per-identity "other side" vector and touched instances get
/// extra signal noise.
struct SyntheticConfig {
  std::size_t identities = 50;
  std::size_t instances = 20;
  std::size_t species = 6;
  std::size_t signal_dim = 16;
  std::size_t nuisance_dim = 48;
  std::size_t feature_dim = 512;
  double species_spread = 1.0;
  double identity_spread = 1.0;
  double instance_sigma = 0.25;   // within-identity noise, signal coordinates
  double nuisance_sigma = 1.0;    // noise on nuisance coordinates
  bool conditions = false;
  double viewpoint_shift = 0.0;   // std of the per-identity flipped-side offset
  double occlusion_sigma = 0.0;   // extra signal noise on touched instances
  std::size_t train_identities = 30;
  std::size_t val_identities = 10;  // the rest are test
  std::uint64_t seed = 1;
};

/// Identities are named fish_000, fish_001, ...; species species_<id % species>;
/// record ids are sequential. Splits follow identity order: train, val, test.
EmbeddingSet make_synthetic(const SyntheticConfig& cfg);

}  // namespace reidkit
