#include "reidkit/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "reidkit/error.hpp"
#include "reidkit/matrix.hpp"
#include "reidkit/rng.hpp"

namespace reidkit {

namespace {

std::vector<double> gaussian(Rng& rng, std::size_t n, double sigma) {
  std::vector<double> v(n);
  for (double& x : v) x = sigma * normal(rng);
  return v;
}

}  // namespace

EmbeddingSet make_synthetic(const SyntheticConfig& cfg) {
  if (cfg.identities == 0 || cfg.instances == 0 || cfg.species == 0 || cfg.signal_dim == 0 ||
      cfg.feature_dim == 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic config sizes must be positive");
  }
  Rng rng(cfg.seed);
  const std::size_t latent = cfg.signal_dim + cfg.nuisance_dim;

  Matrix mixing(latent, cfg.feature_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(latent));
  for (double& m : mixing.data()) m = scale * normal(rng);

  std::vector<std::vector<double>> species_centres;
  for (std::size_t s = 0; s < cfg.species; ++s) {
    species_centres.push_back(gaussian(rng, cfg.signal_dim, cfg.species_spread));
  }

  EmbeddingSet set(cfg.feature_dim);
  std::uint64_t next_id = 0;
  std::vector<double> z(latent);
  for (std::size_t id = 0; id < cfg.identities; ++id) {
    const std::size_t species = id % cfg.species;
    auto centre = gaussian(rng, cfg.signal_dim, cfg.identity_spread);
    for (std::size_t j = 0; j < cfg.signal_dim; ++j) centre[j] += species_centres[species][j];
    const auto flip_offset = gaussian(rng, cfg.signal_dim, cfg.viewpoint_shift);

    char name[32];
    std::snprintf(name, sizeof name, "fish_%03zu", id);
    const Split split = id < cfg.train_identities                        ? Split::kTrain
                        : id < cfg.train_identities + cfg.val_identities ? Split::kVal
                                                                         : Split::kTest;
    for (std::size_t i = 0; i < cfg.instances; ++i) {
      Condition cond;
      if (cfg.conditions) cond = all_conditions()[i * 4 / cfg.instances];
      for (std::size_t j = 0; j < cfg.signal_dim; ++j) {
        double v = centre[j] + cfg.instance_sigma * normal(rng);
        if (cond.viewpoint == Viewpoint::kFlipped) v += flip_offset[j];
        if (cond.arrangement == Arrangement::kTouched) v += cfg.occlusion_sigma * normal(rng);
        z[j] = v;
      }
      for (std::size_t j = cfg.signal_dim; j < latent; ++j) z[j] = cfg.nuisance_sigma * normal(rng);

      EmbeddingRecord rec;
      rec.record_id = next_id++;
      rec.fish_id = name;
      rec.species = "species_" + std::to_string(species);
      rec.condition = cond;
      rec.split = split;
      rec.vector.assign(cfg.feature_dim, 0.0f);
      for (std::size_t f = 0; f < cfg.feature_dim; ++f) {
        double acc = 0.0;
        for (std::size_t j = 0; j < latent; ++j) acc += z[j] * mixing(j, f);
        rec.vector[f] = static_cast<float>(acc);
      }
      set.add(std::move(rec));
    }
  }
  return set;
}

}  // namespace reidkit
