#include "reidkit/mining.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "reidkit/error.hpp"

namespace reidkit {

namespace {

constexpr std::size_t kBlock = 64;

// Instance lists per identity code, record indices ascending.
std::vector<std::vector<std::size_t>> group_by_label(std::span<const std::int32_t> labels) {
  std::int32_t max_code = -1;
  for (auto l : labels) {
    if (l < 0) throw Error(ErrorCode::kInvalidArgument, "label codes must be non-negative");
    max_code = std::max(max_code, l);
  }
  std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(max_code + 1));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    groups[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  std::erase_if(groups, [](const auto& g) { return g.empty(); });
  return groups;
}

void append_instances(const std::vector<std::size_t>& instances, std::size_t k, Rng& rng,
                      Batch& out) {
  if (instances.size() >= k) {
    auto order = instances;
    shuffle_in_place(rng, order);
    out.insert(out.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  } else {
    for (std::size_t i = 0; i < k; ++i) out.push_back(instances[rng.below(instances.size())]);
  }
}

template <typename Keep>
std::vector<Triplet> mine_if(const DistanceMatrix& d, std::span<const std::int32_t> labels,
                             Keep keep) {
  const std::size_t n = d.size();
  if (labels.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "labels and distance matrix differ in size");
  }
  std::vector<Triplet> out;
  std::vector<std::uint32_t> positives, negatives;
  for (std::size_t a = 0; a < n; ++a) {
    positives.clear();
    negatives.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (labels[j] == labels[a]) {
        if (j != a) positives.push_back(static_cast<std::uint32_t>(j));
      } else {
        negatives.push_back(static_cast<std::uint32_t>(j));
      }
    }
    const auto row = d.row(a);
    for (auto p : positives) {
      const double ap = row[p];
      for (auto ng : negatives) {
        if (keep(ap, row[ng])) out.push_back({static_cast<std::uint32_t>(a), p, ng});
      }
    }
  }
  return out;
}

}  // namespace

double euclidean(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    acc += diff * diff;
  }
  return std::sqrt(std::max(acc, 0.0));
}

DistanceMatrix pairwise_euclidean(const Matrix& x) {
  const std::size_t n = x.rows();
  DistanceMatrix d(n);
  for (std::size_t ib = 0; ib < n; ib += kBlock) {
    const std::size_t ie = std::min(ib + kBlock, n);
    for (std::size_t jb = ib; jb < n; jb += kBlock) {
      const std::size_t je = std::min(jb + kBlock, n);
      for (std::size_t i = ib; i < ie; ++i) {
        const auto xi = x.row(i);
        for (std::size_t j = std::max(jb, i + 1); j < je; ++j) {
          const double v = euclidean(xi, x.row(j));
          d(i, j) = v;
          d(j, i) = v;
        }
      }
    }
  }
  return d;
}

void PKConfig::validate() const {
  if (p < 2 || k < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "PK sampling needs P >= 2 and K >= 2 (got P=" + std::to_string(p) +
                    ", K=" + std::to_string(k) + ")");
  }
}

Batch pk_sample(std::span<const std::int32_t> labels, const PKConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto groups = group_by_label(labels);
  if (groups.size() < cfg.p) {
    throw Error(ErrorCode::kInsufficientIdentities,
                "insufficient identities: " + std::to_string(groups.size()) + " < P=" +
                    std::to_string(cfg.p));
  }
  const auto order = shuffle(rng, groups.size());
  Batch batch;
  batch.reserve(cfg.batch_size());
  for (std::size_t i = 0; i < cfg.p; ++i) append_instances(groups[order[i]], cfg.k, rng, batch);
  return batch;
}

std::vector<Batch> pk_epoch(std::span<const std::int32_t> labels, const PKConfig& cfg,
                            Rng& rng) {
  cfg.validate();
  const auto groups = group_by_label(labels);
  if (groups.size() < cfg.p) {
    throw Error(ErrorCode::kInsufficientIdentities,
                "insufficient identities: " + std::to_string(groups.size()) + " < P=" +
                    std::to_string(cfg.p));
  }
  const auto order = shuffle(rng, groups.size());
  std::vector<Batch> batches;
  for (std::size_t start = 0; start + cfg.p <= order.size(); start += cfg.p) {
    Batch batch;
    batch.reserve(cfg.batch_size());
    for (std::size_t i = start; i < start + cfg.p; ++i) {
      append_instances(groups[order[i]], cfg.k, rng, batch);
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

std::vector<Triplet> mine_hard(const DistanceMatrix& d, std::span<const std::int32_t> labels,
                               double /*margin*/) {
  return mine_if(d, labels, [](double ap, double an) { return an < ap; });
}

std::vector<Triplet> mine_semihard(const DistanceMatrix& d,
                                   std::span<const std::int32_t> labels, double margin) {
  return mine_if(d, labels,
                 [margin](double ap, double an) { return ap < an && an < ap + margin; });
}

std::vector<Triplet> mine(MiningStrategy strategy, const DistanceMatrix& d,
                          std::span<const std::int32_t> labels, double margin) {
  return strategy == MiningStrategy::kHard ? mine_hard(d, labels, margin)
                                           : mine_semihard(d, labels, margin);
}

std::size_t count_candidate_triplets(std::span<const std::int32_t> labels) {
  std::size_t total = 0;
  for (std::size_t a = 0; a < labels.size(); ++a) {
    const auto same = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), labels[a]));
    total += (same - 1) * (labels.size() - same);
  }
  return total;
}

double triplet_loss(const Matrix& x, std::span<const Triplet> triplets, double margin) {
  if (triplets.empty()) return 0.0;
  double total = 0.0;
  for (const auto& t : triplets) {
    const double ap = euclidean(x.row(t.anchor), x.row(t.positive));
    const double an = euclidean(x.row(t.anchor), x.row(t.negative));
    total += std::max(0.0, ap - an + margin);
  }
  return total / static_cast<double>(triplets.size());
}

}  // namespace reidkit
