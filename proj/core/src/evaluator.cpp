#include "reidkit/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <unordered_set>

#include "reidkit/error.hpp"
#include "reidkit/mining.hpp"
#include "reidkit/rng.hpp"

namespace reidkit {

namespace {

// Instances per fish id (record indices sorted by record_id), ids in
// lexicographic order.
std::map<std::string, std::vector<std::size_t>> instances_by_id(
    const EmbeddingSet& set, std::span<const std::size_t> subset) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (auto i : subset) groups[set[i].fish_id].push_back(i);
  for (auto& [id, idx] : groups) {
    std::sort(idx.begin(), idx.end(), [&set](std::size_t a, std::size_t b) {
      return set[a].record_id < set[b].record_id;
    });
  }
  return groups;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

Matrix normalized(const Matrix& features, std::size_t& zero_rows) {
  Matrix out = features;
  zero_rows = l2_normalize_rows(out);
  return out;
}

void check_rows(const Matrix& features, const EmbeddingSet& meta) {
  if (features.rows() != meta.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "feature rows do not match metadata records");
  }
}

RetrievalBatch retrieve_normalized(const Matrix& normed, const EmbeddingSet& meta,
                                   std::span<const std::size_t> queries,
                                   std::span<const std::size_t> gallery) {
  RetrievalBatch batch;
  std::vector<std::size_t> own;
  std::vector<std::uint64_t> ids;
  for (auto q : queries) {
    own.clear();
    for (auto g : gallery) {
      if (g != q) own.push_back(g);
    }
    if (own.empty()) {
      throw Error(ErrorCode::kEmptyGallery, "empty gallery for query record " +
                                                std::to_string(meta[q].record_id));
    }
    const auto& fish = meta[q].fish_id;
    const auto relevant = static_cast<std::size_t>(std::count_if(
        own.begin(), own.end(), [&](std::size_t g) { return meta[g].fish_id == fish; }));
    if (relevant == 0) {
      ++batch.excluded_queries;
      continue;
    }
    ids.clear();
    for (auto g : own) ids.push_back(meta[g].record_id);
    const Matrix gal = gather_rows(normed, own);
    const auto ranked = rank(normed.row(q), gal, ids);

    RankedRetrieval r;
    r.query_index = q;
    r.query_record_id = meta[q].record_id;
    r.query_fish_id = fish;
    r.query_species = meta[q].species;
    r.num_relevant = relevant;
    r.ranked_record_ids.reserve(ranked.size());
    r.distances.reserve(ranked.size());
    r.relevance.reserve(ranked.size());
    for (const auto& e : ranked) {
      const auto& rec = meta[own[e.index]];
      r.ranked_record_ids.push_back(rec.record_id);
      r.distances.push_back(e.distance);
      r.relevance.push_back(rec.fish_id == fish ? 1 : 0);
    }
    const auto& top = meta[own[ranked.front().index]];
    r.rank1_hit = top.fish_id == fish;
    r.rank1_record_id = top.record_id;
    r.rank1_fish_id = top.fish_id;
    r.rank1_species = top.species;
    batch.retrievals.push_back(std::move(r));
  }
  return batch;
}

double quantile(std::vector<double> sorted, double q) {
  // Linear interpolation between order statistics.
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

bool l2_normalize(std::span<double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  const double len = std::sqrt(acc);
  const double denom = len + 1e-12;
  for (double& x : v) x /= denom;
  return len == 0.0;
}

std::size_t l2_normalize_rows(Matrix& m) {
  std::size_t zero = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) zero += l2_normalize(m.row(r)) ? 1 : 0;
  return zero;
}

QueryGallerySplit build_query_gallery(const EmbeddingSet& set, std::uint64_t seed) {
  if (set.empty()) throw Error(ErrorCode::kNoValidQueries, "no valid queries: empty set");
  const auto everything = all_indices(set.size());
  const auto groups = instances_by_id(set, everything);
  Rng rng(seed);
  QueryGallerySplit split;
  split.seed = seed;
  std::vector<bool> is_query(set.size(), false);
  for (const auto& [id, idx] : groups) {
    if (idx.size() < 2) continue;
    const auto pick = idx[rng.below(idx.size())];
    split.queries.push_back(pick);
    is_query[pick] = true;
  }
  if (split.queries.empty()) {
    throw Error(ErrorCode::kNoValidQueries,
                "no valid queries: no fish id has at least two instances");
  }
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (!is_query[i]) split.gallery.push_back(i);
  }
  return split;
}

std::vector<RankEntry> rank(std::span<const double> query, const Matrix& gallery,
                            std::span<const std::uint64_t> gallery_record_ids) {
  if (gallery.rows() == 0) throw Error(ErrorCode::kEmptyGallery, "empty gallery");
  if (gallery_record_ids.size() != gallery.rows() || query.size() != gallery.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "rank: inconsistent gallery shapes");
  }
  std::vector<RankEntry> out(gallery.rows());
  for (std::size_t i = 0; i < gallery.rows(); ++i) {
    out[i] = {i, euclidean(query, gallery.row(i))};
  }
  std::sort(out.begin(), out.end(), [&](const RankEntry& a, const RankEntry& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return gallery_record_ids[a.index] < gallery_record_ids[b.index];
  });
  return out;
}

double precision_at(std::span<const std::uint8_t> relevance, std::size_t i) {
  if (i < 1 || i > relevance.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "precision_at: rank " + std::to_string(i) + " outside 1.." +
                    std::to_string(relevance.size()));
  }
  const auto hits = std::count_if(relevance.begin(), relevance.begin() + static_cast<std::ptrdiff_t>(i),
                                  [](std::uint8_t r) { return r != 0; });
  return static_cast<double>(hits) / static_cast<double>(i);
}

double average_precision(std::span<const std::uint8_t> relevance, std::size_t num_relevant) {
  if (num_relevant == 0) {
    throw Error(ErrorCode::kInvalidArgument, "average_precision: |R| must be >= 1");
  }
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < relevance.size(); ++i) {
    if (relevance[i] == 0) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return sum / static_cast<double>(num_relevant);
}

RetrievalBatch retrieve(const Matrix& features, const EmbeddingSet& meta,
                        std::span<const std::size_t> queries,
                        std::span<const std::size_t> gallery) {
  check_rows(features, meta);
  std::size_t zero = 0;
  const Matrix normed = normalized(features, zero);
  auto batch = retrieve_normalized(normed, meta, queries, gallery);
  batch.zero_norm_vectors = zero;
  return batch;
}

double average_precision_at_k(const RankedRetrieval& r, std::size_t k) {
  const std::size_t len = std::min(k, r.relevance.size());
  return average_precision(std::span(r.relevance).first(len), r.num_relevant);
}

double map_at_k(std::span<const RankedRetrieval> retrievals, std::size_t k) {
  if (retrievals.empty()) throw Error(ErrorCode::kEmptyDomain, "mAP over an empty query set");
  double sum = 0.0;
  for (const auto& r : retrievals) sum += average_precision_at_k(r, k);
  return 100.0 * sum / static_cast<double>(retrievals.size());
}

double r1(std::span<const RankedRetrieval> retrievals) {
  if (retrievals.empty()) throw Error(ErrorCode::kEmptyDomain, "R1 over an empty query set");
  const auto hits = std::count_if(retrievals.begin(), retrievals.end(),
                                  [](const RankedRetrieval& r) { return r.rank1_hit; });
  return 100.0 * static_cast<double>(hits) / static_cast<double>(retrievals.size());
}

ErrorAnalysis error_analysis(std::span<const RankedRetrieval> retrievals) {
  ErrorAnalysis out;
  for (const auto& r : retrievals) {
    if (r.rank1_hit) continue;
    Confusion c{r.query_record_id, r.query_fish_id, r.query_species,
                r.rank1_record_id, r.rank1_fish_id, r.rank1_species,
                r.rank1_species == r.query_species ? ErrorKind::kIntraSpecies
                                                   : ErrorKind::kInterSpecies};
    (c.kind == ErrorKind::kIntraSpecies ? out.intra : out.inter) += 1;
    out.confusions.push_back(std::move(c));
  }
  return out;
}

EvalReport summarize(const RetrievalBatch& batch, std::size_t k, std::string scenario) {
  if (batch.retrievals.empty()) {
    throw Error(ErrorCode::kNoValidQueries, "no valid queries for " + scenario);
  }
  std::size_t longest = 0;
  for (const auto& r : batch.retrievals) longest = std::max(longest, r.relevance.size());
  EvalReport report;
  report.scenario = std::move(scenario);
  report.k = std::min(k, longest);
  report.num_queries = batch.retrievals.size();
  report.gallery_size = longest;
  report.r1 = r1(batch.retrievals);
  report.map_at_k = map_at_k(batch.retrievals, report.k);
  report.errors = error_analysis(batch.retrievals);
  report.excluded_queries = batch.excluded_queries;
  report.zero_norm_vectors = batch.zero_norm_vectors;
  for (const auto& r : batch.retrievals) {
    report.per_query.push_back({r.query_record_id, r.query_fish_id,
                                average_precision_at_k(r, report.k), r.rank1_hit,
                                r.rank1_record_id, r.rank1_fish_id, r.num_relevant});
  }
  return report;
}

EvalReport evaluate(const Matrix& features, const EmbeddingSet& meta, std::uint64_t seed,
                    std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  const auto split = build_query_gallery(meta, seed);
  auto report = summarize(retrieve(features, meta, split.queries, split.gallery), k, "single-pool");
  report.seed = seed;
  return report;
}

EvalReport evaluate(const EmbeddingSet& set, std::uint64_t seed, std::size_t k) {
  return evaluate(to_matrix(set), set, seed, k);
}

std::string_view to_string(ScenarioFamily f) {
  switch (f) {
    case ScenarioFamily::kIdentical: return "identical";
    case ScenarioFamily::kViewpoint: return "viewpoint";
    case ScenarioFamily::kOcclusion: return "occlusion";
    case ScenarioFamily::kCompound: return "compound";
  }
  return "identical";
}

ScenarioFamily Scenario::family() const {
  const bool same_arrangement = query.arrangement == gallery.arrangement;
  const bool same_viewpoint = query.viewpoint == gallery.viewpoint;
  if (same_arrangement && same_viewpoint) return ScenarioFamily::kIdentical;
  if (same_arrangement) return ScenarioFamily::kViewpoint;
  if (same_viewpoint) return ScenarioFamily::kOcclusion;
  return ScenarioFamily::kCompound;
}

std::string Scenario::label() const {
  return condition_label(query) + " vs " + condition_label(gallery);
}

std::vector<Scenario> study_scenarios() {
  constexpr Condition si{Arrangement::kSeparated, Viewpoint::kInitial};
  constexpr Condition sf{Arrangement::kSeparated, Viewpoint::kFlipped};
  constexpr Condition ti{Arrangement::kTouched, Viewpoint::kInitial};
  constexpr Condition tf{Arrangement::kTouched, Viewpoint::kFlipped};
  return {
      {si, si}, {sf, sf}, {ti, ti}, {tf, tf},  // identical
      {si, sf}, {ti, tf},                      // viewpoint
      {si, ti}, {sf, tf},                      // occlusion
      {si, tf}, {sf, ti},                      // compound
  };
}

std::vector<Scenario> grid_scenarios() {
  std::vector<Scenario> out;
  for (const auto& q : all_conditions()) {
    for (const auto& g : all_conditions()) out.push_back({q, g});
  }
  return out;
}

std::vector<CrossConditionCell> cross_condition_eval(const Matrix& features,
                                                     const EmbeddingSet& meta,
                                                     std::span<const Scenario> scenarios,
                                                     std::uint64_t seed, std::size_t k) {
  check_rows(features, meta);
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  std::size_t zero = 0;
  const Matrix normed = normalized(features, zero);

  std::vector<CrossConditionCell> cells;
  for (const auto& sc : scenarios) {
    std::vector<std::size_t> query_pool, gallery;
    for (std::size_t i = 0; i < meta.size(); ++i) {
      if (meta[i].condition == sc.query) query_pool.push_back(i);
      if (meta[i].condition == sc.gallery) gallery.push_back(i);
    }
    if (query_pool.empty()) {
      throw Error(ErrorCode::kEmptyGallery, "scenario " + sc.label() + ": empty query pool (no " +
                                                condition_label(sc.query) + " records)");
    }
    if (gallery.empty()) {
      throw Error(ErrorCode::kEmptyGallery, "scenario " + sc.label() + ": empty gallery (no " +
                                                condition_label(sc.gallery) + " records)");
    }
    Rng rng(seed);
    std::vector<std::size_t> queries;
    for (const auto& [id, idx] : instances_by_id(meta, query_pool)) {
      queries.push_back(idx[rng.below(idx.size())]);
    }
    auto batch = retrieve_normalized(normed, meta, queries, gallery);
    batch.zero_norm_vectors = zero;
    if (batch.retrievals.empty()) {
      throw Error(ErrorCode::kNoValidQueries,
                  "scenario " + sc.label() + ": no query has a match in the gallery");
    }
    auto report = summarize(batch, k, sc.label());
    report.seed = seed;
    cells.push_back({sc, std::move(report)});
  }
  return cells;
}

DistanceSamples distance_distributions(const Matrix& features, const EmbeddingSet& meta,
                                       std::uint64_t seed, std::size_t max_pairs) {
  check_rows(features, meta);
  const std::size_t n = meta.size();
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "distance distributions need >= 2 records");
  std::size_t zero = 0;
  const Matrix normed = normalized(features, zero);
  const auto codes = encode_labels(fish_ids(meta)).codes;
  Rng rng(seed);
  DistanceSamples out;

  std::vector<std::pair<std::size_t, std::size_t>> positives;
  for (const auto& [id, idx] : instances_by_id(meta, all_indices(n))) {
    auto sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t a = 0; a < sorted.size(); ++a) {
      for (std::size_t b = a + 1; b < sorted.size(); ++b) positives.emplace_back(sorted[a], sorted[b]);
    }
  }
  const std::size_t take_pos = std::min(max_pairs, positives.size());
  for (std::size_t i = 0; i < take_pos; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(positives.size() - i));
    std::swap(positives[i], positives[j]);
    out.positive.push_back(euclidean(normed.row(positives[i].first), normed.row(positives[i].second)));
  }

  const std::size_t total_neg = n * (n - 1) / 2 - positives.size();
  if (total_neg <= max_pairs) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (codes[i] != codes[j]) out.negative.push_back(euclidean(normed.row(i), normed.row(j)));
      }
    }
  } else {
    std::unordered_set<std::uint64_t> seen;
    while (out.negative.size() < max_pairs) {
      auto i = static_cast<std::size_t>(rng.below(n));
      auto j = static_cast<std::size_t>(rng.below(n));
      if (i == j || codes[i] == codes[j]) continue;
      if (i > j) std::swap(i, j);
      if (!seen.insert(static_cast<std::uint64_t>(i) * n + j).second) continue;
      out.negative.push_back(euclidean(normed.row(i), normed.row(j)));
    }
  }
  return out;
}

double silverman_bandwidth(std::span<const double> samples) {
  const std::size_t m = samples.size();
  if (m < 2) return 0.0;
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(m);
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  const double sigma = std::sqrt(ss / static_cast<double>(m - 1));
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
  const double spread = iqr > 0.0 ? std::min(sigma, iqr / 1.34) : sigma;
  return 0.9 * spread * std::pow(static_cast<double>(m), -0.2);
}

std::vector<double> gaussian_kde(std::span<const double> samples, double bandwidth,
                                 std::span<const double> grid) {
  std::vector<double> out(grid.size(), 0.0);
  if (samples.empty() || !(bandwidth > 0.0)) return out;
  const double norm =
      1.0 / (static_cast<double>(samples.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (double s : samples) {
      const double z = (grid[g] - s) / bandwidth;
      acc += std::exp(-0.5 * z * z);
    }
    out[g] = acc * norm;
  }
  return out;
}

std::optional<KdeCurves> kde_curves(const DistanceSamples& samples) {
  KdeCurves curves;
  curves.bandwidth_positive = silverman_bandwidth(samples.positive);
  curves.bandwidth_negative = silverman_bandwidth(samples.negative);
  if (!(curves.bandwidth_positive > 0.0) || !(curves.bandwidth_negative > 0.0)) return std::nullopt;
  const auto [pmin, pmax] = std::minmax_element(samples.positive.begin(), samples.positive.end());
  const auto [nmin, nmax] = std::minmax_element(samples.negative.begin(), samples.negative.end());
  const double h = std::max(curves.bandwidth_positive, curves.bandwidth_negative);
  const double lo = std::min(*pmin, *nmin) - 5.0 * h;
  const double hi = std::max(*pmax, *nmax) + 5.0 * h;
  curves.x.resize(kKdeGridPoints);
  for (std::size_t i = 0; i < kKdeGridPoints; ++i) {
    curves.x[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kKdeGridPoints - 1);
  }
  curves.density_positive = gaussian_kde(samples.positive, curves.bandwidth_positive, curves.x);
  curves.density_negative = gaussian_kde(samples.negative, curves.bandwidth_negative, curves.x);
  return curves;
}

}  // namespace reidkit
