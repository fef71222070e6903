#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reidkit/matrix.hpp"
#include "reidkit/types.hpp"

namespace reidkit {

inline constexpr std::size_t kDefaultMapK = 39;

/// v / (|v| + 1e-12). Returns true when v was the zero vector.
bool l2_normalize(std::span<double> v);

/// Row-wise l2_normalize(); returns the number of zero rows.
std::size_t l2_normalize_rows(Matrix& m);

struct QueryGallerySplit {
  std::vector<std::size_t> queries;  // record indices
  std::vector<std::size_t> gallery;  // record indices, canonical order
  std::uint64_t seed = 0;

  friend bool operator==(const QueryGallerySplit&, const QueryGallerySplit&) = default;
};

/// Single-pool split. Fish ids are visited in lexicographic order; each id with
/// at least two instances contributes one query chosen as
/// instances[next() % count], instances sorted by record_id, from one Rng(seed)
/// stream. Every other record (all ids, singletons included) is gallery.
/// Throws kNoValidQueries when no id has two instances.
QueryGallerySplit build_query_gallery(const EmbeddingSet& set, std::uint64_t seed);

struct RankEntry {
  std::size_t index = 0;  // position in the gallery list passed to rank()
  double distance = 0.0;
};

/// Gallery items by ascending Euclidean distance to `query`; ties go to the
/// lower gallery record id. Inputs are used as given (callers normalize).
/// Throws kEmptyGallery for an empty gallery.
std::vector<RankEntry> rank(std::span<const double> query, const Matrix& gallery,
                            std::span<const std::uint64_t> gallery_record_ids);

/// (# relevant in the top i) / i, 1 <= i <= relevance.size().
double precision_at(std::span<const std::uint8_t> relevance, std::size_t i);

/// (1/|R|) sum_i precision_at(i) * relevance(i) over the given (possibly
/// truncated) list. Throws for num_relevant == 0.
double average_precision(std::span<const std::uint8_t> relevance, std::size_t num_relevant);

struct RankedRetrieval {
  std::size_t query_index = 0;
  std::uint64_t query_record_id = 0;
  std::string query_fish_id;
  std::string query_species;
  std::vector<std::uint64_t> ranked_record_ids;
  std::vector<double> distances;
  std::vector<std::uint8_t> relevance;
  std::size_t num_relevant = 0;  // |R| over the whole gallery
  bool rank1_hit = false;
  std::uint64_t rank1_record_id = 0;
  std::string rank1_fish_id;
  std::string rank1_species;
};

struct RetrievalBatch {
  std::vector<RankedRetrieval> retrievals;
  std::size_t excluded_queries = 0;  // no same-id item in the gallery
  std::size_t zero_norm_vectors = 0;
};

/// Ranks every query against its gallery. `features` rows follow `meta`; they
/// are re-normalized before distances are taken.
RetrievalBatch retrieve(const Matrix& features, const EmbeddingSet& meta,
                        std::span<const std::size_t> queries,
                        std::span<const std::size_t> gallery);

/// AP of one retrieval with relevance truncated to the top k ranks and the
/// divisor kept at the full |R|.
double average_precision_at_k(const RankedRetrieval& r, std::size_t k);

/// Mean AP@k over retrievals, in percent. Throws kEmptyDomain when empty.
double map_at_k(std::span<const RankedRetrieval> retrievals, std::size_t k = kDefaultMapK);

/// Percentage of retrievals whose top-ranked item shares the query fish id.
double r1(std::span<const RankedRetrieval> retrievals);

enum class ErrorKind { kIntraSpecies, kInterSpecies };

struct Confusion {
  std::uint64_t query_record_id = 0;
  std::string query_fish_id;
  std::string query_species;
  std::uint64_t predicted_record_id = 0;
  std::string predicted_fish_id;
  std::string predicted_species;
  ErrorKind kind = ErrorKind::kIntraSpecies;
};

struct ErrorAnalysis {
  std::size_t intra = 0;
  std::size_t inter = 0;
  std::vector<Confusion> confusions;
};

/// Classifies every rank-1 miss: intra-species when the top-1 item has the
/// query's species, inter-species otherwise.
ErrorAnalysis error_analysis(std::span<const RankedRetrieval> retrievals);

struct QueryResult {
  std::uint64_t record_id = 0;
  std::string fish_id;
  double ap = 0.0;
  bool rank1_hit = false;
  std::uint64_t rank1_record_id = 0;
  std::string rank1_fish_id;
  std::size_t num_relevant = 0;
};

struct EvalReport {
  std::string scenario = "single-pool";
  double r1 = 0.0;
  double map_at_k = 0.0;
  std::size_t k = kDefaultMapK;
  std::size_t num_queries = 0;
  std::size_t gallery_size = 0;
  std::uint64_t seed = 0;
  ErrorAnalysis errors;
  std::vector<QueryResult> per_query;
  std::size_t excluded_queries = 0;
  std::size_t zero_norm_vectors = 0;
};

/// Builds the report for already-ranked retrievals; k is clamped to the
/// longest ranked list.
EvalReport summarize(const RetrievalBatch& batch, std::size_t k, std::string scenario);

/// Single-pool protocol: build_query_gallery(seed), rank, R1 and mAP@k.
EvalReport evaluate(const Matrix& features, const EmbeddingSet& meta, std::uint64_t seed,
                    std::size_t k = kDefaultMapK);
EvalReport evaluate(const EmbeddingSet& set, std::uint64_t seed, std::size_t k = kDefaultMapK);

enum class ScenarioFamily { kIdentical, kViewpoint, kOcclusion, kCompound };

std::string_view to_string(ScenarioFamily f);

struct Scenario {
  Condition query;
  Condition gallery;

  ScenarioFamily family() const;
  std::string label() const;  // "Separated-Initial vs Touched-Flipped"

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// The ten query/gallery combinations of the robustness study, grouped as
/// identical (4), viewpoint (2), occlusion (2) and compound (2).
std::vector<Scenario> study_scenarios();

/// All 16 query x gallery cells, row-major over all_conditions().
std::vector<Scenario> grid_scenarios();

struct CrossConditionCell {
  Scenario scenario;
  EvalReport report;
};

/// Per-scenario evaluation. The query pool is the scenario's query condition:
/// fish ids are visited lexicographically and one instance per id is drawn
/// with a fresh Rng(seed) per cell, so cells sharing a query condition share
/// queries. The gallery is every gallery-condition record, minus the query
/// itself when both conditions coincide. k is clamped to the gallery size.
/// Throws kEmptyGallery naming the scenario when a pool is empty.
std::vector<CrossConditionCell> cross_condition_eval(const Matrix& features,
                                                     const EmbeddingSet& meta,
                                                     std::span<const Scenario> scenarios,
                                                     std::uint64_t seed,
                                                     std::size_t k = kDefaultMapK);

struct DistanceSamples {
  std::vector<double> positive;  // same fish id
  std::vector<double> negative;  // different fish id
};

/// Up to max_pairs distinct same-id and different-id pairs (i < j) of
/// normalized features, drawn without replacement from Rng(seed). Same-id
/// pairs are enumerated and partially shuffled; different-id pairs are
/// enumerated when there are at most max_pairs of them and rejection-sampled
/// otherwise. Throws for fewer than two records.
DistanceSamples distance_distributions(const Matrix& features, const EmbeddingSet& meta,
                                       std::uint64_t seed, std::size_t max_pairs);

struct KdeCurves {
  std::vector<double> x;
  std::vector<double> density_positive;
  std::vector<double> density_negative;
  double bandwidth_positive = 0.0;
  double bandwidth_negative = 0.0;
};

inline constexpr std::size_t kKdeGridPoints = 256;

/// Silverman bandwidth 0.9 * min(sigma, IQR / 1.34) * m^(-1/5); falls back to
/// sigma when the IQR is zero. Returns 0 for degenerate samples.
double silverman_bandwidth(std::span<const double> samples);

/// Gaussian KDE evaluated at `grid`.
std::vector<double> gaussian_kde(std::span<const double> samples, double bandwidth,
                                 std::span<const double> grid);

/// Both densities on one shared 256-point grid spanning the pooled samples
/// widened by five bandwidths on each side. Empty when either side has a
/// zero bandwidth.
std::optional<KdeCurves> kde_curves(const DistanceSamples& samples);

}  // namespace reidkit
