#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "reidkit/evaluator.hpp"
#include "reidkit/trainer.hpp"

namespace reidkit {

/// Pretty-printed EvalReport:
///   {"r1", "map_at_k", "k", "num_queries", "scenario",
///    "errors": {"intra", "inter", "confusions": [...]},
///    "per_query": [...], "diagnostics": {...}}
std::string report_to_json(const EvalReport& report);

/// 4x4 query x gallery matrix plus per-cell error analysis and per
/// query-condition error totals.
std::string cross_condition_to_json(std::span<const CrossConditionCell> cells);

/// `epoch,train_loss,val_loss,lr,active_triplets`
std::string history_to_csv(const TrainHistory& history);

/// `pair_type,distance` with pair_type positive|negative.
std::string distances_to_csv(const DistanceSamples& samples);

/// `x,density_pos,density_neg`
std::string kde_to_csv(const KdeCurves& curves);

struct ReportRow {
  std::string name;
  double r1 = 0.0;
  double map_at_k = 0.0;
  std::size_t k = 0;
  std::size_t num_queries = 0;
};

/// Reads report JSON files; each row is named by its file stem. Rows come
/// back sorted by name. Throws kInvalidArgument when k differs across inputs.
std::vector<ReportRow> merge_reports(std::span<const std::filesystem::path> paths);

/// `run,r1,map_at_k,k,num_queries`
std::string rows_to_csv(std::span<const ReportRow> rows);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace reidkit
