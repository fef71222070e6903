#include "reidkit/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "reidkit/error.hpp"

namespace reidkit {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ordered_json errors_json(const ErrorAnalysis& errors) {
  ordered_json out;
  out["intra"] = errors.intra;
  out["inter"] = errors.inter;
  out["confusions"] = ordered_json::array();
  for (const auto& c : errors.confusions) {
    ordered_json j;
    j["query_record_id"] = c.query_record_id;
    j["query_fish_id"] = c.query_fish_id;
    j["query_species"] = c.query_species;
    j["predicted_record_id"] = c.predicted_record_id;
    j["predicted_fish_id"] = c.predicted_fish_id;
    j["predicted_species"] = c.predicted_species;
    j["kind"] = c.kind == ErrorKind::kIntraSpecies ? "intra" : "inter";
    out["confusions"].push_back(std::move(j));
  }
  return out;
}

ordered_json report_json(const EvalReport& report) {
  ordered_json out;
  out["r1"] = report.r1;
  out["map_at_k"] = report.map_at_k;
  out["k"] = report.k;
  out["num_queries"] = report.num_queries;
  out["scenario"] = report.scenario;
  out["errors"] = errors_json(report.errors);
  out["per_query"] = ordered_json::array();
  for (const auto& q : report.per_query) {
    ordered_json j;
    j["record_id"] = q.record_id;
    j["fish_id"] = q.fish_id;
    j["ap"] = q.ap;
    j["rank1_hit"] = q.rank1_hit;
    j["rank1_record_id"] = q.rank1_record_id;
    j["rank1_fish_id"] = q.rank1_fish_id;
    j["num_relevant"] = q.num_relevant;
    out["per_query"].push_back(std::move(j));
  }
  ordered_json diag;
  diag["seed"] = report.seed;
  diag["gallery_size"] = report.gallery_size;
  diag["excluded_queries"] = report.excluded_queries;
  diag["zero_norm_vectors"] = report.zero_norm_vectors;
  out["diagnostics"] = std::move(diag);
  return out;
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  return report_json(report).dump(2) + "\n";
}

std::string cross_condition_to_json(std::span<const CrossConditionCell> cells) {
  ordered_json out;
  const auto& conds = all_conditions();
  out["conditions"] = ordered_json::array();
  for (const auto& c : conds) out["conditions"].push_back(condition_label(c));

  // Cells absent from `cells` stay null in the matrices.
  ordered_json r1 = ordered_json::array(), map = ordered_json::array();
  for (std::size_t q = 0; q < conds.size(); ++q) {
    r1.push_back(ordered_json::array({nullptr, nullptr, nullptr, nullptr}));
    map.push_back(ordered_json::array({nullptr, nullptr, nullptr, nullptr}));
  }
  std::array<std::size_t, 4> intra{}, inter{};
  out["cells"] = ordered_json::array();
  for (const auto& cell : cells) {
    const auto qi = condition_index(cell.scenario.query);
    const auto gi = condition_index(cell.scenario.gallery);
    r1[qi][gi] = cell.report.r1;
    map[qi][gi] = cell.report.map_at_k;
    intra[qi] += cell.report.errors.intra;
    inter[qi] += cell.report.errors.inter;
    ordered_json j;
    j["query"] = condition_label(cell.scenario.query);
    j["gallery"] = condition_label(cell.scenario.gallery);
    j["family"] = to_string(cell.scenario.family());
    auto body = report_json(cell.report);
    for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
    out["cells"].push_back(std::move(j));
  }
  out["r1_matrix"] = std::move(r1);
  out["map_at_k_matrix"] = std::move(map);
  out["errors_by_query_condition"] = ordered_json::array();
  for (std::size_t q = 0; q < conds.size(); ++q) {
    ordered_json j;
    std::string label = condition_label(conds[q]);
    std::replace(label.begin(), label.end(), '-', ' ');
    j["subcategory"] = label + " side";
    j["intra"] = intra[q];
    j["inter"] = inter[q];
    out["errors_by_query_condition"].push_back(std::move(j));
  }
  return out.dump(2) + "\n";
}

std::string history_to_csv(const TrainHistory& history) {
  std::string out = "epoch,train_loss,val_loss,lr,active_triplets\n";
  for (const auto& e : history) {
    out += std::to_string(e.epoch) + "," + num(e.train_loss) + "," + num(e.val_loss) + "," +
           num(e.learning_rate) + "," + std::to_string(e.active_triplets) + "\n";
  }
  return out;
}

std::string distances_to_csv(const DistanceSamples& samples) {
  std::string out = "pair_type,distance\n";
  for (double d : samples.positive) out += "positive," + num(d) + "\n";
  for (double d : samples.negative) out += "negative," + num(d) + "\n";
  return out;
}

std::string kde_to_csv(const KdeCurves& curves) {
  std::string out = "x,density_pos,density_neg\n";
  for (std::size_t i = 0; i < curves.x.size(); ++i) {
    out += num(curves.x[i]) + "," + num(curves.density_positive[i]) + "," +
           num(curves.density_negative[i]) + "\n";
  }
  return out;
}

std::vector<ReportRow> merge_reports(std::span<const std::filesystem::path> paths) {
  if (paths.empty()) throw Error(ErrorCode::kInvalidArgument, "no reports to merge");
  std::vector<ReportRow> rows;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) throw Error(ErrorCode::kIo, "cannot open report " + p.string());
    ReportRow row;
    row.name = p.stem().string();
    try {
      const auto doc = nlohmann::json::parse(in);
      row.r1 = doc.at("r1").get<double>();
      row.map_at_k = doc.at("map_at_k").get<double>();
      row.k = doc.at("k").get<std::size_t>();
      row.num_queries = doc.at("num_queries").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedMetadata, p.string() + ": " + e.what());
    }
    if (!rows.empty() && rows.front().k != row.k) {
      throw Error(ErrorCode::kInvalidArgument,
                  "conflicting k values: " + rows.front().name + " has k=" +
                      std::to_string(rows.front().k) + ", " + row.name + " has k=" +
                      std::to_string(row.k));
    }
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ReportRow& a, const ReportRow& b) { return a.name < b.name; });
  return rows;
}

std::string rows_to_csv(std::span<const ReportRow> rows) {
  std::string out = "run,r1,map_at_k,k,num_queries\n";
  for (const auto& r : rows) {
    out += r.name + "," + num(r.r1) + "," + num(r.map_at_k) + "," + std::to_string(r.k) + "," +
           std::to_string(r.num_queries) + "\n";
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace reidkit
