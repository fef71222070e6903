#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace reidkit::cli {

namespace fs = std::filesystem;

/// Child-seed offsets added to --seed. The query/gallery split uses the seed
/// itself; training uses it for the head and epoch streams and adds
/// kValidationSeedOffset for the fixed validation batches.
inline constexpr std::uint64_t kDistanceSeedOffset = 1;

struct PreprocessArgs {
  fs::path images;
  fs::path masks;
  fs::path out;
  std::optional<fs::path> config;
};

struct StatsArgs {
  fs::path canvases;
  fs::path out;
};

struct TrainArgs {
  std::string train_store;
  std::string val_store;
  std::string out_head;
  std::optional<fs::path> history;
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
};

struct EvalArgs {
  std::string store;
  std::optional<std::string> head;
  std::uint64_t seed = 0;
  std::size_t k = 39;
  fs::path out;
  std::optional<fs::path> distances;
  std::optional<fs::path> kde;
  std::size_t max_pairs = 10000;
};

struct CrossEvalArgs {
  std::string store;
  std::optional<std::string> head;
  std::uint64_t seed = 0;
  std::size_t k = 39;
  fs::path out;
};

struct ReportArgs {
  std::vector<fs::path> reports;
  fs::path out;
};

struct SynthArgs {
  std::string out;
  std::uint64_t seed = 1;
  std::size_t identities = 50;
  std::size_t instances = 20;
  std::size_t feature_dim = 512;
  std::size_t train_identities = 30;
  std::size_t val_identities = 10;
  double instance_sigma = 0.15;
  double nuisance_sigma = 1.5;
  bool conditions = false;
  double viewpoint_shift = 0.0;
  double occlusion_sigma = 0.0;
};

// Each command returns the process exit status. Diagnostics go to stderr as
// "error: ..." lines; a nonzero status is returned iff at least one was printed.
int run_preprocess(const PreprocessArgs& args);
int run_stats(const StatsArgs& args);
int run_train(const TrainArgs& args);
int run_eval(const EvalArgs& args);
int run_crosseval(const CrossEvalArgs& args);
int run_report(const ReportArgs& args);
int run_synth(const SynthArgs& args);

}  // namespace reidkit::cli
