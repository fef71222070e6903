#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "reidkit/image_io.hpp"
#include "reidkit/rng.hpp"
#include "reidkit/store.hpp"
#include "reidkit/trainer.hpp"

namespace reidkit {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir = fs::temp_directory_path() / "reidkit_cli_tests" / info->name();
    fs::remove_all(dir);
    fs::create_directories(dir);
  }

  RunResult run(const std::string& args) {
    const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = std::string(REIDKIT_CLI_PATH) + " " + args + " >" + out.string() +
                            " 2>" + err.string();
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
  }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  void synth(const std::string& extra = "") {
    const auto r = run("synth --out " + path("syn") +
                       " --identities 14 --instances 8 --dim 32 --train-identities 6"
                       " --val-identities 4 " + extra);
    ASSERT_EQ(r.status, 0) << r.err;
  }

  fs::path dir;
};

TEST_F(CliTest, RequiresExactlyOneSubcommand) {
  EXPECT_NE(run("").status, 0);
  EXPECT_NE(run("bogus").status, 0);
}

TEST_F(CliTest, TrainEvalPipelineIsIdempotent) {
  synth();
  const std::string train = "train --train " + path("syn_train") + " --val " + path("syn_val") +
                            " --out " + path("head") + " --seed 3";
  std::ofstream(dir / "train.cfg") << "epochs = 5\nembed_dim = 8\nlearning_rate = 1e-3\n";
  auto r = run(train + " --config " + path("train.cfg"));
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(r.err.empty());
  const auto history = slurp(dir / "head.history.csv");
  EXPECT_EQ(history.substr(0, history.find('\n')), "epoch,train_loss,val_loss,lr,active_triplets");
  const std::string eval = "eval --store " + path("syn_test") + " --head " + path("head") +
                           " --seed 4 --out " + path("report.json");
  r = run(eval);
  ASSERT_EQ(r.status, 0) << r.err;
  const auto report = slurp(dir / "report.json");
  const auto distances = slurp(dir / "report.distances.csv");
  const auto kde = slurp(dir / "report.kde.csv");
  EXPECT_EQ(distances.substr(0, 19), "pair_type,distance\n");
  EXPECT_EQ(kde.substr(0, 26), "x,density_pos,density_neg\n");

  const auto head_blob = slurp(dir / "head.f32");
  ASSERT_EQ(run(train + " --config " + path("train.cfg")).status, 0);
  ASSERT_EQ(run(eval).status, 0);
  EXPECT_EQ(slurp(dir / "head.f32"), head_blob);
  EXPECT_EQ(slurp(dir / "head.history.csv"), history);
  EXPECT_EQ(slurp(dir / "report.json"), report);
  EXPECT_EQ(slurp(dir / "report.distances.csv"), distances);
  EXPECT_EQ(slurp(dir / "report.kde.csv"), kde);
}

TEST_F(CliTest, EvalDefaultsToK39) {
  const auto r0 = run("synth --out " + path("big") + " --identities 3 --instances 45 --dim 8"
                      " --train-identities 0 --val-identities 0");
  ASSERT_EQ(r0.status, 0) << r0.err;
  const auto r = run("eval --store " + path("big_test") + " --out " + path("r.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto doc = nlohmann::json::parse(slurp(dir / "r.json"));
  EXPECT_EQ(doc["k"], 39);
  EXPECT_EQ(doc["num_queries"], 3);
}

TEST_F(CliTest, DuplicateGalleryGivesPerfectR1) {
  EmbeddingSet set(3);
  Rng rng(1);
  for (std::uint64_t i = 0; i < 10; ++i) {
    std::vector<float> v = {static_cast<float>(normal(rng)), static_cast<float>(normal(rng)),
                            static_cast<float>(normal(rng))};
    set.add({2 * i, "fish_" + std::to_string(i), "s", {}, Split::kTest, v});
    set.add({2 * i + 1, "fish_" + std::to_string(i), "s", {}, Split::kTest, v});
  }
  write_store(set, StorePaths::from_name(path("dup")));
  const auto r = run("eval --store " + path("dup") + ".meta.jsonl --out " + path("r.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "r.json"))["r1"], 100.0);
}

TEST_F(CliTest, MissingStoreNamesPath) {
  const auto r = run("eval --store " + path("nope") + " --out " + path("r.json"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("nope.meta.jsonl"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "r.json"));
}

TEST_F(CliTest, ZeroEpochsWritesInitialHead) {
  synth();
  std::ofstream(dir / "zero.cfg") << "epochs = 0\nembed_dim = 4\n";
  const auto r = run("train --train " + path("syn_train") + " --val " + path("syn_val") +
                     " --out " + path("head") + " --config " + path("zero.cfg") + " --seed 11");
  ASSERT_EQ(r.status, 0) << r.err;
  Rng rng(11);
  auto expected = init_head(32, 4, rng);
  for (double& w : expected.weight.data()) w = static_cast<float>(w);
  EXPECT_EQ(read_head(path("head")), expected);
  EXPECT_EQ(slurp(dir / "head.history.csv"), "epoch,train_loss,val_loss,lr,active_triplets\n");
}

TEST_F(CliTest, ConfigErrorsListLines) {
  synth();
  std::ofstream(dir / "bad.cfg") << "margin = x\n# fine\nwat = 1\n";
  const auto r = run("train --train " + path("syn_train") + " --val " + path("syn_val") +
                     " --out " + path("head") + " --config " + path("bad.cfg"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("bad.cfg:1"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("bad.cfg:3"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "head.f32"));
}

TEST_F(CliTest, CrossEvalMatrix) {
  synth("--conditions --viewpoint-shift 1.0");
  const auto r = run("crosseval --store " + path("syn_test") + " --out " + path("m.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto doc = nlohmann::json::parse(slurp(dir / "m.json"));
  EXPECT_EQ(doc["cells"].size(), 16u);
  EXPECT_EQ(doc["r1_matrix"].size(), 4u);
  EXPECT_EQ(doc["errors_by_query_condition"].size(), 4u);
}

TEST_F(CliTest, CrossEvalMissingConditionNamesScenario) {
  synth();  // no condition labels: everything is Separated-Initial
  const auto r = run("crosseval --store " + path("syn_test") + " --out " + path("m.json"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("Separated-Flipped"), std::string::npos) << r.err;
}

TEST_F(CliTest, ReportMerging) {
  synth();
  ASSERT_EQ(run("eval --store " + path("syn_test") + " --out " + path("zeta.json")).status, 0);
  ASSERT_EQ(run("eval --store " + path("syn_test") + " --seed 9 --out " + path("alpha.json")).status, 0);
  ASSERT_EQ(run("eval --store " + path("syn_test") + " --k 5 --out " + path("k5.json")).status, 0);

  auto r = run("report " + path("zeta.json") + " --out " + path("one.csv"));
  ASSERT_EQ(r.status, 0) << r.err;
  auto csv = slurp(dir / "one.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);

  r = run("report " + path("zeta.json") + " " + path("alpha.json") + " --out " + path("two.csv"));
  ASSERT_EQ(r.status, 0) << r.err;
  csv = slurp(dir / "two.csv");
  EXPECT_EQ(csv.rfind("run,r1,map_at_k,k,num_queries\nalpha,", 0), 0u) << csv;
  EXPECT_NE(csv.find("\nzeta,"), std::string::npos);

  r = run("report " + path("zeta.json") + " " + path("k5.json") + " --out " + path("bad.csv"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("conflicting k"), std::string::npos) << r.err;
}

void write_scene(const fs::path& images, const fs::path& masks, const std::string& stem) {
  RgbImage img(40, 30, 0.25);
  BinaryMask mask(40, 30);
  for (std::size_t y = 10; y < 30; ++y)
    for (std::size_t x = 5; x < 15; ++x) {
      mask.set(y, x, true);
      for (std::size_t c = 0; c < 3; ++c) img.at(y, x, c) = 0.8;
    }
  write_png_rgb(img, images / (stem + ".png"));
  RgbImage m(40, 30);
  for (std::size_t y = 0; y < 40; ++y)
    for (std::size_t x = 0; x < 30; ++x)
      if (mask.at(y, x)) m.at(y, x, 0) = 1.0;
  write_png_rgb(m, masks / (stem + ".png"));
}

TEST_F(CliTest, PreprocessOneImage) {
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "masks");
  write_scene(dir / "images", dir / "masks", "fish1");
  std::ofstream(dir / "pre.cfg") << "target = 64\n";
  const auto r = run("preprocess --images " + path("images") + " --masks " + path("masks") +
                     " --out " + path("out") + " --config " + path("pre.cfg"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto canvas = read_png_rgb(dir / "out" / "fish1.png");
  EXPECT_EQ(canvas.height, 64u);
  EXPECT_EQ(canvas.width, 64u);
  const auto manifest = slurp(dir / "out" / "manifest.jsonl");
  ASSERT_EQ(std::count(manifest.begin(), manifest.end(), '\n'), 1);
  const auto line = nlohmann::json::parse(manifest);
  EXPECT_EQ(line["source"], "fish1.png");
  EXPECT_EQ(line["crop"]["width"], 14);
  EXPECT_EQ(line["crop"]["height"], 24);
}

TEST_F(CliTest, PreprocessErrors) {
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "masks");
  auto r = run("preprocess --images " + path("images") + " --masks " + path("masks") + " --out " +
               path("out"));
  EXPECT_NE(r.status, 0);

  write_scene(dir / "images", dir / "masks", "good");
  std::ofstream(dir / "images" / "corrupt.png") << "garbage";
  std::ofstream(dir / "masks" / "corrupt.png") << "garbage";
  write_scene(dir / "images", dir / "masks", "orphan");
  fs::remove(dir / "masks" / "orphan.png");
  r = run("preprocess --images " + path("images") + " --masks " + path("masks") + " --out " +
          path("out"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("corrupt.png"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("missing mask"), std::string::npos) << r.err;
  EXPECT_TRUE(fs::exists(dir / "out" / "good.png"));
}

TEST_F(CliTest, StatsOutputs) {
  fs::create_directories(dir / "c");
  write_png_rgb(RgbImage(8, 8, 0.0), dir / "c" / "a.png");
  write_png_rgb(RgbImage(8, 8, 1.0), dir / "c" / "b.png");
  auto r = run("stats --canvases " + path("c") + " --out " + path("s.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto doc = nlohmann::json::parse(slurp(dir / "s.json"));
  ASSERT_EQ(doc["mean"].size(), 3u);
  ASSERT_EQ(doc["std"].size(), 3u);
  EXPECT_EQ(doc["mean"][0], 0.5);
  EXPECT_EQ(doc["std"][2], 0.5);

  fs::remove(dir / "c" / "b.png");
  r = run("stats --canvases " + path("c") + " --out " + path("s2.json"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("degenerate std"), std::string::npos) << r.err;
}

}  // namespace
}  // namespace reidkit
