#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <regex>
#include <sstream>

#include "cli.hpp"
#include "deim/config.hpp"
#include "deim/metrics.hpp"
#include "deim/trainer.hpp"
#include "test_util.hpp"

namespace deim {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "deim");
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "deim_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// First `key=value` occurrence in a report.
std::string field(const std::string& text, const std::string& key) {
  const std::regex re("(^|[\\s])" + key + "=([^\\s]*)");
  std::smatch m;
  if (!std::regex_search(text, m, re)) return {};
  return m[2];
}

std::vector<std::string> small_model() {
  return {"--hidden", "6", "--static_dim", "6", "--contextual_dim", "3", "--batch_size", "16"};
}

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

TEST(Cli, TrainOnBundledFixtureEmitsCheckpoint) {
  const fs::path dir = scratch("train");
  const CliRun r = run(with({"train", "--task", "snli", "--epochs", "1", "--train", testing::data_path("snli_tiny.tsv"),
                          "--out_dir", dir.string()},
                         small_model()));
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"checkpoint/model.bin", "checkpoint/manifest.txt", "checkpoint/vocab.txt", "history.tsv",
                        "config.txt"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(field(r.out, "epochs_run"), "1");
  EXPECT_FALSE(field(r.out, "best_metric").empty());
  // The echoed config reloads to the same resolved settings.
  const TrainConfig echoed = load_config_file((dir / "config.txt").string());
  EXPECT_EQ(echoed.hidden, 6u);
  EXPECT_EQ(echoed.epochs, 1u);
  EXPECT_EQ(echoed.lr, 0.0005);
}

TEST(Cli, OutputRootFromEnvironment) {
  const fs::path root = scratch("root");
  ::setenv("DEIM_OUTPUT_ROOT", root.c_str(), 1);
  const CliRun r = run(with({"train", "--epochs", "1", "--train", testing::data_path("snli_tiny.tsv")}, small_model()));
  ::unsetenv("DEIM_OUTPUT_ROOT");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(fs::path(field(r.out, "out_dir")).parent_path(), root);
  EXPECT_TRUE(fs::exists(root / "train-snli-full-seed1" / "checkpoint" / "model.bin"));
}

TEST(Cli, ConflictingOnlyFlagsAreUsageError) {
  const CliRun r = run({"train", "--train", testing::data_path("snli_tiny.tsv"), "--only_h2p", "--only_p2h"});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("only_h2p"), std::string::npos) << r.err;
}

TEST(Cli, InvalidKeysListValidKeys) {
  const CliRun flag = run({"train", "--train", testing::data_path("snli_tiny.tsv"), "--learning_rate", "0.1"});
  EXPECT_EQ(flag.code, cli::kUsage);
  const fs::path dir = scratch("badcfg");
  {
    std::ofstream(dir / "bad.cfg") << "lr=0.1\nwarmup=10\n";
  }
  const CliRun file = run({"train", "--config", (dir / "bad.cfg").string(), "--train",
                        testing::data_path("snli_tiny.tsv")});
  EXPECT_EQ(file.code, cli::kUsage);
  for (const CliRun* r : {&flag, &file}) {
    for (const auto& key : config_keys()) EXPECT_NE(r->err.find(key), std::string::npos) << key;
  }
}

TEST(Cli, DefaultConfigIsPublishedHyperparameters) {
  const fs::path dir = scratch("defaults");
  const CliRun r = run({"train", "--train", (dir / "missing.tsv").string(), "--out_dir", dir.string()});
  EXPECT_EQ(r.code, cli::kData);
  EXPECT_EQ(field(r.out, "config.lr"), "5e-04");
  EXPECT_EQ(std::stod(field(r.out, "config.lr")), 0.0005);
  EXPECT_EQ(field(r.out, "config.dropout"), "0.2");
  EXPECT_EQ(field(r.out, "config.epochs"), "30");
  EXPECT_EQ(field(r.out, "config.batch_size"), "128");
  EXPECT_EQ(field(r.out, "config.hidden"), "150");
  EXPECT_EQ(field(r.out, "config.kernel"), "3");
  EXPECT_EQ(field(r.out, "config.static_dim"), "300");
  EXPECT_EQ(field(r.out, "config.contextual_dim"), "1024");
}

TEST(Cli, ConfigFileThenOverrides) {
  const fs::path dir = scratch("cfg");
  {
    std::ofstream(dir / "run.cfg") << "epochs=7\nhidden=6\nstatic_dim=6\ncontextual_dim=3\nseed=9\n";
  }
  const CliRun r = run({"train", "--config", (dir / "run.cfg").string(), "--epochs", "1", "--train",
                     testing::data_path("snli_tiny.tsv"), "--out_dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "config.epochs"), "1");
  EXPECT_EQ(field(r.out, "config.seed"), "9");
}

TEST(Cli, MissingCheckpointFails) {
  const CliRun r = run({"eval", "--checkpoint", "/nonexistent/ckpt", "--data", testing::data_path("snli_tiny.tsv")});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(r.err.empty());
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, MissingDataIsDataError) {
  const CliRun r = run({"train", "--train", "/nonexistent/train.tsv", "--out_dir", scratch("nodata").string()});
  EXPECT_EQ(r.code, cli::kData);
}

TEST(Cli, RankingEvalPrintsMetricsOfPredictedScores) {
  const fs::path dir = scratch("rank");
  const std::string data = testing::data_path("wikiqa_tiny.tsv");
  ASSERT_EQ(run(with({"train", "--task", "wikiqa", "--epochs", "1", "--train", data, "--out_dir", dir.string()},
                     small_model()))
                .code,
            0);
  const std::string ckpt = (dir / "checkpoint").string();
  const CliRun eval = run({"eval", "--checkpoint", ckpt, "--data", data, "--task", "wikiqa"});
  ASSERT_EQ(eval.code, 0) << eval.err;
  EXPECT_TRUE(std::regex_search(eval.out, std::regex("\\bmap=\\d\\.\\d{4} mrr=\\d\\.\\d{4}\\b"))) << eval.out;
  const CliRun pred = run({"predict", "--checkpoint", ckpt, "--data", data});
  ASSERT_EQ(pred.code, 0) << pred.err;
  // Rebuild the groups from the fixture and the printed scores.
  const Dataset fixture = read_dataset(data, Task::WikiQa);
  std::istringstream lines(pred.out);
  std::string line;
  std::getline(lines, line);
  std::map<std::string, std::vector<ScoredCandidate>> by_group;
  std::vector<std::string> order;
  for (const RawPair& rec : fixture.records) {
    ASSERT_TRUE(std::getline(lines, line));
    const double score = std::stod(line.substr(line.rfind('\t') + 1));
    if (!by_group.count(rec.group_id)) order.push_back(rec.group_id);
    by_group[rec.group_id].push_back({score, rec.label > 0});
  }
  std::vector<std::vector<ScoredCandidate>> groups;
  for (const auto& g : order) groups.push_back(by_group[g]);
  const RankingMetrics m = map_mrr(groups);
  std::ostringstream expect;
  expect << std::fixed << std::setprecision(4) << "map=" << m.map << " mrr=" << m.mrr;
  EXPECT_NE(eval.out.find(expect.str()), std::string::npos) << eval.out << " vs " << expect.str();
  const CliRun wrong = run({"eval", "--checkpoint", ckpt, "--data", data, "--task", "snli"});
  EXPECT_EQ(wrong.code, cli::kUsage);
}

TEST(Cli, MemorizedClassifierScoresFullAccuracy) {
  const fs::path dir = scratch("perfect");
  const std::string data = testing::data_path("snli_tiny.tsv");
  const CliRun train = run({"train", "--train", data, "--out_dir", dir.string(), "--hidden", "32", "--static_dim", "32",
                         "--contextual_dim", "0", "--epochs", "80"});
  ASSERT_EQ(train.code, 0) << train.err;
  ASSERT_EQ(field(train.out, "best_metric"), "1.0000") << train.out;
  const CliRun eval = run({"eval", "--checkpoint", (dir / "checkpoint").string(), "--data", data});
  ASSERT_EQ(eval.code, 0) << eval.err;
  EXPECT_NE(eval.out.find("acc=1.0000\n"), std::string::npos) << eval.out;
}

TEST(Cli, PredictLabelsEveryLine) {
  const fs::path dir = scratch("predict");
  ASSERT_EQ(run(with({"train", "--epochs", "1", "--train", testing::data_path("snli_tiny.tsv"), "--out_dir",
                      dir.string()},
                     small_model()))
                .code,
            0);
  {
    std::ofstream(dir / "pairs.tsv") << "A man sleeps.\tA person rests.\nneutral\tA dog runs.\tA cat sits.\n";
  }
  const CliRun r = run({"predict", "--checkpoint", (dir / "checkpoint").string(), "--data", (dir / "pairs.tsv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::regex_search(r.out, std::regex("\n1\t(entailment|contradiction|neutral)\t")));
  EXPECT_TRUE(std::regex_search(r.out, std::regex("\n2\t(entailment|contradiction|neutral)\t")));
}

TEST(Cli, PrepVocabMatchesBuilder) {
  const fs::path dir = scratch("vocab");
  const std::string data = testing::data_path("snli_tiny.tsv");
  const CliRun r = run({"prep-vocab", "--train", data, "--out", (dir / "v.txt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Vocab built = build_vocab(read_dataset(data, Task::Snli));
  EXPECT_EQ(field(r.out, "vocab_size"), std::to_string(built.size()));
  EXPECT_EQ(Vocab::load((dir / "v.txt").string()).tokens(), built.tokens());
}

TEST(Cli, SameCommandLineSameArtifacts) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const auto args = with({"train", "--epochs", "2", "--train", testing::data_path("snli_tiny.tsv")}, small_model());
  ASSERT_EQ(run(with(args, {"--out_dir", a.string()})).code, 0);
  ASSERT_EQ(run(with(args, {"--out_dir", b.string()})).code, 0);
  EXPECT_EQ(slurp(a / "history.tsv"), slurp(b / "history.tsv"));
  EXPECT_EQ(slurp(a / "checkpoint/model.bin"), slurp(b / "checkpoint/model.bin"));
}

TEST(Cli, AblateEmitsSevenRowsFullFirst) {
  const fs::path dir = scratch("ablate");
  const CliRun r = run(with({"ablate", "--epochs", "1", "--train", testing::data_path("snli_tiny.tsv"), "--dev",
                          testing::data_path("snli_tiny_dev.tsv"), "--out_dir", dir.string()},
                         small_model()));
  ASSERT_EQ(r.code, 0) << r.err;
  std::vector<std::string> rows;
  std::istringstream lines(r.out);
  for (std::string line; std::getline(lines, line);)
    if (line.rfind("row=", 0) == 0) rows.push_back(line);
  ASSERT_EQ(rows.size(), 7u);
  const std::vector<std::string> fingerprints = {"full",      "no_elmo",  "no_alignment", "no_fusion",
                                                 "no_self_attention", "only_h2p", "only_p2h"};
  const double full = std::stod(field(rows[0], "acc"));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(field(rows[i], "row"), std::to_string(i + 1));
    EXPECT_EQ(field(rows[i], "fingerprint"), fingerprints[i]) << rows[i];
    const double acc = std::stod(field(rows[i], "acc"));
    EXPECT_NEAR(std::stod(field(rows[i], "delta")), acc - full, 1.5e-4) << rows[i];
  }
  EXPECT_EQ(field(rows[0], "delta"), "+0.0000");
  EXPECT_LT(std::stoul(field(rows[1], "params")), std::stoul(field(rows[0], "params")));
  const CliRun flagged = run({"ablate", "--train", testing::data_path("snli_tiny.tsv"), "--no_fusion"});
  EXPECT_EQ(flagged.code, cli::kUsage);
}

}  // namespace
}  // namespace deim
