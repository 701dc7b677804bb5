#include "cli.hpp"

#include "rolekit/graphio.hpp"
#include "rolekit/model_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace rolekit;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("rolekit_cli_" + std::to_string(::getpid()) + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(const std::vector<std::string>& args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static void spill(const std::string& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

  LabeledMatrix csv(const std::string& p) const {
    std::ifstream in(p);
    return read_matrix_csv(in);
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(Cli, ExitCodesForUsage) {
  EXPECT_EQ(run({}), 2);
  EXPECT_NE(err_.str().find("error [cli]"), std::string::npos);
  EXPECT_EQ(run({"--version"}), 0);
  EXPECT_EQ(out_.str(), std::string(cli::kVersion) + "\n");
  EXPECT_EQ(run({"bogus"}), 2);
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_EQ(run({"glrd", "--features", path("v.csv"), "--roles", "0", "--out", path("m.json")}), 2);
  EXPECT_EQ(run({"mrd", "--tensor", path("t.coo"), "--out", path("m.json"), "--dims", "2", "2"}), 2);
}

TEST_F(Cli, MissingInputIsAComputationError) {
  EXPECT_EQ(run({"glrd", "--features", path("absent.csv"), "--roles", "2", "--out", path("m.json")}), 1);
  EXPECT_NE(err_.str().find("absent.csv"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("m.json")));
}

TEST_F(Cli, GlrdWritesModelAndManifest) {
  ASSERT_EQ(run({"synth", "--kind", "nmf", "--n", "20", "--f", "6", "--r", "2", "--seed", "3", "--out", path("v.csv")}), 0);
  ASSERT_EQ(run({"glrd", "--features", path("v.csv"), "--roles", "2", "--seed", "7", "--sparsity-f", "3",
                 "--assignments-out", path("g.csv"), "--out", path("m.json")}),
            0)
      << err_.str();
  const Model m = read_model(slurp(path("m.json")));
  const auto& role = std::get<glrd::RoleModel>(m);
  EXPECT_EQ(role.G.rows(), 20);
  EXPECT_EQ(role.F.rows(), 2);
  EXPECT_EQ(role.F.cols(), 6);
  EXPECT_LE(role.F.rowwise().sum().maxCoeff(), 3.0 + 1e-8);
  EXPECT_EQ(csv(path("g.csv")).values, role.G);

  const auto manifest = nlohmann::json::parse(slurp(path("m.json.manifest.json")));
  EXPECT_EQ(manifest["subcommand"], "glrd");
  EXPECT_EQ(manifest["version"], cli::kVersion);
  EXPECT_EQ(manifest["artifacts"].size(), 2u);
  EXPECT_NE(manifest["config"].get<std::string>().find("roles=2"), std::string::npos);
}

TEST_F(Cli, RerunsAreByteIdentical) {
  ASSERT_EQ(run({"synth", "--kind", "tucker", "--n", "12", "--f", "5", "--m", "3", "--p", "2", "--q", "2", "--s", "2",
                 "--seed", "4", "--out", path("t.coo")}),
            0);
  for (const char* name : {"a.json", "b.json"}) {
    ASSERT_EQ(run({"mrd", "--tensor", path("t.coo"), "--dims", "2", "2", "2", "--seed", "1", "2", "--out", path(name)}), 0)
        << err_.str();
  }
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
}

TEST_F(Cli, ManifestConfigReproducesTheRun) {
  ASSERT_EQ(run({"synth", "--kind", "nmf", "--n", "15", "--f", "5", "--seed", "2", "--out", path("v.csv")}), 0);
  ASSERT_EQ(run({"glrd", "--features", path("v.csv"), "--roles", "3", "--seed", "5", "--diversity-f", "0.5", "--out",
                 path("m.json")}),
            0);
  const auto manifest = nlohmann::json::parse(slurp(path("m.json.manifest.json")));
  spill(path("c.ini"), manifest["config"].get<std::string>());
  ASSERT_EQ(run({"--config", path("c.ini"), "glrd", "--out", path("again.json")}), 0) << err_.str();
  EXPECT_EQ(slurp(path("m.json")), slurp(path("again.json")));
}

TEST_F(Cli, AnalyzeRejectsRoleModels) {
  ASSERT_EQ(run({"synth", "--kind", "nmf", "--n", "10", "--f", "4", "--out", path("v.csv")}), 0);
  ASSERT_EQ(run({"glrd", "--features", path("v.csv"), "--roles", "2", "--out", path("m.json")}), 0);
  EXPECT_EQ(run({"analyze", "--model", path("m.json")}), 1);
  EXPECT_NE(err_.str().find("model has no Tucker core"), std::string::npos);
}

TEST_F(Cli, AnalyzeWritesMetricsAndArtifacts) {
  ASSERT_EQ(run({"synth", "--kind", "tucker", "--n", "15", "--f", "6", "--m", "4", "--seed", "8", "--out", path("t.coo")}), 0);
  ASSERT_EQ(run({"mrd", "--tensor", path("t.coo"), "--dims", "3", "3", "2", "--out", path("m.json")}), 0);
  ASSERT_EQ(run({"analyze", "--model", path("m.json"), "--graph-out", path("g.tsv"), "--embedding-out", path("e.csv")}), 0)
      << err_.str();
  EXPECT_FALSE(out_.str().empty());
  EXPECT_TRUE(fs::exists(path("g.tsv")));
  EXPECT_TRUE(fs::exists(path("e.csv")));
}

TEST_F(Cli, HeatmapOfIdenticalTensorsIsFlat) {
  ASSERT_EQ(run({"synth", "--kind", "tucker", "--n", "12", "--f", "5", "--m", "3", "--p", "2", "--q", "2", "--s", "2",
                 "--seed", "6", "--noise", "0.1", "--out", path("a.coo")}),
            0);
  fs::copy_file(path("a.coo"), path("b.coo"));
  ASSERT_EQ(run({"transfer", "--heatmap", "--tensors", path("a.coo"), path("b.coo"), "--dims", "2", "2", "2", "--seed", "1",
                 "--out", path("h.csv")}),
            0)
      << err_.str();
  const auto h = csv(path("h.csv"));
  ASSERT_EQ(h.values.rows(), 2);
  EXPECT_EQ(h.row_labels, (std::vector<std::string>{"a", "b"}));
  EXPECT_NEAR(h.values(0, 1), h.values(1, 0), 1e-6);
  EXPECT_NEAR(h.values(0, 1), h.values(0, 0), 1e-6);
  EXPECT_NEAR(h.values(1, 1), h.values(0, 0), 1e-6);

  ASSERT_EQ(run({"mrd", "--tensor", path("a.coo"), "--dims", "2", "2", "2", "--seed", "1", "--out", path("own.json")}), 0);
  const Model own = read_model(slurp(path("own.json")));
  EXPECT_NEAR(h.values(0, 0), std::get<mrd::TuckerModel>(own).fit, 1e-6);
}

TEST_F(Cli, TransferRejectsFeatureSchemaMismatch) {
  ASSERT_EQ(run({"synth", "--kind", "tucker", "--n", "10", "--f", "5", "--out", path("a.coo")}), 0);
  ASSERT_EQ(run({"synth", "--kind", "tucker", "--n", "10", "--f", "4", "--out", path("b.coo")}), 0);
  EXPECT_EQ(run({"transfer", "--heatmap", "--tensors", path("a.coo"), path("b.coo"), "--dims", "2", "2", "2", "--out",
                 path("h.csv")}),
            1);
  EXPECT_NE(err_.str().find("feature"), std::string::npos);
  ASSERT_EQ(run({"mrd", "--tensor", path("a.coo"), "--dims", "2", "2", "2", "--out", path("m.json")}), 0);
  EXPECT_EQ(run({"transfer", "--source", path("m.json"), "--tensor", path("b.coo"), "--fix", "F", "--out", path("t.json")}), 1);
}

TEST_F(Cli, FeaturesResolveComparePipeline) {
  spill(path("g.tsv"), "a\tb\nb\tc\nc\ta\nc\td\nd\te\n");
  ASSERT_EQ(run({"features", "--graph", path("g.tsv"), "--out", path("v.csv")}), 0) << err_.str();
  const auto v = csv(path("v.csv"));
  EXPECT_EQ(v.row_labels.size(), 5u);
  EXPECT_GE(v.values.minCoeff(), 0.0);

  ASSERT_EQ(run({"synth", "--kind", "twin", "--n", "40", "--noise", "0.2", "--seed", "1", "--log", "--out", path("tw")}), 0)
      << err_.str();
  ASSERT_EQ(run({"glrd", "--features", path("tw_source.csv"), "--roles", "3", "--out", path("m.json")}), 0) << err_.str();
  ASSERT_EQ(run({"resolve", "--model", path("m.json"), "--source", path("tw_source.csv"), "--target", path("tw_target.csv"),
                 "--shared", path("tw_shared.txt"), "--k", "1", "5", "40", "--out", path("r.csv")}),
            0)
      << err_.str();
  const std::string recall = slurp(path("r.csv"));
  EXPECT_EQ(recall.rfind("k,matches,shared,recall\n", 0), 0u);
  EXPECT_NE(recall.find("\n40,"), std::string::npos);

  ASSERT_EQ(run({"compare", "--model-a", path("m.json"), "--model-b", path("m.json"), "--out", path("j.csv")}), 0)
      << err_.str();
  const auto j = csv(path("j.csv"));
  EXPECT_EQ(j.values.rows(), 3);
  EXPECT_EQ(j.values.diagonal().maxCoeff(), 0.0);
}
