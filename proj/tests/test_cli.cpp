#include "psiegel/psiegel.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace psiegel;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("psiegel_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args, const std::string& env = "") const {
    const std::string cmd = env + " " + std::string(PSIEGEL_CLI) + " " + args + " 2>" + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string cache() const { return "--cache-dir " + path("cache"); }

  static std::string slurp(const std::string& file) {
    std::ifstream is(file);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  }
  static nlohmann::json load(const std::string& file) { return nlohmann::json::parse(slurp(file)); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, EisensteinDump) {
  ASSERT_EQ(run("eisenstein --k 4 --degree 1 --bound 10 --output " + path("e4.json")), 0);
  const QExpansion f = QExpansion::from_json(load(path("e4.json")));
  EXPECT_EQ(f.coeff(HalfIntegralMatrix::diagonal({1})), 240);
  EXPECT_EQ(f.trace_bound(), 10);
  EXPECT_EQ(run("eisenstein --k 5"), 2);
  EXPECT_FALSE(slurp(path("stderr.txt")).empty());
}

TEST_F(Cli, ThetaDump) {
  std::ofstream(path("form.txt")) << "1; 2\n";
  ASSERT_EQ(run("theta --form " + path("form.txt") + " --degree 1 --bound 9 --output " + path("t.json")), 0);
  EXPECT_EQ(QExpansion::from_json(load(path("t.json"))).coeff(HalfIntegralMatrix::diagonal({1})), 2);
  std::ofstream(path("form.json")) << "{\"twoT\": [[2, 1], [1, 2]]}";
  ASSERT_EQ(run("theta --form " + path("form.json") + " --degree 1 --bound 3 --output " + path("a2.json")), 0);
  EXPECT_EQ(QExpansion::from_json(load(path("a2.json"))).coeff(HalfIntegralMatrix::diagonal({1})), 6);
  EXPECT_EQ(run("theta --form '2; 2 3; 3 2'"), 2);
}

TEST_F(Cli, GeneraFilesAreDeterministic) {
  ASSERT_EQ(run("genera --rank 2 --level 3 " + cache() + " --output " + path("g1.json")), 0);
  ASSERT_EQ(run("genera --rank 2 --level 3 --cache-dir " + path("other") + " --output " + path("g2.json")), 0);
  EXPECT_EQ(slurp(path("g1.json")), slurp(path("g2.json")));
  const auto j = load(path("g1.json"));
  ASSERT_EQ(j.at("classes").size(), 1u);
  EXPECT_EQ(j.at("classes")[0].at("epsilon"), 12);
  ASSERT_EQ(run("classes --rank 2 --level 1 --output " + path("c.json")), 0);
  EXPECT_TRUE(load(path("c.json")).at("classes").empty());
  EXPECT_EQ(run("classes --rank 3 --level 7"), 2);
}

TEST_F(Cli, CacheDirectoryFromEnvironment) {
  ASSERT_EQ(run("genera --rank 2 --level 7 --output " + path("g.json"), "PSIEGEL_CACHE_DIR=" + path("env")), 0);
  EXPECT_TRUE(fs::exists(genus_cache_path(path("env"), 2, 7)));
}

TEST_F(Cli, VerifyMainFlagship) {
  ASSERT_EQ(run("verify-main --p 7 --k 2 --j 0 --degree 1 --bound 50 --m-max 3 " + cache() + " --output " + path("r1.json")), 0);
  ASSERT_EQ(run("verify-main --p 7 --k 2 --j 0 --degree 1 --bound 50 --m-max 3 " + cache() + " --output " + path("r2.json")), 0);
  EXPECT_EQ(slurp(path("r1.json")), slurp(path("r2.json")));
  const auto j = load(path("r1.json"));
  EXPECT_TRUE(j.at("passed").get<bool>());
  EXPECT_EQ(j.at("rungs").size(), 3u);
  EXPECT_EQ(run("verify-main --degree 2 --bound 8 --m-max 2 " + cache() + " --output " + path("r3.json")), 0);
}

TEST_F(Cli, CorruptedGenusCacheFailsAtFit) {
  ASSERT_EQ(run("genera --rank 4 --level 7 " + cache() + " --output " + path("g.json")), 0);
  const std::string file = genus_cache_path(path("cache"), 4, 7).string();
  auto j = load(file);
  j["classes"][0]["epsilon"] = 31;
  std::ofstream(file) << j.dump(2);
  EXPECT_EQ(run("verify-main --bound 20 --m-max 1 " + cache() + " --output " + path("r.json")), 1);
  EXPECT_EQ(load(path("r.json")).at("failed_stage"), "fit");
  std::ofstream(file) << "{ not json";
  EXPECT_EQ(run("verify-main --bound 20 --m-max 1 " + cache() + " --output " + path("r.json")), 1);
  EXPECT_EQ(load(path("r.json")).at("failed_stage"), "fit");
}

TEST_F(Cli, ExitStatusFollowsVerdict) {
  EXPECT_EQ(run("verify-main --k 3 " + cache() + " --output " + path("r.json")), 1);
  EXPECT_EQ(load(path("r.json")).at("failed_stage"), "config");
  EXPECT_EQ(run("verify-main --p 5 --k 2 --bound 20 --m-max 1 " + cache() + " --output " + path("r.json")), 1);
  EXPECT_EQ(run("verify-main --p 5 --k 2 --bound 20 --m-max 1 --exploratory " + cache() + " --output " + path("x.json")), 0);
  EXPECT_EQ(load(path("x.json")).at("mode"), "exploratory (outside theorem hypotheses)");
  EXPECT_EQ(run("no-such-command"), 2);
  EXPECT_EQ(run(""), 2);
}

TEST_F(Cli, LimitAndSingularRank) {
  ASSERT_EQ(run("limit --p 7 --k 2 --bound 20 --m-max 2 " + cache() + " --output " + path("l.json")), 0);
  const auto l = load(path("l.json"));
  EXPECT_EQ(l.at("weights"), nlohmann::json({44, 296}));
  EXPECT_TRUE(fs::exists(path("cache") + "/eisenstein_k44_n1_B20.json"));
  ASSERT_EQ(run("eisenstein --k 4 --bound 12 --output " + path("e4.json")), 0);
  ASSERT_EQ(run("singular-rank --input " + path("e4.json") + " --p 5 --m 1 --output " + path("s.json")), 0);
  const auto s = load(path("s.json"));
  EXPECT_TRUE(s.at("singular").get<bool>());
  EXPECT_EQ(s.at("p_rank"), 0);
  ASSERT_EQ(run("singular-rank --input " + path("e4.json") + " --p 7 --m 1 --output " + path("s7.json")), 0);
  EXPECT_FALSE(load(path("s7.json")).at("singular").get<bool>());
}

TEST_F(Cli, DirectLimit) {
  ASSERT_EQ(run("direct-limit --form '4; 2 0 1 0; 0 2 0 1; 1 0 4 0; 0 1 0 4' --m-max 2 --output " + path("d.json")), 0);
  const auto d = load(path("d.json"));
  EXPECT_EQ(d.at("rungs")[1].at("residue"), "32");
  EXPECT_FALSE(d.at("tends_to_zero").get<bool>());
}
