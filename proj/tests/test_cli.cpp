#include <gtest/gtest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(ALGSHAPE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("algshape_cli_" + std::string(
        ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, EndToEndIsDeterministic) {
  ASSERT_EQ(run("generate --kind conic --center 0.5 0 --axes 4 2.5 --angle 0.3 --L 6 -o " + path("e.json")), 0);
  ASSERT_EQ(run("sample --shape " + path("e.json") + " --m 4 --L 6 --snr 25 --seed 4 -o " + path("s.csv")), 0);
  for (const char* out : {"r1.json", "r2.json"}) {
    ASSERT_EQ(run("reconstruct --samples " + path("s.csv") + " --mode conventional --n 2 -o " + path(out)), 0);
  }
  EXPECT_EQ(slurp(path("r1.json")), slurp(path("r2.json")));
  EXPECT_TRUE(fs::exists(path("r1.json.manifest.json")));
  const auto manifest = nlohmann::json::parse(slurp(path("r1.json.manifest.json")));
  EXPECT_EQ(manifest["command"], "reconstruct");
  EXPECT_EQ(manifest["config"]["reconstruct"]["cascade"], "auto");

  ASSERT_EQ(run("evaluate --truth " + path("e.json") + " --test " + path("r1.json") + " --L 6 -o " + path("m.json")),
            0);
  const auto metrics = nlohmann::json::parse(slurp(path("m.json")));
  EXPECT_GT(metrics["stage_psnr_db"]["final"].get<double>(), 15.0);
}

TEST_F(Cli, ConfigFile) {
  {
    std::ofstream cfg(path("run.json"));
    cfg << R"({"generate": {"kind": "bounded-quartic", "seed": 3, "L": 11, "output": ")" << path("q.json")
        << R"("}})";
  }
  ASSERT_EQ(run("--config " + path("run.json") + " generate"), 0);
  EXPECT_TRUE(fs::exists(path("q.json")));
  ASSERT_EQ(run("generate --kind bounded-quartic --seed 3 --L 11 -o " + path("q2.json")), 0);
  EXPECT_EQ(slurp(path("q.json")), slurp(path("q2.json")));
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("reconstruct --bogus"), 2);
  EXPECT_EQ(run("generate --kind triangle -o " + path("x.json")), 2);
  EXPECT_EQ(run("reconstruct --samples " + path("missing.csv") + " -o " + path("r.json")), 2);
  EXPECT_EQ(run("repro --scenario nonexistent"), 2);
  // Samples of a shape entirely outside the plane carry no information.
  ASSERT_EQ(run("generate --kind conic --center 40 40 --axes 1 1 --L 6 -o " + path("far.json")), 0);
  ASSERT_EQ(run("sample --shape " + path("far.json") + " --m 4 --L 6 -o " + path("z.csv")), 0);
  EXPECT_EQ(run("reconstruct --samples " + path("z.csv") + " --mode conventional --n 2 -o " + path("r.json")), 3);
}

TEST_F(Cli, GenerateCases) {
  ASSERT_EQ(run("generate --kind conic --circle 1.0 -o " + path("c.json")), 0);
  const auto circle = nlohmann::json::parse(slurp(path("c.json")));
  EXPECT_EQ(circle["degree"], 2);
  EXPECT_EQ(circle["coeffs"], nlohmann::json::parse(R"([{"a":-1.0,"i":0,"j":0},{"a":1.0,"i":0,"j":2},{"a":1.0,"i":2,"j":0}])"));
  ASSERT_EQ(run("generate --kind bounded-quartic --seed 7 -o " + path("a.json")), 0);
  ASSERT_EQ(run("generate --kind bounded-quartic --seed 7 -o " + path("b.json")), 0);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  EXPECT_NE(run("generate --kind bezier --L 6 --points -4 -4 4 4 4 -4 -4 4 -o " + path("z.pgm")), 0);
  ASSERT_EQ(run("generate --kind bezier --L 6 --points -4.5 -3.5 4.5 -4 4 4.5 -5 3 -o " + path("b.pgm")), 0);
  EXPECT_TRUE(fs::exists(path("b.pgm.polyline.csv")));
}
