#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cli.hpp"

namespace lutzlab::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lutzlab-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run_cli(std::vector<std::string> args, const std::string& sub = "out") {
    args.insert(args.begin(), {"--out", (dir_ / sub).string()});
    std::ostringstream out, err;
    Result r;
    r.code = run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
  }

  std::string read(const std::string& rel) const {
    std::ifstream in(dir_ / rel, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  fs::path dir_;
};

TEST(Format, SeventeenDigits) {
  EXPECT_EQ(fmt17(0.1), "0.10000000000000001");
  EXPECT_EQ(fmt17(1.0), "1");
  EXPECT_EQ(fmt17(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(std::stod(fmt17(M_PI)), M_PI);
}

TEST(Format, HashIsFnv1a) {
  EXPECT_EQ(fnv1a64(""), 14695981039346656037ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Format, RationalParsing) {
  EXPECT_EQ(parse_rational(nlohmann::json("3/4"), "x"), mpq_class(3, 4));
  EXPECT_EQ(parse_rational(nlohmann::json(2), "x"), 2);
  EXPECT_THROW(parse_rational(nlohmann::json("3/0"), "x"), InputError);
  EXPECT_EQ(parse_rational(nlohmann::json("6/8"), "x"), mpq_class(3, 4));
  // Floats are taken at their exact binary value.
  EXPECT_EQ(parse_rational(nlohmann::json(0.5), "x"), mpq_class(1, 2));
  EXPECT_THROW(parse_rational(nlohmann::json("abc"), "x"), InputError);
  EXPECT_THROW(parse_rational(nlohmann::json(true), "x"), InputError);
}

TEST_F(CliTest, FoldReportsBothBounds) {
  const Result r = run_cli({"distance", "fold", "--a1", "1", "--a2", "3", "--ball", "0.5", "--delta", "0.4"});
  EXPECT_EQ(r.code, kExitPass) << r.err;
  const auto j = nlohmann::json::parse(read("out/fold.json"));
  EXPECT_NEAR(j["inclusion"].get<double>(), std::log(6.0), 1e-12);
  EXPECT_NEAR(j["folding"].get<double>(), std::log(5.6), 1e-15);
  EXPECT_NE(r.out.find("folding 1.7227665977411035"), std::string::npos) << r.out;
}

TEST_F(CliTest, FoldOutsideTheHypothesisIsAnInputError) {
  const Result r = run_cli({"distance", "fold", "--a1", "1", "--a2", "1.5"});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, UnknownOptionIsAnInputError) {
  EXPECT_EQ(run_cli({"distance", "fold", "--bogus", "1"}).code, kExitInput);
  EXPECT_EQ(run_cli({}).code, kExitInput);
}

TEST_F(CliTest, ShearIndex) {
  const Result r = run_cli({"reeb", "cz", "--shear", "1"});
  EXPECT_EQ(r.code, kExitPass) << r.err;
  EXPECT_EQ(nlohmann::json::parse(read("out/cz.json"))["index"].get<double>(), 0.5);
}

TEST_F(CliTest, CoverKeyInCzReport) {
  const Result r = run_cli({"reeb", "cz", "--k", "2"});
  EXPECT_EQ(r.code, kExitPass) << r.err;
  const auto j = nlohmann::json::parse(read("out/cz.json"));
  EXPECT_EQ(j["cover"].get<int>(), 2);
  EXPECT_TRUE(j["degenerate"].get<bool>());
}

TEST_F(CliTest, ZeroDifferentialGivesInfiniteBars) {
  const fs::path in = write("dga.json", R"({"generators":[{"name":"x","degree":1,"action":"3"},
    {"name":"y","degree":0,"action":2}],"differential":{},"action_cap":10,"word_cap":4})");
  const Result r = run_cli({"persist", "barcode", "--in", in.string()});
  EXPECT_EQ(r.code, kExitPass) << r.err;
  std::istringstream csv(read("out/barcode.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "label,birth,death");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "inf") << line;
  }
  EXPECT_GT(rows, 3);
}

TEST_F(CliTest, PersistCheckOnTheWorkedExample) {
  const fs::path in = write("dga.json", R"({"generators":[{"name":"x","degree":1,"action":3},
    {"name":"y","degree":1,"action":5}],"differential":{"x":[{"coeff":"1","word":[]}]},
    "action_cap":10,"word_cap":4})");
  const Result r = run_cli({"persist", "check", "--in", in.string()});
  EXPECT_EQ(r.code, kExitPass) << r.err;
  const auto j = nlohmann::json::parse(read("out/check.json"));
  EXPECT_TRUE(j["d_squared"].get<bool>());
  EXPECT_TRUE(j["oracle_match"].get<bool>());
  EXPECT_EQ(j["unit_vanishing_level"].get<std::string>(), "3");
}

TEST_F(CliTest, MalformedDgaNamesTheField) {
  const fs::path in = write("dga.json", R"({"generators":[{"name":"x","degree":1}],
    "differential":{},"action_cap":10,"word_cap":4})");
  const Result r = run_cli({"persist", "barcode", "--in", in.string()});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("action"), std::string::npos) << r.err;
  EXPECT_EQ(run_cli({"persist", "barcode", "--in", (dir_ / "missing.json").string()}).code, kExitInput);
}

TEST_F(CliTest, EmbedOutsideTheDomain) {
  const Result r = run_cli({"family", "embed", "--a", "0", "--b", "0.5"});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("epsilon"), std::string::npos) << r.err;
}

TEST_F(CliTest, ManifestListsEveryArtifact) {
  const Result r = run_cli({"profile", "build", "--samples", "11"});
  ASSERT_EQ(r.code, kExitPass) << r.err;
  EXPECT_EQ(read("out/profile.csv").substr(0, 20), "r,h1,h2,h1p,h2p,D\n0,");
  const auto m = nlohmann::json::parse(read("out/manifest.json"));
  EXPECT_EQ(m["command"], "profile build");
  EXPECT_EQ(m["status"], "pass");
  std::set<std::string> listed;
  for (const auto& a : m["artifacts"]) {
    const std::string file = a["file"];
    listed.insert(file);
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(read("out/" + file))));
    EXPECT_EQ(a["fnv1a64"].get<std::string>(), hex) << file;
  }
  std::set<std::string> on_disk;
  for (const auto& e : fs::directory_iterator(dir_ / "out"))
    if (e.path().filename() != "manifest.json") on_disk.insert(e.path().filename().string());
  EXPECT_EQ(listed, on_disk);
}

TEST_F(CliTest, ArtifactsIndependentOfThreadCount) {
  const std::vector<std::string> cmd{"family", "sweep", "--grid-n", "2"};
  std::vector<std::string> one{"--threads", "1"}, four{"--threads", "4"};
  one.insert(one.end(), cmd.begin(), cmd.end());
  four.insert(four.end(), cmd.begin(), cmd.end());
  ASSERT_EQ(run_cli(one, "t1").code, kExitPass);
  ASSERT_EQ(run_cli(four, "t4").code, kExitPass);
  for (const char* f : {"sweep.csv", "sweep.json", "family_grid.csv", "manifest.json"}) {
    EXPECT_EQ(read(std::string("t1/") + f), read(std::string("t4/") + f)) << f;
  }
}

TEST_F(CliTest, RepeatedRunsAreByteIdentical) {
  ASSERT_EQ(run_cli({"reeb", "minima"}, "a").code, kExitPass);
  ASSERT_EQ(run_cli({"reeb", "minima"}, "b").code, kExitPass);
  EXPECT_EQ(read("a/manifest.json"), read("b/manifest.json"));
}

}  // namespace
}  // namespace lutzlab::cli
