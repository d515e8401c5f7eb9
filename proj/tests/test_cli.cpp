#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "feed4org/analytics.hpp"
#include "feed4org/cli.hpp"
#include "feed4org/config.hpp"
#include "feed4org/sha256.hpp"
#include "support/temp_dir.hpp"

using namespace feed4org;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    config_path = (dir / "feed4org.json").string();
    std::ofstream(config_path) << R"({"data_dir":"data","genesis_supply":5000,"sync":"flush",)"
                                  R"("listen":{"host":"127.0.0.1","port":0}})";
  }
  CliResult run(std::vector<std::string> args) {
    args.insert(args.begin(), {"--config", config_path});
    return cli(args);
  }
  std::filesystem::path ledger() const { return dir / "data" / "ledger.log"; }

  TempDir dir;
  std::string config_path;
};

}  // namespace

TEST_F(CliTest, InitThenVerify) {
  auto r = run({"init", "--supply", "1000000"});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"verify"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, 2), "ok");
  const auto log = load_log(ledger());
  EXPECT_EQ(log.front().kind, EventKind::MintToken);
  EXPECT_EQ(log.front().payload.at("amount"), 1000000);
  EXPECT_EQ(run({"init"}).code, 1);
}

TEST_F(CliTest, InitUsesConfiguredSupplyByDefault) {
  ASSERT_EQ(run({"init"}).code, 0);
  EXPECT_EQ(load_log(ledger()).front().payload.at("amount"), 5000);
}

TEST_F(CliTest, QuestionLoadIsAllOrNothing) {
  ASSERT_EQ(run({"init"}).code, 0);
  const auto before = load_log(ledger()).size();
  const auto bad = dir / "questions.txt";
  std::ofstream(bad) << R"({"prompt":"Rate us","qtype":"likert","likert_points":5})" "\n"
                     << R"({"prompt":"Pick","qtype":"choice-single","options":["a","b"]})" "\n"
                     << R"({"prompt":"Broken","qtype":"choice-single","options":["only"]})" "\n";
  auto r = run({"questions", "load", bad.string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("question 3"), std::string::npos) << r.err;
  EXPECT_EQ(load_log(ledger()).size(), before);

  const auto garbled = dir / "garbled.txt";
  std::ofstream(garbled) << R"({"prompt":"Rate us","qtype":"likert"})" "\n{not json\n";
  EXPECT_NE(run({"questions", "load", garbled.string()}).code, 0);
  EXPECT_EQ(load_log(ledger()).size(), before);

  const auto good = dir / "good.json";
  std::ofstream(good) << R"([{"prompt":"Rate us","qtype":"likert"},)"
                      << R"({"prompt":"Why?","qtype":"text-input"}])";
  r = run({"questions", "load", good.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_log(ledger()).size(), before + 2);
}

TEST_F(CliTest, PolicyAndCohortCommandsWriteConfigEvents) {
  ASSERT_EQ(run({"init"}).code, 0);
  auto r = run({"policy", "set", "--cohort", "wave2", "--incentives", "on", "--vote-cost", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto last = load_log(ledger()).back();
  EXPECT_EQ(last.kind, EventKind::ConfigChange);
  EXPECT_EQ(last.payload.at("policy").at("vote_cost_context"), 3);
  EXPECT_EQ(run({"policy", "set", "--cohort", "x", "--incentives", "maybe"}).code, kExitUsage);
  EXPECT_EQ(run({"policy", "set", "--cohort", "x", "--incentives", "on", "--vote-cost", "-1"}).code, 1);

  EXPECT_EQ(run({"cohort", "assign", "--account", "ghost", "--cohort", "wave2"}).code, 1);
  EXPECT_EQ(run({"cohort", "assign", "--account", "operator", "--cohort", "nope"}).code, 1);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"init", "--supply", "lots"}).code, kExitUsage);
  EXPECT_EQ(run({"export", "--report", "interactions"}).code, kExitUsage);
  const auto r = run({"simulate", "--profile", "weird"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, MissingConfigIsReported) {
  const auto r = cli({"--config", (dir / "absent.json").string(), "verify"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("config-not-found"), std::string::npos);
}

TEST_F(CliTest, EnvironmentVariableSelectsConfig) {
  setenv(kConfigEnv, config_path.c_str(), 1);
  const auto r = cli({"init"});
  unsetenv(kConfigEnv);
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(ledger()));
}

TEST_F(CliTest, VerifyFailsOnTamperedLedger) {
  ASSERT_EQ(run({"init"}).code, 0);
  auto text = slurp(ledger());
  text[text.find("operator")] = 'O';
  std::ofstream(ledger(), std::ios::trunc) << text;
  const auto r = run({"verify"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("seq 1"), std::string::npos) << r.err;
}

TEST_F(CliTest, SimulateTwiceIsByteIdentical) {
  const auto a = dir / "a.log";
  const auto b = dir / "b.log";
  auto r = run({"simulate", "--users", "132", "--seed", "7", "--out", a.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"simulate", "--users", "132", "--seed", "7", "--out", b.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(sha256_hex(slurp(a)), sha256_hex(slurp(b)));
  EXPECT_EQ(run({"simulate", "--out", a.string()}).code, 1);
}

TEST_F(CliTest, ExportWritesParsableCsv) {
  auto r = run({"simulate", "--users", "30", "--seed", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto out = dir / "interactions.csv";
  r = run({"export", "--report", "interactions", "--out", out.string(), "--cohort", "treatment"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_interaction_csv(slurp(out));
  ASSERT_EQ(rows.size(), 9u);
  EXPECT_EQ(rows[0].cohort, "treatment");
  r = run({"export", "--report", "leaderboard", "--out", (dir / "lb.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(parse_leaderboard_csv(slurp(dir / "lb.csv")).empty());
  EXPECT_EQ(run({"export", "--report", "nope", "--out", out.string()}).code, kExitUsage);
}

TEST_F(CliTest, SnapshotIsUsedOnReopen) {
  ASSERT_EQ(run({"simulate", "--users", "20", "--seed", "5"}).code, 0);
  ASSERT_EQ(run({"snapshot"}).code, 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "data" / "snapshot.json"));
  const auto s = read_snapshot(dir / "data" / "snapshot.json");
  EXPECT_EQ(s.covers, load_log(ledger()).size());
  ASSERT_EQ(run({"policy", "set", "--cohort", "late", "--incentives", "off"}).code, 0);
  EXPECT_EQ(run({"verify"}).code, 0);
}

TEST_F(CliTest, ServeAnswersAndStopsOnSigterm) {
  std::ofstream(config_path, std::ios::trunc)
      << R"({"data_dir":"data","sync":"flush","listen":{"host":"127.0.0.1","port":18731},)"
         R"("about":"hello"})";
  ASSERT_EQ(run({"init"}).code, 0);
  const pid_t child = fork();
  ASSERT_GE(child, 0);
  if (child == 0) {
    const int devnull = ::open("/dev/null", O_WRONLY);
    dup2(devnull, STDOUT_FILENO);
    execl(FEED4ORG_CLI, FEED4ORG_CLI, "--config", config_path.c_str(), "serve", nullptr);
    _exit(127);
  }
  httplib::Client client("127.0.0.1", 18731);
  httplib::Result res;
  for (int attempt = 0; attempt < 100 && !res; ++attempt) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    res = client.Get("/about");
  }
  ASSERT_TRUE(res);
  EXPECT_EQ(nlohmann::json::parse(res->body).at("about"), "hello");
  // The ledger is held by the server.
  EXPECT_EQ(run({"policy", "set", "--cohort", "x", "--incentives", "on"}).code, 1);
  kill(child, SIGTERM);
  int status = 0;
  waitpid(child, &status, 0);
  EXPECT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "data" / "snapshot.json"));
}
