#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sbf/cli.hpp"

namespace sbf::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

// Value printed after `name` on a "name  value" line.
double field(const std::string& text, const std::string& name) {
  std::istringstream in(text);
  std::string key;
  std::string value;
  while (in >> key >> value) {
    if (key == name) return std::stod(value);
    std::getline(in, value);
  }
  ADD_FAILURE() << "no field " << name << " in\n" << text;
  return 0;
}

class CliFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sbf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  fs::path dir_;
};

constexpr const char* kSmallConfig = R"({
  "seed": 11, "m": 3000, "key_len": 16, "n_train_neg": 1000, "n_test_neg": 20000,
  "alpha_backend": "fingerprint_ph", "f_p": 0.01, "f_n": 0.5, "budgets": [8, 6],
  "oracle": {"kind": "synthetic"}
})";

TEST(Cli, OptimizePrintsClosedForm) {
  const Result r = run_cli({"optimize", "--f-p", "0.01", "--f-n", "0.5", "--b", "8"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(field(r.out, "b2"), 3.3147, 1e-3);
  EXPECT_NEAR(field(r.out, "model_fpr"), 0.000777, 1e-6);
  EXPECT_NEAR(field(r.out, "crossover"), 0.01, 1e-15);
}

TEST(Cli, OptimizeWithGridCrossCheck) {
  const Result r = run_cli({"optimize", "--backend", "standard_bloom", "--f-p", "0.01", "--f-n",
                            "0.5", "--b", "8", "--grid-step", "0.001"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(field(r.out, "b2"), 4.78207, 1e-4);
  EXPECT_NEAR(field(r.out, "grid_b2"), field(r.out, "b2"), 1e-3);
}

TEST(Cli, ModelValues) {
  const auto model = [](std::vector<std::string> extra) {
    std::vector<std::string> args{"model", "--alpha", "0.5", "--f-p", "0.01", "--f-n", "0.5"};
    args.insert(args.end(), extra.begin(), extra.end());
    const Result r = run_cli(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return field(r.out, "model_fpr");
  };
  EXPECT_NEAR(model({"--b1", "0", "--b2", "8"}), 0.010015, 1e-6);
  EXPECT_NEAR(model({"--b", "8", "--optimal"}), 0.000777, 1e-6);
  EXPECT_NEAR(model({"--b1", "0", "--b2", "6"}), 0.010242, 1e-6);
  EXPECT_NEAR(model({"--b", "6", "--optimal"}), 0.003109, 1e-6);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({}).code, kExitConfigError);
  EXPECT_EQ(run_cli({"frobnicate"}).code, kExitConfigError);
  EXPECT_EQ(run_cli({"optimize", "--f-p", "0.01", "--b", "8"}).code, kExitConfigError);
  EXPECT_EQ(run_cli({"model", "--f-p", "0.01", "--f-n", "0.5", "--b1", "1"}).code,
            kExitConfigError);
  EXPECT_EQ(run_cli({"model", "--f-p", "0.01", "--f-n", "0.5"}).code, kExitConfigError);
  EXPECT_EQ(run_cli({"optimize", "--f-p", "2", "--f-n", "0.5", "--b", "8"}).code,
            kExitConfigError);
  EXPECT_EQ(run_cli({"--help"}).code, kExitOk);
}

TEST(Config, Defaults) {
  const ExperimentConfig c = parse_config("{}");
  EXPECT_EQ(c.m, 100000u);
  EXPECT_EQ(c.n_test_neg, 1000000u);
  EXPECT_EQ(c.backend, FilterBackend::kFingerprintPH);
  EXPECT_EQ(c.oracle.kind, OracleSettings::Kind::kSynthetic);
}

TEST(Config, ParsesAllFields) {
  const ExperimentConfig c = parse_config(R"({
    "seed": 18446744073709551615, "m": 10, "key_len": 4, "n_train_neg": 3, "n_test_neg": 5,
    "alpha_backend": 0.6185, "f_p": 0.2, "f_n": 0.3, "budgets": [1, 2.5],
    "oracle": {"kind": "score", "params": {"smoothing": 0.25}}})");
  EXPECT_EQ(c.seed, 18446744073709551615ull);
  EXPECT_EQ(c.key_len, 4u);
  EXPECT_EQ(c.backend, FilterBackend::kStandardBloom);
  EXPECT_EQ(c.f_p, 0.2);
  EXPECT_EQ(c.budgets, (std::vector<double>{1, 2.5}));
  EXPECT_EQ(c.oracle.kind, OracleSettings::Kind::kScore);
  EXPECT_EQ(c.oracle.smoothing, 0.25);
  EXPECT_EQ(parse_config(R"({"alpha_backend": 0.5})").backend, FilterBackend::kFingerprintPH);
}

TEST(Config, RejectsBadDocuments) {
  for (const char* doc : {
           "not json", "[]", R"({"mm": 1})", R"({"m": -1})", R"({"m": 1.5})",
           R"({"key_len": 1})", R"({"f_p": 1.5})", R"({"f_n": "x"})", R"({"budgets": []})",
           R"({"budgets": [-1]})", R"({"alpha_backend": 0.7})", R"({"alpha_backend": "cuckoo"})",
           R"({"oracle": {"kind": "neural"}})", R"({"oracle": {"kind": "synthetic", "x": 1}})",
           R"({"oracle": {"kind": "score", "params": {"smoothing": 0}}})",
           R"({"oracle": {"kind": "synthetic", "params": {"smoothing": 1}}})",
           R"({"m": 0, "oracle": {"kind": "score"}})"}) {
    EXPECT_THROW(parse_config(doc), ConfigError) << doc;
  }
}

TEST_F(CliFiles, ConfigErrorsExitTwo) {
  EXPECT_EQ(run_cli({"sweep", "--config", path("missing.json")}).code, kExitConfigError);
  const std::string bad = write("bad.json", R"({"f_n": 7})");
  const Result r = run_cli({"sweep", "--config", bad});
  EXPECT_EQ(r.code, kExitConfigError);
  EXPECT_NE(r.err.find("f_n"), std::string::npos);
}

TEST_F(CliFiles, BuildThenQuery) {
  const std::string config = write("c.json", kSmallConfig);
  for (const char* kind : {"plain", "learned", "sandwiched"}) {
    const Result built = run_cli({"build", "--config", config, "--structure", kind, "--b", "8",
                                  "--out", path("s.bin"), "--keys-out", path("keys.txt"),
                                  "--negatives-out", path("neg.txt")});
    ASSERT_EQ(built.code, 0) << built.err;
    const Result hits = run_cli({"query", "--structure-file", path("s.bin"), "--keys",
                                 path("keys.txt")});
    ASSERT_EQ(hits.code, 0) << hits.err;
    std::istringstream lines(hits.out);
    std::string hex, verdict;
    std::size_t count = 0;
    while (lines >> hex >> verdict) {
      ASSERT_EQ(verdict, "yes") << kind << " " << hex;
      ++count;
    }
    EXPECT_EQ(count, 3000u);

    const Result probes = run_cli({"query", "--structure-file", path("s.bin"), "--keys",
                                   path("neg.txt")});
    ASSERT_EQ(probes.code, 0);
    std::istringstream neg(probes.out);
    std::size_t yes = 0, total = 0;
    while (neg >> hex >> verdict) {
      yes += verdict == "yes";
      ++total;
    }
    EXPECT_EQ(total, 20000u);
    EXPECT_LT(yes, 20000u / 20) << kind;
  }
}

TEST_F(CliFiles, QueryRejectsBadInputs) {
  const std::string config = write("c.json", kSmallConfig);
  ASSERT_EQ(run_cli({"build", "--config", config, "--structure", "plain", "--b", "4", "--out",
                     path("s.bin")})
                .code,
            0);
  const std::string keys = write("k.txt", "0102\nxyz\n");
  EXPECT_EQ(run_cli({"query", "--structure-file", path("s.bin"), "--keys", keys}).code,
            kExitConfigError);
  const std::string blob = read("s.bin");
  write("t.bin", blob.substr(0, blob.size() / 2));
  const std::string good = write("g.txt", "0102\n");
  const Result r = run_cli({"query", "--structure-file", path("t.bin"), "--keys", good});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find("truncated"), std::string::npos);
  EXPECT_EQ(run_cli({"build", "--config", config, "--structure", "cuckoo", "--b", "4", "--out",
                     path("s.bin")})
                .code,
            kExitConfigError);
}

TEST_F(CliFiles, SweepWritesCsvAndJson) {
  const std::string config = write("c.json", kSmallConfig);
  const Result r = run_cli({"sweep", "--config", config, "--csv", path("a.csv"), "--json",
                            path("a.json"), "--deterministic"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read("a.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kCsvHeader);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  EXPECT_EQ(csv.find("6,plain"), csv.find('\n') + 1);
  EXPECT_NE(read("a.json").find("\"structure\": \"sandwiched\""), std::string::npos);
  EXPECT_NE(r.out.find("sandwiched"), std::string::npos);
}

TEST_F(CliFiles, SweepCsvIsByteIdenticalAcrossRuns) {
  const std::string config = write("c.json", kSmallConfig);
  ASSERT_EQ(run_cli({"sweep", "--config", config, "--csv", path("a.csv"), "--deterministic"}).code,
            0);
  ASSERT_EQ(run_cli({"sweep", "--config", config, "--csv", path("b.csv"), "--deterministic",
                     "--threads", "3"})
                .code,
            0);
  EXPECT_EQ(read("a.csv"), read("b.csv"));
}

TEST_F(CliFiles, MeasureAndCalibrate) {
  const std::string config = write("c.json", kSmallConfig);
  const Result m = run_cli({"measure", "--config", config, "--structure", "learned", "--b", "8",
                            "--csv", path("m.csv")});
  ASSERT_EQ(m.code, 0) << m.err;
  EXPECT_NE(read("m.csv").find("8,learned,0,8,"), std::string::npos);

  const Result c = run_cli({"calibrate", "--config", config});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(field(c.out, "f_n"), 0.5);
  EXPECT_NEAR(field(c.out, "f_p_test"), 0.01, 0.003);
}

}  // namespace
}  // namespace sbf::cli
