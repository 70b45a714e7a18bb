#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "esp/io.hpp"
#include "esp/metrics.hpp"
#include "esp/synth.hpp"
#include "support/fixtures.hpp"

using namespace esp;
using namespace esp::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

fs::path temp_dir() {
  static int counter = 0;
  const fs::path dir =
      fs::temp_directory_path() / ("esp_cli_test_" + std::to_string(::getpid()) + "_" +
                                   std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

RunResult run(const std::string& args) {
  static int counter = 0;
  const fs::path out = fs::temp_directory_path() /
                       ("esp_cli_out_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter++) + ".txt");
  const std::string cmd = std::string(ESPTK_BIN) + " " + args + " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  r.output.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

json read_aggregate(const fs::path& report) {
  std::ifstream in(report);
  std::string line;
  json agg;
  while (std::getline(in, line)) {
    const json j = json::parse(line);
    if (j.value("kind", "") == "aggregate") agg = j;
  }
  return agg;
}

std::vector<std::string> suite_stream_files(const fs::path& dir) {
  const json manifest = json::parse(slurp(dir / "suite.json"));
  std::vector<std::string> files;
  for (const json& c : manifest.at("cases")) {
    files.push_back((dir / c.at("file").get<std::string>()).string());
  }
  return files;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const std::string& p : parts) {
    if (!out.empty()) out += " ";
    out += p;
  }
  return out;
}

}  // namespace

TEST_CASE("usage surface") {
  CHECK(run("--help").exit_code == 0);
  CHECK(run("").exit_code == 2);                       // a subcommand is required
  CHECK(run("frobnicate").exit_code == 2);             // unknown subcommand
  CHECK(run("eval --tokens x.jsonl --scripted oracle --no-such-flag").exit_code == 2);
  CHECK(run("eval --tokens /nonexistent.jsonl --scripted oracle").exit_code == 2);
  CHECK(run("prompt --tokens /nonexistent.jsonl").exit_code == 2);
}

TEST_CASE("cli pipeline: synth, mine, split, features, eval, prompt") {
  const fs::path dir = temp_dir();
  const fs::path suite = dir / "suite";
  const fs::path tokens = dir / "tokens.jsonl";

  REQUIRE(run("synth --n 4 --seed 11 --out-dir " + suite.string()).exit_code == 0);
  const std::vector<std::string> streams = suite_stream_files(suite);
  REQUIRE(streams.size() == 4);

  REQUIRE(run("mine " + join(streams) + " --out " + tokens.string()).exit_code == 0);
  const std::vector<Token> mined = parse_tokens(tokens);
  REQUIRE(mined.size() == 4);

  SUBCASE("split is byte-identical across runs and 8:1:1 within one") {
    const fs::path p1 = dir / "s1";
    const fs::path p2 = dir / "s2";
    REQUIRE(run("split --tokens " + tokens.string() + " --seed 5 --out-prefix " + p1.string())
                .exit_code == 0);
    REQUIRE(run("split --tokens " + tokens.string() + " --seed 5 --out-prefix " + p2.string())
                .exit_code == 0);
    for (const char* part : {".train.jsonl", ".val.jsonl", ".test.jsonl"}) {
      CHECK(slurp(p1.string() + part) == slurp(p2.string() + part));
    }
    const size_t n_train = parse_tokens(p1.string() + ".train.jsonl").size();
    CHECK(n_train == 3);  // llround(0.8 * 4)
  }

  SUBCASE("features emits one record per token") {
    const fs::path feats = dir / "feats.jsonl";
    REQUIRE(run("features --tokens " + tokens.string() + " --out " + feats.string())
                .exit_code == 0);
    std::ifstream in(feats);
    std::string line;
    int records = 0;
    while (std::getline(in, line)) {
      const json j = json::parse(line);
      CHECK(j.at("embedding").size() == kEspEmbeddingDim);
      CHECK(j.at("esp").at("channels").size() == 5);
      ++records;
    }
    CHECK(records == 4);
  }

  SUBCASE("oracle eval reports zero errors and accuracy 1") {
    const fs::path report = dir / "oracle.jsonl";
    const RunResult r = run("eval --tokens " + tokens.string() +
                            " --scripted oracle --out " + report.string());
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("accuracy 1.000") != std::string::npos);
    const json agg = read_aggregate(report);
    CHECK(agg.at("mean_min_cte").get<double>() == 0.0);
    CHECK(agg.at("mean_min_ade").get<double>() == 0.0);
    CHECK(agg.at("mean_min_fde").get<double>() == 0.0);
    CHECK(agg.at("accuracy").get<double>() == 1.0);
  }

  SUBCASE("file pipeline matches the in-process run") {
    const fs::path report = dir / "delayed.jsonl";
    REQUIRE(run("eval --tokens " + tokens.string() +
                " --scripted delayed:1.0 --k 3 --quiet --out " + report.string())
                .exit_code == 0);
    const json agg = read_aggregate(report);

    std::vector<Prediction> preds;
    for (const Token& t : mined) {
      preds.push_back(scripted_predictor(t, PredictorKind::delayed, 1.0, 3));
    }
    const MetricsReport direct = evaluate(mined, preds, EvalConfig{});
    CHECK(agg.at("mean_min_cte").get<double>() ==
          doctest::Approx(direct.mean_min_cte).epsilon(1e-6));
    CHECK(agg.at("mean_min_ade").get<double>() ==
          doctest::Approx(direct.mean_min_ade).epsilon(1e-6));
    CHECK(agg.at("accuracy").get<double>() == doctest::Approx(direct.cutin.accuracy));
    CHECK(agg.at("tokens_evaluated").get<int>() == static_cast<int>(direct.per_token.size()));
    CHECK(std::abs(direct.mean_min_cte - 1.0) <= 0.1);
  }

  SUBCASE("prompts are byte-identical across runs") {
    const RunResult a = run("prompt --tokens " + tokens.string());
    const RunResult b = run("prompt --tokens " + tokens.string());
    REQUIRE(a.exit_code == 0);
    CHECK(a.output == b.output);
    CHECK(a.output.find("== Scene ==") != std::string::npos);

    const RunResult q = run("prompt --tokens " + tokens.string() + " --query tv_speed_trend");
    REQUIRE(q.exit_code == 0);
    CHECK(!q.output.empty());

    CHECK(run("prompt --tokens " + tokens.string() + " --query bogus").exit_code == 2);
  }

  SUBCASE("eval needs a prediction source") {
    CHECK(run("eval --tokens " + tokens.string()).exit_code == 2);
  }
}

TEST_CASE("cli synth negative suite mines to zero tokens") {
  const fs::path dir = temp_dir();
  const fs::path suite = dir / "neg";
  REQUIRE(run("synth --n 3 --seed 2 --negative --out-dir " + suite.string()).exit_code == 0);
  const std::vector<std::string> streams = suite_stream_files(suite);
  const fs::path tokens = dir / "none.jsonl";
  REQUIRE(run("mine " + join(streams) + " --out " + tokens.string()).exit_code == 0);
  CHECK(parse_tokens(tokens).empty());
}
