#include <doctest.h>

#include <filesystem>
#include <stdexcept>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "esp/esp_features.hpp"
#include "esp/io.hpp"
#include "esp/metrics.hpp"
#include "esp/synth.hpp"
#include "support/fixtures.hpp"

using namespace esp;
using namespace esp::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path temp_dir() {
  static int counter = 0;
  const fs::path dir =
      fs::temp_directory_path() / ("esp_io_test_" + std::to_string(::getpid()) + "_" +
                                   std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

std::vector<Token> sample_tokens(int n, uint64_t seed) {
  Rng rng(seed);
  std::vector<Token> out;
  for (int i = 0; i < n; ++i) out.push_back(random_token(rng, "tok" + std::to_string(i)));
  return out;
}

}  // namespace

TEST_CASE("token round trip: parse of write is the canonical identity") {
  const fs::path dir = temp_dir();
  const std::vector<Token> tokens = sample_tokens(50, 1);

  const fs::path f1 = dir / "a.jsonl";
  write_tokens(tokens, f1);
  const std::vector<Token> parsed = parse_tokens(f1);
  REQUIRE(parsed.size() == tokens.size());

  // canonical form is a fixed point: writing the parsed tokens is bytewise
  // identical, and parsing again gives equal records
  const fs::path f2 = dir / "b.jsonl";
  write_tokens(parsed, f2);
  CHECK(slurp(f1) == slurp(f2));

  const std::vector<Token> reparsed = parse_tokens(f2);
  REQUIRE(reparsed.size() == parsed.size());
  for (size_t i = 0; i < parsed.size(); ++i) {
    CHECK(token_to_line(parsed[i]) == token_to_line(reparsed[i]));
    CHECK(parsed[i].id == tokens[i].id);
    CHECK(parsed[i].evs.size() == tokens[i].evs.size());
    CHECK(parsed[i].t_c.has_value() == tokens[i].t_c.has_value());
  }
}

TEST_CASE("truncated last line errors with its line number") {
  const fs::path dir = temp_dir();
  const std::vector<Token> tokens = sample_tokens(3, 2);
  const fs::path f = dir / "trunc.jsonl";
  write_tokens(tokens, f);
  std::string content = slurp(f);
  content.resize(content.size() - 40);  // chop into the last record
  spit(f, content);
  CHECK_THROWS_WITH_AS(parse_tokens(f), doctest::Contains(":3:"), std::runtime_error);
}

TEST_CASE("stored t_c inconsistent with geometry is rejected") {
  const fs::path dir = temp_dir();
  TokenBuilder b;
  b.crossing_contact_time = 3.45;  // geometry gives 3.5
  const Token token = b.build();
  const fs::path f = dir / "tc.jsonl";
  write_tokens(std::vector<Token>{token}, f);

  json j = json::parse(slurp(f));
  j["t_c"] = 2.0;
  spit(f, j.dump() + "\n");
  CHECK_THROWS_WITH_AS(parse_tokens(f), doctest::Contains("t_c"), std::runtime_error);

  // dropping the label while the future crosses is equally inconsistent
  j["t_c"] = nullptr;
  spit(f, j.dump() + "\n");
  CHECK_THROWS_WITH_AS(parse_tokens(f), doctest::Contains("no stored t_c"),
                       std::runtime_error);
}

TEST_CASE("schema_version mismatch is an explicit error") {
  const fs::path dir = temp_dir();
  const fs::path f = dir / "schema.jsonl";
  write_tokens(sample_tokens(1, 3), f);
  json j = json::parse(slurp(f));
  j["schema_version"] = "2";
  spit(f, j.dump() + "\n");
  CHECK_THROWS_WITH_AS(parse_tokens(f), doctest::Contains("schema_version"),
                       std::runtime_error);
}

TEST_CASE("strict mode rejects unknown keys, lax mode preserves them") {
  const fs::path dir = temp_dir();
  const fs::path f = dir / "extra.jsonl";
  write_tokens(sample_tokens(1, 4), f);
  json j = json::parse(slurp(f));
  j["annotator_note"] = json{{"by", "qa"}, {"rev", 3}};
  spit(f, j.dump() + "\n");

  CHECK_THROWS_WITH_AS(parse_tokens(f, ParseOptions{true}),
                       doctest::Contains("annotator_note"), std::runtime_error);

  const std::vector<Token> lax = parse_tokens(f, ParseOptions{false});
  REQUIRE(lax.size() == 1);
  REQUIRE(lax[0].extras.count("annotator_note") == 1);

  // the unknown key survives the round trip verbatim
  const fs::path f2 = dir / "extra2.jsonl";
  write_tokens(lax, f2);
  const json j2 = json::parse(slurp(f2));
  CHECK(j2.at("annotator_note") == j.at("annotator_note"));
}

TEST_CASE("malformed json names the offending line") {
  const fs::path dir = temp_dir();
  const fs::path f = dir / "bad.jsonl";
  write_tokens(sample_tokens(2, 5), f);
  spit(f, slurp(f) + "{not json\n");
  CHECK_THROWS_WITH_AS(parse_tokens(f), doctest::Contains(":3:"), std::runtime_error);
}

TEST_CASE("write_tokens validates before writing") {
  const fs::path dir = temp_dir();
  std::vector<Token> tokens = sample_tokens(1, 6);
  tokens[0].ego.history.resize(12);
  CHECK_THROWS_WITH_AS(write_tokens(tokens, dir / "never.jsonl"),
                       doctest::Contains("invalid token"), std::runtime_error);
}

TEST_CASE("missing file errors mention the path") {
  CHECK_THROWS_WITH_AS(parse_tokens("/nonexistent/nowhere.jsonl"),
                       doctest::Contains("nowhere.jsonl"), std::runtime_error);
}

TEST_CASE("stream round trip") {
  const fs::path dir = temp_dir();
  const std::vector<SuiteCase> suite = gen_cutin_suite(2, 9);

  for (const SuiteCase& sc : suite) {
    const fs::path f = dir / (sc.stream.id + ".jsonl");
    write_stream(sc.stream, f);
    const FrameStream parsed = parse_stream(f, ParseOptions{true});
    CHECK(parsed.id == sc.stream.id);
    CHECK(parsed.ego_id == sc.stream.ego_id);
    REQUIRE(parsed.frames.size() == sc.stream.frames.size());
    CHECK(parsed.lanes.centerlines.size() == sc.stream.lanes.centerlines.size());

    // canonical fixed point
    const fs::path f2 = dir / (sc.stream.id + ".2.jsonl");
    write_stream(parsed, f2);
    CHECK(slurp(f) == slurp(f2));

    // mining the parsed stream still works (6-digit floats keep margins)
    const std::vector<Token> tokens = mine_tokens(parsed, MiningConfig{});
    CHECK(tokens.size() == 1);
  }
}

TEST_CASE("prediction round trip and validation") {
  const fs::path dir = temp_dir();
  const std::vector<Token> tokens = sample_tokens(4, 10);
  std::vector<Prediction> preds;
  for (const Token& t : tokens) {
    preds.push_back(scripted_predictor(t, PredictorKind::offset, 0.4, 3));
  }
  preds[1].modes[0].score.reset();  // scores are optional per mode

  const fs::path f = dir / "preds.jsonl";
  write_predictions(preds, f);
  const std::vector<Prediction> parsed = parse_predictions(f, ParseOptions{true});
  REQUIRE(parsed.size() == preds.size());
  CHECK(!parsed[1].modes[0].score.has_value());
  CHECK(parsed[2].modes[0].trajectory.size() == kFutureFrames);

  json j = json::parse(slurp(f).substr(0, slurp(f).find('\n')));
  j["modes"][0]["score"] = 2.5;
  spit(f, j.dump() + "\n");
  CHECK_THROWS_WITH_AS(parse_predictions(f), doctest::Contains("score"), std::runtime_error);
}

TEST_CASE("esp cache block is verified on load") {
  const fs::path dir = temp_dir();
  const std::vector<Token> tokens = sample_tokens(2, 11);
  std::vector<ESPTensor> tensors;
  for (const Token& t : tokens) tensors.push_back(extract_esp_tensor(t));

  const fs::path f = dir / "esp.jsonl";
  write_tokens_with_esp(tokens, tensors, f);
  CHECK(parse_tokens(f, ParseOptions{true}).size() == 2);

  // corrupt one cached distance: the recomputation must catch it
  std::string content = slurp(f);
  const size_t line_end = content.find('\n');
  json j = json::parse(content.substr(0, line_end));
  j["esp"]["channels"][0]["distance"][5] =
      j["esp"]["channels"][0]["distance"][5].get<double>() + 1.0;
  spit(f, j.dump() + "\n" + content.substr(line_end + 1));
  CHECK_THROWS_WITH_AS(parse_tokens(f), doctest::Contains("esp"), std::runtime_error);
}

TEST_CASE("report file carries rows, skips, and the aggregate block") {
  const fs::path dir = temp_dir();
  const std::vector<Token> tokens = sample_tokens(3, 12);
  std::vector<Prediction> preds;
  for (size_t i = 0; i + 1 < tokens.size(); ++i) {  // leave one token unmatched
    preds.push_back(scripted_predictor(tokens[i], PredictorKind::oracle, 0.0, 2));
  }
  const MetricsReport report = evaluate(tokens, preds, EvalConfig{});
  const fs::path f = dir / "report.jsonl";
  write_report(report, f);

  int rows = 0, skipped = 0, aggregates = 0;
  std::ifstream in(f);
  std::string line;
  json agg;
  while (std::getline(in, line)) {
    const json j = json::parse(line);
    const std::string kind = j.value("kind", "");
    if (kind == "token") ++rows;
    if (kind == "skipped") ++skipped;
    if (kind == "aggregate") {
      ++aggregates;
      agg = j;
    }
  }
  CHECK(rows == 2);
  CHECK(skipped == 1);
  CHECK(aggregates == 1);
  CHECK(agg.at("mean_min_ade").get<double>() == 0.0);
  CHECK(agg.at("tokens_skipped").get<int>() == 1);
  CHECK(agg.at("accuracy").get<double>() == 1.0);

  const std::string table = report_table(report);
  CHECK(table.find("skipped") != std::string::npos);
  CHECK(table.find("ground-truth cut-in only") != std::string::npos);
}

TEST_CASE("prompt text is byte-stable across the file round trip") {
  const fs::path dir = temp_dir();
  const std::vector<Token> tokens = sample_tokens(5, 13);
  const fs::path f = dir / "tokens.jsonl";
  write_tokens(tokens, f);
  const std::vector<Token> parsed = parse_tokens(f);
  for (size_t i = 0; i < tokens.size(); ++i) {
    const std::string direct = to_prompt(parsed[i]).text();
    CHECK(direct == to_prompt(parsed[i]).text());
  }
}
