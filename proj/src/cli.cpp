#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "esp/io.hpp"
#include "esp/synth.hpp"

namespace esp {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("no such file: " + path);
}

// ---- synth

struct SynthArgs {
  int n = 20;
  uint64_t seed = 0;
  std::string out_dir;
  bool negative = false;
};

int run_synth(const SynthArgs& args) {
  fs::create_directories(args.out_dir);
  json manifest;
  manifest["schema_version"] = std::string(kSchemaVersion);
  manifest["seed"] = args.seed;
  manifest["cases"] = json::array();

  if (args.negative) {
    manifest["kind"] = "negative_suite";
    const std::vector<FrameStream> streams = gen_negative_suite(args.n, args.seed);
    for (const FrameStream& s : streams) {
      const std::string file = s.id + ".stream.jsonl";
      write_stream(s, fs::path(args.out_dir) / file);
      manifest["cases"].push_back(json{{"file", file}});
    }
  } else {
    manifest["kind"] = "cutin_suite";
    const std::vector<SuiteCase> cases = gen_cutin_suite(args.n, args.seed);
    for (const SuiteCase& c : cases) {
      const std::string file = c.stream.id + ".stream.jsonl";
      write_stream(c.stream, fs::path(args.out_dir) / file);
      manifest["cases"].push_back(json{{"file", file},
                                       {"tv_id", c.tv_id},
                                       {"expected_trigger_frame", c.expected_trigger_frame},
                                       {"crossing_time", c.crossing_time}});
    }
  }

  std::ofstream out(fs::path(args.out_dir) / "suite.json");
  out << manifest.dump(2) << "\n";
  std::cout << "wrote " << args.n << (args.negative ? " negative" : " cut-in")
            << " stream(s) to " << args.out_dir << "\n";
  return 0;
}

// ---- mine

struct MineArgs {
  std::vector<std::string> streams;
  std::string out;
  bool strict = false;
  MiningConfig cfg;
};

int run_mine(const MineArgs& args) {
  std::vector<Token> all;
  for (const std::string& path : args.streams) {
    require_file(path);
    const FrameStream stream = parse_stream(path, ParseOptions{args.strict});
    std::vector<Token> tokens = mine_tokens(stream, args.cfg);
    for (Token& t : tokens) all.push_back(std::move(t));
  }
  write_tokens(all, args.out);
  std::cout << "mined " << all.size() << " token(s) from " << args.streams.size()
            << " stream(s) into " << args.out << "\n";
  return 0;
}

// ---- split

struct SplitArgs {
  std::string tokens;
  uint64_t seed = 0;
  std::string out_prefix;
  bool strict = false;
};

int run_split(const SplitArgs& args) {
  require_file(args.tokens);
  std::vector<Token> tokens = parse_tokens(args.tokens, ParseOptions{args.strict});
  const DatasetSplit split = split_dataset(std::move(tokens), args.seed);
  write_tokens(split.train, args.out_prefix + ".train.jsonl");
  write_tokens(split.val, args.out_prefix + ".val.jsonl");
  write_tokens(split.test, args.out_prefix + ".test.jsonl");
  std::cout << "split " << (split.train.size() + split.val.size() + split.test.size())
            << " token(s) into " << split.train.size() << "/" << split.val.size() << "/"
            << split.test.size() << "\n";
  return 0;
}

// ---- features

struct FeaturesArgs {
  std::string tokens;
  std::string out;
  int embed_dim = kEspEmbeddingDim;
  bool strict = false;
};

int run_features(const FeaturesArgs& args) {
  require_file(args.tokens);
  const std::vector<Token> tokens = parse_tokens(args.tokens, ParseOptions{args.strict});
  write_features(tokens, args.out, args.embed_dim);
  std::cout << "extracted features for " << tokens.size() << " token(s) into " << args.out
            << "\n";
  return 0;
}

// ---- eval

struct EvalArgs {
  std::string tokens;
  std::string predictions;
  std::string scripted;
  int k = 4;
  double t_u = kFutureHorizon;
  std::string policy = "top1";
  std::string out;
  bool quiet = false;
  bool strict = false;
};

Prediction make_scripted(const Token& token, const std::string& spec, int k) {
  const size_t colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::optional<PredictorKind> kind = predictor_kind_from_string(name);
  if (!kind) throw UsageError("unknown scripted predictor: " + name);
  double param = 0.0;
  if (colon != std::string::npos) param = std::stod(spec.substr(colon + 1));
  return scripted_predictor(token, *kind, param, k);
}

int run_eval(const EvalArgs& args) {
  require_file(args.tokens);
  const std::vector<Token> tokens = parse_tokens(args.tokens, ParseOptions{args.strict});

  std::vector<Prediction> predictions;
  if (!args.predictions.empty()) {
    require_file(args.predictions);
    predictions = parse_predictions(args.predictions, ParseOptions{args.strict});
  } else if (!args.scripted.empty()) {
    for (const Token& t : tokens) predictions.push_back(make_scripted(t, args.scripted, args.k));
  } else {
    throw UsageError("eval needs --predictions or --scripted");
  }

  EvalConfig config;
  config.t_u = args.t_u;
  if (args.policy == "top1") {
    config.policy = CutinPolicy::top1;
  } else if (args.policy == "any") {
    config.policy = CutinPolicy::any;
  } else {
    throw UsageError("unknown --cutin-policy: " + args.policy);
  }

  const MetricsReport report = evaluate(tokens, predictions, config);
  if (!args.quiet) std::cout << report_table(report);
  if (!args.out.empty()) write_report(report, args.out);
  return 0;
}

// ---- prompt

struct PromptArgs {
  std::string tokens;
  std::string id;
  std::string query;
  bool strict = false;
};

int run_prompt(const PromptArgs& args) {
  require_file(args.tokens);
  const std::vector<Token> tokens = parse_tokens(args.tokens, ParseOptions{args.strict});

  std::optional<ToolboxQuery> query;
  if (!args.query.empty()) {
    query = toolbox_query_from_string(args.query);
    if (!query) throw UsageError("unknown query: " + args.query);
  }

  bool found = false;
  for (const Token& t : tokens) {
    if (!args.id.empty() && t.id != args.id) continue;
    found = true;
    if (query) {
      if (args.id.empty()) {
        std::cout << t.id << "\t" << toolbox_query(t, *query) << "\n";
      } else {
        std::cout << toolbox_query(t, *query) << "\n";
      }
    } else {
      if (args.id.empty()) std::cout << "=== token " << t.id << " ===\n";
      std::cout << to_prompt(t).text();
      if (args.id.empty()) std::cout << "\n";
    }
  }
  if (!args.id.empty() && !found) throw std::runtime_error("no token with id " + args.id);
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"esptk - emergency cut-in scenario mining, ESP features, and CTE evaluation"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate synthetic cut-in stream suites");
  synth->add_option("--n", synth_args.n, "number of streams")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_args.seed, "generator seed");
  synth->add_option("--out-dir", synth_args.out_dir, "output directory")->required();
  synth->add_flag("--negative", synth_args.negative, "generate negative-control streams");

  MineArgs mine_args;
  CLI::App* mine = app.add_subcommand("mine", "mine scenario tokens from frame streams");
  mine->add_option("streams", mine_args.streams, "stream files")->required();
  mine->add_option("--out", mine_args.out, "output token file")->required();
  mine->add_flag("--strict", mine_args.strict, "reject unknown keys");
  mine->add_option("--ttc-threshold", mine_args.cfg.ttc_threshold, "TTC threshold (s)");
  mine->add_option("--min-decel", mine_args.cfg.min_decel_threshold,
                   "minimum deceleration threshold (m/s^2)");
  mine->add_option("--avg-decel", mine_args.cfg.avg_decel_threshold,
                   "average deceleration threshold (m/s^2)");
  mine->add_option("--stride", mine_args.cfg.detection_stride, "detection stride (frames)");
  mine->add_option("--ev-radius", mine_args.cfg.ev_radius, "EV role radius (m)");

  SplitArgs split_args;
  CLI::App* split = app.add_subcommand("split", "deterministic 8:1:1 dataset split");
  split->add_option("--tokens", split_args.tokens, "token file")->required();
  split->add_option("--seed", split_args.seed, "shuffle seed");
  split->add_option("--out-prefix", split_args.out_prefix, "output prefix")->required();
  split->add_flag("--strict", split_args.strict, "reject unknown keys");

  FeaturesArgs features_args;
  CLI::App* features = app.add_subcommand("features", "extract ESP tensors and embeddings");
  features->add_option("--tokens", features_args.tokens, "token file")->required();
  features->add_option("--out", features_args.out, "output feature file")->required();
  features->add_option("--embed-dim", features_args.embed_dim, "embedding length");
  features->add_flag("--strict", features_args.strict, "reject unknown keys");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "evaluate predictions against tokens");
  eval->add_option("--tokens", eval_args.tokens, "token file")->required();
  eval->add_option("--predictions", eval_args.predictions, "prediction file");
  eval->add_option("--scripted", eval_args.scripted,
                   "scripted predictor kind[:param], e.g. oracle or delayed:1.0");
  eval->add_option("--k", eval_args.k, "modes per scripted prediction");
  eval->add_option("--t-u", eval_args.t_u, "CTE clamp threshold (s)");
  eval->add_option("--cutin-policy", eval_args.policy, "top1 or any");
  eval->add_option("--out", eval_args.out, "report file");
  eval->add_flag("--quiet", eval_args.quiet, "suppress the table on stdout");
  eval->add_flag("--strict", eval_args.strict, "reject unknown keys");

  PromptArgs prompt_args;
  CLI::App* prompt = app.add_subcommand("prompt", "render scenario prompts or toolbox answers");
  prompt->add_option("--tokens", prompt_args.tokens, "token file")->required();
  prompt->add_option("--id", prompt_args.id, "only this token");
  prompt->add_option("--query", prompt_args.query,
                     "toolbox query instead of the full document");
  prompt->add_flag("--strict", prompt_args.strict, "reject unknown keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help exits clean; every usage problem is 2
  }

  try {
    if (synth->parsed()) return run_synth(synth_args);
    if (mine->parsed()) return run_mine(mine_args);
    if (split->parsed()) return run_split(split_args);
    if (features->parsed()) return run_features(features_args);
    if (eval->parsed()) return run_eval(eval_args);
    if (prompt->parsed()) return run_prompt(prompt_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace esp
