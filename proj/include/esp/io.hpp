#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "esp/esp_features.hpp"
#include "esp/metrics.hpp"
#include "esp/miner.hpp"
#include "esp/types.hpp"

namespace esp {

constexpr std::string_view kSchemaVersion = "1";

struct ParseOptions {
  bool strict = false;  // reject unknown keys instead of preserving them
};

/// Line-delimited token records, schema_version "1", floats at six
/// significant digits. Validates every token before writing.
void write_tokens(std::span<const Token> tokens, const std::filesystem::path& path);

/// Parses, validates each record via validate_token, and recomputes t_c
/// from geometry, failing on a stored-vs-recomputed mismatch above 0.1 s.
/// A cached esp block, when present, is recomputed and compared on load.
/// Errors name the offending line.
std::vector<Token> parse_tokens(const std::filesystem::path& path, const ParseOptions& opts = {});

/// Stream files: a header record followed by one frame per line.
void write_stream(const FrameStream& stream, const std::filesystem::path& path);
FrameStream parse_stream(const std::filesystem::path& path, const ParseOptions& opts = {});

void write_predictions(std::span<const Prediction> preds, const std::filesystem::path& path);
std::vector<Prediction> parse_predictions(const std::filesystem::path& path,
                                          const ParseOptions& opts = {});

/// Report file: one row per token, one per skipped id, then an aggregate
/// block.
void write_report(const MetricsReport& report, const std::filesystem::path& path);

/// Human-readable table of the same report for standard output.
std::string report_table(const MetricsReport& report);

/// Token record serialized to its canonical single-line form.
std::string token_to_line(const Token& token);

/// Optional cached tensor block inside a token record.
void write_tokens_with_esp(std::span<const Token> tokens, std::span<const ESPTensor> tensors,
                           const std::filesystem::path& path);

/// Extracted ESP tensors plus reference embeddings, one record per token.
void write_features(std::span<const Token> tokens, const std::filesystem::path& path,
                    int embed_dim = kEspEmbeddingDim);

struct PromptSection {
  std::string title;
  std::vector<std::string> lines;
};

/// The six-section standardized scenario description used for LLM
/// prompting: Scene, Ego vehicle, Target vehicle, Relative Interaction
/// Vehicles, Semantic Infrastructure, Extrospective Features. Rendering is
/// deterministic with numbers at one decimal.
struct PromptDocument {
  std::array<PromptSection, 6> sections;
  std::string text() const;
};

PromptDocument to_prompt(const Token& token);

enum class ToolboxQuery {
  vehicle_ahead_tv,
  left_lane_status_tv,
  right_lane_status_tv,
  distance_to_junction,
  tv_speed_trend,
};

std::optional<ToolboxQuery> toolbox_query_from_string(std::string_view s);
std::string to_string(ToolboxQuery q);

/// Deterministic textual answer computed from the token geometry.
std::string toolbox_query(const Token& token, ToolboxQuery query);

/// Entry point behind the esptk binary; see README for the subcommands.
/// Returns 0 on success, 2 on usage errors (unknown flags, missing files),
/// 1 on data errors.
int cli_main(int argc, char** argv);

}  // namespace esp
