#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "esp/types.hpp"

namespace esp {

enum class CutinPolicy { top1, any };

struct EvalConfig {
  double t_u = kFutureHorizon;  // clamp threshold on the temporal error
  CutinPolicy policy = CutinPolicy::top1;
};

struct TokenMetrics {
  std::string token_id;
  std::optional<double> min_cte;  // absent when the token has no ground-truth cut-in
  double min_ade = 0.0;
  double min_fde = 0.0;
  bool cutin_predicted = false;
  bool cutin_actual = false;
};

struct ConfusionStats {
  double precision = 1.0;
  double recall = 1.0;
  double accuracy = 0.0;
  bool precision_defined = true;  // false when no positives were predicted
  bool recall_defined = true;     // false when no positives exist
  int tp = 0, fp = 0, fn = 0, tn = 0;
};

struct MetricsReport {
  EvalConfig config;
  std::vector<TokenMetrics> per_token;              // sorted by token id
  std::vector<std::string> skipped_tokens;          // no matching prediction
  std::vector<std::string> unmatched_predictions;   // prediction without a token
  int cte_token_count = 0;  // tokens entering the minCTE mean (ground-truth cut-ins only)
  double mean_min_cte = 0.0;
  double mean_min_ade = 0.0;
  double mean_min_fde = 0.0;
  ConfusionStats cutin;
};

/// Minimum over modes of the mean Euclidean displacement from the ground
/// truth. Throws std::invalid_argument on frame-count mismatch.
double min_ade(const Prediction& pred, std::span<const FrameState> gt);

/// As min_ade, final frame only.
double min_fde(const Prediction& pred, std::span<const FrameState> gt);

/// clamp(|gt - mode|, t_u); a mode with no lane match contributes the clamp
/// bound t_u.
double clamped_temporal_error(double gt_lamt, std::optional<double> mode_lamt, double t_u);

/// min over K modes of the clamped |LaMT(gt) - LaMT(mode)|, single agent.
/// All modes are matched against the boundary selected from the ground
/// truth. Throws std::runtime_error when the ground truth has no lane
/// match (callers must filter such tokens out of CTE evaluation) and
/// std::invalid_argument when t_u <= 0.
double min_cte(const Prediction& pred, std::span<const FrameState> gt,
               const BoundingBox2D& box, const LaneSet& lanes, double t_u);

/// Joint multi-agent form: min over joint mode index k of the sum over
/// agents of the clamped temporal error. mode_lamts is indexed [k][agent].
double min_cte_joint(std::span<const double> gt_lamts,
                     const std::vector<std::vector<std::optional<double>>>& mode_lamts,
                     double t_u);

/// Converts a trajectory prediction into a cut-in verdict: top1 looks only
/// at the highest-scored mode, any at all modes. Throws std::runtime_error
/// when policy is top1 and no mode carries a score.
bool classify_cutin(const Prediction& pred, const BoundingBox2D& box, const LaneSet& lanes,
                    CutinPolicy policy);

/// Standard precision / recall / accuracy over (predicted, actual) pairs.
/// Precision is reported as 1.0 with precision_defined = false when no
/// positives were predicted.
ConfusionStats confusion_stats(std::span<const std::pair<bool, bool>> pairs);

/// Per-token metrics plus aggregates. Tokens without a matching prediction
/// are listed as skipped, never silently dropped; tokens lacking t_c are
/// excluded from the minCTE mean but enter classification with
/// actual = false. Throws std::runtime_error on duplicate predictions for
/// one token id.
MetricsReport evaluate(std::span<const Token> tokens, std::span<const Prediction> predictions,
                       const EvalConfig& config);

}  // namespace esp
