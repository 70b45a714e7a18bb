#include "esp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "esp/geometry.hpp"

namespace esp {

namespace {

void check_frame_counts(const Prediction& pred, std::span<const FrameState> gt) {
  for (const PredictionMode& m : pred.modes) {
    if (m.trajectory.size() != gt.size()) {
      throw std::invalid_argument("prediction mode frame count " +
                                  std::to_string(m.trajectory.size()) +
                                  " does not match ground truth " + std::to_string(gt.size()));
    }
  }
  if (pred.modes.empty()) throw std::invalid_argument("prediction has no modes");
  if (gt.empty()) throw std::invalid_argument("empty ground truth");
}

std::optional<double> mode_lamt(const PredictionMode& mode, const BoundingBox2D& box,
                                const Polyline& boundary) {
  return lamt(mode.trajectory, box, boundary);
}

const PredictionMode& top_scored_mode(const Prediction& pred) {
  const PredictionMode* best = nullptr;
  for (const PredictionMode& m : pred.modes) {
    if (!m.score) continue;
    if (!best || *m.score > *best->score) best = &m;
  }
  if (!best) throw std::runtime_error("classify_cutin: top1 policy but no mode carries a score");
  return *best;
}

}  // namespace

double min_ade(const Prediction& pred, std::span<const FrameState> gt) {
  check_frame_counts(pred, gt);
  double best = std::numeric_limits<double>::infinity();
  for (const PredictionMode& m : pred.modes) {
    double sum = 0.0;
    for (size_t i = 0; i < gt.size(); ++i) {
      sum += std::hypot(m.trajectory[i].x - gt[i].x, m.trajectory[i].y - gt[i].y);
    }
    best = std::min(best, sum / static_cast<double>(gt.size()));
  }
  return best;
}

double min_fde(const Prediction& pred, std::span<const FrameState> gt) {
  check_frame_counts(pred, gt);
  double best = std::numeric_limits<double>::infinity();
  const FrameState& last = gt.back();
  for (const PredictionMode& m : pred.modes) {
    const FrameState& f = m.trajectory.back();
    best = std::min(best, std::hypot(f.x - last.x, f.y - last.y));
  }
  return best;
}

double clamped_temporal_error(double gt_lamt, std::optional<double> mode_lamt, double t_u) {
  if (!mode_lamt) return t_u;  // the clamp bound is the unique finite consistent extension
  return std::min(std::abs(gt_lamt - *mode_lamt), t_u);
}

double min_cte(const Prediction& pred, std::span<const FrameState> gt, const BoundingBox2D& box,
               const LaneSet& lanes, double t_u) {
  if (!(t_u > 0.0)) throw std::invalid_argument("min_cte: t_u must be > 0");
  if (pred.modes.empty()) throw std::invalid_argument("min_cte: prediction has no modes");

  const LaneBoundary& boundary = select_target_boundary(gt, lanes);
  const std::optional<double> gt_time = lamt(gt, box, boundary.points);
  if (!gt_time) {
    throw std::runtime_error("min_cte: ground truth has no lane match");
  }

  double best = std::numeric_limits<double>::infinity();
  for (const PredictionMode& m : pred.modes) {
    best = std::min(best, clamped_temporal_error(*gt_time, mode_lamt(m, box, boundary.points),
                                                 t_u));
  }
  return best;
}

double min_cte_joint(std::span<const double> gt_lamts,
                     const std::vector<std::vector<std::optional<double>>>& mode_lamts,
                     double t_u) {
  if (!(t_u > 0.0)) throw std::invalid_argument("min_cte_joint: t_u must be > 0");
  if (mode_lamts.empty()) throw std::invalid_argument("min_cte_joint: no joint modes");

  double best = std::numeric_limits<double>::infinity();
  for (const std::vector<std::optional<double>>& per_agent : mode_lamts) {
    if (per_agent.size() != gt_lamts.size()) {
      throw std::invalid_argument("min_cte_joint: agent count mismatch");
    }
    double sum = 0.0;
    for (size_t a = 0; a < gt_lamts.size(); ++a) {
      sum += clamped_temporal_error(gt_lamts[a], per_agent[a], t_u);
    }
    best = std::min(best, sum);
  }
  return best;
}

namespace {

bool mode_cuts_in(const PredictionMode& mode, const BoundingBox2D& box, const LaneSet& lanes) {
  // Each mode is judged against the boundary selected from its own drift;
  // a mode starting outside the mapped lanes cannot cut in.
  try {
    const LaneBoundary& boundary = select_target_boundary(mode.trajectory, lanes);
    const std::optional<double> t = lamt(mode.trajectory, box, boundary.points);
    return t && *t > 0.0 && *t <= kFutureHorizon + 1e-9;
  } catch (const std::runtime_error&) {
    return false;
  }
}

}  // namespace

bool classify_cutin(const Prediction& pred, const BoundingBox2D& box, const LaneSet& lanes,
                    CutinPolicy policy) {
  if (pred.modes.empty()) throw std::invalid_argument("classify_cutin: prediction has no modes");
  if (policy == CutinPolicy::top1) {
    return mode_cuts_in(top_scored_mode(pred), box, lanes);
  }
  for (const PredictionMode& m : pred.modes) {
    if (mode_cuts_in(m, box, lanes)) return true;
  }
  return false;
}

ConfusionStats confusion_stats(std::span<const std::pair<bool, bool>> pairs) {
  if (pairs.empty()) throw std::invalid_argument("confusion_stats: empty pair list");
  ConfusionStats s;
  for (const auto& [predicted, actual] : pairs) {
    if (predicted && actual) ++s.tp;
    else if (predicted && !actual) ++s.fp;
    else if (!predicted && actual) ++s.fn;
    else ++s.tn;
  }
  const int n = s.tp + s.fp + s.fn + s.tn;
  s.accuracy = static_cast<double>(s.tp + s.tn) / n;
  if (s.tp + s.fp > 0) {
    s.precision = static_cast<double>(s.tp) / (s.tp + s.fp);
  } else {
    s.precision = 1.0;
    s.precision_defined = false;
  }
  if (s.tp + s.fn > 0) {
    s.recall = static_cast<double>(s.tp) / (s.tp + s.fn);
  } else {
    s.recall = 1.0;
    s.recall_defined = false;
  }
  return s;
}

MetricsReport evaluate(std::span<const Token> tokens, std::span<const Prediction> predictions,
                       const EvalConfig& config) {
  std::map<std::string, const Prediction*> by_id;
  for (const Prediction& p : predictions) {
    if (!by_id.emplace(p.token_id, &p).second) {
      throw std::runtime_error("evaluate: duplicate predictions for token " + p.token_id);
    }
  }

  std::vector<const Token*> ordered;
  ordered.reserve(tokens.size());
  for (const Token& t : tokens) ordered.push_back(&t);
  std::sort(ordered.begin(), ordered.end(),
            [](const Token* a, const Token* b) { return a->id < b->id; });

  MetricsReport report;
  report.config = config;

  std::vector<std::pair<bool, bool>> pairs;
  double cte_sum = 0.0, ade_sum = 0.0, fde_sum = 0.0;

  for (const Token* token : ordered) {
    auto it = by_id.find(token->id);
    if (it == by_id.end()) {
      report.skipped_tokens.push_back(token->id);
      continue;
    }
    const Prediction& pred = *it->second;
    by_id.erase(it);

    if (!token->tv.future) {
      throw std::invalid_argument("evaluate: token " + token->id + " lacks a TV future");
    }
    const std::vector<FrameState>& gt = *token->tv.future;

    TokenMetrics tm;
    tm.token_id = token->id;
    tm.min_ade = min_ade(pred, gt);
    tm.min_fde = min_fde(pred, gt);
    tm.cutin_actual = token->t_c.has_value();
    tm.cutin_predicted = classify_cutin(pred, token->tv.bbox, token->lanes, config.policy);
    if (tm.cutin_actual) {
      tm.min_cte = min_cte(pred, gt, token->tv.bbox, token->lanes, config.t_u);
      cte_sum += *tm.min_cte;
      ++report.cte_token_count;
    }
    ade_sum += tm.min_ade;
    fde_sum += tm.min_fde;
    pairs.emplace_back(tm.cutin_predicted, tm.cutin_actual);
    report.per_token.push_back(std::move(tm));
  }

  for (const auto& [id, pred] : by_id) report.unmatched_predictions.push_back(id);

  const size_t n = report.per_token.size();
  if (n > 0) {
    report.mean_min_ade = ade_sum / static_cast<double>(n);
    report.mean_min_fde = fde_sum / static_cast<double>(n);
    report.cutin = confusion_stats(pairs);
  }
  if (report.cte_token_count > 0) {
    report.mean_min_cte = cte_sum / report.cte_token_count;
  }
  return report;
}

}  // namespace esp
