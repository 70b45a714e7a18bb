#include "esp/esp_features.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "esp/geometry.hpp"

namespace esp {

std::string to_string(PairKind p) {
  switch (p) {
    case PairKind::ego_tv: return "ego_tv";
    case PairKind::ego_cipv: return "ego_cipv";
    case PairKind::ego_ev: return "ego_ev";
    case PairKind::tv_cipv: return "tv_cipv";
    case PairKind::tv_ev: return "tv_ev";
  }
  return "ego_tv";
}

std::optional<PairKind> pair_kind_from_string(std::string_view s) {
  if (s == "ego_tv") return PairKind::ego_tv;
  if (s == "ego_cipv") return PairKind::ego_cipv;
  if (s == "ego_ev") return PairKind::ego_ev;
  if (s == "tv_cipv") return PairKind::tv_cipv;
  if (s == "tv_ev") return PairKind::tv_ev;
  return std::nullopt;
}

namespace {

Point2 longitudinal_tangent(const FrameState& f, const LaneSet& lanes) {
  const std::optional<int> lane = lane_containing(lanes, Point2{f.x, f.y});
  if (lane) {
    return project_to_polyline(lanes.centerlines[static_cast<size_t>(*lane)], Point2{f.x, f.y})
        .tangent;
  }
  return Point2{std::cos(f.heading), std::sin(f.heading)};  // off-map fallback
}

PairFeature feature_between(const FrameState& fa, const FrameState& fb, const LaneSet& lanes) {
  PairFeature out;
  if (!fa.valid || !fb.valid) return out;  // sentinel defaults
  out.valid = true;
  out.distance = std::hypot(fb.x - fa.x, fb.y - fa.y);
  const Point2 tangent = longitudinal_tangent(fa, lanes);
  const double dvx = fb.speed * std::cos(fb.heading) - fa.speed * std::cos(fa.heading);
  const double dvy = fb.speed * std::sin(fb.heading) - fa.speed * std::sin(fa.heading);
  out.rel_long_vel = dvx * tangent.x + dvy * tangent.y;
  return out;
}

void set_entry(ESPChannel& ch, int frame, const PairFeature& f) {
  ch.distance[static_cast<size_t>(frame)] = f.distance;
  ch.rel_long_vel[static_cast<size_t>(frame)] = f.rel_long_vel;
  ch.valid[static_cast<size_t>(frame)] = f.valid;
}

ESPChannel sentinel_channel(PairKind pair) {
  ESPChannel ch;
  ch.pair = pair;
  ch.distance.fill(kSentinelDistance);
  ch.rel_long_vel.fill(0.0);
  ch.valid.fill(false);
  return ch;
}

// Nearest role-EV track to the anchor at one frame, by center distance.
const AgentTrack* nearest_ev(const Token& token, const FrameState& anchor, int frame) {
  const AgentTrack* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const AgentTrack& ev : token.evs) {
    if (ev.role != AgentRole::EV) continue;
    const FrameState& f = ev.history[static_cast<size_t>(frame)];
    if (!f.valid) continue;
    const double d = std::hypot(f.x - anchor.x, f.y - anchor.y);
    if (d < best_d) {
      best_d = d;
      best = &ev;
    }
  }
  return best;
}

}  // namespace

PairFeature pair_features(const AgentTrack& a, const AgentTrack& b, int frame,
                          const LaneSet& lanes) {
  if (frame < 0 || frame >= kHistoryFrames) {
    throw std::invalid_argument("pair_features: frame index out of range");
  }
  return feature_between(a.history[static_cast<size_t>(frame)],
                         b.history[static_cast<size_t>(frame)], lanes);
}

ESPTensor extract_esp_tensor(const Token& token) {
  ESPTensor tensor;
  const AgentTrack* cipv = token.cipv();

  tensor.channels[0] = sentinel_channel(PairKind::ego_tv);
  tensor.channels[1] = sentinel_channel(PairKind::ego_cipv);
  tensor.channels[2] = sentinel_channel(PairKind::ego_ev);
  tensor.channels[3] = sentinel_channel(PairKind::tv_cipv);
  tensor.channels[4] = sentinel_channel(PairKind::tv_ev);

  for (int frame = 0; frame < kHistoryFrames; ++frame) {
    const FrameState& ego_f = token.ego.history[static_cast<size_t>(frame)];
    const FrameState& tv_f = token.tv.history[static_cast<size_t>(frame)];

    set_entry(tensor.channels[0], frame, feature_between(ego_f, tv_f, token.lanes));
    if (cipv) {
      const FrameState& cipv_f = cipv->history[static_cast<size_t>(frame)];
      set_entry(tensor.channels[1], frame, feature_between(ego_f, cipv_f, token.lanes));
      set_entry(tensor.channels[3], frame, feature_between(tv_f, cipv_f, token.lanes));
    }
    if (const AgentTrack* ev = nearest_ev(token, ego_f, frame); ev && ego_f.valid) {
      set_entry(tensor.channels[2], frame,
                feature_between(ego_f, ev->history[static_cast<size_t>(frame)], token.lanes));
    }
    if (const AgentTrack* ev = nearest_ev(token, tv_f, frame); ev && tv_f.valid) {
      set_entry(tensor.channels[4], frame,
                feature_between(tv_f, ev->history[static_cast<size_t>(frame)], token.lanes));
    }
  }
  return tensor;
}

std::array<double, kHistoryFrames * 2 * kNumPairKinds> ESPTensor::flattened() const {
  std::array<double, kHistoryFrames * 2 * kNumPairKinds> out{};
  size_t i = 0;
  for (int frame = 0; frame < kHistoryFrames; ++frame) {
    for (const ESPChannel& ch : channels) {
      out[i++] = ch.distance[static_cast<size_t>(frame)];
      out[i++] = ch.rel_long_vel[static_cast<size_t>(frame)];
    }
  }
  return out;
}

std::array<bool, kHistoryFrames * kNumPairKinds> ESPTensor::validity_mask() const {
  std::array<bool, kHistoryFrames * kNumPairKinds> out{};
  size_t i = 0;
  for (int frame = 0; frame < kHistoryFrames; ++frame) {
    for (const ESPChannel& ch : channels) out[i++] = ch.valid[static_cast<size_t>(frame)];
  }
  return out;
}

namespace {

struct SignalStats {
  double first, last, mean, min;
};

SignalStats stats_over(const std::array<double, kHistoryFrames>& values,
                       const std::array<bool, kHistoryFrames>& valid, double sentinel) {
  SignalStats s{sentinel, sentinel, sentinel, sentinel};
  bool any = false;
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < kHistoryFrames; ++i) {
    if (!valid[static_cast<size_t>(i)]) continue;
    const double v = values[static_cast<size_t>(i)];
    if (!any) {
      s.first = v;
      s.min = v;
      any = true;
    }
    s.last = v;
    s.min = std::min(s.min, v);
    sum += v;
    ++count;
  }
  if (any) s.mean = sum / count;
  return s;
}

}  // namespace

EspEmbedding reference_embed(const ESPTensor& tensor, int dim) {
  if (dim < 0) throw std::invalid_argument("reference_embed: negative dimension");

  // Channel-major layout: 4 stats per signal, 2 signals per channel.
  std::vector<double> full;
  full.reserve(kNumPairKinds * 8);
  bool any_valid = false;
  for (const ESPChannel& ch : tensor.channels) {
    for (bool v : ch.valid) any_valid = any_valid || v;
    for (const SignalStats& s : {stats_over(ch.distance, ch.valid, kSentinelDistance),
                                 stats_over(ch.rel_long_vel, ch.valid, 0.0)}) {
      full.push_back(s.first);
      full.push_back(s.last);
      full.push_back(s.mean);
      full.push_back(s.min);
    }
  }

  EspEmbedding out;
  out.degenerate = !any_valid;
  out.values.assign(static_cast<size_t>(dim), 0.0);
  for (size_t i = 0; i < out.values.size() && i < full.size(); ++i) out.values[i] = full[i];
  return out;
}

ConcatResult concat_contract(std::span<const double> host_embedding,
                             std::span<const double> esp_embedding) {
  ConcatResult out;
  out.host_dim = host_embedding.size();
  out.esp_dim = esp_embedding.size();
  out.decoder_input_dim = out.host_dim + out.esp_dim;
  out.values.reserve(out.decoder_input_dim);
  out.values.insert(out.values.end(), host_embedding.begin(), host_embedding.end());
  out.values.insert(out.values.end(), esp_embedding.begin(), esp_embedding.end());
  return out;
}

}  // namespace esp
