#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "esp/types.hpp"

namespace esp {

enum class PairKind { ego_tv, ego_cipv, ego_ev, tv_cipv, tv_ev };
constexpr int kNumPairKinds = 5;

std::string to_string(PairKind p);
std::optional<PairKind> pair_kind_from_string(std::string_view s);

struct PairFeature {
  double distance = kSentinelDistance;  // m, Euclidean center distance
  double rel_long_vel = 0.0;            // m/s, (v_b - v_a) along a's lane tangent
  bool valid = false;
};

/// Per-frame pairwise signals over the 31 history frames. Invalid entries
/// carry the sentinel pair (200.0 m, 0.0 m/s).
struct ESPChannel {
  PairKind pair = PairKind::ego_tv;
  std::array<double, kHistoryFrames> distance{};
  std::array<double, kHistoryFrames> rel_long_vel{};
  std::array<bool, kHistoryFrames> valid{};
};

/// The five extrospective channels in fixed order
/// (ego_tv, ego_cipv, ego_ev, tv_cipv, tv_ev).
struct ESPTensor {
  std::array<ESPChannel, kNumPairKinds> channels{};

  /// Row-major 31 x 10: per frame, (distance, rel_long_vel) per channel in
  /// channel order.
  std::array<double, kHistoryFrames * 2 * kNumPairKinds> flattened() const;

  /// Row-major 31 x 5 validity mask.
  std::array<bool, kHistoryFrames * kNumPairKinds> validity_mask() const;
};

constexpr int kEspEmbeddingDim = 32;

struct EspEmbedding {
  std::vector<double> values;
  bool degenerate = false;  // every channel was all-sentinel
};

struct ConcatResult {
  std::vector<double> values;  // host followed by esp, no mixing
  std::size_t host_dim = 0;
  std::size_t esp_dim = 0;
  std::size_t decoder_input_dim = 0;  // what the downstream decoder must accept
};

/// Distance and relative longitudinal velocity between two agents at one
/// history frame. The longitudinal direction is the tangent of a's lane
/// centerline at a's position, falling back to a's heading off-map.
PairFeature pair_features(const AgentTrack& a, const AgentTrack& b, int frame,
                          const LaneSet& lanes);

/// Fills all five channels over the 31 history frames. EV channels pick
/// the nearest EV to the respective anchor at each frame; missing roles
/// leave the whole channel invalid with sentinels.
ESPTensor extract_esp_tensor(const Token& token);

/// Deterministic reference embedding pinning the encoder interface:
/// per channel and signal, (first, last, mean, min) over valid frames,
/// laid out channel-major and truncated / zero-padded to dim. Channels
/// with no valid frame contribute their sentinel statistics.
EspEmbedding reference_embed(const ESPTensor& tensor, int dim = kEspEmbeddingDim);

/// Pure concatenation of a host encoder output with the ESP embedding;
/// the combined decoder input dimension is surfaced as metadata.
ConcatResult concat_contract(std::span<const double> host_embedding,
                             std::span<const double> esp_embedding);

}  // namespace esp
