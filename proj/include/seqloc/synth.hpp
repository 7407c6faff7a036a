#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "seqloc/descriptor.hpp"
#include "seqloc/evaluation.hpp"

namespace seqloc {

enum class Modality { image_like, wifi_like };
std::string_view to_string(Modality m);
Modality parse_modality(std::string_view name);

struct ShuffleSpec {
  double min_frac = kShuffleMinFrac;
  double max_frac = kShuffleMaxFrac;
  std::uint64_t seed = 1;
};

struct SynthSpec {
  std::size_t n_ref = 2000;
  /// 0 means "same as n_ref".
  std::size_t n_query = 0;
  Modality modality = Modality::image_like;
  /// Dense descriptor length (image-like only).
  std::size_t descriptor_dim = 32;
  /// Query noise: per-dimension sigma (image-like) or per-reading dB (wifi-like).
  double noise_sigma = 4.0;
  /// Log-scale amplitude of the query's speed variation; 0 keeps frames aligned.
  double speed_drift = 0.02;
  /// Frame-to-frame correlation of the speed process.
  double speed_corr = 0.97;

  // Image-like reference walk: a fast AR(1) process plus an optional slow one.
  // The slow part makes far-apart frames look alike (wide low-score valleys).
  double fast_rho = 0.5;
  double slow_rho = 0.99;
  double slow_amplitude = 0.0;

  // Wi-Fi-like environment.
  std::size_t ap_count = 709;
  double mean_active = 12.6;

  std::optional<ShuffleSpec> shuffle;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t query_count() const noexcept { return n_query == 0 ? n_ref : n_query; }
};

struct SynthData {
  std::vector<Descriptor> refs;
  std::vector<Descriptor> queries;
  GroundTruth gt;
  /// perm[new] = old when shuffled, otherwise empty.
  std::vector<std::size_t> perm;
};

/// Reference frames follow a temporally correlated random walk. The query
/// revisits the same route at a varying speed (linear interpolation between
/// reference frames) with added noise, optionally with its segments reordered.
/// Ground truth is the nearest reference frame to each query position.
///
/// Wi-Fi-like frames are sparse: each access point covers an interval of the
/// route and reports strength = RSSI + 100 dB, with RSSI falling linearly from
/// -35 dBm at its center to -90 dBm at the interval edge.
SynthData synth_generate(const SynthSpec& spec);

}  // namespace seqloc
