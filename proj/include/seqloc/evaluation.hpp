#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqloc/window_matcher.hpp"

namespace seqloc {

inline constexpr std::size_t kDefaultTolerance = 5;

struct GroundTruth {
  /// ref_index[i] is the true reference frame for query i, if any.
  std::vector<std::optional<std::size_t>> ref_index;
  /// Correctness radius in frames.
  std::size_t tolerance = kDefaultTolerance;

  std::size_t size() const noexcept { return ref_index.size(); }
  std::size_t count_known() const;
};

/// Reads `query_index,ref_index`; queries without a row have no ground truth.
/// Indices must be below n_query (and n_ref when given).
GroundTruth load_ground_truth(const std::filesystem::path& path, std::size_t n_query,
                              std::optional<std::size_t> n_ref = std::nullopt,
                              std::size_t tolerance = kDefaultTolerance);
std::string ground_truth_csv(const GroundTruth& gt);

/// Hypothesis present and within tolerance of the true reference. Frames
/// without ground truth are never correct.
bool correctness(const LocalizationResult& result, const GroundTruth& gt);

/// Longest run of consecutive frames without a correct match. Frames without
/// ground truth are skipped: they neither extend nor break a run.
std::size_t mtl(std::span<const LocalizationResult> results, const GroundTruth& gt);

enum class ThresholdMode { score, significance };
std::string_view to_string(ThresholdMode m);

struct PRPoint {
  double threshold = 0.0;
  double precision = 1.0;
  double recall = 0.0;
  std::size_t n_accepted = 0;
  std::size_t n_correct = 0;
};

/// Accepts frames whose value is at or below each observed value in turn (the
/// window score, or ln p in significance mode). The first point is the
/// accept-nothing anchor with threshold -inf. Recall is relative to the frames
/// that have ground truth; frames without ground truth are ignored.
std::vector<PRPoint> pr_curve(std::span<const LocalizationResult> results, const GroundTruth& gt,
                              ThresholdMode mode);

/// Trapezoidal area under precision over recall. Points are sorted by recall,
/// repeated recalls keep their highest precision, and a curve starting above
/// recall 0 is extended flat to recall 0.
double auc(std::span<const PRPoint> points);

/// `threshold,precision,recall,n_accepted,n_correct`
std::string pr_csv(std::span<const PRPoint> points);

struct EvalSummary {
  std::size_t mtl = 0;
  double auc = 0.0;
  std::size_t n_frames = 0;
  std::size_t n_correct = 0;
  std::vector<PRPoint> pr;
};

EvalSummary evaluate(std::span<const LocalizationResult> results, const GroundTruth& gt, ThresholdMode mode);

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

/// `{mtl, auc, n_frames, tolerance, mode, config_digest}`
std::string report_json(const EvalSummary& s, std::size_t tolerance, std::string_view mode,
                        std::string_view config_digest);

struct Segment {
  std::size_t start = 0;
  std::size_t length = 0;
};

struct Shuffle {
  /// Contiguous blocks of the original order, in original order.
  std::vector<Segment> segments;
  /// perm[new_index] = old_index.
  std::vector<std::size_t> perm;
};

inline constexpr double kShuffleMinFrac = 0.02;
inline constexpr double kShuffleMaxFrac = 0.20;

/// Cuts [0, n) into segments of ceil(min_frac*n)..floor(max_frac*n) frames
/// (the last may be shorter) and reorders them with a seeded Fisher-Yates shuffle.
Shuffle shuffle_traverse(std::size_t n, double min_frac, double max_frac, std::uint64_t seed);

std::vector<std::size_t> inverse_permutation(std::span<const std::size_t> perm);

/// out[new] = items[perm[new]].
template <class T>
std::vector<T> apply_permutation(std::span<const T> items, std::span<const std::size_t> perm) {
  std::vector<T> out;
  out.reserve(perm.size());
  for (std::size_t old : perm) out.push_back(items[old]);
  return out;
}

/// Ground truth that follows the query frames through `perm`.
GroundTruth permute_ground_truth(const GroundTruth& gt, std::span<const std::size_t> perm);

/// `new_index,old_index`
std::string manifest_csv(std::span<const std::size_t> perm);
std::vector<std::size_t> load_manifest(const std::filesystem::path& path);

/// Throws InvariantError unless perm is a permutation of [0, perm.size()).
void check_permutation(std::span<const std::size_t> perm);

}  // namespace seqloc
