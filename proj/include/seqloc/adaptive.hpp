#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "seqloc/descriptor.hpp"
#include "seqloc/difference_matrix.hpp"
#include "seqloc/distributions.hpp"
#include "seqloc/window_matcher.hpp"

namespace seqloc {

struct AdaptiveConfig {
  std::size_t l_min = 10;
  std::size_t l_max = 500;
  std::size_t l_stride = 5;
  FitMethod method = FitMethod::gaussian;
  DifferenceOp op = DifferenceOp::sad;
  /// Leave the best score out of the fitted distribution.
  bool exclude_best = false;

  /// Throws ArgumentError unless 1 <= l_min <= l_max and l_stride >= 1.
  void validate() const;
  /// l_min, l_min + stride, ... below l_max, then l_max itself.
  std::vector<std::size_t> grid() const;
};

struct WindowSignificance {
  double p = 1.0;
  double log_p = 0.0;
  std::size_t best_ref = 0;
  double score = 0.0;
};

/// Per-thread buffers for the frame loop.
struct AdaptiveScratch {
  std::vector<double> scores;
  FitScratch fit;
};

/// Significance of the best window of length L ending at query i.
/// Requires 1 <= L <= n_ref and i + 1 >= L. A single candidate gives p = 1.
WindowSignificance p_of_L(const PrefixField& p, std::size_t i, std::size_t L, FitMethod method,
                          AdaptiveScratch& scratch, bool exclude_best = false);
WindowSignificance p_of_L(const PrefixField& p, std::size_t i, std::size_t L, FitMethod method);

struct CurvePoint {
  std::size_t L = 0;
  double p = 1.0;
  double log_p = 0.0;
};

/// Chooses the feasible grid length with the smallest significance (ties go
/// to the smaller L). Frames with no feasible length get no hypothesis.
/// When `curve` is non-null it receives every evaluated (L, p).
LocalizationResult adapt_frame(const PrefixField& p, std::size_t i, const AdaptiveConfig& cfg,
                               AdaptiveScratch& scratch, std::vector<CurvePoint>* curve = nullptr);
LocalizationResult adapt_frame(const PrefixField& p, std::size_t i, const AdaptiveConfig& cfg);

struct AdaptiveTrace {
  std::vector<LocalizationResult> frames;
  /// One curve per frame when requested, otherwise empty.
  std::vector<std::vector<CurvePoint>> curves;
};

AdaptiveTrace run_adaptive(const PrefixField& p, const AdaptiveConfig& cfg, std::size_t threads = 1,
                           bool keep_curves = false);
AdaptiveTrace run_adaptive(const DifferenceMatrix& m, const AdaptiveConfig& cfg, std::size_t threads = 1,
                           bool keep_curves = false);

/// Online variant: feed query frames one at a time.
class AdaptiveLocalizer {
 public:
  AdaptiveLocalizer(std::vector<Descriptor> refs, AdaptiveConfig cfg);

  /// Builds and standardizes the difference row for `q`, then localizes it.
  LocalizationResult push(const Descriptor& q);
  /// Localizes one already-standardized difference row.
  LocalizationResult push_row(std::span<const double> d_row);

  std::size_t frames_seen() const noexcept { return prefix_.n_query(); }

 private:
  std::vector<Descriptor> refs_;
  AdaptiveConfig cfg_;
  PrefixField prefix_;
  AdaptiveScratch scratch_;
};

/// `query_index,chosen_L,best_ref,score,significance,status`
std::string trace_csv(std::span<const LocalizationResult> frames);
/// `query_index,L,p`
std::string curve_csv(const AdaptiveTrace& trace);

}  // namespace seqloc
