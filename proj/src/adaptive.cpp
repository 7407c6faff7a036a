#include "seqloc/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seqloc/csv.hpp"
#include "seqloc/error.hpp"
#include "seqloc/parallel.hpp"

namespace seqloc {

void AdaptiveConfig::validate() const {
  if (l_min < 1) throw ArgumentError("l_min must be at least 1");
  if (l_max < l_min) throw ArgumentError("l_max must not be below l_min");
  if (l_stride < 1) throw ArgumentError("l_stride must be at least 1");
}

std::vector<std::size_t> AdaptiveConfig::grid() const {
  validate();
  std::vector<std::size_t> g;
  for (std::size_t L = l_min; L < l_max; L += l_stride) g.push_back(L);
  g.push_back(l_max);
  return g;
}

WindowSignificance p_of_L(const PrefixField& p, std::size_t i, std::size_t L, FitMethod method,
                          AdaptiveScratch& scratch, bool exclude_best) {
  score_row_into(p, i, L, scratch.scores);
  const auto& s = scratch.scores;
  WindowSignificance out;
  if (s.size() < 2) {
    out.best_ref = L - 1;
    out.score = s.front();
    return out;
  }
  const auto sig = significance(s, method, scratch.fit, exclude_best);
  out.p = sig.p;
  out.log_p = sig.log_p;
  out.best_ref = L - 1 + sig.min_index;
  out.score = s[sig.min_index];
  return out;
}

WindowSignificance p_of_L(const PrefixField& p, std::size_t i, std::size_t L, FitMethod method) {
  AdaptiveScratch scratch;
  return p_of_L(p, i, L, method, scratch);
}

LocalizationResult adapt_frame(const PrefixField& p, std::size_t i, const AdaptiveConfig& cfg,
                               AdaptiveScratch& scratch, std::vector<CurvePoint>* curve) {
  cfg.validate();
  if (i >= p.n_query()) throw ArgumentError("adapt_frame: query index out of range");
  LocalizationResult r;
  r.query_index = i;
  if (curve) curve->clear();
  const std::size_t cap = std::min({cfg.l_max, i + 1, p.n_ref()});
  bool found = false;
  auto consider = [&](std::size_t L) {
    const auto w = p_of_L(p, i, L, cfg.method, scratch, cfg.exclude_best);
    if (curve) curve->push_back({L, w.p, w.log_p});
    if (!found || w.log_p < r.log_significance) {
      found = true;
      r.best_ref = w.best_ref;
      r.window_len = L;
      r.score = w.score;
      r.significance = w.p;
      r.log_significance = w.log_p;
      r.status = MatchStatus::hypothesis;
    }
  };
  for (std::size_t L = cfg.l_min; L < cfg.l_max && L <= cap; L += cfg.l_stride) consider(L);
  if (cfg.l_max <= cap) consider(cfg.l_max);
  return r;
}

LocalizationResult adapt_frame(const PrefixField& p, std::size_t i, const AdaptiveConfig& cfg) {
  AdaptiveScratch scratch;
  return adapt_frame(p, i, cfg, scratch);
}

AdaptiveTrace run_adaptive(const PrefixField& p, const AdaptiveConfig& cfg, std::size_t threads,
                           bool keep_curves) {
  cfg.validate();
  const std::size_t n = p.n_query();
  AdaptiveTrace trace;
  trace.frames.resize(n);
  if (keep_curves) trace.curves.resize(n);
  parallel_blocks(n, threads, [&](std::size_t begin, std::size_t end) {
    AdaptiveScratch scratch;
    for (std::size_t i = begin; i < end; ++i) {
      trace.frames[i] = adapt_frame(p, i, cfg, scratch, keep_curves ? &trace.curves[i] : nullptr);
    }
  });
  return trace;
}

AdaptiveTrace run_adaptive(const DifferenceMatrix& m, const AdaptiveConfig& cfg, std::size_t threads,
                           bool keep_curves) {
  if (m.empty()) throw ArgumentError("run_adaptive: empty difference matrix");
  return run_adaptive(PrefixField::build(m), cfg, threads, keep_curves);
}

AdaptiveLocalizer::AdaptiveLocalizer(std::vector<Descriptor> refs, AdaptiveConfig cfg)
    : refs_(std::move(refs)), cfg_(cfg), prefix_(refs_.size()) {
  cfg_.validate();
  if (refs_.empty()) throw ArgumentError("AdaptiveLocalizer: no reference frames");
}

LocalizationResult AdaptiveLocalizer::push(const Descriptor& q) {
  const auto row = build_row(q, refs_, cfg_.op);
  return push_row(row.values);
}

LocalizationResult AdaptiveLocalizer::push_row(std::span<const double> d_row) {
  prefix_.append_row(d_row);
  return adapt_frame(prefix_, prefix_.n_query() - 1, cfg_, scratch_);
}

std::string trace_csv(std::span<const LocalizationResult> frames) {
  std::string out = "query_index,chosen_L,best_ref,score,significance,status\n";
  for (const auto& r : frames) {
    out += std::to_string(r.query_index);
    out += ',';
    if (r.has_hypothesis()) {
      out += std::to_string(r.window_len) + ',' + std::to_string(r.best_ref) + ',' + format_real(r.score) + ',' +
             format_real(r.significance);
    } else {
      out += ",,,";
    }
    out += ',';
    out += to_string(r.status);
    out += '\n';
  }
  return out;
}

std::string curve_csv(const AdaptiveTrace& trace) {
  std::string out = "query_index,L,p\n";
  for (std::size_t i = 0; i < trace.curves.size(); ++i) {
    for (const auto& c : trace.curves[i]) {
      out += std::to_string(i) + ',' + std::to_string(c.L) + ',' + format_real(c.p) + '\n';
    }
  }
  return out;
}

}  // namespace seqloc
