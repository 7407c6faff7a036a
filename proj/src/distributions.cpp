#include "seqloc/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "seqloc/diagnostics.hpp"
#include "seqloc/error.hpp"

namespace seqloc {

std::string_view to_string(FitMethod m) {
  switch (m) {
    case FitMethod::gaussian:
      return "gaussian";
    case FitMethod::robust_gaussian:
      return "robust";
    case FitMethod::gmm2:
      return "gmm2";
    case FitMethod::gmm3:
      return "gmm3";
  }
  return "?";
}

FitMethod parse_fit_method(std::string_view name) {
  if (name == "gaussian") return FitMethod::gaussian;
  if (name == "robust" || name == "robust_gaussian") return FitMethod::robust_gaussian;
  if (name == "gmm2") return FitMethod::gmm2;
  if (name == "gmm3") return FitMethod::gmm3;
  throw ArgumentError("unknown approximation '" + std::string(name) + "'");
}

double sigma_floor(double location) { return 1e-9 * std::max(1.0, std::abs(location)); }

// ---------------------------------------------------------------------------
// Normal CDF

namespace {

constexpr double kSeriesLimit = 3.0;

// erf(x) for 0 <= x < kSeriesLimit. Every term is positive, so there is no
// cancellation; about x^2 + 30 terms reach double precision.
double erf_series(double x) {
  const double x2 = x * x;
  double term = x;
  double sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= 2.0 * x2 / (2.0 * n + 1.0);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-x2) * sum;
}

// Denominator D(x) of erfc(x) = exp(-x^2) / (sqrt(pi) * D(x)), x >= kSeriesLimit.
double erfc_cf_denominator(double x) {
  constexpr double tiny = 1e-300;
  double f = x;
  double c = x;
  double d = 0.0;
  for (int n = 1; n < 500; ++n) {
    const double a = 0.5 * n;
    d = x + a * d;
    if (std::abs(d) < tiny) d = tiny;
    c = x + a / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return f;
}

// erfc(x) for x >= 0.
double erfc_pos(double x) {
  if (x < kSeriesLimit) return 1.0 - erf_series(x);
  return std::exp(-x * x) / (std::sqrt(std::numbers::pi) * erfc_cf_denominator(x));
}

double log_erfc_pos(double x) {
  if (x < kSeriesLimit) return std::log(1.0 - erf_series(x));
  return -x * x - 0.5 * std::log(std::numbers::pi) - std::log(erfc_cf_denominator(x));
}

}  // namespace

double std_normal_cdf(double z) {
  if (std::isnan(z)) return z;
  const double x = std::abs(z) / std::numbers::sqrt2;
  const double tail = 0.5 * erfc_pos(x);
  return z < 0.0 ? tail : 1.0 - tail;
}

double log_std_normal_cdf(double z) {
  if (std::isnan(z)) return z;
  if (z == -std::numeric_limits<double>::infinity()) return z;
  const double x = std::abs(z) / std::numbers::sqrt2;
  if (z < 0.0) return std::log(0.5) + log_erfc_pos(x);
  return std::log1p(-0.5 * erfc_pos(x));
}

double normal_cdf(double x, double mu, double sigma) {
  if (!(sigma > 0.0)) throw ArgumentError("normal_cdf: sigma must be positive");
  return std_normal_cdf((x - mu) / sigma);
}

double log_normal_cdf(double x, double mu, double sigma) {
  if (!(sigma > 0.0)) throw ArgumentError("normal_cdf: sigma must be positive");
  return log_std_normal_cdf((x - mu) / sigma);
}

double cdf(const DistributionFit& fit, double x) {
  double sum = 0.0;
  for (const auto& c : fit.components) sum += c.weight * normal_cdf(x, c.location, c.scale);
  return std::min(sum, 1.0);
}

double log_cdf(const DistributionFit& fit, double x) {
  if (fit.components.size() == 1) return log_normal_cdf(x, fit.components[0].location, fit.components[0].scale);
  double terms[8];
  const std::size_t k = std::min<std::size_t>(fit.components.size(), 8);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const auto& comp = fit.components[c];
    terms[c] = comp.weight > 0.0 ? std::log(comp.weight) + log_normal_cdf(x, comp.location, comp.scale)
                                 : -std::numeric_limits<double>::infinity();
    top = std::max(top, terms[c]);
  }
  if (top == -std::numeric_limits<double>::infinity()) return top;
  double sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) sum += std::exp(terms[c] - top);
  return std::min(top + std::log(sum), 0.0);
}

// ---------------------------------------------------------------------------
// Fits

namespace {

void require_scores(std::span<const double> scores, const char* who) {
  if (scores.size() < 2) throw ArgumentError(std::string(who) + ": at least two scores required");
}

DistributionFit single(FitMethod method, double location, double scale, bool degenerate) {
  DistributionFit f;
  f.method = method;
  f.components.push_back({1.0, location, std::max(scale, sigma_floor(location))});
  f.degenerate = degenerate;
  return f;
}

// Median of v (reordered in place).
double median_inplace(std::vector<double>& v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

// Linear interpolation between closest ranks of sorted data.
double percentile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

DistributionFit fit_gaussian(std::span<const double> scores) {
  require_scores(scores, "fit_gaussian");
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (*lo == *hi) return single(FitMethod::gaussian, *lo, 0.0, true);
  double sum = 0.0;
  for (double s : scores) sum += s;
  const double n = static_cast<double>(scores.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  return single(FitMethod::gaussian, mean, std::sqrt(ss / n), false);
}

DistributionFit fit_robust_gaussian(std::span<const double> scores, FitScratch& scratch) {
  require_scores(scores, "fit_robust_gaussian");
  auto& v = scratch.sorted;
  v.assign(scores.begin(), scores.end());
  const double med = median_inplace(v);
  bool constant = true;
  for (auto& x : v) {
    if (x != med) constant = false;
    x = std::abs(x - med);
  }
  if (constant) return single(FitMethod::robust_gaussian, med, 0.0, true);
  const double mad = median_inplace(v);
  return single(FitMethod::robust_gaussian, med, kMadScale * mad, false);
}

DistributionFit fit_robust_gaussian(std::span<const double> scores) {
  FitScratch scratch;
  return fit_robust_gaussian(scores, scratch);
}

DistributionFit fit_gmm(std::span<const double> scores, int K, FitScratch& scratch,
                        std::vector<double>* log_likelihood) {
  if (K != 2 && K != 3) throw ArgumentError("fit_gmm: K must be 2 or 3");
  require_scores(scores, "fit_gmm");
  const FitMethod method = K == 2 ? FitMethod::gmm2 : FitMethod::gmm3;

  auto& sorted = scratch.sorted;
  sorted.assign(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t distinct = 1;
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    if (sorted[k] != sorted[k - 1]) ++distinct;
  }
  if (distinct < static_cast<std::size_t>(K) + 1) {
    warn("fit_gmm: fewer than K+1 distinct scores; falling back to a single Gaussian");
    auto g = fit_gaussian(scores);
    g.method = method;
    if (log_likelihood) log_likelihood->clear();
    return g;
  }

  const std::size_t n = scores.size();
  const auto global = fit_gaussian(scores).components[0];
  double w[3];
  double mu[3];
  double sd[3];
  const double quantiles2[] = {0.25, 0.75};
  const double quantiles3[] = {0.25, 0.50, 0.75};
  for (int k = 0; k < K; ++k) {
    w[k] = 1.0 / K;
    mu[k] = percentile_sorted(sorted, K == 2 ? quantiles2[k] : quantiles3[k]);
    sd[k] = std::max(global.scale, sigma_floor(mu[k]));
  }

  const double log_norm = 0.5 * std::log(2.0 * std::numbers::pi);
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();

  // One pass: E-step at the current parameters, accumulating the sufficient
  // statistics for the M-step. Moments are taken about the current means so the
  // variance update does not suffer from cancellation. Returns the
  // log-likelihood of the current parameters.
  double nk[3], s1[3], s2[3];
  auto pass = [&](bool want_ll) {
    double lw[3];
    double lsd[3];
    double inv_sd[3];
    for (int k = 0; k < K; ++k) {
      lw[k] = w[k] > 0.0 ? std::log(w[k]) : neg_inf;
      lsd[k] = std::log(sd[k]);
      inv_sd[k] = 1.0 / sd[k];
      nk[k] = s1[k] = s2[k] = 0.0;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = scores[i];
      double l[3];
      double dx[3];
      int top = 0;
      for (int k = 0; k < K; ++k) {
        dx[k] = x - mu[k];
        const double z = dx[k] * inv_sd[k];
        l[k] = lw[k] - lsd[k] - 0.5 * z * z;
        if (l[k] > l[top]) top = k;
      }
      double r[3];
      double sum = 0.0;
      for (int k = 0; k < K; ++k) {
        r[k] = k == top ? 1.0 : std::exp(l[k] - l[top]);
        sum += r[k];
      }
      const double inv = 1.0 / sum;
      for (int k = 0; k < K; ++k) {
        const double rk = r[k] * inv;
        nk[k] += rk;
        s1[k] += rk * dx[k];
        s2[k] += rk * dx[k] * dx[k];
      }
      if (want_ll) total += l[top] + std::log(sum) - log_norm;
    }
    return total;
  };

  if (log_likelihood) log_likelihood->clear();
  for (int iter = 0; iter < kEmIterations; ++iter) {
    const double ll = pass(log_likelihood != nullptr);
    if (log_likelihood) log_likelihood->push_back(ll);
    double wsum = 0.0;
    for (int k = 0; k < K; ++k) {
      w[k] = nk[k] / static_cast<double>(n);
      wsum += w[k];
      // A component with no responsibility keeps its location and scale.
      if (nk[k] <= std::numeric_limits<double>::min()) continue;
      const double shift = s1[k] / nk[k];
      mu[k] += shift;
      const double var = std::max(s2[k] / nk[k] - shift * shift, 0.0);
      sd[k] = std::max(std::sqrt(var), sigma_floor(mu[k]));
    }
    for (int k = 0; k < K; ++k) w[k] /= wsum;
  }
  if (log_likelihood) log_likelihood->push_back(pass(true));

  DistributionFit f;
  f.method = method;
  for (int k = 0; k < K; ++k) f.components.push_back({w[k], mu[k], sd[k]});
  return f;
}

DistributionFit fit_gmm(std::span<const double> scores, int K, std::vector<double>* log_likelihood) {
  FitScratch scratch;
  return fit_gmm(scores, K, scratch, log_likelihood);
}

DistributionFit fit(std::span<const double> scores, FitMethod method, FitScratch& scratch) {
  switch (method) {
    case FitMethod::gaussian:
      return fit_gaussian(scores);
    case FitMethod::robust_gaussian:
      return fit_robust_gaussian(scores, scratch);
    case FitMethod::gmm2:
      return fit_gmm(scores, 2, scratch);
    case FitMethod::gmm3:
      return fit_gmm(scores, 3, scratch);
  }
  throw ArgumentError("unknown fit method");
}

Significance significance(std::span<const double> scores, FitMethod method, FitScratch& scratch,
                          bool exclude_best) {
  require_scores(scores, "significance");
  Significance out;
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  out.min_index = static_cast<std::size_t>(lo - scores.begin());
  if (*lo == *hi) return out;
  std::span<const double> sample = scores;
  if (exclude_best) {
    if (scores.size() < 3) return out;
    auto& reduced = scratch.reduced;
    reduced.assign(scores.begin(), scores.end());
    reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(out.min_index));
    const auto [rlo, rhi] = std::minmax_element(reduced.begin(), reduced.end());
    if (*rlo == *rhi) return out;
    sample = reduced;
  }
  const auto f = fit(sample, method, scratch);
  if (f.degenerate) return out;
  out.degenerate = false;
  out.log_p = log_cdf(f, *lo);
  out.p = std::exp(out.log_p);
  return out;
}

Significance significance(std::span<const double> scores, FitMethod method, bool exclude_best) {
  FitScratch scratch;
  return significance(scores, method, scratch, exclude_best);
}

}  // namespace seqloc
