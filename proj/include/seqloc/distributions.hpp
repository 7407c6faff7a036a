#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace seqloc {

enum class FitMethod { gaussian, robust_gaussian, gmm2, gmm3 };

std::string_view to_string(FitMethod m);
/// Accepts "gaussian", "robust"/"robust_gaussian", "gmm2", "gmm3".
FitMethod parse_fit_method(std::string_view name);

inline constexpr FitMethod kAllFitMethods[] = {FitMethod::gaussian, FitMethod::robust_gaussian,
                                               FitMethod::gmm2, FitMethod::gmm3};

/// Scale factor making k * MAD a consistent estimator of sigma for normal data.
inline constexpr double kMadScale = 1.4826;
/// Expectation-maximization iterations per mixture fit.
inline constexpr int kEmIterations = 10;

/// 1e-9 * max(1, |location|).
double sigma_floor(double location);

struct Component {
  double weight = 1.0;
  double location = 0.0;
  double scale = 1.0;
};

struct DistributionFit {
  FitMethod method = FitMethod::gaussian;
  std::vector<Component> components;
  /// The input had no spread (all values equal).
  bool degenerate = false;
};

/// Reusable buffers for the hot localization loop.
struct FitScratch {
  std::vector<double> sorted;
  std::vector<double> reduced;
};

DistributionFit fit_gaussian(std::span<const double> scores);
DistributionFit fit_robust_gaussian(std::span<const double> scores);
DistributionFit fit_robust_gaussian(std::span<const double> scores, FitScratch& scratch);

/// One-dimensional K-component Gaussian mixture, exactly kEmIterations EM steps
/// from a deterministic start: means at the 25/75 (K=2) or 25/50/75 (K=3)
/// percentiles, every scale at the global population sigma, equal weights.
/// Inputs with fewer than K+1 distinct values fall back to fit_gaussian.
///
/// When `log_likelihood` is non-null it receives kEmIterations + 1 values: the
/// total log-likelihood at the start and after each iteration.
DistributionFit fit_gmm(std::span<const double> scores, int K, std::vector<double>* log_likelihood = nullptr);
DistributionFit fit_gmm(std::span<const double> scores, int K, FitScratch& scratch,
                        std::vector<double>* log_likelihood = nullptr);

DistributionFit fit(std::span<const double> scores, FitMethod method, FitScratch& scratch);

/// Standard normal CDF. Uses the positive-term series
///   erf(x) = 2/sqrt(pi) * exp(-x^2) * sum_n 2^n x^(2n+1) / (1*3*...*(2n+1))
/// for x < 3 and the Laplace continued fraction
///   erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
/// (modified Lentz, relative tolerance 1e-16) for x >= 3, where x = |z|/sqrt(2).
/// Absolute error is below 1e-15 everywhere; the tail is accurate to ~1e-15
/// relative until it underflows.
double std_normal_cdf(double z);
/// ln Phi(z), finite for every finite z (no underflow in the lower tail).
double log_std_normal_cdf(double z);

/// Phi((x - mu) / sigma); sigma must be positive.
double normal_cdf(double x, double mu, double sigma);
double log_normal_cdf(double x, double mu, double sigma);

/// Mixture CDF sum_k w_k Phi((x - mu_k) / sigma_k).
double cdf(const DistributionFit& fit, double x);
double log_cdf(const DistributionFit& fit, double x);

struct Significance {
  double p = 1.0;
  double log_p = 0.0;
  std::size_t min_index = 0;
  bool degenerate = true;
};

/// Probability of drawing a score at or below the minimum from a distribution
/// fitted to all scores. Scores with no spread (or fewer than two) give p = 1.
/// With `exclude_best` the minimum itself is left out of the fit.
Significance significance(std::span<const double> scores, FitMethod method, FitScratch& scratch,
                          bool exclude_best = false);
Significance significance(std::span<const double> scores, FitMethod method, bool exclude_best = false);

}  // namespace seqloc
