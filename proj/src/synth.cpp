#include "seqloc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seqloc/error.hpp"
#include "seqloc/rng.hpp"

namespace seqloc {

std::string_view to_string(Modality m) { return m == Modality::image_like ? "image" : "wifi"; }

Modality parse_modality(std::string_view name) {
  if (name == "image" || name == "image_like" || name == "image-like") return Modality::image_like;
  if (name == "wifi" || name == "wifi_like" || name == "wifi-like") return Modality::wifi_like;
  throw ArgumentError("unknown modality '" + std::string(name) + "'");
}

void SynthSpec::validate() const {
  if (n_ref < 2) throw ArgumentError("synth: n_ref must be at least 2");
  if (modality == Modality::image_like && descriptor_dim == 0) throw ArgumentError("synth: descriptor_dim must be positive");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ArgumentError("synth: noise_sigma must be >= 0");
  if (!(speed_drift >= 0.0) || !std::isfinite(speed_drift)) throw ArgumentError("synth: speed_drift must be >= 0");
  if (!(speed_corr >= 0.0 && speed_corr < 1.0)) throw ArgumentError("synth: speed_corr must be in [0, 1)");
  if (!(fast_rho >= 0.0 && fast_rho < 1.0) || !(slow_rho >= 0.0 && slow_rho < 1.0)) {
    throw ArgumentError("synth: AR coefficients must be in [0, 1)");
  }
  if (!(slow_amplitude >= 0.0)) throw ArgumentError("synth: slow_amplitude must be >= 0");
  if (modality == Modality::wifi_like) {
    if (ap_count == 0) throw ArgumentError("synth: ap_count must be positive");
    if (!(mean_active > 0.0) || 2.0 * static_cast<double>(ap_count) <= 3.0 * mean_active) {
      throw ArgumentError("synth: mean_active must be positive and well below ap_count");
    }
  }
  if (shuffle) {
    const double n = static_cast<double>(query_count());
    if (!(shuffle->min_frac > 0.0 && shuffle->min_frac <= shuffle->max_frac && shuffle->max_frac < 1.0) ||
        n * shuffle->min_frac < 1.0 || std::floor(shuffle->max_frac * n) < std::ceil(shuffle->min_frac * n)) {
      throw ArgumentError("synth: invalid shuffle fractions for this query length");
    }
  }
}

namespace {

// Query positions along the reference route, in reference-frame units.
std::vector<double> query_positions(const SynthSpec& spec, Rng& rng) {
  const std::size_t nq = spec.query_count();
  const double innovation = std::sqrt(1.0 - spec.speed_corr * spec.speed_corr);
  std::vector<double> cum(nq, 0.0);
  double u = 0.0;
  for (std::size_t t = 0; t + 1 < nq; ++t) {
    u = spec.speed_corr * u + innovation * rng.normal();
    cum[t + 1] = cum[t] + std::exp(spec.speed_drift * u);
  }
  const double span = static_cast<double>(spec.n_ref - 1);
  std::vector<double> g(nq, 0.0);
  if (nq > 1) {
    for (std::size_t t = 0; t < nq; ++t) g[t] = std::min(cum[t] * span / cum[nq - 1], span);
  }
  return g;
}

std::vector<std::vector<double>> reference_walk(const SynthSpec& spec, Rng& rng) {
  const std::size_t dim = spec.descriptor_dim;
  std::vector<double> fast(dim), slow(dim);
  for (auto& v : fast) v = rng.normal();
  for (auto& v : slow) v = rng.normal();
  const double fi = std::sqrt(1.0 - spec.fast_rho * spec.fast_rho);
  const double si = std::sqrt(1.0 - spec.slow_rho * spec.slow_rho);
  std::vector<std::vector<double>> walk(spec.n_ref, std::vector<double>(dim));
  for (std::size_t t = 0; t < spec.n_ref; ++t) {
    for (std::size_t k = 0; k < dim; ++k) {
      fast[k] = spec.fast_rho * fast[k] + fi * rng.normal();
      slow[k] = spec.slow_rho * slow[k] + si * rng.normal();
      walk[t][k] = fast[k] + spec.slow_amplitude * slow[k];
    }
  }
  return walk;
}

void generate_image(const SynthSpec& spec, Rng& rng, const std::vector<double>& g, SynthData& out) {
  const auto walk = reference_walk(spec, rng);
  for (const auto& r : walk) out.refs.push_back(Descriptor::dense(r));
  const std::size_t dim = spec.descriptor_dim;
  for (double pos : g) {
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, spec.n_ref - 1);
    const double f = pos - static_cast<double>(lo);
    std::vector<double> q(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      q[k] = (1.0 - f) * walk[lo][k] + f * walk[hi][k] + spec.noise_sigma * rng.normal();
    }
    out.queries.push_back(Descriptor::dense(std::move(q)));
  }
}

struct AccessPoint {
  double center;
  double half_width;
};

// Strength at `pos`, or nothing when out of range.
std::vector<SparseEntry> wifi_frame(const std::vector<AccessPoint>& aps, double pos, double noise, Rng* rng) {
  std::vector<SparseEntry> entries;
  for (std::size_t a = 0; a < aps.size(); ++a) {
    const double dist = std::abs(pos - aps[a].center);
    if (dist >= aps[a].half_width) continue;
    double strength = 100.0 - 35.0 - 55.0 * dist / aps[a].half_width;
    if (rng) strength += noise * rng->normal();
    if (strength > 0.0) entries.push_back({static_cast<std::uint32_t>(a), strength});
  }
  return entries;
}

void generate_wifi(const SynthSpec& spec, Rng& rng, const std::vector<double>& g, SynthData& out) {
  const double n = static_cast<double>(spec.n_ref);
  const double A = static_cast<double>(spec.ap_count);
  // Expected active count is A * 2w / (n + 2W) with margin W = 1.5 w.
  const double w = spec.mean_active * n / (2.0 * A - 3.0 * spec.mean_active);
  const double margin = 1.5 * w;
  std::vector<AccessPoint> aps(spec.ap_count);
  for (auto& ap : aps) {
    ap.center = -margin + rng.uniform() * (n + 2.0 * margin);
    ap.half_width = w * (0.5 + rng.uniform());
  }
  for (std::size_t t = 0; t < spec.n_ref; ++t) {
    out.refs.push_back(Descriptor::sparse(spec.ap_count, wifi_frame(aps, static_cast<double>(t), 0.0, nullptr)));
  }
  for (double pos : g) {
    out.queries.push_back(Descriptor::sparse(spec.ap_count, wifi_frame(aps, pos, spec.noise_sigma, &rng)));
  }
}

}  // namespace

SynthData synth_generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SynthData out;
  const auto g = query_positions(spec, rng);
  if (spec.modality == Modality::image_like) {
    generate_image(spec, rng, g, out);
  } else {
    generate_wifi(spec, rng, g, out);
  }
  out.gt.ref_index.reserve(g.size());
  for (double pos : g) out.gt.ref_index.emplace_back(static_cast<std::size_t>(std::lround(pos)));

  if (spec.shuffle) {
    auto sh = shuffle_traverse(out.queries.size(), spec.shuffle->min_frac, spec.shuffle->max_frac, spec.shuffle->seed);
    out.queries = apply_permutation<Descriptor>(out.queries, sh.perm);
    out.gt = permute_ground_truth(out.gt, sh.perm);
    out.perm = std::move(sh.perm);
  }
  return out;
}

}  // namespace seqloc
