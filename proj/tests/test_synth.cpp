#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "seqloc/error.hpp"
#include "seqloc/synth.hpp"

using namespace seqloc;

TEST_CASE("noise-free aligned queries reproduce the references") {
  SynthSpec spec;
  spec.n_ref = 300;
  spec.noise_sigma = 0.0;
  spec.speed_drift = 0.0;
  const auto d = synth_generate(spec);
  REQUIRE(d.queries.size() == 300);
  REQUIRE(d.refs.size() == 300);
  for (std::size_t i = 0; i < 300; ++i) {
    CHECK(d.queries[i] == d.refs[i]);
    CHECK(d.gt.ref_index[i] == i);
  }
  CHECK(d.perm.empty());
  CHECK(d.refs[0].dim() == 32);
}

TEST_CASE("in-order ground truth spans the route monotonically") {
  SynthSpec spec;
  spec.n_ref = 500;
  spec.n_query = 650;
  spec.speed_drift = 0.3;
  const auto d = synth_generate(spec);
  REQUIRE(d.queries.size() == 650);
  REQUIRE(d.gt.size() == 650);
  CHECK(d.gt.count_known() == 650);
  CHECK(d.gt.ref_index.front() == 0u);
  CHECK(d.gt.ref_index.back() == 499u);
  for (std::size_t i = 1; i < 650; ++i) CHECK(*d.gt.ref_index[i] >= *d.gt.ref_index[i - 1]);
}

TEST_CASE("generation is seeded") {
  SynthSpec spec;
  spec.n_ref = 200;
  const auto a = synth_generate(spec);
  const auto b = synth_generate(spec);
  CHECK(a.queries == b.queries);
  CHECK(a.refs == b.refs);
  spec.seed = 2;
  CHECK(synth_generate(spec).refs != a.refs);
}

TEST_CASE("Wi-Fi-like frames") {
  SynthSpec spec;
  spec.modality = Modality::wifi_like;
  spec.seed = 3;
  const auto d = synth_generate(spec);
  REQUIRE(d.refs.size() == 2000);
  double active = 0.0;
  for (const auto& r : d.refs) {
    CHECK(r.dim() == 709);
    CHECK(r.kind() == DescriptorKind::sparse);
    active += static_cast<double>(r.entries().size());
    for (const auto& e : r.entries()) {
      CHECK(e.value > 0.0);
      CHECK(e.value <= 65.0);
    }
  }
  CHECK(std::abs(active / 2000.0 - 12.6) <= 1.0);
  for (const auto& q : d.queries) {
    for (const auto& e : q.entries()) CHECK(e.value > 0.0);
  }
}

TEST_CASE("shuffled queries keep ground truth locally monotone") {
  SynthSpec spec;
  spec.n_ref = 1000;
  spec.shuffle = ShuffleSpec{0.02, 0.2, 9};
  const auto d = synth_generate(spec);
  REQUIRE(d.perm.size() == 1000);
  CHECK_NOTHROW(check_permutation(d.perm));

  SynthSpec plain = spec;
  plain.shuffle.reset();
  const auto base = synth_generate(plain);
  const auto seg = shuffle_traverse(1000, 0.02, 0.2, 9);
  CHECK(d.perm == seg.perm);
  std::size_t descents = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    CHECK(d.queries[i] == base.queries[d.perm[i]]);
    CHECK(d.gt.ref_index[i] == base.gt.ref_index[d.perm[i]]);
    if (i > 0 && *d.gt.ref_index[i] < *d.gt.ref_index[i - 1]) ++descents;
  }
  CHECK(descents < seg.segments.size());
}

TEST_CASE("spec validation") {
  SynthSpec spec;
  spec.n_ref = 1;
  CHECK_THROWS_AS(synth_generate(spec), ArgumentError);
  spec.n_ref = 100;
  spec.noise_sigma = -1.0;
  CHECK_THROWS_AS(spec.validate(), ArgumentError);
  spec.noise_sigma = 1.0;
  spec.speed_corr = 1.0;
  CHECK_THROWS_AS(spec.validate(), ArgumentError);
  spec.speed_corr = 0.5;
  spec.shuffle = ShuffleSpec{0.001, 0.2, 1};
  CHECK_THROWS_AS(spec.validate(), ArgumentError);
  spec.shuffle.reset();
  spec.modality = Modality::wifi_like;
  spec.ap_count = 10;
  CHECK_THROWS_AS(spec.validate(), ArgumentError);
  CHECK(parse_modality("wifi") == Modality::wifi_like);
  CHECK(to_string(Modality::image_like) == "image");
  CHECK_THROWS_AS(parse_modality("lidar"), ArgumentError);
}
