#include <doctest.h>

#include <cmath>
#include <set>

#include "cacl/error.hpp"
#include "cacl/synth.hpp"

using namespace cacl;

namespace {

SynthSpec small_spec(std::uint64_t seed) {
  SynthSpec s = SynthSpec::defaults();
  s.dim = 4;
  s.num_identities = 3;
  s.target_identities = 2;
  s.test_identities = 2;
  s.samples_per_identity_per_camera = 2;
  s.seed = seed;
  return s;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("sizes, domains and cameras") {
  const auto d = generate_domains(small_spec(1));
  CHECK(d.source.size() == 2 * 3 * 2);
  CHECK(d.target.size() == 3 * 2 * 2);
  CHECK(d.test.size() == 3 * 2 * 2);
  CHECK(d.source.cameras() == std::set<std::uint32_t>{1, 2});
  CHECK(d.target.cameras() == std::set<std::uint32_t>{1, 2, 3});
  for (const auto& r : d.source.records()) CHECK(r.domain == Domain::Source);
  for (const auto& r : d.target.records()) CHECK(r.domain == Domain::Target);
  // Records loop camera -> identity -> sample.
  CHECK(d.source.records()[0].camera == 1);
  CHECK(d.source.records()[0].identity == 0);
  CHECK(d.source.records()[2].identity == 1);
  CHECK(d.source.records()[6].camera == 2);
}

TEST_CASE("same seed gives identical data, different seed differs") {
  const auto a = generate_domains(small_spec(5));
  const auto b = generate_domains(small_spec(5));
  const auto c = generate_domains(small_spec(6));
  CHECK(a.target.features() == b.target.features());
  CHECK(a.test.features() == b.test.features());
  CHECK_FALSE(a.target.features() == c.target.features());
}

TEST_CASE("zero noise puts every sample of an identity on one point") {
  auto s = small_spec(3);
  for (auto& c : s.target_cameras) c.noise = 0.0;
  const auto d = generate_domains(s);
  const auto f = d.target.features();
  CHECK(f.row(0)[0] == f.row(1)[0]);
}

TEST_CASE("explicit shift is applied") {
  auto s = small_spec(2);
  for (auto& c : s.target_cameras) c.noise = 0.0;
  s.target_cameras[1].shift = {10.0, 0.0, 0.0, 0.0};
  s.domain_offset = {0.0, 0.0, 0.0, 0.0};
  const auto d = generate_domains(s);
  // Camera 1 and camera 2 samples of identity 0.
  const auto& r1 = d.target.records()[0];
  const auto& r2 = d.target.records()[2 * 2];
  CHECK(r2.identity == r1.identity);
  CHECK(r2.feature[0] - r1.feature[0] == doctest::Approx(10.0).epsilon(1e-5));
}

TEST_CASE("camera bias rescales target shifts") {
  auto s = small_spec(1);
  s.camera_bias = 2.0;
  s.identity_spread = 1.5;
  const auto b = camera_bias_spec(s);
  CHECK(b.target_cameras[0].shift_norm == doctest::Approx(2.0 * 1.5 * 2.0));
  CHECK(b.target_cameras[1].shift_norm == doctest::Approx(2.0 * 1.5 * 1.0));
  CHECK(b.target_cameras[2].shift_norm == doctest::Approx(2.0 * 1.5 * 3.0));
  s.target_cameras[0].shift = {3.0, 4.0, 0.0, 0.0};
  CHECK(norm(camera_bias_spec(s).target_cameras[0].shift) == doctest::Approx(6.0));
  CHECK(camera_bias_scenario(s).target.size() == generate_domains(s).target.size());
}

TEST_CASE("spec validation") {
  auto s = small_spec(1);
  s.dim = 1;
  CHECK_THROWS_AS(generate_domains(s), ValidationError);
  s = small_spec(1);
  s.target_cameras.push_back(s.target_cameras.front());
  CHECK_THROWS_AS(generate_domains(s), ValidationError);
  s = small_spec(1);
  s.target_cameras[0].noise = -0.1;
  CHECK_THROWS_AS(generate_domains(s), ValidationError);
  s = small_spec(1);
  s.target_cameras[0].shift = {1.0};
  CHECK_THROWS_AS(generate_domains(s), ValidationError);
  s = small_spec(1);
  s.share_identities = true;
  CHECK_THROWS_AS(generate_domains(s), ValidationError);
  s.target_identities = s.num_identities;
  CHECK_NOTHROW(generate_domains(s));
}
