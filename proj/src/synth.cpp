#include "cacl/synth.hpp"

#include <cmath>
#include <set>
#include <string>

#include "cacl/rng.hpp"

namespace cacl {

void SynthSpec::validate() const {
  require(dim >= 2, "synth: dim must be >= 2");
  require(num_identities >= 1, "synth: num_identities must be >= 1");
  require(target_identities >= 1, "synth: target_identities must be >= 1");
  require(samples_per_identity_per_camera >= 1, "synth: samples_per_identity_per_camera must be >= 1");
  require(!source_cameras.empty(), "synth: need at least one source camera");
  require(!target_cameras.empty(), "synth: need at least one target camera");
  require(identity_spread >= 0.0, "synth: identity_spread must be >= 0");
  require(!share_identities || target_identities == num_identities,
          "synth: share_identities requires target_identities == num_identities");
  require(domain_offset.empty() || domain_offset.size() == dim, "synth: domain_offset has wrong dimension");
  require(!bias_multipliers.empty(), "synth: bias_multipliers must not be empty");
  for (const auto* cams : {&source_cameras, &target_cameras}) {
    std::set<std::uint32_t> ids;
    for (const auto& c : *cams) {
      require(c.id >= 1, "synth: camera ids must be >= 1");
      require(ids.insert(c.id).second, "synth: duplicate camera id " + std::to_string(c.id));
      // Zero noise is admitted for exact-distribution fixtures.
      require(c.noise >= 0.0, "synth: camera noise must be >= 0");
      require(c.shift.empty() || c.shift.size() == dim, "synth: camera shift has wrong dimension");
      require(c.shift_norm >= 0.0, "synth: shift_norm must be >= 0");
    }
  }
}

SynthSpec SynthSpec::defaults() {
  SynthSpec s;
  s.source_cameras = {{1, {}, 0.0, 0.4}, {2, {}, 0.5, 0.4}};
  s.target_cameras = {{1, {}, 0.0, 0.4}, {2, {}, 1.0, 0.4}, {3, {}, 5.0, 0.4}};
  s.domain_offset_norm = 0.5;
  return s;
}

namespace {

std::vector<double> random_direction(std::size_t dim, Rng& rng) {
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = rng.normal();
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

std::vector<double> resolve_shift(const std::vector<double>& explicit_shift, double norm, std::size_t dim, Rng& rng) {
  if (!explicit_shift.empty()) return explicit_shift;
  // Always draw so the stream position does not depend on the norm.
  auto dir = random_direction(dim, rng);
  for (double& x : dir) x *= norm;
  return dir;
}

Matrix draw_centroids(std::size_t count, std::size_t dim, double spread, Rng& rng) {
  Matrix c(count, dim);
  for (double& x : c.data()) x = rng.normal(0.0, 1.0) * spread;
  return c;
}

Dataset make_domain(const Matrix& centroids, const std::vector<SynthCamera>& cams,
                    const std::vector<std::vector<double>>& shifts, const std::vector<double>& offset, Domain domain,
                    std::size_t per_camera, Rng& rng) {
  std::vector<FeatureRecord> records;
  records.reserve(cams.size() * centroids.rows() * per_camera);
  const std::size_t dim = centroids.cols();
  for (std::size_t c = 0; c < cams.size(); ++c) {
    for (std::size_t id = 0; id < centroids.rows(); ++id) {
      for (std::size_t s = 0; s < per_camera; ++s) {
        FeatureRecord r;
        r.id = records.size();
        r.camera = cams[c].id;
        r.domain = domain;
        r.identity = static_cast<std::int64_t>(id);
        r.feature.resize(dim);
        for (std::size_t k = 0; k < dim; ++k) {
          double v = centroids(id, k) + shifts[c][k] + offset[k];
          v += cams[c].noise > 0.0 ? rng.normal(0.0, cams[c].noise) : 0.0;
          r.feature[k] = static_cast<float>(v);
        }
        records.push_back(std::move(r));
      }
    }
  }
  return Dataset(std::move(records));
}

}  // namespace

SynthDomains generate_domains(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Matrix src_centroids = draw_centroids(spec.num_identities, spec.dim, spec.identity_spread, rng);
  const Matrix tgt_centroids = spec.share_identities
                                   ? src_centroids
                                   : draw_centroids(spec.target_identities, spec.dim, spec.identity_spread, rng);
  const Matrix test_centroids = draw_centroids(spec.test_identities, spec.dim, spec.identity_spread, rng);

  std::vector<std::vector<double>> src_shifts, tgt_shifts;
  for (const auto& c : spec.source_cameras) src_shifts.push_back(resolve_shift(c.shift, c.shift_norm, spec.dim, rng));
  for (const auto& c : spec.target_cameras) tgt_shifts.push_back(resolve_shift(c.shift, c.shift_norm, spec.dim, rng));
  const auto offset = resolve_shift(spec.domain_offset, spec.domain_offset_norm, spec.dim, rng);
  const std::vector<double> zero(spec.dim, 0.0);

  const std::size_t per = spec.samples_per_identity_per_camera;
  SynthDomains out;
  out.source = make_domain(src_centroids, spec.source_cameras, src_shifts, zero, Domain::Source, per, rng);
  out.target = make_domain(tgt_centroids, spec.target_cameras, tgt_shifts, offset, Domain::Target, per, rng);
  if (spec.test_identities > 0) {
    out.test = make_domain(test_centroids, spec.target_cameras, tgt_shifts, offset, Domain::Target, per, rng);
  }
  return out;
}

SynthSpec camera_bias_spec(const SynthSpec& spec) {
  SynthSpec out = spec;
  for (std::size_t i = 0; i < out.target_cameras.size(); ++i) {
    auto& cam = out.target_cameras[i];
    const double norm = spec.camera_bias * spec.identity_spread * spec.bias_multipliers[i % spec.bias_multipliers.size()];
    if (!cam.shift.empty()) {
      double cur = 0.0;
      for (double x : cam.shift) cur += x * x;
      cur = std::sqrt(cur);
      if (cur > 0.0) {
        for (double& x : cam.shift) x *= norm / cur;
        continue;
      }
      cam.shift.clear();
    }
    cam.shift_norm = norm;
  }
  return out;
}

SynthDomains camera_bias_scenario(const SynthSpec& spec) { return generate_domains(camera_bias_spec(spec)); }

}  // namespace cacl
