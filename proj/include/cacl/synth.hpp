#pragma once

#include <cstdint>
#include <vector>

#include "cacl/datamodel.hpp"

namespace cacl {

struct SynthCamera {
  std::uint32_t id = 1;
  // Explicit shift; when empty, a shift of norm `shift_norm` along a seeded
  // random unit direction is drawn instead.
  std::vector<double> shift;
  double shift_norm = 0.0;
  double noise = 0.4;
};

struct SynthSpec {
  std::size_t dim = 16;
  std::size_t num_identities = 20;       // source identities
  std::size_t target_identities = 20;    // unlabeled training identities in the target
  std::size_t test_identities = 20;      // held-out target identities for evaluation
  std::size_t samples_per_identity_per_camera = 10;
  std::vector<SynthCamera> source_cameras;
  std::vector<SynthCamera> target_cameras;
  // Added to every target sample. Empty means zero; `domain_offset_norm`
  // draws a seeded direction like SynthCamera::shift_norm.
  std::vector<double> domain_offset;
  double domain_offset_norm = 0.0;
  double identity_spread = 1.0;
  // Target identities reuse the source centroids.
  bool share_identities = false;
  // camera_bias_scenario: target shift norm of camera i is
  // camera_bias * identity_spread * bias_multipliers[i % size].
  double camera_bias = 2.25;
  std::vector<double> bias_multipliers = {2.0, 1.0, 3.0};
  std::uint64_t seed = 0;

  void validate() const;
  static SynthSpec defaults();
};

struct SynthDomains {
  Dataset source;
  Dataset target;  // unlabeled for training; identities kept for diagnostics
  Dataset test;    // held-out identities under the target camera topology
};

// Each sample = identity centroid + camera shift (+ domain offset on the
// target side) + isotropic Gaussian noise. Deterministic per spec.seed.
//
// Draw order: source centroids, target centroids, test centroids, source
// camera directions, target camera directions, domain offset direction, then
// samples (source, target, test), each looping camera -> identity -> sample.
SynthDomains generate_domains(const SynthSpec& spec);

// The spec with every target camera's shift rescaled per camera_bias, so the
// camera term dominates identity spread in raw feature space.
SynthSpec camera_bias_spec(const SynthSpec& spec);
SynthDomains camera_bias_scenario(const SynthSpec& spec);

}  // namespace cacl
