#pragma once

#include <vector>

#include "hhcl/core.hpp"

namespace hhcl {

/// Re-ID-like feature clouds on the unit sphere.
///
/// Each identity has a prototype direction; each (identity, camera) pair adds
/// a Gaussian offset made of a per-camera component shared by all identities
/// and an identity-specific component, mixed by `camera_shared`. Instances add
/// isotropic noise and are normalized. Spreads are per-coordinate standard
/// deviations. Train and test identities are disjoint.
struct SynthSpec {
  std::size_t num_identities = 50;       // training identities
  std::size_t num_test_identities = 50;  // query/gallery identities
  std::size_t instances_per_identity = 20;
  std::size_t dims = 32;
  std::size_t num_cameras = 3;
  double sigma_within = 0.04;
  double sigma_cam = 0.08;
  double camera_shared = 0.5;
  double min_angle = 0.5;  // radians between any two prototypes
  std::uint64_t seed = 0;
  std::size_t max_attempts = 10000;  // per prototype
};

struct SynthDataset {
  std::vector<Sample> train;
  std::vector<Sample> query;
  std::vector<Sample> gallery;
};

/// Spec cannot be realized (prototype packing failed).
class InfeasibleSpecError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

namespace detail {

inline std::vector<double> gaussian_vector(std::size_t d, Rng& rng) {
  std::vector<double> v(d);
  for (double& x : v) x = standard_normal(rng);
  return v;
}

inline std::vector<double> random_unit(std::size_t d, Rng& rng) {
  for (;;) {
    auto v = gaussian_vector(d, rng);
    const double n = norm(v);
    if (n > 1e-12) {
      for (double& x : v) x /= n;
      return v;
    }
  }
}

}  // namespace detail

inline void validate_synth_spec(const SynthSpec& s) {
  if (s.num_identities < 1 || s.num_test_identities < 1 || s.instances_per_identity < 1 || s.dims < 1 ||
      s.num_cameras < 1)
    throw ParameterError("synthetic spec counts must be >= 1");
  if (!(s.sigma_within >= 0.0) || !(s.sigma_cam >= 0.0)) throw ParameterError("synthetic spreads must be >= 0");
  if (!(s.camera_shared >= 0.0 && s.camera_shared <= 1.0)) throw ParameterError("camera_shared must lie in [0, 1]");
  if (!(s.min_angle >= 0.0)) throw ParameterError("min_angle must be >= 0");
  if (s.num_cameras < 2)
    throw InfeasibleSpecError("query/gallery split needs every identity in at least 2 cameras");
  if (s.instances_per_identity < s.num_cameras + 1)
    throw InfeasibleSpecError("need more instances per identity than cameras (one query per camera plus gallery)");
}

inline SynthDataset generate(const SynthSpec& spec) {
  validate_synth_spec(spec);
  Rng rng(spec.seed);
  const std::size_t d = spec.dims;
  const std::size_t total_ids = spec.num_identities + spec.num_test_identities;
  const double cos_limit = std::cos(spec.min_angle);

  std::vector<std::vector<double>> protos;
  protos.reserve(total_ids);
  for (std::size_t id = 0; id < total_ids; ++id) {
    bool placed = false;
    for (std::size_t attempt = 0; attempt < spec.max_attempts && !placed; ++attempt) {
      auto cand = detail::random_unit(d, rng);
      placed = std::all_of(protos.begin(), protos.end(), [&](const auto& p) { return dot(p, cand) <= cos_limit; });
      if (placed) protos.push_back(std::move(cand));
    }
    if (!placed)
      throw InfeasibleSpecError("could not place prototype " + std::to_string(id) + " with min_angle " +
                                std::to_string(spec.min_angle) + " in " + std::to_string(d) + " dims");
  }

  std::vector<std::vector<double>> shared(spec.num_cameras);
  for (auto& s : shared) s = detail::gaussian_vector(d, rng);
  const double w_shared = std::sqrt(spec.camera_shared);
  const double w_own = std::sqrt(1.0 - spec.camera_shared);

  SynthDataset out;
  for (std::size_t id = 0; id < total_ids; ++id) {
    std::vector<std::vector<double>> offset(spec.num_cameras);
    for (std::size_t c = 0; c < spec.num_cameras; ++c) {
      const auto own = detail::gaussian_vector(d, rng);
      offset[c].resize(d);
      for (std::size_t k = 0; k < d; ++k) offset[c][k] = spec.sigma_cam * (w_shared * shared[c][k] + w_own * own[k]);
    }
    const bool is_train = id < spec.num_identities;
    for (std::size_t i = 0; i < spec.instances_per_identity; ++i) {
      const std::size_t cam = i % spec.num_cameras;
      std::vector<double> x(d);
      for (std::size_t k = 0; k < d; ++k)
        x[k] = protos[id][k] + offset[cam][k] + spec.sigma_within * standard_normal(rng);
      const double n = norm(x);
      if (!(n > 0.0)) throw NumericError("generated a zero feature vector");
      Sample s;
      s.feature.resize(d);
      for (std::size_t k = 0; k < d; ++k) s.feature[k] = static_cast<float>(x[k] / n);
      s.identity = static_cast<std::int64_t>(id);
      s.camera = static_cast<std::uint32_t>(cam);
      if (is_train) {
        out.train.push_back(std::move(s));
      } else if (i < spec.num_cameras) {
        out.query.push_back(std::move(s));  // first instance seen by each camera
      } else {
        out.gallery.push_back(std::move(s));
      }
    }
  }
  return out;
}

}  // namespace hhcl
