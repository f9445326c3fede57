#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hhcl/core.hpp"
#include "json.hpp"

namespace hhcl {

/// Training hyperparameters. JSON keys are the field names verbatim.
struct TrainConfig {
  double mu = 0.5;       // weight of the cluster loss; 1 - mu goes to the hard-instance loss
  double tau_c = 0.05;   // cluster temperature
  double tau_ins = 0.05; // instance temperature
  double alpha = 0.2;    // centroid momentum
  std::uint32_t num_identities_per_batch = 16;
  std::uint32_t instances_per_identity = 16;
  std::uint32_t slots_per_cluster = 16;
  std::uint32_t epochs = 50;
  double lr = 3.5e-4;
  double weight_decay = 5e-4;
  std::uint32_t lr_decay_every = 20;
  double lr_decay_factor = 0.1;
  double dbscan_eps = 0.45;
  std::uint32_t dbscan_min_pts = 4;
  std::uint32_t kreciprocal_k = 30;
  // Weight of the Euclidean distance when blended with the Jaccard distance
  // before DBSCAN. 0 = pure Jaccard.
  double original_distance_weight = 0.0;
  std::vector<std::uint32_t> hidden_dims = {128};
  std::uint32_t embedding_dim = 64;
  std::uint64_t seed = 0;

  bool operator==(const TrainConfig&) const = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TrainConfig, mu, tau_c, tau_ins, alpha, num_identities_per_batch,
                                   instances_per_identity, slots_per_cluster, epochs, lr, weight_decay,
                                   lr_decay_every, lr_decay_factor, dbscan_eps, dbscan_min_pts, kreciprocal_k,
                                   original_distance_weight, hidden_dims, embedding_dim, seed)

/// Throws ConfigError listing every offending field.
inline void validate_config(const TrainConfig& cfg) {
  std::vector<std::string> bad;
  auto unit = [&](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) bad.emplace_back(name);
  };
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) bad.emplace_back(name);
  };
  unit(cfg.mu, "mu");
  positive(cfg.tau_c, "tau_c");
  positive(cfg.tau_ins, "tau_ins");
  unit(cfg.alpha, "alpha");
  positive(cfg.num_identities_per_batch, "num_identities_per_batch");
  positive(cfg.instances_per_identity, "instances_per_identity");
  positive(cfg.slots_per_cluster, "slots_per_cluster");
  positive(cfg.epochs, "epochs");
  positive(cfg.lr, "lr");
  if (!(cfg.weight_decay >= 0.0) || !std::isfinite(cfg.weight_decay)) bad.emplace_back("weight_decay");
  positive(cfg.lr_decay_every, "lr_decay_every");
  positive(cfg.lr_decay_factor, "lr_decay_factor");
  positive(cfg.dbscan_eps, "dbscan_eps");
  positive(cfg.dbscan_min_pts, "dbscan_min_pts");
  positive(cfg.kreciprocal_k, "kreciprocal_k");
  unit(cfg.original_distance_weight, "original_distance_weight");
  if (std::any_of(cfg.hidden_dims.begin(), cfg.hidden_dims.end(), [](auto h) { return h == 0; }))
    bad.emplace_back("hidden_dims");
  positive(cfg.embedding_dim, "embedding_dim");

  if (!bad.empty()) {
    std::string msg = "invalid config field(s):";
    for (const auto& f : bad) msg += " " + f;
    throw ConfigError(std::move(bad), msg);
  }
}

/// Fields absent from `j` keep their defaults; unknown keys are rejected.
inline TrainConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError({}, "config must be a JSON object");
  const nlohmann::json defaults = TrainConfig{};
  for (const auto& [key, _] : j.items())
    if (!defaults.contains(key)) throw ConfigError({key}, "unknown config field: " + key);
  nlohmann::json merged = defaults;
  merged.update(j);
  try {
    return merged.get<TrainConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError({}, std::string("config type error: ") + e.what());
  }
}

inline TrainConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({}, "malformed config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace hhcl
