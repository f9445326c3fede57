#pragma once

#include <map>
#include <vector>

#include "hhcl/core.hpp"

namespace hhcl {

/// Row indices grouped by cluster id, in row order.
inline std::map<std::size_t, std::vector<std::size_t>> group_by_label(std::span<const std::int32_t> labels,
                                                                       std::size_t num_clusters) {
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= num_clusters)
      throw ParameterError("batch label " + std::to_string(labels[r]) + " is not a valid cluster id");
    groups[static_cast<std::size_t>(labels[r])].push_back(r);
  }
  return groups;
}

struct HardSample {
  std::size_t slot = 0;
  std::span<const double> feature;
};

// ---------------------------------------------------------------------------
// Cluster memory: one unit-norm centroid per cluster, momentum-updated.
// ---------------------------------------------------------------------------

class ClusterBank {
 public:
  ClusterBank(Matrix centroids, double alpha) : centroids_(std::move(centroids)), alpha_(alpha) {}

  /// Normalized mean embedding of each cluster; outliers are ignored.
  static ClusterBank init(const EmbeddingMatrix& emb, const PseudoLabeling& labels, double alpha) {
    if (labels.num_clusters() == 0) throw ParameterError("cluster bank needs at least one cluster");
    if (labels.size() != emb.rows()) throw ParameterError("labeling and embeddings differ in length");
    const auto members = labels.members();
    Matrix centroids(labels.num_clusters(), emb.dims());
    for (std::size_t c = 0; c < members.size(); ++c) {
      if (members[c].empty()) throw Error("internal: cluster " + std::to_string(c) + " has no members");
      auto out = centroids.row(c);
      for (auto i : members[c]) {
        auto r = emb.row(i);
        for (std::size_t d = 0; d < out.size(); ++d) out[d] += r[d];
      }
      const double n = norm(out);
      if (!(n > kDegenerateNorm * static_cast<double>(members[c].size())))
        throw NumericError("degenerate mean for cluster " + std::to_string(c) + " (members cancel out)");
      for (double& x : out) x /= n;
    }
    return ClusterBank(std::move(centroids), alpha);
  }

  std::size_t num_clusters() const noexcept { return centroids_.rows(); }
  std::size_t dims() const noexcept { return centroids_.cols(); }
  double alpha() const noexcept { return alpha_; }
  const Matrix& centroids() const noexcept { return centroids_; }
  std::span<const double> centroid(std::size_t c) const { return centroids_.row(c); }

  /// c <- alpha * c + (1 - alpha) * mean(batch rows of c), then renormalized,
  /// for each cluster present in the batch. Returns the number of clusters
  /// whose blended vector vanished; those keep their previous centroid.
  std::size_t update(const EmbeddingMatrix& batch, std::span<const std::int32_t> labels) {
    if (labels.size() != batch.rows()) throw ParameterError("batch labels and embeddings differ in length");
    std::size_t degenerate = 0;
    std::vector<double> blended(dims());
    const auto groups = group_by_label(labels, num_clusters());
    if (alpha_ == 1.0) return 0;  // renormalizing would perturb the last bit
    for (const auto& [c, rows] : groups) {
      std::fill(blended.begin(), blended.end(), 0.0);
      for (auto r : rows) {
        auto e = batch.row(r);
        for (std::size_t d = 0; d < blended.size(); ++d) blended[d] += e[d];
      }
      auto cur = centroids_.row(c);
      const double inv = 1.0 / static_cast<double>(rows.size());
      for (std::size_t d = 0; d < blended.size(); ++d) blended[d] = alpha_ * cur[d] + (1.0 - alpha_) * blended[d] * inv;
      const double n = norm(blended);
      if (!(n > kDegenerateNorm)) {
        warn("cluster " + std::to_string(c) + " momentum update vanished; keeping previous centroid");
        ++degenerate;
        continue;
      }
      for (std::size_t d = 0; d < blended.size(); ++d) cur[d] = blended[d] / n;
    }
    return degenerate;
  }

 private:
  static constexpr double kDegenerateNorm = 1e-12;
  Matrix centroids_;
  double alpha_;
};

// ---------------------------------------------------------------------------
// Instance memory: S stored instance features per cluster.
// ---------------------------------------------------------------------------

class InstanceBank {
 public:
  InstanceBank(std::size_t num_clusters, std::size_t slots, std::size_t dims)
      : clusters_(num_clusters), slots_(slots), dims_(dims), data_(num_clusters * slots * dims, 0.0),
        cursor_(num_clusters, 0) {
    if (slots == 0) throw ParameterError("instance bank needs at least one slot per cluster");
  }

  /// Fills each cluster's slots with its members, drawn without replacement
  /// when the cluster has at least S members and topped up with replacement
  /// otherwise.
  static InstanceBank init(const EmbeddingMatrix& emb, const PseudoLabeling& labels, std::size_t slots,
                           std::uint64_t seed) {
    if (labels.size() != emb.rows()) throw ParameterError("labeling and embeddings differ in length");
    InstanceBank bank(labels.num_clusters(), slots, emb.dims());
    Rng rng(seed);
    const auto members = labels.members();
    for (std::size_t c = 0; c < members.size(); ++c) {
      if (members[c].empty()) throw Error("internal: cluster " + std::to_string(c) + " has no members");
      const auto picks = draw_members(members[c], slots, rng);
      for (std::size_t k = 0; k < slots; ++k) bank.write(c, k, emb.row(picks[k]));
    }
    return bank;
  }

  std::size_t num_clusters() const noexcept { return clusters_; }
  std::size_t slots() const noexcept { return slots_; }
  std::size_t dims() const noexcept { return dims_; }
  std::size_t cursor(std::size_t c) const { return cursor_[c]; }

  std::span<const double> slot(std::size_t c, std::size_t k) const {
    return {data_.data() + (c * slots_ + k) * dims_, dims_};
  }

  /// Overwrites slots of each cluster present in the batch with that cluster's
  /// batch rows. With exactly S rows, slot k takes row k; otherwise rows are
  /// written round-robin from a per-cluster cursor that persists across calls.
  void update(const EmbeddingMatrix& batch, std::span<const std::int32_t> labels) {
    if (labels.size() != batch.rows()) throw ParameterError("batch labels and embeddings differ in length");
    if (batch.dims() != dims_) throw ParameterError("batch dimension does not match instance bank");
    for (const auto& [c, rows] : group_by_label(labels, clusters_)) {
      if (rows.size() == slots_) {
        for (std::size_t k = 0; k < slots_; ++k) write(c, k, batch.row(rows[k]));
        continue;
      }
      for (auto r : rows) {
        write(c, cursor_[c], batch.row(r));
        cursor_[c] = (cursor_[c] + 1) % slots_;
      }
    }
  }

  /// Least similar stored instance of `cluster` (lowest index on ties).
  HardSample hardest_positive(std::span<const double> query, std::size_t cluster) const {
    std::size_t best = 0;
    double best_sim = dot(query, slot(cluster, 0));
    for (std::size_t k = 1; k < slots_; ++k) {
      const double s = dot(query, slot(cluster, k));
      if (s < best_sim) {
        best_sim = s;
        best = k;
      }
    }
    return {best, slot(cluster, best)};
  }

  /// Most similar stored instance of `cluster` (lowest index on ties).
  HardSample hardest_negative(std::span<const double> query, std::size_t cluster) const {
    std::size_t best = 0;
    double best_sim = dot(query, slot(cluster, 0));
    for (std::size_t k = 1; k < slots_; ++k) {
      const double s = dot(query, slot(cluster, k));
      if (s > best_sim) {
        best_sim = s;
        best = k;
      }
    }
    return {best, slot(cluster, best)};
  }

 private:
  void write(std::size_t c, std::size_t k, std::span<const double> v) {
    std::copy(v.begin(), v.end(), data_.begin() + static_cast<std::ptrdiff_t>((c * slots_ + k) * dims_));
  }

  std::size_t clusters_;
  std::size_t slots_;
  std::size_t dims_;
  std::vector<double> data_;
  std::vector<std::size_t> cursor_;
};

inline HardSample select_hard_positive(std::span<const double> query, const InstanceBank& bank, std::size_t own_cluster) {
  return bank.hardest_positive(query, own_cluster);
}

inline HardSample select_hard_negative(std::span<const double> query, const InstanceBank& bank,
                                       std::size_t other_cluster) {
  return bank.hardest_negative(query, other_cluster);
}

}  // namespace hhcl
