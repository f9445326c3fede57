#pragma once

#include <deque>
#include <numeric>
#include <vector>

#include "hhcl/core.hpp"

namespace hhcl {

/// Square symmetric matrix of non-negative distances with zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

using NeighborSets = std::vector<std::vector<std::size_t>>;

/// ||a_i - a_j|| for every pair of rows.
inline DistanceMatrix pairwise_euclidean(const EmbeddingMatrix& emb) {
  const std::size_t n = emb.rows();
  DistanceMatrix out(n);
  parallel_for(n, [&](std::size_t i) {
    auto ri = emb.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      auto rj = emb.row(j);
      double s = 0.0;
      for (std::size_t d = 0; d < ri.size(); ++d) {
        const double diff = ri[d] - rj[d];
        s += diff * diff;
      }
      out(i, j) = std::sqrt(s);
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out(j, i) = out(i, j);
  return out;
}

/// The k nearest other samples of each row, ordered by (distance, index).
inline NeighborSets k_nearest(const DistanceMatrix& dist, std::size_t k) {
  const std::size_t n = dist.size();
  if (k < 1 || k >= n) throw ParameterError("k must satisfy 1 <= k < n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  NeighborSets out(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<std::size_t> idx;
    idx.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) idx.push_back(j);
    auto row = dist.row(i);
    auto closer = [&](std::size_t a, std::size_t b) { return row[a] < row[b] || (row[a] == row[b] && a < b); };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), closer);
    idx.resize(k);
    out[i] = std::move(idx);
  });
  return out;
}

/// R(i) = { j in kNN(i) : i in kNN(j) }, each set sorted ascending.
inline NeighborSets k_reciprocal_neighbors(const DistanceMatrix& dist, std::size_t k) {
  const NeighborSets knn = k_nearest(dist, k);
  const std::size_t n = dist.size();
  std::vector<std::vector<char>> in_knn(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (auto j : knn[i]) in_knn[i][j] = 1;
  NeighborSets out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto j : knn[i])
      if (in_knn[j][i]) out[i].push_back(j);
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

/// 1 - |A_i ∩ A_j| / |A_i ∪ A_j| where A_i = sets[i] ∪ {i}.
inline DistanceMatrix jaccard_distance(const NeighborSets& sets) {
  const std::size_t n = sets.size();
  NeighborSets with_self(n);
  for (std::size_t i = 0; i < n; ++i) {
    with_self[i] = sets[i];
    with_self[i].push_back(i);
    std::sort(with_self[i].begin(), with_self[i].end());
    with_self[i].erase(std::unique(with_self[i].begin(), with_self[i].end()), with_self[i].end());
  }
  DistanceMatrix out(n);
  parallel_for(n, [&](std::size_t i) {
    const auto& a = with_self[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& b = with_self[j];
      std::size_t common = 0;
      auto ia = a.begin();
      auto ib = b.begin();
      while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
          ++ia;
        } else if (*ib < *ia) {
          ++ib;
        } else {
          ++common;
          ++ia;
          ++ib;
        }
      }
      const std::size_t uni = a.size() + b.size() - common;
      out(i, j) = 1.0 - static_cast<double>(common) / static_cast<double>(uni);
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out(j, i) = out(i, j);
  return out;
}

/// (1 - w) * a + w * b, entrywise.
inline DistanceMatrix blend(const DistanceMatrix& a, const DistanceMatrix& b, double w) {
  if (a.size() != b.size()) throw ParameterError("distance matrices differ in size");
  DistanceMatrix out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) out(i, j) = (1.0 - w) * a(i, j) + w * b(i, j);
  return out;
}

/// DBSCAN over a precomputed distance matrix.
///
/// A point is core when at least `min_pts` other points lie within `eps`
/// (inclusive). Points are scanned in ascending index; each unassigned core
/// point seeds a cluster that is expanded breadth-first, neighbors visited in
/// ascending index. A border point belongs to the first cluster that reaches
/// it. Unreached points are outliers.
inline PseudoLabeling dbscan(const DistanceMatrix& dist, double eps, std::size_t min_pts) {
  if (!(eps > 0.0)) throw ParameterError("dbscan eps must be positive");
  if (min_pts < 1) throw ParameterError("dbscan min_pts must be >= 1");
  const std::size_t n = dist.size();

  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = dist.row(i);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && row[j] <= eps) neighbors[i].push_back(j);
  }

  std::vector<std::int32_t> label(n, PseudoLabeling::kOutlier);
  std::int32_t next = 0;
  std::deque<std::size_t> frontier;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (label[seed] != PseudoLabeling::kOutlier || neighbors[seed].size() < min_pts) continue;
    const std::int32_t c = next++;
    label[seed] = c;
    frontier.push_back(seed);
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop_front();
      for (auto q : neighbors[p]) {
        if (label[q] != PseudoLabeling::kOutlier) continue;
        label[q] = c;
        if (neighbors[q].size() >= min_pts) frontier.push_back(q);
      }
    }
  }
  return PseudoLabeling(std::move(label), static_cast<std::size_t>(next));
}

struct ClusteringParams {
  double eps = 0.45;
  std::size_t min_pts = 4;
  std::size_t k = 30;
  double original_distance_weight = 0.0;
};

/// Euclidean distances -> k-reciprocal sets -> Jaccard distance -> DBSCAN.
/// k is clamped to n - 1 for datasets smaller than k + 1.
inline PseudoLabeling cluster_embeddings(const EmbeddingMatrix& emb, const ClusteringParams& p) {
  const std::size_t n = emb.rows();
  if (n < 2) return PseudoLabeling(std::vector<std::int32_t>(n, PseudoLabeling::kOutlier), 0);
  const DistanceMatrix euclid = pairwise_euclidean(emb);
  const std::size_t k = std::min(p.k, n - 1);
  DistanceMatrix d = jaccard_distance(k_reciprocal_neighbors(euclid, k));
  if (p.original_distance_weight > 0.0) d = blend(d, euclid, p.original_distance_weight);
  return dbscan(d, p.eps, p.min_pts);
}

}  // namespace hhcl
