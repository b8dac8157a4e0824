#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "oml/metric_learner.hpp"
#include "oml/types.hpp"

namespace oml {

/// Growing memory of past examples, with the label-space projection
/// w = P^T x cached per entry (P is frozen, so w never goes stale) and
/// d-dimensional embeddings cached lazily per MetricV version.
class NeighborStore {
public:
  struct Entry {
    VectorXd features;
    VectorXd labels;
    VectorXd w;  // P^T x; empty for stores used only by the raw baseline
  };

  NeighborStore() = default;
  NeighborStore(Eigen::Index p, Eigen::Index q) : p_(p), q_(q) {}

  Eigen::Index p() const { return p_; }
  Eigen::Index q() const { return q_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Entry& entry(std::size_t i) const { return entries_[i]; }

  /// 0 = unbounded. When set, appends beyond the capacity evict the oldest
  /// entry (FIFO).
  void set_capacity(std::size_t capacity) { capacity_ = capacity; }
  std::size_t capacity() const { return capacity_; }

  void append(VectorXd features, VectorXd labels);
  void append(VectorXd features, VectorXd labels, VectorXd w);

  /// Row i holds V^T w_i. Recomputed when the V version changes; extended
  /// incrementally when only new entries arrived. Requires exclusive
  /// access, like append.
  const MatrixXd& embeddings(const MetricV& V);

private:
  Eigen::Index p_ = 0;
  Eigen::Index q_ = 0;
  std::size_t capacity_ = 0;
  std::vector<Entry> entries_;

  MatrixXd embedding_cache_;
  std::uint64_t cache_version_ = 0;
  bool cache_valid_ = false;
  std::size_t cache_rows_ = 0;
};

struct Neighbor {
  Eigen::Index index = -1;
  double distance = 0.0;
};

/// (w_i - w_j)^T Q (w_i - w_j) with Q = V V^T, computed as
/// ||V^T (w_i - w_j)||^2.
double learned_distance(const MetricV& V, const VectorXd& w_i, const VectorXd& w_j);

/// Nearest stored entry to x_t for the training step. euclidean_raw scans
/// squared Euclidean distance on raw features; learned scans
/// learned_distance on the cached projections. Ties take the lowest index.
Neighbor nearest_neighbor_train(const NeighborStore& store, const MetricV& V,
                                const VectorXd& x_t, const VectorXd& w_t, TrainNnMetric mode);

/// k entries with smallest learned distance to the query projection,
/// ascending, ties by index. Uses the per-version embedding cache.
std::vector<Neighbor> knn_learned(NeighborStore& store, const MetricV& V,
                                  const VectorXd& w_query, int k);

/// k nearest entries under squared Euclidean distance on raw features.
std::vector<Neighbor> knn_raw(const NeighborStore& store, const VectorXd& x_query, int k);

/// Majority vote: label j is set when the mean of neighbor values at j
/// reaches the threshold (inclusive).
VectorXd aggregate_labels(const std::vector<VectorXd>& neighbor_labels, double threshold);
VectorXd aggregate_labels(const NeighborStore& store, std::span<const Neighbor> neighbors,
                          double threshold);

}  // namespace oml
