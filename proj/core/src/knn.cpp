#include "oml/knn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "oml/errors.hpp"

namespace oml {

void NeighborStore::append(VectorXd features, VectorXd labels) {
  append(std::move(features), std::move(labels), VectorXd());
}

void NeighborStore::append(VectorXd features, VectorXd labels, VectorXd w) {
  if (features.size() != p_ || labels.size() != q_)
    throw ShapeError("NeighborStore::append: entry dimensions differ from store");
  if (w.size() != 0 && w.size() != q_)
    throw ShapeError("NeighborStore::append: cached projection length differs from q");
  entries_.push_back({std::move(features), std::move(labels), std::move(w)});
  if (capacity_ > 0 && entries_.size() > capacity_) {
    entries_.erase(entries_.begin());
    cache_valid_ = false;  // indices shifted
  }
}

const MatrixXd& NeighborStore::embeddings(const MetricV& V) {
  const std::size_t n = entries_.size();
  const bool same_version = cache_valid_ && cache_version_ == V.version &&
                            embedding_cache_.cols() == V.d();
  const std::size_t start = same_version && cache_rows_ <= n ? cache_rows_ : 0;
  if (!same_version || start < n) {
    embedding_cache_.conservativeResize(static_cast<Eigen::Index>(n), V.d());
    // Per-row products keep cached rows bitwise identical to a fresh
    // recomputation of the same formula.
    for (std::size_t i = start; i < n; ++i) {
      if (entries_[i].w.size() != q_)
        throw StateError("NeighborStore: entry lacks a cached projection");
      embedding_cache_.row(static_cast<Eigen::Index>(i)) =
          (V.mat.transpose() * entries_[i].w).transpose();
    }
    cache_version_ = V.version;
    cache_rows_ = n;
    cache_valid_ = true;
  }
  return embedding_cache_;
}

double learned_distance(const MetricV& V, const VectorXd& w_i, const VectorXd& w_j) {
  if (w_i.size() != w_j.size() || w_i.size() != V.q())
    throw ShapeError("learned_distance: projection lengths differ");
  return (V.mat.transpose() * (w_i - w_j)).squaredNorm();
}

Neighbor nearest_neighbor_train(const NeighborStore& store, const MetricV& V,
                                const VectorXd& x_t, const VectorXd& w_t, TrainNnMetric mode) {
  if (store.empty()) throw StateError("nearest_neighbor_train: store is empty");
  Neighbor best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < store.size(); ++i) {
    const NeighborStore::Entry& e = store.entry(i);
    const double dist = mode == TrainNnMetric::euclidean_raw
                            ? (e.features - x_t).squaredNorm()
                            : learned_distance(V, e.w, w_t);
    if (dist < best.distance) {
      best.distance = dist;
      best.index = static_cast<Eigen::Index>(i);
    }
  }
  return best;
}

namespace {

std::vector<Neighbor> take_smallest(std::vector<Neighbor> all, int k) {
  const auto by_distance_then_index = [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
  };
  std::partial_sort(all.begin(), all.begin() + k, all.end(), by_distance_then_index);
  all.resize(static_cast<std::size_t>(k));
  return all;
}

}  // namespace

std::vector<Neighbor> knn_learned(NeighborStore& store, const MetricV& V,
                                  const VectorXd& w_query, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > store.size())
    throw QueryError("knn_learned: k must satisfy 1 <= k <= store size");
  const MatrixXd& emb = store.embeddings(V);
  const VectorXd eq = V.mat.transpose() * w_query;
  std::vector<Neighbor> all(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    all[i].index = static_cast<Eigen::Index>(i);
    all[i].distance = (emb.row(static_cast<Eigen::Index>(i)).transpose() - eq).squaredNorm();
  }
  return take_smallest(std::move(all), k);
}

std::vector<Neighbor> knn_raw(const NeighborStore& store, const VectorXd& x_query, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > store.size())
    throw QueryError("knn_raw: k must satisfy 1 <= k <= store size");
  std::vector<Neighbor> all(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    all[i].index = static_cast<Eigen::Index>(i);
    all[i].distance = (store.entry(i).features - x_query).squaredNorm();
  }
  return take_smallest(std::move(all), k);
}

VectorXd aggregate_labels(const std::vector<VectorXd>& neighbor_labels, double threshold) {
  if (neighbor_labels.empty()) throw QueryError("aggregate_labels: empty neighbor list");
  const Eigen::Index q = neighbor_labels.front().size();
  VectorXd sum = VectorXd::Zero(q);
  for (const VectorXd& labels : neighbor_labels) {
    if (labels.size() != q) throw ShapeError("aggregate_labels: label lengths differ");
    sum += labels;
  }
  const double count = static_cast<double>(neighbor_labels.size());
  VectorXd result(q);
  for (Eigen::Index j = 0; j < q; ++j) result[j] = sum[j] / count >= threshold ? 1.0 : 0.0;
  return result;
}

VectorXd aggregate_labels(const NeighborStore& store, std::span<const Neighbor> neighbors,
                          double threshold) {
  if (neighbors.empty()) throw QueryError("aggregate_labels: empty neighbor list");
  VectorXd sum = VectorXd::Zero(store.q());
  for (const Neighbor& nb : neighbors) sum += store.entry(static_cast<std::size_t>(nb.index)).labels;
  const double count = static_cast<double>(neighbors.size());
  VectorXd result(store.q());
  for (Eigen::Index j = 0; j < store.q(); ++j)
    result[j] = sum[j] / count >= threshold ? 1.0 : 0.0;
  return result;
}

}  // namespace oml
