#pragma once

#include <cstdint>
#include <vector>

#include "oml/knn.hpp"
#include "oml/metric_learner.hpp"
#include "oml/projection.hpp"
#include "oml/types.hpp"

namespace oml {

/// Per-round diagnostics, kept for the most recent round.
struct RoundDiag {
  double loss = 0.0;
  double lambda = 0.0;
  Eigen::Index nn_index = -1;
  /// Hinge loss on the same triple re-evaluated after the update: with the
  /// first-order-updated V, and with the V actually committed.
  double post_loss_first_order = 0.0;
  double post_loss_actual = 0.0;
  bool fallback_used = false;
};

/// Single-writer state of the online learner. Exactly one online_round may
/// run at a time; snapshots taken between rounds are safe to read
/// concurrently.
struct ModelState {
  ProjectionP P;        // frozen after init
  MetricV V;
  NeighborStore store;
  std::uint64_t round = 0;
  double cumulative_loss = 0.0;
  std::uint64_t loss_positive_rounds = 0;
  std::uint64_t singular_fallbacks = 0;
  RoundDiag last_diag;

  bool has_metric() const { return V.mat.size() > 0; }
};

/// Fits P on the seed set, draws V_1, and fills the store with the seed
/// examples and their cached projections.
ModelState init_model(const std::vector<Example>& seed, Eigen::Index p, Eigen::Index q,
                      const Hyperparams& hp);

/// Store-only state for the Euclidean-kNN baseline (no P, no V).
ModelState init_baseline(const std::vector<Example>& seed, Eigen::Index p, Eigen::Index q,
                         const Hyperparams& hp);

/// One pass of the online loop: find the nearest stored neighbor, compute
/// the hinge loss, and on positive loss select the step size from the cubic
/// and update V (exact rule falls back to first_order on a singular
/// update). The example is then appended to the store. Returns the loss.
double online_round(ModelState& state, const VectorXd& x_t, const VectorXd& y_t,
                    const Hyperparams& hp);

/// Same, with the label-space projection w_t = P^T x_t already computed.
double online_round(ModelState& state, const VectorXd& x_t, const VectorXd& y_t,
                    const VectorXd& w_t, const Hyperparams& hp);

}  // namespace oml
