#pragma once

#include <cstdint>

#include "oml/projection.hpp"
#include "oml/rng.hpp"
#include "oml/types.hpp"

namespace oml {

/// The q x d label-embedding matrix V_t. Q = V V^T defines the learned
/// squared pseudo-metric in label space. The version counter keys
/// embedding caches; every update bumps it.
struct MetricV {
  MatrixXd mat;  // q x d, d < q
  std::uint64_t version = 0;

  Eigen::Index q() const { return mat.rows(); }
  Eigen::Index d() const { return mat.cols(); }

  /// Entries i.i.d. N(0, 1/q); the scale keeps initial codeword norms O(1).
  static MetricV random_init(Eigen::Index q, Eigen::Index d, Rng& rng);
};

/// The rank-2 step direction A = u u^T - v v^T, kept in factored form.
/// u is the neighbor residual P^T x_t - y, v the true-label residual
/// P^T x_t - y_t.
struct Rank2Update {
  VectorXd u;
  VectorXd v;

  /// True when u u^T == v v^T, i.e. A is exactly zero (u == +/- v).
  bool is_zero() const;
};

/// f(lambda) = a lambda^3 + b lambda^2 + c lambda, the step-size objective
/// obtained by substituting the first-order update into the Lagrangian.
struct CubicCoeffs {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double eval(double lambda) const { return ((a * lambda + b) * lambda + c) * lambda; }
};

enum class UpdateRule { exact, first_order };
enum class TrainNnMetric { euclidean_raw, learned };

/// Run configuration shared by the online engine and the evaluation loop.
struct Hyperparams {
  Eigen::Index d = 0;            // 0 resolves to max(1, floor(0.8 q))
  int k = 10;
  double lambda_min = 1e-5;      // m: lower clamp for the step size
  double lambda_max = 1e5;       // M: upper clamp
  double seed_fraction = 0.2;
  double ridge = -1.0;           // < 0 resolves to auto_ridge(X)
  UpdateRule update_rule = UpdateRule::exact;
  TrainNnMetric train_nn_metric = TrainNnMetric::euclidean_raw;
  double threshold = 0.5;        // label vote threshold, inclusive
  std::uint64_t rng_seed = 1;
  std::size_t store_capacity = 0;  // 0 = unbounded; else FIFO eviction

  /// Resolves d for a dataset with q labels.
  Eigen::Index resolve_d(Eigen::Index q) const;
  /// Throws ConfigError on violated invariants (0 < m < M, k >= 1, ...).
  void validate(Eigen::Index q) const;
};

/// Delta(y_t, y): l1 distance between binary label vectors, i.e. the count
/// of differing positions. Used as the required margin.
double margin(const VectorXd& y_t, const VectorXd& y);

/// Hinge loss max{0, Delta - (||V^T u||^2 - ||V^T v||^2)} evaluated on the
/// label-space projection w = P^T x_t.
double hinge_loss_projected(const MetricV& V, const VectorXd& w, const VectorXd& y_t,
                            const VectorXd& y);
double hinge_loss(const MetricV& V, const ProjectionP& P, const VectorXd& x_t,
                  const VectorXd& y_t, const VectorXd& y);

/// u = P^T x_t - y, v = P^T x_t - y_t.
Rank2Update build_update(const ProjectionP& P, const VectorXd& x_t, const VectorXd& y_t,
                         const VectorXd& y);
Rank2Update build_update_projected(const VectorXd& w, const VectorXd& y_t, const VectorXd& y);

/// Coefficients of f(lambda), derived symbolically from the Lagrangian with
/// the first-order update substituted. With Q = V V^T:
///   a = 4 (v^T A Q A v - u^T A Q A u)
///   b = 2 ||V^T A||_F^2 + 4 (v^T Q A v - u^T Q A u)
///   c = delta - (u^T Q u - v^T Q v)
/// Computed through the rank-2 factorization in O(q d). All zero when A is.
CubicCoeffs cubic_coefficients(const MetricV& V, const Rank2Update& upd, double delta);

/// Maximizer of f over {m, M} plus the stationary points of f in (m, M)
/// with f'' < 0. Total where the three clamp cases leave corner cases
/// (degenerate quadratic, all-zero coefficients) undefined; always in [m, M].
double select_lambda(const CubicCoeffs& coef, double lambda_min, double lambda_max);

/// Applies one metric update.
///   exact:       V+^T = V_t^T (I - 2 lambda A)^{-1}, via the Woodbury
///                identity on the rank-2 factorization; O(q d). Throws
///                SingularUpdateError when I - 2 lambda A is singular.
///   first_order: V+^T = V_t^T (I + 2 lambda A).
MetricV update_v(const MetricV& V, double lambda, const Rank2Update& upd, UpdateRule rule);

}  // namespace oml
