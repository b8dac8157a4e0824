#include "oml/metric_learner.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "oml/errors.hpp"

namespace oml {

MetricV MetricV::random_init(Eigen::Index q, Eigen::Index d, Rng& rng) {
  MetricV V;
  V.mat.resize(q, d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(q));
  for (Eigen::Index i = 0; i < q; ++i)
    for (Eigen::Index j = 0; j < d; ++j) V.mat(i, j) = scale * rng.normal();
  return V;
}

bool Rank2Update::is_zero() const {
  return ((u - v).array() == 0.0).all() || ((u + v).array() == 0.0).all();
}

Eigen::Index Hyperparams::resolve_d(Eigen::Index q) const {
  if (d > 0) return d;
  return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::floor(0.8 * static_cast<double>(q))));
}

void Hyperparams::validate(Eigen::Index q) const {
  if (!(lambda_min > 0.0) || !(lambda_max > lambda_min))
    throw ConfigError("step-size clamps need 0 < m < M");
  if (k < 1) throw ConfigError("k must be >= 1");
  const Eigen::Index dd = resolve_d(q);
  if (dd < 1 || dd >= q) throw ConfigError("embedding dimension needs 1 <= d < q");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in [0, 1]");
  if (!(seed_fraction > 0.0 && seed_fraction < 1.0))
    throw ConfigError("seed fraction must lie in (0, 1)");
}

double margin(const VectorXd& y_t, const VectorXd& y) {
  if (y_t.size() != y.size()) throw ShapeError("margin: label lengths differ");
  return (y_t - y).cwiseAbs().sum();
}

double hinge_loss_projected(const MetricV& V, const VectorXd& w, const VectorXd& y_t,
                            const VectorXd& y) {
  if (w.size() != V.q() || y_t.size() != V.q() || y.size() != V.q())
    throw ShapeError("hinge_loss: label-space lengths differ");
  const double delta = margin(y_t, y);
  const double dist_other = (V.mat.transpose() * (w - y)).squaredNorm();
  const double dist_true = (V.mat.transpose() * (w - y_t)).squaredNorm();
  if (!std::isfinite(dist_other) || !std::isfinite(dist_true))
    throw NumericError("hinge_loss: non-finite intermediate");
  return std::max(0.0, delta - (dist_other - dist_true));
}

double hinge_loss(const MetricV& V, const ProjectionP& P, const VectorXd& x_t,
                  const VectorXd& y_t, const VectorXd& y) {
  return hinge_loss_projected(V, project_instance(P, x_t), y_t, y);
}

Rank2Update build_update_projected(const VectorXd& w, const VectorXd& y_t, const VectorXd& y) {
  if (w.size() != y_t.size() || w.size() != y.size())
    throw ShapeError("build_update: label-space lengths differ");
  return Rank2Update{w - y, w - y_t};
}

Rank2Update build_update(const ProjectionP& P, const VectorXd& x_t, const VectorXd& y_t,
                         const VectorXd& y) {
  return build_update_projected(project_instance(P, x_t), y_t, y);
}

CubicCoeffs cubic_coefficients(const MetricV& V, const Rank2Update& upd, double delta) {
  if (upd.u.size() != V.q() || upd.v.size() != V.q())
    throw ShapeError("cubic_coefficients: residual lengths differ from q");
  if (upd.is_zero()) return {};

  const VectorXd& u = upd.u;
  const VectorXd& v = upd.v;

  // Scalars of the rank-2 factorization.
  const double uu = u.squaredNorm();
  const double vv = v.squaredNorm();
  const double uv = u.dot(v);

  const VectorXd Vtu = V.mat.transpose() * u;  // d
  const VectorXd Vtv = V.mat.transpose() * v;
  const double uQu = Vtu.squaredNorm();  // u^T Q u
  const double vQv = Vtv.squaredNorm();
  const double uQv = Vtu.dot(Vtv);

  // A w = u (u.w) - v (v.w), so the quadratic forms reduce to scalars.
  const double uQAu = uQu * uu - uQv * uv;  // u^T Q A u
  const double vQAv = uQv * uv - vQv * vv;  // v^T Q A v

  const VectorXd Au = u * uu - v * uv;
  const VectorXd Av = u * uv - v * vv;
  const double uAQAu = (V.mat.transpose() * Au).squaredNorm();
  const double vAQAv = (V.mat.transpose() * Av).squaredNorm();

  // ||V^T A||_F^2 with A = u u^T - v v^T.
  const double vta_sq = uQu * uu - 2.0 * uQv * uv + vQv * vv;

  CubicCoeffs coef;
  coef.a = 4.0 * (vAQAv - uAQAu);
  coef.b = 2.0 * vta_sq + 4.0 * (vQAv - uQAu);
  coef.c = delta - (uQu - vQv);
  return coef;
}

double select_lambda(const CubicCoeffs& coef, double lambda_min, double lambda_max) {
  if (!(lambda_min > 0.0) || !(lambda_max > lambda_min))
    throw ConfigError("select_lambda: needs 0 < m < M");

  std::vector<double> candidates{lambda_min, lambda_max};

  // Stationary points: f'(lambda) = 3a lambda^2 + 2b lambda + c.
  const double qa = 3.0 * coef.a;
  const double qb = 2.0 * coef.b;
  const double qc = coef.c;
  const auto consider = [&](double root) {
    if (!std::isfinite(root) || root <= lambda_min || root >= lambda_max) return;
    if (6.0 * coef.a * root + 2.0 * coef.b < 0.0) candidates.push_back(root);  // f'' < 0
  };
  if (qa != 0.0) {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc > 0.0) {
      const double s = std::sqrt(disc);
      const double shifted = -0.5 * (qb + std::copysign(s, qb));
      if (shifted != 0.0) {
        consider(shifted / qa);
        consider(qc / shifted);
      }
    }
  } else if (qb != 0.0) {
    consider(-qc / qb);
  }

  double best = candidates.front();
  double best_value = coef.eval(best);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double value = coef.eval(candidates[i]);
    if (value > best_value) {
      best = candidates[i];
      best_value = value;
    }
  }
  return std::clamp(best, lambda_min, lambda_max);
}

MetricV update_v(const MetricV& V, double lambda, const Rank2Update& upd, UpdateRule rule) {
  if (upd.u.size() != V.q() || upd.v.size() != V.q())
    throw ShapeError("update_v: residual lengths differ from q");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ConfigError("update_v: lambda must be finite and positive");

  const VectorXd& u = upd.u;
  const VectorXd& v = upd.v;
  MetricV next;
  next.version = V.version + 1;

  if (rule == UpdateRule::first_order) {
    // V+^T = V^T (I + 2 lambda A)  <=>  V+ = V + 2 lambda (u u^T - v v^T) V
    next.mat = V.mat + 2.0 * lambda * (u * (u.transpose() * V.mat) - v * (v.transpose() * V.mat));
    return next;
  }

  // Exact rule through the Woodbury identity with A = U C U^T, U = [u v],
  // C = diag(1, -1):
  //   (I - 2 lambda A)^{-1} = I - U K^{-1} U^T,
  //   K = (-2 lambda C)^{-1} + U^T U.
  const double half_inv = 1.0 / (2.0 * lambda);
  const double k00 = -half_inv + u.squaredNorm();
  const double k01 = u.dot(v);
  const double k11 = half_inv + v.squaredNorm();
  const double det = k00 * k11 - k01 * k01;
  const double scale = std::max({std::abs(k00), std::abs(k11), std::abs(k01)});
  if (std::abs(det) <= 1e-12 * scale * scale)
    throw SingularUpdateError("update_v: I - 2*lambda*A is singular");

  const Eigen::RowVectorXd utV = u.transpose() * V.mat;  // 1 x d
  const Eigen::RowVectorXd vtV = v.transpose() * V.mat;
  const Eigen::RowVectorXd row0 = (k11 * utV - k01 * vtV) / det;  // K^{-1} U^T V, row for u
  const Eigen::RowVectorXd row1 = (k00 * vtV - k01 * utV) / det;  // row for v
  next.mat = V.mat - u * row0 - v * row1;
  return next;
}

}  // namespace oml
