#include "oml/projection.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "oml/errors.hpp"

namespace oml {

double auto_ridge(const MatrixXd& X) {
  if (X.cols() == 0) return 0.0;
  return 1e-6 * X.squaredNorm() / static_cast<double>(X.cols());
}

ProjectionP fit_projection(const MatrixXd& X, const MatrixXd& Y, double ridge) {
  if (X.rows() != Y.rows()) throw ShapeError("fit_projection: X and Y row counts differ");
  if (X.rows() < 1) throw ShapeError("fit_projection: empty design matrix");
  if (!X.allFinite() || !Y.allFinite()) throw NumericError("fit_projection: non-finite input");
  if (!(ridge >= 0.0)) throw ConfigError("fit_projection: ridge must be >= 0");

  const Eigen::Index p = X.cols();
  ProjectionP result;
  result.ridge = ridge;

  if (ridge > 0.0) {
    MatrixXd gram = X.transpose() * X;
    gram.diagonal().array() += ridge;
    result.mat = gram.ldlt().solve(X.transpose() * Y);
    return result;
  }

  // ridge == 0: normal equations when X has full column rank, otherwise the
  // minimum-norm least-squares solution.
  Eigen::ColPivHouseholderQR<MatrixXd> qr(X);
  if (qr.rank() == p) {
    const MatrixXd gram = X.transpose() * X;
    result.mat = gram.ldlt().solve(X.transpose() * Y);
  } else {
    result.mat = X.completeOrthogonalDecomposition().solve(Y);
  }
  return result;
}

VectorXd project_instance(const ProjectionP& P, const VectorXd& x) {
  if (x.size() != P.mat.rows())
    throw ShapeError("project_instance: feature length " + std::to_string(x.size()) +
                     " does not match p = " + std::to_string(P.mat.rows()));
  return P.mat.transpose() * x;
}

}  // namespace oml
