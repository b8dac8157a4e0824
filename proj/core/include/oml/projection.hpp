#pragma once

#include "oml/types.hpp"

namespace oml {

/// Feature-to-label-space projection, fit once on the seed set and frozen.
struct ProjectionP {
  MatrixXd mat;        // p x q
  double ridge = 0.0;  // regularization used when fitting

  Eigen::Index p() const { return mat.rows(); }
  Eigen::Index q() const { return mat.cols(); }
};

/// Default regularization: 1e-6 * trace(X^T X) / p. Keeps the normal
/// equations well posed when p exceeds the seed size.
double auto_ridge(const MatrixXd& X);

/// Minimizes (1/2)||X P - Y||_F^2 + (ridge/2)||P||_F^2, i.e. solves
/// (X^T X + ridge I) P = X^T Y. With ridge = 0 and rank-deficient X the
/// minimum-norm least-squares solution is returned.
ProjectionP fit_projection(const MatrixXd& X, const MatrixXd& Y, double ridge);

/// P^T x: the label-space image of one instance.
VectorXd project_instance(const ProjectionP& P, const VectorXd& x);

}  // namespace oml
