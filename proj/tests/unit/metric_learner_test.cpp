#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "oml/errors.hpp"
#include "oml/metric_learner.hpp"
#include "oml/online.hpp"
#include "support/oracles.hpp"

using namespace oml;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MetricV identity_metric(Eigen::Index q) {
  MetricV V;
  V.mat = MatrixXd::Identity(q, q);
  return V;
}

}  // namespace

TEST_CASE("margin counts differing label positions") {
  CHECK(margin(Eigen::Vector3d(1, 0, 1), Eigen::Vector3d(1, 1, 0)) == 2.0);
  CHECK(margin(Eigen::Vector3d(1, 0, 1), Eigen::Vector3d(1, 0, 1)) == 0.0);
  CHECK(margin(Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(0, 0, 0)) == 3.0);
  CHECK_THROWS_AS(margin(Eigen::Vector2d(1, 0), Eigen::Vector3d(1, 0, 0)), ShapeError);
}

TEST_CASE("hinge loss on hand instances") {
  const MetricV V = identity_metric(2);
  ProjectionP P;
  P.mat = MatrixXd::Identity(2, 2);

  // y == y_t: margin 0, distances equal.
  CHECK(hinge_loss_projected(V, Eigen::Vector2d(0.3, 0.7), Eigen::Vector2d(1, 0),
                             Eigen::Vector2d(1, 0)) == 0.0);
  // w = [0,0], y_t = [0,0], y = [1,0]: max{0, 1 - (1 - 0)} = 0.
  CHECK(hinge_loss_projected(V, Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 0),
                             Eigen::Vector2d(1, 0)) == 0.0);
  // w = [0.5,0], y_t = [1,0], y = [0,0]: max{0, 1 - (0.25 - 0.25)} = 1.
  CHECK(hinge_loss_projected(V, Eigen::Vector2d(0.5, 0), Eigen::Vector2d(1, 0),
                             Eigen::Vector2d(0, 0)) == 1.0);
  // The P-taking overload agrees.
  CHECK(hinge_loss(V, P, Eigen::Vector2d(0.5, 0), Eigen::Vector2d(1, 0),
                   Eigen::Vector2d(0, 0)) == 1.0);

  MetricV bad;
  bad.mat = MatrixXd::Constant(2, 2, std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(hinge_loss_projected(bad, Eigen::Vector2d(0.5, 0), Eigen::Vector2d(1, 0),
                                       Eigen::Vector2d(0, 0)),
                  NumericError);
}

TEST_CASE("build_update forms the residuals") {
  ProjectionP P;
  P.mat = MatrixXd::Identity(2, 2);
  const Rank2Update upd =
      build_update(P, Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 0));
  CHECK(upd.u == Eigen::Vector2d(1, 0));
  CHECK(upd.v == Eigen::Vector2d(0, 0));
  const MatrixXd A = testing::dense_update_matrix(upd.u, upd.v);
  CHECK(A(0, 0) == 1.0);
  CHECK(A(0, 1) == 0.0);
  CHECK(A(1, 1) == 0.0);
  CHECK(A == A.transpose());

  const Rank2Update same =
      build_update(P, Eigen::Vector2d(0.4, 0.6), Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0));
  CHECK(same.is_zero());
  CHECK(testing::dense_update_matrix(same.u, same.v).isZero(0.0));
}

TEST_CASE("implied A is symmetric for random residuals") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const VectorXd u = testing::random_vector(5, rng);
    const VectorXd v = testing::random_vector(5, rng);
    const MatrixXd A = testing::dense_update_matrix(u, v);
    CHECK(A == A.transpose());
  }
}

TEST_CASE("cubic coefficients: zero update gives zero coefficients") {
  const MetricV V = identity_metric(3);
  Rank2Update upd;
  upd.u = Eigen::Vector3d(0.5, -1, 2);
  upd.v = upd.u;
  const CubicCoeffs coef = cubic_coefficients(V, upd, 0.0);
  CHECK(coef.a == 0.0);
  CHECK(coef.b == 0.0);
  CHECK(coef.c == 0.0);
  // u == -v also makes A vanish exactly.
  upd.v = -upd.u;
  CHECK(upd.is_zero());
  CHECK(cubic_coefficients(V, upd, 1.0).c == 0.0);
}

TEST_CASE("cubic coefficients on the hand instance") {
  const MetricV V = identity_metric(2);
  Rank2Update upd;
  upd.u = Eigen::Vector2d(1, 0);
  upd.v = Eigen::Vector2d(0, 0);
  const CubicCoeffs coef = cubic_coefficients(V, upd, 1.0);
  CHECK(coef.c == doctest::Approx(0.0));
  CHECK(coef.a == doctest::Approx(-4.0));
  CHECK(coef.b == doctest::Approx(-2.0));
  for (const double lambda : {0.1, 0.5, 1.0}) {
    const double oracle = testing::lagrangian_objective(V.mat, upd.u, upd.v, 1.0, lambda);
    CHECK(coef.eval(lambda) == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("cubic coefficients match the dense Lagrangian oracle") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index q = 2 + static_cast<Eigen::Index>(rng.bounded(5));  // q <= 6
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.bounded(3));  // d <= 3
    MetricV V;
    V.mat = testing::random_matrix(q, d, rng);
    Rank2Update upd;
    upd.u = testing::random_vector(q, rng);
    upd.v = testing::random_vector(q, rng);
    const double delta = static_cast<double>(rng.bounded(static_cast<std::uint64_t>(q) + 1));

    const CubicCoeffs coef = cubic_coefficients(V, upd, delta);
    for (int i = 0; i < 5; ++i) {
      const double lambda = 2.0 * rng.uniform() + 1e-6;
      const double oracle = testing::lagrangian_objective(V.mat, upd.u, upd.v, delta, lambda);
      CHECK(std::abs(coef.eval(lambda) - oracle) <= 1e-8 * (1.0 + std::abs(oracle)));
    }
  }
}

TEST_CASE("select_lambda realizes the three clamp cases") {
  const double m = 1e-5;
  const double M = 1e5;

  // Interior stationary point: f' = -9 l^2 + 9, maximum at 1.
  CHECK(select_lambda({-3.0, 0.0, 9.0}, m, M) == doctest::Approx(1.0));
  // f decreasing for all positive lambda -> m.
  CHECK(select_lambda({-4.0, -2.0, 0.0}, m, M) == m);
  // Stationary point beyond M: beta = sqrt(c / 9) = M + 1 -> M.
  CHECK(select_lambda({-3.0, 0.0, 9.0 * (M + 1.0) * (M + 1.0)}, m, M) == M);
  // Degenerate quadratic: f = -l^2 + l, vertex at 0.5.
  CHECK(select_lambda({0.0, -1.0, 1.0}, m, M) == doctest::Approx(0.5));
  // All-zero coefficients: passive round, return m.
  CHECK(select_lambda({0.0, 0.0, 0.0}, m, M) == m);
  CHECK_THROWS_AS(select_lambda({1.0, 1.0, 1.0}, -1.0, 1.0), ConfigError);
}

TEST_CASE("select_lambda beats a log grid on random cubics") {
  Rng rng(23);
  const double m = 1e-5;
  const double M = 1e5;
  const int grid_points = 2000;
  const double log_m = std::log(m);
  const double log_M = std::log(M);
  for (int trial = 0; trial < 200; ++trial) {
    CubicCoeffs coef;
    coef.a = rng.normal();
    coef.b = rng.normal();
    coef.c = rng.normal();
    if (trial % 5 == 0) coef.a = 0.0;
    const double chosen = select_lambda(coef, m, M);
    REQUIRE(chosen >= m);
    REQUIRE(chosen <= M);
    const double chosen_value = coef.eval(chosen);
    double grid_best = -std::numeric_limits<double>::infinity();
    for (int g = 0; g < grid_points; ++g) {
      const double lambda =
          std::exp(log_m + (log_M - log_m) * static_cast<double>(g) / (grid_points - 1));
      grid_best = std::max(grid_best, coef.eval(lambda));
    }
    CHECK(chosen_value >= grid_best - 1e-6 * (1.0 + std::abs(chosen_value)));
  }
}

TEST_CASE("exact update via rank-1 Sherman-Morrison by hand") {
  const MetricV V = identity_metric(2);
  Rank2Update upd;
  upd.u = Eigen::Vector2d(1, 0);
  upd.v = Eigen::Vector2d(0, 0);

  const MetricV exact = update_v(V, 0.25, upd, UpdateRule::exact);
  CHECK(exact.mat.isApprox(Eigen::Vector2d(2.0, 1.0).asDiagonal().toDenseMatrix(), 1e-12));
  CHECK(exact.version == V.version + 1);

  const MetricV first = update_v(V, 0.25, upd, UpdateRule::first_order);
  CHECK(first.mat.isApprox(Eigen::Vector2d(1.5, 1.0).asDiagonal().toDenseMatrix(), 1e-12));
}

TEST_CASE("exact update matches the dense inverse") {
  Rng rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index q = 2 + static_cast<Eigen::Index>(rng.bounded(15));  // q <= 16
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.bounded(static_cast<std::uint64_t>(q) - 1));
    MetricV V;
    V.mat = testing::random_matrix(q, d, rng);
    Rank2Update upd;
    upd.u = testing::random_vector(q, rng);
    upd.v = testing::random_vector(q, rng);
    const double lambda = 0.01 + 2.0 * rng.uniform();

    const MatrixXd dense = testing::dense_exact_update(V.mat, upd.u, upd.v, lambda);
    const MetricV fast = update_v(V, lambda, upd, UpdateRule::exact);
    const double scale = 1.0 + dense.cwiseAbs().maxCoeff();
    CHECK((fast.mat - dense).cwiseAbs().maxCoeff() <= 1e-10 * scale);
  }
}

TEST_CASE("singular exact update raises the declared error") {
  const MetricV V = identity_metric(2);
  Rank2Update upd;
  upd.u = Eigen::Vector2d(1, 0);
  upd.v = Eigen::Vector2d(0, 0);
  // I - 2 lambda u u^T is singular at lambda = 1 / (2 ||u||^2).
  CHECK_THROWS_AS(update_v(V, 0.5, upd, UpdateRule::exact), SingularUpdateError);
  // The first-order rule stays defined there.
  CHECK_NOTHROW(update_v(V, 0.5, upd, UpdateRule::first_order));
  CHECK_THROWS_AS(update_v(V, 0.0, upd, UpdateRule::exact), ConfigError);
}

TEST_CASE("zero update leaves V unchanged under both rules") {
  Rng rng(31);
  MetricV V;
  V.mat = testing::random_matrix(4, 2, rng);
  Rank2Update upd;
  upd.u = testing::random_vector(4, rng);
  upd.v = upd.u;
  for (const UpdateRule rule : {UpdateRule::exact, UpdateRule::first_order}) {
    const MetricV next = update_v(V, 3.0, upd, rule);
    CHECK(next.mat.isApprox(V.mat, 1e-12));
  }
}

TEST_CASE("hyperparameter validation and d default") {
  Hyperparams hp;
  CHECK(hp.resolve_d(6) == 4);
  CHECK(hp.resolve_d(8) == 6);
  CHECK(hp.resolve_d(2) == 1);
  CHECK_NOTHROW(hp.validate(6));
  hp.d = 6;
  CHECK_THROWS_AS(hp.validate(6), ConfigError);  // d must stay below q
  hp.d = 0;
  hp.lambda_min = 2.0;
  hp.lambda_max = 1.0;
  CHECK_THROWS_AS(hp.validate(6), ConfigError);
  hp = Hyperparams{};
  hp.k = 0;
  CHECK_THROWS_AS(hp.validate(6), ConfigError);
}

TEST_CASE("online_round: passive on duplicate neighbor, active otherwise") {
  Hyperparams hp;
  hp.d = 1;
  hp.k = 1;

  std::vector<Example> seed(2);
  seed[0].features = Eigen::Vector2d(0, 0);
  seed[0].labels = Eigen::Vector2d(0, 1);
  seed[1].features = Eigen::Vector2d(5, 5);
  seed[1].labels = Eigen::Vector2d(1, 0);

  ModelState state = init_model(seed, 2, 2, hp);
  REQUIRE(state.store.size() == 2);

  // Exact duplicate of a stored example: nearest neighbor is itself, margin
  // and loss are zero, V must be bitwise unchanged.
  const MatrixXd v_before = state.V.mat;
  const double loss = online_round(state, seed[0].features, seed[0].labels, hp);
  CHECK(loss == 0.0);
  CHECK((state.V.mat.array() == v_before.array()).all());
  CHECK(state.store.size() == 3);
  CHECK(state.round == 1);
  CHECK(state.cumulative_loss == 0.0);

  // A conflicting label at the same point forces a positive loss and a
  // metric change (unless the update degenerates, which it does not here).
  const double loss2 = online_round(state, seed[0].features, Eigen::Vector2d(1, 0), hp);
  CHECK(loss2 > 0.0);
  CHECK(state.loss_positive_rounds == 1);
  CHECK(state.cumulative_loss == loss2);
  CHECK(state.last_diag.lambda >= hp.lambda_min);
  CHECK(state.last_diag.lambda <= hp.lambda_max);
  CHECK(state.last_diag.post_loss_first_order >= 0.0);

  CHECK_THROWS_AS(online_round(state, Eigen::Vector2d(0, 0), Eigen::Vector3d(1, 0, 0), hp),
                  ShapeError);
}

TEST_CASE("online_round is deterministic") {
  Hyperparams hp;
  hp.d = 2;
  Rng data_rng(41);
  std::vector<Example> seed;
  for (int i = 0; i < 6; ++i) {
    Example ex;
    ex.features = testing::random_vector(3, data_rng);
    ex.labels = testing::random_binary_vector(3, data_rng);
    seed.push_back(ex);
  }
  ModelState a = init_model(seed, 3, 3, hp);
  ModelState b = init_model(seed, 3, 3, hp);
  CHECK((a.V.mat.array() == b.V.mat.array()).all());
  for (int t = 0; t < 20; ++t) {
    const VectorXd x = testing::random_vector(3, data_rng);
    const VectorXd y = testing::random_binary_vector(3, data_rng);
    const double la = online_round(a, x, y, hp);
    const double lb = online_round(b, x, y, hp);
    CHECK(la == lb);
    CHECK((a.V.mat.array() == b.V.mat.array()).all());
  }
  CHECK(a.cumulative_loss == b.cumulative_loss);
}

TEST_CASE("online_round on an empty store is a state error") {
  Hyperparams hp;
  hp.d = 1;
  ModelState state;
  state.V.mat = MatrixXd::Identity(2, 2);
  state.store = NeighborStore(2, 2);
  CHECK_THROWS_AS(online_round(state, Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 1), hp),
                  StateError);
}

TEST_CASE("cumulative loss equals the per-round sum") {
  Hyperparams hp;
  hp.d = 2;
  Rng data_rng(43);
  std::vector<Example> seed;
  for (int i = 0; i < 4; ++i) {
    Example ex;
    ex.features = testing::random_vector(4, data_rng);
    ex.labels = testing::random_binary_vector(4, data_rng);
    seed.push_back(ex);
  }
  ModelState state = init_model(seed, 4, 4, hp);
  double total = 0.0;
  double previous = 0.0;
  for (int t = 0; t < 30; ++t) {
    const double loss =
        online_round(state, testing::random_vector(4, data_rng),
                     testing::random_binary_vector(4, data_rng), hp);
    total += loss;
    CHECK(state.cumulative_loss == total);
    CHECK(state.cumulative_loss >= previous);
    previous = state.cumulative_loss;
  }
}
