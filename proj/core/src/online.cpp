#include "oml/online.hpp"

#include <cmath>

#include "oml/errors.hpp"

namespace oml {
namespace {

void fill_store(ModelState& state, const std::vector<Example>& seed, bool with_projection) {
  for (const Example& ex : seed) {
    if (with_projection)
      state.store.append(ex.features, ex.labels, project_instance(state.P, ex.features));
    else
      state.store.append(ex.features, ex.labels);
  }
}

}  // namespace

ModelState init_model(const std::vector<Example>& seed, Eigen::Index p, Eigen::Index q,
                      const Hyperparams& hp) {
  if (seed.empty()) throw StateError("init_model: seed set is empty");
  hp.validate(q);

  MatrixXd X(static_cast<Eigen::Index>(seed.size()), p);
  MatrixXd Y(static_cast<Eigen::Index>(seed.size()), q);
  for (std::size_t i = 0; i < seed.size(); ++i) {
    if (seed[i].features.size() != p || seed[i].labels.size() != q)
      throw ShapeError("init_model: seed example dimensions differ from dataset");
    X.row(static_cast<Eigen::Index>(i)) = seed[i].features.transpose();
    Y.row(static_cast<Eigen::Index>(i)) = seed[i].labels.transpose();
  }

  ModelState state;
  state.P = fit_projection(X, Y, hp.ridge >= 0.0 ? hp.ridge : auto_ridge(X));
  Rng v_rng(derive_seed(hp.rng_seed, 1));
  state.V = MetricV::random_init(q, hp.resolve_d(q), v_rng);
  state.store = NeighborStore(p, q);
  state.store.set_capacity(hp.store_capacity);
  fill_store(state, seed, true);
  return state;
}

ModelState init_baseline(const std::vector<Example>& seed, Eigen::Index p, Eigen::Index q,
                         const Hyperparams& hp) {
  if (seed.empty()) throw StateError("init_baseline: seed set is empty");
  ModelState state;
  state.store = NeighborStore(p, q);
  state.store.set_capacity(hp.store_capacity);
  fill_store(state, seed, false);
  return state;
}

double online_round(ModelState& state, const VectorXd& x_t, const VectorXd& y_t,
                    const Hyperparams& hp) {
  if (state.store.empty()) throw StateError("online_round: neighbor store is empty");
  return online_round(state, x_t, y_t, project_instance(state.P, x_t), hp);
}

double online_round(ModelState& state, const VectorXd& x_t, const VectorXd& y_t,
                    const VectorXd& w_t, const Hyperparams& hp) {
  if (state.store.empty()) throw StateError("online_round: neighbor store is empty");
  if (!state.has_metric()) throw StateError("online_round: model has no metric");
  if (y_t.size() != state.store.q()) throw ShapeError("online_round: label length differs from q");

  const Neighbor nn =
      nearest_neighbor_train(state.store, state.V, x_t, w_t, hp.train_nn_metric);
  const VectorXd& y_nn = state.store.entry(static_cast<std::size_t>(nn.index)).labels;

  const double delta = margin(y_t, y_nn);
  const double loss = hinge_loss_projected(state.V, w_t, y_t, y_nn);

  RoundDiag diag;
  diag.loss = loss;
  diag.nn_index = nn.index;

  if (loss > 0.0) {
    const Rank2Update upd = build_update_projected(w_t, y_t, y_nn);
    const CubicCoeffs coef = cubic_coefficients(state.V, upd, delta);
    const double lambda = select_lambda(coef, hp.lambda_min, hp.lambda_max);
    diag.lambda = lambda;
    ++state.loss_positive_rounds;

    MetricV next;
    if (hp.update_rule == UpdateRule::exact) {
      try {
        next = update_v(state.V, lambda, upd, UpdateRule::exact);
      } catch (const SingularUpdateError&) {
        next = update_v(state.V, lambda, upd, UpdateRule::first_order);
        diag.fallback_used = true;
        ++state.singular_fallbacks;
      }
      diag.post_loss_first_order = hinge_loss_projected(
          update_v(state.V, lambda, upd, UpdateRule::first_order), w_t, y_t, y_nn);
    } else {
      next = update_v(state.V, lambda, upd, UpdateRule::first_order);
      diag.post_loss_first_order = hinge_loss_projected(next, w_t, y_t, y_nn);
    }
    diag.post_loss_actual = hinge_loss_projected(next, w_t, y_t, y_nn);
    state.V = std::move(next);
  }

  state.store.append(x_t, y_t, w_t);
  state.round += 1;
  state.cumulative_loss += loss;
  state.last_diag = diag;
  return loss;
}

}  // namespace oml
