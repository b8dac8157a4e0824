#include <doctest.h>

#include <sstream>

#include "oml/data_io.hpp"
#include "oml/errors.hpp"
#include "oml/evaluation.hpp"
#include "oml/snapshot.hpp"
#include "support/oracles.hpp"

using namespace oml;

namespace {

Snapshot snapshot_after_run(Method method) {
  SynthConfig cfg;
  cfg.n = 60;
  cfg.p = 5;
  cfg.q = 3;
  cfg.latent_dim = 2;
  cfg.rng_seed = 13;
  const StreamDataset ds = generate_synthetic(cfg);
  Hyperparams hp;
  hp.d = 2;
  hp.k = 3;
  RunResult run = prequential_run(ds, hp, method, 10);
  return Snapshot{method, hp, std::move(run.state)};
}

}  // namespace

TEST_CASE("snapshot round-trips byte-identically") {
  const Snapshot snap = snapshot_after_run(Method::oml);
  std::ostringstream first;
  save_snapshot(first, snap);

  std::istringstream in(first.str());
  const Snapshot loaded = load_snapshot(in);
  CHECK(loaded.method == snap.method);
  CHECK(loaded.state.round == snap.state.round);
  CHECK(loaded.state.cumulative_loss == snap.state.cumulative_loss);
  CHECK(loaded.state.loss_positive_rounds == snap.state.loss_positive_rounds);
  CHECK((loaded.state.P.mat.array() == snap.state.P.mat.array()).all());
  CHECK((loaded.state.V.mat.array() == snap.state.V.mat.array()).all());
  CHECK(loaded.state.store.size() == snap.state.store.size());
  CHECK(loaded.hp.k == snap.hp.k);
  CHECK(loaded.hp.lambda_min == snap.hp.lambda_min);

  std::ostringstream second;
  save_snapshot(second, loaded);
  CHECK(first.str() == second.str());
}

TEST_CASE("loaded state continues the stream identically") {
  const Snapshot snap = snapshot_after_run(Method::oml);
  std::ostringstream out;
  save_snapshot(out, snap);
  std::istringstream in(out.str());
  Snapshot loaded = load_snapshot(in);

  ModelState original = snap.state;
  ModelState resumed = loaded.state;
  Rng rng(31);
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd x = testing::random_vector(5, rng);
    const Eigen::VectorXd y = testing::random_binary_vector(3, rng);
    const double a = online_round(original, x, y, snap.hp);
    const double b = online_round(resumed, x, y, loaded.hp);
    CHECK(a == b);
    CHECK((original.V.mat.array() == resumed.V.mat.array()).all());
  }
}

TEST_CASE("baseline snapshot has no projection or metric") {
  const Snapshot snap = snapshot_after_run(Method::knn_euclidean);
  std::ostringstream out;
  save_snapshot(out, snap);
  std::istringstream in(out.str());
  const Snapshot loaded = load_snapshot(in);
  CHECK(loaded.method == Method::knn_euclidean);
  CHECK(loaded.state.P.mat.size() == 0);
  CHECK_FALSE(loaded.state.has_metric());
  CHECK(loaded.state.store.size() == snap.state.store.size());
}

TEST_CASE("snapshot rejects malformed input") {
  std::istringstream not_snap("something else\n");
  CHECK_THROWS_AS(load_snapshot(not_snap), ParseError);
  std::istringstream bad_version("oml-snapshot 99\n");
  CHECK_THROWS_AS(load_snapshot(bad_version), ParseError);
  std::istringstream truncated("oml-snapshot 1\nmethod oml\np 2\n");
  CHECK_THROWS_AS(load_snapshot(truncated), ParseError);
}
