#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "oml/data_io.hpp"
#include "oml/knn.hpp"
#include "oml/metric_learner.hpp"
#include "oml/online.hpp"
#include "oml/projection.hpp"
#include "oml/rng.hpp"

using namespace oml;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

VectorXd random_vector(Eigen::Index n, Rng& rng) {
  VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.normal();
  return x;
}

StreamDataset make_stream(Eigen::Index n) {
  SynthConfig cfg;
  cfg.n = n;
  cfg.p = 20;
  cfg.q = 8;
  cfg.latent_dim = 4;
  cfg.rng_seed = 7;
  return generate_synthetic(cfg);
}

}  // namespace

static void BM_FitProjection(benchmark::State& state) {
  Rng rng(1);
  const Eigen::Index n = state.range(0);
  const MatrixXd X = random_matrix(n, 64, rng);
  const MatrixXd Y = random_matrix(n, 16, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_projection(X, Y, 1e-3));
  }
}
BENCHMARK(BM_FitProjection)->Arg(128)->Arg(512)->Arg(2048);

static void BM_CubicCoefficients(benchmark::State& state) {
  Rng rng(2);
  const Eigen::Index q = state.range(0);
  MetricV V;
  V.mat = random_matrix(q, std::max<Eigen::Index>(1, 4 * q / 5), rng);
  Rank2Update upd{random_vector(q, rng), random_vector(q, rng)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(cubic_coefficients(V, upd, 2.0));
  }
}
BENCHMARK(BM_CubicCoefficients)->Arg(8)->Arg(64)->Arg(512);

static void BM_UpdateVExact(benchmark::State& state) {
  Rng rng(3);
  const Eigen::Index q = state.range(0);
  MetricV V;
  V.mat = random_matrix(q, std::max<Eigen::Index>(1, 4 * q / 5), rng);
  Rank2Update upd{random_vector(q, rng), random_vector(q, rng)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(update_v(V, 0.37, upd, UpdateRule::exact));
  }
}
BENCHMARK(BM_UpdateVExact)->Arg(8)->Arg(64)->Arg(512);

static void BM_UpdateVFirstOrder(benchmark::State& state) {
  Rng rng(4);
  const Eigen::Index q = state.range(0);
  MetricV V;
  V.mat = random_matrix(q, std::max<Eigen::Index>(1, 4 * q / 5), rng);
  Rank2Update upd{random_vector(q, rng), random_vector(q, rng)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(update_v(V, 0.37, upd, UpdateRule::first_order));
  }
}
BENCHMARK(BM_UpdateVFirstOrder)->Arg(8)->Arg(64)->Arg(512);

// One training round against a store of n entries; dominated by the raw
// nearest-neighbor scan, so timings should grow linearly with n.
static void BM_OnlineRound(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const StreamDataset ds = make_stream(n + 64);
  Hyperparams hp;
  hp.d = 4;
  std::vector<Example> seed(ds.examples.begin(), ds.examples.begin() + n);
  ModelState base = init_model(seed, ds.p, ds.q, hp);
  std::size_t next = static_cast<std::size_t>(n);
  for (auto _ : state) {
    state.PauseTiming();
    ModelState round_state = base;  // keep the store at size n per iteration
    const Example& ex = ds.examples[next % ds.examples.size()];
    ++next;
    state.ResumeTiming();
    benchmark::DoNotOptimize(online_round(round_state, ex.features, ex.labels, hp));
  }
}
BENCHMARK(BM_OnlineRound)->Arg(1000)->Arg(2000)->Arg(4000);

static void BM_KnnLearnedQuery(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const StreamDataset ds = make_stream(n);
  Hyperparams hp;
  hp.d = 4;
  ModelState model = init_model(ds.examples, ds.p, ds.q, hp);
  Rng rng(5);
  const VectorXd w = random_vector(ds.q, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(knn_learned(model.store, model.V, w, 10));
  }
}
BENCHMARK(BM_KnnLearnedQuery)->Arg(1000)->Arg(4000);

BENCHMARK_MAIN();
