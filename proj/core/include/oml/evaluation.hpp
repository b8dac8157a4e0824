#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "oml/online.hpp"
#include "oml/types.hpp"

namespace oml {

struct CurveRow {
  std::uint64_t round = 0;
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  double example_f1 = 0.0;
  double hamming_loss = 0.0;
  double cumulative_loss = 0.0;
};

/// Running confusion counts and metric curves for a prequential run.
struct MetricsReport {
  std::vector<std::uint64_t> tp, fp, fn, tn;  // per label
  double example_f1_sum = 0.0;
  std::uint64_t examples_seen = 0;
  std::uint64_t hamming_errors = 0;
  std::uint64_t cells = 0;
  std::vector<CurveRow> curve;
  double r_hat = 0.0;  // running max of ||x_t||_2^2

  explicit MetricsReport(Eigen::Index q = 0)
      : tp(static_cast<std::size_t>(q)), fp(static_cast<std::size_t>(q)),
        fn(static_cast<std::size_t>(q)), tn(static_cast<std::size_t>(q)) {}
  Eigen::Index q() const { return static_cast<Eigen::Index>(tp.size()); }
};

/// V snapshots and loss series collected at checkpoints.
struct BoundDiagnostics {
  std::vector<std::uint64_t> rounds;
  std::vector<MatrixXd> v_snapshots;
  std::vector<double> cumulative_loss;
  double r_hat = 0.0;
};

/// Adds one (prediction, truth) pair to the running counts. The
/// per-example F1 convention scores an empty true and predicted set as 1.
void update_confusion(MetricsReport& report, const VectorXd& y_hat, const VectorXd& y);

/// 2 TP / (2 TP + FP + FN) over all label cells; 0 when the denominator is.
double micro_f1(const MetricsReport& report);
/// Mean over labels of per-label F1; a label with TP = FP = FN = 0 scores 0.
double macro_f1(const MetricsReport& report);
/// Mean of per-example F1 contributions.
double example_f1(const MetricsReport& report);
/// Fraction of label cells predicted incorrectly.
double hamming_loss(const MetricsReport& report);

enum class Method { oml, knn_euclidean };

const char* method_name(Method method);

struct RunResult {
  MetricsReport report;
  BoundDiagnostics diag;
  ModelState state;  // final state; P and V are empty for the baseline
  Method method = Method::oml;
  std::uint64_t rounds = 0;
  std::size_t seed_size = 0;
  Eigen::Index p = 0, q = 0, d = 0;
  std::string dataset_name;
};

/// Prequential (predict-then-update) evaluation: split seed/stream, fit the
/// model on the seed, then for each stream example predict with kNN under
/// the method's metric, score, reveal the label, and train (oml) or just
/// append (baseline). Curve rows and V snapshots are taken every
/// checkpoint_every rounds and at the final round.
RunResult prequential_run(const StreamDataset& ds, const Hyperparams& hp, Method method,
                          std::uint64_t checkpoint_every, bool shuffle = true);

/// Residual of the telescoping identity
///   sum_t (||V_t - U||_F^2 - ||V_{t+1} - U||_F^2)
///     = ||V_1 - U||_F^2 - ||V_T+1 - U||_F^2
/// over consecutive snapshots; an exact identity, so the result is floating
/// point noise. Also checks the first-minus-last difference never exceeds
/// ||V_1 - U||_F^2.
double telescoping_check(const BoundDiagnostics& diag, const MatrixXd& U);

/// Curve CSV, header "round,macro_f1,micro_f1,example_f1,hamming_loss,cumulative_loss".
void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& curve);

struct CurveSeries {
  std::string name;
  std::vector<CurveRow> rows;
};

/// Parses a curve CSV; the header must match the writer's exactly.
CurveSeries read_curve_csv(std::istream& in, const std::string& name);

/// Human-readable run summary (config echo, final metrics, diagnostics).
std::string format_summary(const RunResult& result, const Hyperparams& hp,
                           std::uint64_t checkpoint_every, bool shuffle);

}  // namespace oml
