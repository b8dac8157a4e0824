#include "oml/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "oml/data_io.hpp"
#include "oml/errors.hpp"

namespace oml {
namespace {

constexpr const char* kCurveHeader =
    "round,macro_f1,micro_f1,example_f1,hamming_loss,cumulative_loss";

void append_number(std::string& out, double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

double parse_double_field(const std::string& tok, std::size_t line, const std::string& file) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError(file + ": malformed curve value '" + tok + "'", line);
  return value;
}

}  // namespace

void update_confusion(MetricsReport& report, const VectorXd& y_hat, const VectorXd& y) {
  const Eigen::Index q = report.q();
  if (y_hat.size() != q || y.size() != q)
    throw ShapeError("update_confusion: label lengths differ from report");

  std::uint64_t pair_tp = 0, pair_fp = 0, pair_fn = 0;
  for (Eigen::Index j = 0; j < q; ++j) {
    const bool predicted = y_hat[j] == 1.0;
    const bool truth = y[j] == 1.0;
    const std::size_t jj = static_cast<std::size_t>(j);
    if (predicted && truth) {
      ++report.tp[jj];
      ++pair_tp;
    } else if (predicted && !truth) {
      ++report.fp[jj];
      ++pair_fp;
      ++report.hamming_errors;
    } else if (!predicted && truth) {
      ++report.fn[jj];
      ++pair_fn;
      ++report.hamming_errors;
    } else {
      ++report.tn[jj];
    }
  }
  const std::uint64_t denom = 2 * pair_tp + pair_fp + pair_fn;
  report.example_f1_sum +=
      denom == 0 ? 1.0 : 2.0 * static_cast<double>(pair_tp) / static_cast<double>(denom);
  report.examples_seen += 1;
  report.cells += static_cast<std::uint64_t>(q);
}

double micro_f1(const MetricsReport& report) {
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t j = 0; j < report.tp.size(); ++j) {
    tp += report.tp[j];
    fp += report.fp[j];
    fn += report.fn[j];
  }
  const std::uint64_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

double macro_f1(const MetricsReport& report) {
  if (report.tp.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t j = 0; j < report.tp.size(); ++j) {
    const std::uint64_t denom = 2 * report.tp[j] + report.fp[j] + report.fn[j];
    if (denom > 0) sum += 2.0 * static_cast<double>(report.tp[j]) / static_cast<double>(denom);
  }
  return sum / static_cast<double>(report.tp.size());
}

double example_f1(const MetricsReport& report) {
  return report.examples_seen == 0
             ? 0.0
             : report.example_f1_sum / static_cast<double>(report.examples_seen);
}

double hamming_loss(const MetricsReport& report) {
  return report.cells == 0
             ? 0.0
             : static_cast<double>(report.hamming_errors) / static_cast<double>(report.cells);
}

const char* method_name(Method method) {
  return method == Method::oml ? "oml" : "knn";
}

RunResult prequential_run(const StreamDataset& ds, const Hyperparams& hp, Method method,
                          std::uint64_t checkpoint_every, bool shuffle) {
  validate_dataset(ds);
  if (checkpoint_every < 1) throw ConfigError("checkpoint_every must be >= 1");
  if (method == Method::oml) {
    hp.validate(ds.q);
  } else {
    if (hp.k < 1) throw ConfigError("k must be >= 1");
    if (!(hp.seed_fraction > 0.0 && hp.seed_fraction < 1.0))
      throw ConfigError("seed fraction must lie in (0, 1)");
  }

  auto [seed, stream] = split_seed(ds, hp.seed_fraction, hp.rng_seed, shuffle);

  RunResult result;
  result.method = method;
  result.seed_size = seed.size();
  result.p = ds.p;
  result.q = ds.q;
  result.d = method == Method::oml ? hp.resolve_d(ds.q) : 0;
  result.dataset_name = ds.name;
  result.report = MetricsReport(ds.q);

  result.state = method == Method::oml ? init_model(seed, ds.p, ds.q, hp)
                                       : init_baseline(seed, ds.p, ds.q, hp);
  ModelState& state = result.state;

  if (method == Method::oml) {
    result.diag.rounds.push_back(0);
    result.diag.v_snapshots.push_back(state.V.mat);
    result.diag.cumulative_loss.push_back(0.0);
  }

  const std::uint64_t total = static_cast<std::uint64_t>(stream.size());
  std::uint64_t round = 0;
  for (const Example& ex : stream) {
    ++round;
    // Predict on the example before its label is revealed.
    const int k_eff = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(hp.k), state.store.size()));
    VectorXd y_hat;
    VectorXd w_t;
    if (method == Method::oml) {
      w_t = project_instance(state.P, ex.features);
      const std::vector<Neighbor> hits = knn_learned(state.store, state.V, w_t, k_eff);
      y_hat = aggregate_labels(state.store, hits, hp.threshold);
    } else {
      const std::vector<Neighbor> hits = knn_raw(state.store, ex.features, k_eff);
      y_hat = aggregate_labels(state.store, hits, hp.threshold);
    }
    update_confusion(result.report, y_hat, ex.labels);
    result.report.r_hat = std::max(result.report.r_hat, ex.features.squaredNorm());

    // Reveal the label and learn.
    if (method == Method::oml)
      online_round(state, ex.features, ex.labels, w_t, hp);
    else
      state.store.append(ex.features, ex.labels);

    if (round % checkpoint_every == 0 || round == total) {
      CurveRow row;
      row.round = round;
      row.macro_f1 = macro_f1(result.report);
      row.micro_f1 = micro_f1(result.report);
      row.example_f1 = example_f1(result.report);
      row.hamming_loss = hamming_loss(result.report);
      row.cumulative_loss = state.cumulative_loss;
      if (result.report.curve.empty() || result.report.curve.back().round != round)
        result.report.curve.push_back(row);
      if (method == Method::oml) {
        result.diag.rounds.push_back(round);
        result.diag.v_snapshots.push_back(state.V.mat);
        result.diag.cumulative_loss.push_back(state.cumulative_loss);
      }
    }
  }
  result.rounds = round;
  result.diag.r_hat = result.report.r_hat;
  return result;
}

double telescoping_check(const BoundDiagnostics& diag, const MatrixXd& U) {
  if (diag.v_snapshots.size() < 2)
    throw StateError("telescoping_check: needs at least two snapshots");
  for (const MatrixXd& v : diag.v_snapshots)
    if (v.rows() != U.rows() || v.cols() != U.cols())
      throw ShapeError("telescoping_check: U shape differs from V snapshots");

  double telescoped = 0.0;
  for (std::size_t t = 0; t + 1 < diag.v_snapshots.size(); ++t)
    telescoped += (diag.v_snapshots[t] - U).squaredNorm() -
                  (diag.v_snapshots[t + 1] - U).squaredNorm();
  const double first = (diag.v_snapshots.front() - U).squaredNorm();
  const double last = (diag.v_snapshots.back() - U).squaredNorm();
  const double direct = first - last;
  if (direct > first)
    throw NumericError("telescoping_check: difference exceeds ||V_1 - U||_F^2");
  return std::abs(telescoped - direct);
}

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& curve) {
  std::string buf(kCurveHeader);
  buf += '\n';
  for (const CurveRow& row : curve) {
    buf += std::to_string(row.round);
    buf += ',';
    append_number(buf, row.macro_f1);
    buf += ',';
    append_number(buf, row.micro_f1);
    buf += ',';
    append_number(buf, row.example_f1);
    buf += ',';
    append_number(buf, row.hamming_loss);
    buf += ',';
    append_number(buf, row.cumulative_loss);
    buf += '\n';
  }
  out << buf;
}

CurveSeries read_curve_csv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(name + ": empty curve file", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCurveHeader)
    throw ParseError(name + ": unexpected curve header '" + line + "'", 1);

  CurveSeries series;
  series.name = name;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find(',', start);
      fields.push_back(line.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (fields.size() != 6)
      throw ParseError(name + ": expected 6 fields, got " + std::to_string(fields.size()),
                       line_no);
    CurveRow row;
    unsigned long long round = 0;
    const auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), round);
    if (ec != std::errc{} || ptr != fields[0].data() + fields[0].size())
      throw ParseError(name + ": malformed round '" + fields[0] + "'", line_no);
    row.round = round;
    row.macro_f1 = parse_double_field(fields[1], line_no, name);
    row.micro_f1 = parse_double_field(fields[2], line_no, name);
    row.example_f1 = parse_double_field(fields[3], line_no, name);
    row.hamming_loss = parse_double_field(fields[4], line_no, name);
    row.cumulative_loss = parse_double_field(fields[5], line_no, name);
    series.rows.push_back(row);
  }
  if (series.rows.empty()) throw ParseError(name + ": no curve rows", line_no);
  return series;
}

std::string format_summary(const RunResult& result, const Hyperparams& hp,
                           std::uint64_t checkpoint_every, bool shuffle) {
  std::ostringstream out;
  out << "method: " << method_name(result.method) << '\n';
  out << "dataset: " << (result.dataset_name.empty() ? "unnamed" : result.dataset_name)
      << " (n=" << result.seed_size + result.rounds << ", p=" << result.p << ", q=" << result.q
      << ")\n";
  out << "seed_examples: " << result.seed_size << '\n';
  out << "rounds: " << result.rounds << '\n';
  out << "config: k=" << hp.k;
  if (result.method == Method::oml) {
    out << " d=" << result.d << " m=" << hp.lambda_min << " M=" << hp.lambda_max
        << " ridge=" << result.state.P.ridge
        << " update_rule=" << (hp.update_rule == UpdateRule::exact ? "exact" : "first_order")
        << " train_nn="
        << (hp.train_nn_metric == TrainNnMetric::euclidean_raw ? "euclidean_raw" : "learned");
  }
  out << " threshold=" << hp.threshold << " seed_fraction=" << hp.seed_fraction
      << " rng_seed=" << hp.rng_seed << " shuffle=" << (shuffle ? "true" : "false")
      << " checkpoint_every=" << checkpoint_every << '\n';
  out << "final: macro_f1=" << macro_f1(result.report) << " micro_f1=" << micro_f1(result.report)
      << " example_f1=" << example_f1(result.report)
      << " hamming_loss=" << hamming_loss(result.report)
      << " cumulative_loss=" << result.state.cumulative_loss << '\n';
  out << "r_hat: " << result.report.r_hat << '\n';
  out << "loss_positive_rounds: " << result.state.loss_positive_rounds << '\n';
  out << "singular_fallbacks: " << result.state.singular_fallbacks << '\n';
  return out.str();
}

}  // namespace oml
