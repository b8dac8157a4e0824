#include "oml/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>

#include "oml/errors.hpp"
#include "oml/rng.hpp"

namespace oml {
namespace {

std::string_view trim_right(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

long long parse_int(std::string_view tok, std::size_t line, const char* what) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError(std::string("malformed ") + what + " '" + std::string(tok) + "'", line);
  return value;
}

double parse_real(std::string_view tok, std::size_t line, const char* what) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError(std::string("malformed ") + what + " '" + std::string(tok) + "'", line);
  return value;
}

void append_number(std::string& out, double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

struct RawLine {
  std::size_t line_no = 0;
  std::vector<long long> label_ids;
  std::vector<std::pair<long long, double>> features;  // 1-based index, value
};

}  // namespace

void validate_dataset(const StreamDataset& ds) {
  if (ds.examples.empty()) throw DimensionError("dataset is empty");
  if (ds.p < 1) throw DimensionError("dataset needs p >= 1 features");
  if (ds.q < 1) throw DimensionError("dataset needs q >= 1 labels");
  for (std::size_t i = 0; i < ds.examples.size(); ++i) {
    const Example& ex = ds.examples[i];
    if (ex.features.size() != ds.p || ex.labels.size() != ds.q)
      throw DimensionError("example " + std::to_string(i) + " has inconsistent dimensions");
    for (Eigen::Index j = 0; j < ex.labels.size(); ++j)
      if (ex.labels[j] != 0.0 && ex.labels[j] != 1.0)
        throw DimensionError("example " + std::to_string(i) + " has a non-binary label");
  }
}

void validate_synth_config(const SynthConfig& cfg) {
  if (cfg.n < 10) throw ConfigError("synthetic config needs n >= 10");
  if (cfg.p < 1) throw ConfigError("synthetic config needs p >= 1");
  if (cfg.q < 2) throw ConfigError("synthetic config needs q >= 2");
  if (cfg.latent_dim < 1 || cfg.latent_dim > std::min(cfg.p, cfg.q))
    throw ConfigError("synthetic config needs 1 <= latent_dim <= min(p, q)");
  if (!(cfg.noise_std >= 0.0)) throw ConfigError("synthetic config needs noise_std >= 0");
  if (!std::isfinite(cfg.label_threshold)) throw ConfigError("label_threshold must be finite");
}

StreamDataset parse_sparse_multilabel(std::istream& in) {
  std::vector<RawLine> rows;
  bool have_dims = false;
  long long dim_p = 0;
  long long dim_q = 0;
  long long max_feature_index = 0;
  long long max_label_id = -1;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim_right(line);
    if (body.empty()) continue;
    if (body.front() == '#') {
      if (line_no == 1 && body.starts_with("#dims")) {
        const auto fields = split(body, ' ');
        if (fields.size() != 3)
          throw ParseError("expected '#dims p q'", line_no);
        dim_p = parse_int(fields[1], line_no, "dimension");
        dim_q = parse_int(fields[2], line_no, "dimension");
        if (dim_p < 1 || dim_q < 1)
          throw DimensionError("header requires p >= 1 and q >= 1");
        have_dims = true;
      }
      continue;
    }

    RawLine row;
    row.line_no = line_no;
    const std::size_t first_space = body.find(' ');
    const std::string_view label_field =
        first_space == std::string_view::npos ? body : body.substr(0, first_space);
    const std::string_view rest =
        first_space == std::string_view::npos ? std::string_view{} : body.substr(first_space + 1);

    if (!label_field.empty()) {
      for (const std::string_view tok : split(label_field, ',')) {
        const long long id = parse_int(tok, line_no, "label id");
        if (id < 0) throw ParseError("negative label id", line_no);
        if (have_dims && id >= dim_q)
          throw DimensionError("line " + std::to_string(line_no) + ": label id " +
                               std::to_string(id) + " >= q = " + std::to_string(dim_q));
        row.label_ids.push_back(id);
        max_label_id = std::max(max_label_id, id);
      }
    }

    for (const std::string_view tok : split(rest, ' ')) {
      if (tok.empty()) continue;
      const std::size_t colon = tok.find(':');
      if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size())
        throw ParseError("malformed feature token '" + std::string(tok) + "'", line_no);
      const long long index = parse_int(tok.substr(0, colon), line_no, "feature index");
      if (index < 1) throw ParseError("feature indices are 1-based", line_no);
      if (have_dims && index > dim_p)
        throw DimensionError("line " + std::to_string(line_no) + ": feature index " +
                             std::to_string(index) + " > p = " + std::to_string(dim_p));
      const double value = parse_real(tok.substr(colon + 1), line_no, "feature value");
      for (const auto& [seen_index, seen_value] : row.features)
        if (seen_index == index)
          throw ParseError("duplicate feature index " + std::to_string(index), line_no);
      row.features.emplace_back(index, value);
      max_feature_index = std::max(max_feature_index, index);
    }
    rows.push_back(std::move(row));
  }

  StreamDataset ds;
  ds.p = have_dims ? dim_p : max_feature_index;
  ds.q = have_dims ? dim_q : max_label_id + 1;
  if (rows.empty()) throw ParseError("no data lines");
  if (ds.p < 1) throw DimensionError("no feature index observed and no header; p unknown");
  if (ds.q < 1) throw DimensionError("no label id observed and no header; q unknown");

  ds.examples.reserve(rows.size());
  for (const RawLine& row : rows) {
    Example ex;
    ex.features = VectorXd::Zero(ds.p);
    ex.labels = VectorXd::Zero(ds.q);
    for (const long long id : row.label_ids) ex.labels[id] = 1.0;
    for (const auto& [index, value] : row.features) ex.features[index - 1] = value;
    ds.examples.push_back(std::move(ex));
  }
  validate_dataset(ds);
  return ds;
}

void write_sparse_multilabel(std::ostream& out, const StreamDataset& ds) {
  std::string buf;
  buf += "#dims ";
  buf += std::to_string(ds.p);
  buf += ' ';
  buf += std::to_string(ds.q);
  buf += '\n';
  for (const Example& ex : ds.examples) {
    bool first = true;
    for (Eigen::Index j = 0; j < ds.q; ++j) {
      if (ex.labels[j] == 1.0) {
        if (!first) buf += ',';
        buf += std::to_string(j);
        first = false;
      }
    }
    for (Eigen::Index i = 0; i < ds.p; ++i) {
      if (ex.features[i] != 0.0) {
        buf += ' ';
        buf += std::to_string(i + 1);
        buf += ':';
        append_number(buf, ex.features[i]);
      }
    }
    if (first && ex.features.isZero(0.0)) buf += ' ';  // keep the empty example visible
    buf += '\n';
  }
  out << buf;
}

StreamDataset parse_dense_csv(std::istream& in, Eigen::Index q) {
  if (q < 1) throw ConfigError("csv parsing needs q >= 1 label columns");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header row", 1);
  const auto header = split(trim_right(line), ',');
  const Eigen::Index columns = static_cast<Eigen::Index>(header.size());
  if (columns <= q)
    throw DimensionError("csv has " + std::to_string(columns) + " columns, needs more than q = " +
                         std::to_string(q));

  StreamDataset ds;
  ds.p = columns - q;
  ds.q = q;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim_right(line);
    if (body.empty()) continue;
    const auto cells = split(body, ',');
    if (static_cast<Eigen::Index>(cells.size()) != columns)
      throw ParseError("ragged row: expected " + std::to_string(columns) + " cells, got " +
                       std::to_string(cells.size()), line_no);
    Example ex;
    ex.features = VectorXd::Zero(ds.p);
    ex.labels = VectorXd::Zero(ds.q);
    for (Eigen::Index i = 0; i < ds.p; ++i)
      ex.features[i] = parse_real(cells[i], line_no, "feature cell");
    for (Eigen::Index j = 0; j < ds.q; ++j) {
      const double value = parse_real(cells[ds.p + j], line_no, "label cell");
      if (value != 0.0 && value != 1.0)
        throw ParseError("non-binary label cell '" + std::string(cells[ds.p + j]) + "'", line_no);
      ex.labels[j] = value;
    }
    ds.examples.push_back(std::move(ex));
  }
  validate_dataset(ds);
  return ds;
}

void write_dense_csv(std::ostream& out, const StreamDataset& ds) {
  std::string buf;
  for (Eigen::Index i = 0; i < ds.p; ++i) {
    if (i) buf += ',';
    buf += 'f';
    buf += std::to_string(i + 1);
  }
  for (Eigen::Index j = 0; j < ds.q; ++j) {
    buf += ",l";
    buf += std::to_string(j + 1);
  }
  buf += '\n';
  for (const Example& ex : ds.examples) {
    for (Eigen::Index i = 0; i < ds.p; ++i) {
      if (i) buf += ',';
      append_number(buf, ex.features[i]);
    }
    for (Eigen::Index j = 0; j < ds.q; ++j) {
      buf += ',';
      buf += ex.labels[j] == 1.0 ? '1' : '0';
    }
    buf += '\n';
  }
  out << buf;
}

std::pair<std::vector<Example>, std::vector<Example>> split_seed(const StreamDataset& ds,
                                                                 double fraction,
                                                                 std::uint64_t rng_seed,
                                                                 bool shuffle) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("seed fraction must lie in (0, 1)");
  const Eigen::Index n = ds.size();
  const Eigen::Index seed_count = static_cast<Eigen::Index>(
      std::llround(fraction * static_cast<double>(n)));
  if (seed_count < 1) throw ConfigError("seed split is empty; increase the fraction");
  if (seed_count >= n) throw ConfigError("stream split is empty; decrease the fraction");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (shuffle) {
    Rng rng(rng_seed);
    rng.shuffle(order);
  }

  std::vector<Example> seed;
  std::vector<Example> stream;
  seed.reserve(static_cast<std::size_t>(seed_count));
  stream.reserve(static_cast<std::size_t>(n - seed_count));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Example& ex = ds.examples[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    if (i < seed_count)
      seed.push_back(ex);
    else
      stream.push_back(ex);
  }
  return {std::move(seed), std::move(stream)};
}

StreamDataset generate_synthetic(const SynthConfig& cfg) {
  validate_synth_config(cfg);
  Rng rng(cfg.rng_seed);

  MatrixXd mixing(cfg.p, cfg.latent_dim);  // B
  for (Eigen::Index i = 0; i < cfg.p; ++i)
    for (Eigen::Index j = 0; j < cfg.latent_dim; ++j) mixing(i, j) = rng.normal();

  MatrixXd label_weights(cfg.q, cfg.latent_dim);  // rows w_j
  for (Eigen::Index i = 0; i < cfg.q; ++i)
    for (Eigen::Index j = 0; j < cfg.latent_dim; ++j) label_weights(i, j) = rng.normal();

  StreamDataset ds;
  ds.p = cfg.p;
  ds.q = cfg.q;
  ds.name = "synthetic";
  ds.examples.reserve(static_cast<std::size_t>(cfg.n));
  VectorXd latent(cfg.latent_dim);
  for (Eigen::Index t = 0; t < cfg.n; ++t) {
    for (Eigen::Index j = 0; j < cfg.latent_dim; ++j) latent[j] = rng.normal();
    Example ex;
    ex.features = mixing * latent;
    if (cfg.noise_std > 0.0)
      for (Eigen::Index i = 0; i < cfg.p; ++i) ex.features[i] += cfg.noise_std * rng.normal();
    ex.labels = VectorXd::Zero(cfg.q);
    for (Eigen::Index j = 0; j < cfg.q; ++j)
      if (label_weights.row(j).dot(latent) > cfg.label_threshold) ex.labels[j] = 1.0;
    ds.examples.push_back(std::move(ex));
  }
  validate_dataset(ds);
  return ds;
}

}  // namespace oml
