#include "oml/snapshot.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "oml/errors.hpp"

namespace oml {
namespace {

constexpr const char* kMagic = "oml-snapshot";
constexpr int kVersion = 1;

void append_number(std::string& out, double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

void append_matrix(std::string& out, const char* tag, const MatrixXd& m) {
  out += tag;
  out += ' ';
  out += std::to_string(m.rows());
  out += ' ';
  out += std::to_string(m.cols());
  out += '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ' ';
      append_number(out, m(i, j));
    }
    out += '\n';
  }
}

class LineReader {
public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string next(const char* what) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    throw ParseError(std::string("snapshot truncated; expected ") + what, line_no_);
  }

  std::size_t line_no() const { return line_no_; }

private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) fields.push_back(tok);
  return fields;
}

double to_double(const std::string& tok, std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError("snapshot: malformed number '" + tok + "'", line);
  return value;
}

long long to_int(const std::string& tok, std::size_t line) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError("snapshot: malformed integer '" + tok + "'", line);
  return value;
}

std::string expect_key(LineReader& reader, const std::string& key) {
  const std::string line = reader.next(key.c_str());
  if (line.rfind(key + ' ', 0) != 0)
    throw ParseError("snapshot: expected '" + key + " ...', got '" + line + "'",
                     reader.line_no());
  return line.substr(key.size() + 1);
}

MatrixXd read_matrix(LineReader& reader, const std::string& tag) {
  const auto header = fields_of(expect_key(reader, tag));
  if (header.size() != 2) throw ParseError("snapshot: malformed matrix header", reader.line_no());
  const long long rows = to_int(header[0], reader.line_no());
  const long long cols = to_int(header[1], reader.line_no());
  if (rows < 0 || cols < 0) throw ParseError("snapshot: negative matrix shape", reader.line_no());
  MatrixXd m(rows, cols);
  for (long long i = 0; i < rows; ++i) {
    const auto cells = fields_of(reader.next("matrix row"));
    if (static_cast<long long>(cells.size()) != cols)
      throw ParseError("snapshot: matrix row has wrong arity", reader.line_no());
    for (long long j = 0; j < cols; ++j) m(i, j) = to_double(cells[j], reader.line_no());
  }
  return m;
}

}  // namespace

void save_snapshot(std::ostream& out, const Snapshot& snap) {
  std::string buf;
  buf += kMagic;
  buf += ' ';
  buf += std::to_string(kVersion);
  buf += '\n';
  buf += "method ";
  buf += method_name(snap.method);
  buf += '\n';

  const auto scalar = [&buf](const char* key, double value) {
    buf += key;
    buf += ' ';
    append_number(buf, value);
    buf += '\n';
  };
  const auto integer = [&buf](const char* key, long long value) {
    buf += key;
    buf += ' ';
    buf += std::to_string(value);
    buf += '\n';
  };

  integer("p", snap.state.store.p());
  integer("q", snap.state.store.q());
  integer("d", snap.state.V.mat.cols());
  integer("round", static_cast<long long>(snap.state.round));
  scalar("cumulative_loss", snap.state.cumulative_loss);
  integer("loss_positive_rounds", static_cast<long long>(snap.state.loss_positive_rounds));
  integer("singular_fallbacks", static_cast<long long>(snap.state.singular_fallbacks));
  integer("k", snap.hp.k);
  integer("hp_d", snap.hp.d);
  scalar("m", snap.hp.lambda_min);
  scalar("M", snap.hp.lambda_max);
  scalar("seed_fraction", snap.hp.seed_fraction);
  scalar("ridge", snap.hp.ridge);
  scalar("fitted_ridge", snap.state.P.ridge);
  buf += "update_rule ";
  buf += snap.hp.update_rule == UpdateRule::exact ? "exact" : "first_order";
  buf += '\n';
  buf += "train_nn_metric ";
  buf += snap.hp.train_nn_metric == TrainNnMetric::euclidean_raw ? "euclidean_raw" : "learned";
  buf += '\n';
  scalar("threshold", snap.hp.threshold);
  integer("rng_seed", static_cast<long long>(snap.hp.rng_seed));
  integer("store_capacity", static_cast<long long>(snap.hp.store_capacity));

  append_matrix(buf, "P", snap.state.P.mat);
  append_matrix(buf, "V", snap.state.V.mat);

  buf += "store ";
  buf += std::to_string(snap.state.store.size());
  buf += '\n';
  for (std::size_t i = 0; i < snap.state.store.size(); ++i) {
    const NeighborStore::Entry& e = snap.state.store.entry(i);
    bool first = true;
    for (Eigen::Index j = 0; j < e.labels.size(); ++j) {
      if (e.labels[j] == 1.0) {
        if (!first) buf += ',';
        buf += std::to_string(j);
        first = false;
      }
    }
    for (Eigen::Index j = 0; j < e.features.size(); ++j) {
      if (e.features[j] != 0.0) {
        buf += ' ';
        buf += std::to_string(j + 1);
        buf += ':';
        append_number(buf, e.features[j]);
      }
    }
    if (first && e.features.isZero(0.0)) buf += ' ';
    buf += '\n';
  }
  buf += "end\n";
  out << buf;
}

Snapshot load_snapshot(std::istream& in) {
  LineReader reader(in);
  const auto magic = fields_of(reader.next("magic"));
  if (magic.size() != 2 || magic[0] != kMagic)
    throw ParseError("not an oml snapshot", reader.line_no());
  if (to_int(magic[1], reader.line_no()) != kVersion)
    throw ParseError("unsupported snapshot version " + magic[1], reader.line_no());

  Snapshot snap;
  const std::string method = expect_key(reader, "method");
  if (method == "oml")
    snap.method = Method::oml;
  else if (method == "knn")
    snap.method = Method::knn_euclidean;
  else
    throw ParseError("snapshot: unknown method '" + method + "'", reader.line_no());

  const long long p = to_int(expect_key(reader, "p"), reader.line_no());
  const long long q = to_int(expect_key(reader, "q"), reader.line_no());
  to_int(expect_key(reader, "d"), reader.line_no());  // implied by V's shape
  snap.state.round = static_cast<std::uint64_t>(to_int(expect_key(reader, "round"), reader.line_no()));
  snap.state.cumulative_loss = to_double(expect_key(reader, "cumulative_loss"), reader.line_no());
  snap.state.loss_positive_rounds =
      static_cast<std::uint64_t>(to_int(expect_key(reader, "loss_positive_rounds"), reader.line_no()));
  snap.state.singular_fallbacks =
      static_cast<std::uint64_t>(to_int(expect_key(reader, "singular_fallbacks"), reader.line_no()));
  snap.hp.k = static_cast<int>(to_int(expect_key(reader, "k"), reader.line_no()));
  snap.hp.d = to_int(expect_key(reader, "hp_d"), reader.line_no());
  snap.hp.lambda_min = to_double(expect_key(reader, "m"), reader.line_no());
  snap.hp.lambda_max = to_double(expect_key(reader, "M"), reader.line_no());
  snap.hp.seed_fraction = to_double(expect_key(reader, "seed_fraction"), reader.line_no());
  snap.hp.ridge = to_double(expect_key(reader, "ridge"), reader.line_no());
  const double fitted_ridge = to_double(expect_key(reader, "fitted_ridge"), reader.line_no());
  const std::string rule = expect_key(reader, "update_rule");
  if (rule == "exact")
    snap.hp.update_rule = UpdateRule::exact;
  else if (rule == "first_order")
    snap.hp.update_rule = UpdateRule::first_order;
  else
    throw ParseError("snapshot: unknown update rule '" + rule + "'", reader.line_no());
  const std::string nn = expect_key(reader, "train_nn_metric");
  if (nn == "euclidean_raw")
    snap.hp.train_nn_metric = TrainNnMetric::euclidean_raw;
  else if (nn == "learned")
    snap.hp.train_nn_metric = TrainNnMetric::learned;
  else
    throw ParseError("snapshot: unknown train metric '" + nn + "'", reader.line_no());
  snap.hp.threshold = to_double(expect_key(reader, "threshold"), reader.line_no());
  snap.hp.rng_seed = static_cast<std::uint64_t>(to_int(expect_key(reader, "rng_seed"), reader.line_no()));
  snap.hp.store_capacity =
      static_cast<std::size_t>(to_int(expect_key(reader, "store_capacity"), reader.line_no()));

  snap.state.P.mat = read_matrix(reader, "P");
  snap.state.P.ridge = fitted_ridge;
  snap.state.V.mat = read_matrix(reader, "V");
  snap.state.V.version = 0;

  const long long count = to_int(expect_key(reader, "store"), reader.line_no());
  snap.state.store = NeighborStore(p, q);
  snap.state.store.set_capacity(snap.hp.store_capacity);
  const bool has_projection = snap.state.P.mat.size() > 0;
  for (long long i = 0; i < count; ++i) {
    const std::string line = reader.next("store entry");
    VectorXd features = VectorXd::Zero(p);
    VectorXd labels = VectorXd::Zero(q);
    const std::size_t first_space = line.find(' ');
    const std::string label_field =
        first_space == std::string::npos ? line : line.substr(0, first_space);
    if (!label_field.empty()) {
      std::size_t start = 0;
      while (start <= label_field.size()) {
        const std::size_t pos = label_field.find(',', start);
        const std::string tok = label_field.substr(start, pos - start);
        const long long id = to_int(tok, reader.line_no());
        if (id < 0 || id >= q) throw ParseError("snapshot: label id out of range", reader.line_no());
        labels[id] = 1.0;
        if (pos == std::string::npos) break;
        start = pos + 1;
      }
    }
    if (first_space != std::string::npos) {
      std::istringstream ss(line.substr(first_space + 1));
      std::string tok;
      while (ss >> tok) {
        const std::size_t colon = tok.find(':');
        if (colon == std::string::npos)
          throw ParseError("snapshot: malformed store feature '" + tok + "'", reader.line_no());
        const long long index = to_int(tok.substr(0, colon), reader.line_no());
        if (index < 1 || index > p)
          throw ParseError("snapshot: feature index out of range", reader.line_no());
        features[index - 1] = to_double(tok.substr(colon + 1), reader.line_no());
      }
    }
    if (has_projection) {
      VectorXd w = snap.state.P.mat.transpose() * features;
      snap.state.store.append(std::move(features), std::move(labels), std::move(w));
    } else {
      snap.state.store.append(std::move(features), std::move(labels));
    }
  }
  const std::string tail = reader.next("end marker");
  if (tail != "end") throw ParseError("snapshot: missing end marker", reader.line_no());
  return snap;
}

}  // namespace oml
