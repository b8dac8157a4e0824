// Command-line front end: dataset ingestion, synthetic streams, format
// conversion, prequential runs, and report rendering.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oml/charts.hpp"
#include "oml/data_io.hpp"
#include "oml/errors.hpp"
#include "oml/evaluation.hpp"
#include "oml/snapshot.hpp"

namespace fs = std::filesystem;

namespace {

struct RunOptions {
  std::string data_path;
  std::vector<std::string> methods;
  std::string out_dir;
  std::string config_path;
  std::string update_rule = "exact";
  std::string train_nn = "raw";
  oml::Hyperparams hp;
  std::uint64_t checkpoint_every = 10;
  bool no_shuffle = false;
};

// Plain key=value lines; blank lines and '#' comments are skipped.
std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw oml::IoError("cannot open config '" + path + "'");
  std::map<std::string, std::string> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      throw oml::ParseError("config: expected key=value, got '" + line + "'", line_no);
    values[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return values;
}

double config_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw oml::ConfigError("config: malformed number for '" + key + "': " + value);
  }
}

long long config_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long parsed = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw oml::ConfigError("config: malformed integer for '" + key + "': " + value);
  }
}

// Applies config values to options the command line left untouched.
void merge_config(RunOptions& opt, const CLI::App& run) {
  if (opt.config_path.empty()) return;
  const auto given = [&run](const std::string& flag) { return run.count(flag) > 0; };
  for (const auto& [key, value] : load_config(opt.config_path)) {
    if (key == "data") {
      if (!given("--data")) opt.data_path = value;
    } else if (key == "method") {
      if (!given("--method")) opt.methods.push_back(value);
    } else if (key == "out") {
      if (!given("--out")) opt.out_dir = value;
    } else if (key == "d") {
      if (!given("--d")) opt.hp.d = config_int(key, value);
    } else if (key == "k") {
      if (!given("--k")) opt.hp.k = static_cast<int>(config_int(key, value));
    } else if (key == "m") {
      if (!given("--m")) opt.hp.lambda_min = config_double(key, value);
    } else if (key == "M") {
      if (!given("--M")) opt.hp.lambda_max = config_double(key, value);
    } else if (key == "seed-fraction") {
      if (!given("--seed-fraction")) opt.hp.seed_fraction = config_double(key, value);
    } else if (key == "ridge") {
      if (!given("--ridge")) opt.hp.ridge = config_double(key, value);
    } else if (key == "update-rule") {
      if (!given("--update-rule")) opt.update_rule = value;
    } else if (key == "train-nn") {
      if (!given("--train-nn")) opt.train_nn = value;
    } else if (key == "threshold") {
      if (!given("--threshold")) opt.hp.threshold = config_double(key, value);
    } else if (key == "checkpoint-every") {
      if (!given("--checkpoint-every"))
        opt.checkpoint_every = static_cast<std::uint64_t>(config_int(key, value));
    } else if (key == "seed") {
      if (!given("--seed")) opt.hp.rng_seed = static_cast<std::uint64_t>(config_int(key, value));
    } else if (key == "store-capacity") {
      if (!given("--store-capacity"))
        opt.hp.store_capacity = static_cast<std::size_t>(config_int(key, value));
    } else if (key == "no-shuffle") {
      if (!given("--no-shuffle")) opt.no_shuffle = value == "true" || value == "1";
    } else {
      throw oml::ConfigError("config: unknown key '" + key + "'");
    }
  }
}

struct SynthOptions {
  oml::SynthConfig cfg;
  std::string out_path;
};

struct ConvertOptions {
  std::string in_path;
  std::string to_format;
  std::string out_path;
  Eigen::Index labels = 0;  // label column count for csv input
};

struct ReportOptions {
  std::vector<std::string> curves;
  std::string out_dir = ".";
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw oml::IoError("cannot open '" + path + "' for reading");
  return in;
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw oml::IoError("cannot open '" + path.string() + "' for writing");
  out << contents;
  if (!out) throw oml::IoError("failed writing '" + path.string() + "'");
}

oml::StreamDataset load_sparse(const std::string& path) {
  std::ifstream in = open_input(path);
  oml::StreamDataset ds = oml::parse_sparse_multilabel(in);
  ds.name = fs::path(path).stem().string();
  return ds;
}

int cmd_run(const RunOptions& opt) {
  if (opt.data_path.empty()) throw oml::ConfigError("run needs --data (flag or config)");
  if (opt.out_dir.empty()) throw oml::ConfigError("run needs --out (flag or config)");
  std::vector<oml::Method> methods;
  for (const std::string& name : opt.methods) {
    if (name != "oml" && name != "knn")
      throw oml::ConfigError("unknown method '" + name + "' (expected oml or knn)");
    methods.push_back(name == "oml" ? oml::Method::oml : oml::Method::knn_euclidean);
  }
  if (methods.empty()) methods.push_back(oml::Method::oml);

  // Read and validate everything before writing any output file.
  const oml::StreamDataset ds = load_sparse(opt.data_path);
  const bool shuffle = !opt.no_shuffle;

  std::vector<oml::RunResult> results;
  results.reserve(methods.size());
  for (const oml::Method method : methods)
    results.push_back(oml::prequential_run(ds, opt.hp, method, opt.checkpoint_every, shuffle));

  fs::create_directories(opt.out_dir);
  for (oml::RunResult& result : results) {
    const std::string stem = oml::method_name(result.method);
    {
      std::ostringstream curve;
      oml::write_curve_csv(curve, result.report.curve);
      write_file(fs::path(opt.out_dir) / (stem + "_curve.csv"), curve.str());
    }
    write_file(fs::path(opt.out_dir) / (stem + "_summary.txt"),
               oml::format_summary(result, opt.hp, opt.checkpoint_every, shuffle));
    {
      oml::Snapshot snap{result.method, opt.hp, std::move(result.state)};
      std::ostringstream model;
      oml::save_snapshot(model, snap);
      write_file(fs::path(opt.out_dir) / (stem + "_model.snapshot"), model.str());
    }
    std::cout << "wrote " << stem << "_curve.csv, " << stem << "_summary.txt, " << stem
              << "_model.snapshot to " << opt.out_dir << '\n';
  }
  return 0;
}

int cmd_synth(const SynthOptions& opt) {
  const oml::StreamDataset ds = oml::generate_synthetic(opt.cfg);
  std::ostringstream out;
  oml::write_sparse_multilabel(out, ds);
  const fs::path path(opt.out_path);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file(path, out.str());
  std::cout << "wrote " << ds.size() << " examples (p=" << ds.p << ", q=" << ds.q << ") to "
            << opt.out_path << '\n';
  return 0;
}

int cmd_convert(const ConvertOptions& opt) {
  std::ifstream in = open_input(opt.in_path);
  std::ostringstream out;
  if (opt.to_format == "csv") {
    const oml::StreamDataset ds = oml::parse_sparse_multilabel(in);
    oml::write_dense_csv(out, ds);
  } else {  // sparse
    if (opt.labels < 1)
      throw oml::ConfigError("converting csv to sparse needs --labels (label column count)");
    const oml::StreamDataset ds = oml::parse_dense_csv(in, opt.labels);
    oml::write_sparse_multilabel(out, ds);
  }
  const fs::path path(opt.out_path);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file(path, out.str());
  return 0;
}

int cmd_report(const ReportOptions& opt) {
  std::vector<oml::CurveSeries> series;
  for (const std::string& path : opt.curves) {
    std::ifstream in = open_input(path);
    series.push_back(oml::read_curve_csv(in, fs::path(path).stem().string()));
  }

  fs::create_directories(opt.out_dir);
  struct MetricColumn {
    const char* name;
    double (*pick)(const oml::CurveRow&);
  };
  const MetricColumn columns[] = {
      {"macro_f1", [](const oml::CurveRow& r) { return r.macro_f1; }},
      {"micro_f1", [](const oml::CurveRow& r) { return r.micro_f1; }},
      {"example_f1", [](const oml::CurveRow& r) { return r.example_f1; }},
      {"hamming_loss", [](const oml::CurveRow& r) { return r.hamming_loss; }},
  };

  for (const MetricColumn& column : columns) {
    std::vector<oml::ChartSeries> chart;
    for (const oml::CurveSeries& s : series) {
      oml::ChartSeries cs;
      cs.label = s.name;
      for (const oml::CurveRow& row : s.rows) {
        cs.x.push_back(static_cast<double>(row.round));
        cs.y.push_back(column.pick(row));
      }
      chart.push_back(std::move(cs));
    }
    write_file(fs::path(opt.out_dir) / (std::string(column.name) + ".svg"),
               oml::render_line_chart(column.name, "round", column.name, chart));
  }

  std::cout << "series,rounds,macro_f1,micro_f1,example_f1,hamming_loss,cumulative_loss\n";
  for (const oml::CurveSeries& s : series) {
    const oml::CurveRow& last = s.rows.back();
    std::cout << s.name << ',' << last.round << ',' << last.macro_f1 << ',' << last.micro_f1
              << ',' << last.example_f1 << ',' << last.hamming_loss << ','
              << last.cumulative_loss << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming multi-label classification with an online-learned label metric"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand(
      "run", "Prequential run: predict each stream example, then learn from it");
  run->add_option("--data", run_opt.data_path, "dataset in the sparse multi-label format");
  run->add_option("--method", run_opt.methods, "oml or knn; repeat to run both")
      ->check(CLI::IsMember({"oml", "knn"}));
  run->add_option("--d", run_opt.hp.d, "embedding dimension (default floor(0.8 q))");
  run->add_option("--k", run_opt.hp.k, "neighbor count for prediction");
  run->add_option("--m", run_opt.hp.lambda_min, "step-size lower clamp");
  run->add_option("--M", run_opt.hp.lambda_max, "step-size upper clamp");
  run->add_option("--seed-fraction", run_opt.hp.seed_fraction, "fraction held as the seed set");
  run->add_option("--ridge", run_opt.hp.ridge, "projection ridge; negative = auto");
  run->add_option("--update-rule", run_opt.update_rule, "exact or first_order")
      ->check(CLI::IsMember({"exact", "first_order"}));
  run->add_option("--train-nn", run_opt.train_nn, "training neighbor metric: raw or learned")
      ->check(CLI::IsMember({"raw", "learned"}));
  run->add_option("--threshold", run_opt.hp.threshold, "label vote threshold");
  run->add_option("--checkpoint-every", run_opt.checkpoint_every, "curve row cadence in rounds")
      ->check(CLI::PositiveNumber);
  run->add_option("--seed", run_opt.hp.rng_seed, "rng seed for split and V init");
  run->add_option("--store-capacity", run_opt.hp.store_capacity,
                  "neighbor store cap (0 = unbounded, FIFO eviction)");
  run->add_option("--out", run_opt.out_dir, "output directory");
  run->add_flag("--no-shuffle", run_opt.no_shuffle, "keep file order for the seed split");
  run->add_option("--config", run_opt.config_path,
                  "optional key=value config file; flags override it");

  SynthOptions synth_opt;
  CLI::App* synth = app.add_subcommand("synth", "Generate a label-correlated synthetic stream");
  synth->add_option("--n", synth_opt.cfg.n, "example count")->check(CLI::PositiveNumber);
  synth->add_option("--p", synth_opt.cfg.p, "feature count")->check(CLI::PositiveNumber);
  synth->add_option("--q", synth_opt.cfg.q, "label count")->check(CLI::PositiveNumber);
  synth->add_option("--latent-dim", synth_opt.cfg.latent_dim, "shared latent dimension")
      ->check(CLI::PositiveNumber);
  synth->add_option("--noise-std", synth_opt.cfg.noise_std, "feature noise std");
  synth->add_option("--label-threshold", synth_opt.cfg.label_threshold, "activation threshold");
  synth->add_option("--seed", synth_opt.cfg.rng_seed, "rng seed");
  synth->add_option("--out", synth_opt.out_path, "output file")->required();

  ConvertOptions convert_opt;
  CLI::App* convert = app.add_subcommand("convert", "Convert between sparse and dense CSV");
  convert->add_option("--in", convert_opt.in_path, "input file")->required();
  convert->add_option("--to", convert_opt.to_format, "target format: csv or sparse")
      ->required()
      ->check(CLI::IsMember({"csv", "sparse"}));
  convert->add_option("--out", convert_opt.out_path, "output file")->required();
  convert->add_option("--labels", convert_opt.labels,
                      "label column count (required for csv input)");

  ReportOptions report_opt;
  CLI::App* report = app.add_subcommand(
      "report", "Final-metrics table and per-metric SVG charts from curve CSVs");
  report->add_option("curves", report_opt.curves, "curve CSV files")->required();
  report->add_option("--out", report_opt.out_dir, "output directory for SVG charts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      merge_config(run_opt, *run);
      if (run_opt.update_rule != "exact" && run_opt.update_rule != "first_order")
        throw oml::ConfigError("update-rule must be exact or first_order");
      if (run_opt.train_nn != "raw" && run_opt.train_nn != "learned")
        throw oml::ConfigError("train-nn must be raw or learned");
      run_opt.hp.update_rule =
          run_opt.update_rule == "exact" ? oml::UpdateRule::exact : oml::UpdateRule::first_order;
      run_opt.hp.train_nn_metric = run_opt.train_nn == "raw" ? oml::TrainNnMetric::euclidean_raw
                                                             : oml::TrainNnMetric::learned;
      return cmd_run(run_opt);
    }
    if (*synth) return cmd_synth(synth_opt);
    if (*convert) return cmd_convert(convert_opt);
    if (*report) return cmd_report(report_opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
