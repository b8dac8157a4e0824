// Integration tests that drive the built oml binary end to end.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "oml/data_io.hpp"
#include "oml/snapshot.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return OML_CLI_PATH; }

int run_cli(const std::string& args) {
  const std::string command = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("oml_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int value = 0;
    return value;
  }
};

fs::path make_synth(const TempDir& dir, const std::string& name, std::uint64_t seed) {
  const fs::path out = dir.path / name;
  const int rc = run_cli("synth --n 200 --p 6 --q 4 --latent-dim 3 --seed " +
                         std::to_string(seed) + " --out " + out.string());
  REQUIRE(rc == 0);
  return out;
}

}  // namespace

TEST_CASE("synth output parses and is deterministic per seed") {
  TempDir dir;
  const fs::path a = make_synth(dir, "a.txt", 5);
  const fs::path b = dir.path / "b.txt";
  REQUIRE(run_cli("synth --n 200 --p 6 --q 4 --latent-dim 3 --seed 5 --out " + b.string()) == 0);
  CHECK(slurp(a) == slurp(b));

  std::ifstream in(a);
  const oml::StreamDataset ds = oml::parse_sparse_multilabel(in);
  CHECK(ds.size() == 200);
  CHECK(ds.p == 6);
  CHECK(ds.q == 4);

  const std::string first_line = slurp(a).substr(0, 9);
  CHECK(first_line == "#dims 6 4");
}

TEST_CASE("run writes three outputs per method and is deterministic") {
  TempDir dir;
  const fs::path data = make_synth(dir, "data.txt", 7);

  const std::string common = "run --data " + data.string() + " --k 3 --d 2 --seed 9 --out ";
  REQUIRE(run_cli(common + (dir.path / "out1").string()) == 0);
  REQUIRE(run_cli(common + (dir.path / "out2").string()) == 0);

  for (const char* name : {"oml_curve.csv", "oml_summary.txt", "oml_model.snapshot"})
    CHECK(fs::exists(dir.path / "out1" / name));
  CHECK(slurp(dir.path / "out1" / "oml_curve.csv") == slurp(dir.path / "out2" / "oml_curve.csv"));
  CHECK(slurp(dir.path / "out1" / "oml_model.snapshot") ==
        slurp(dir.path / "out2" / "oml_model.snapshot"));

  // The snapshot loads back.
  std::ifstream snap_in(dir.path / "out1" / "oml_model.snapshot");
  const oml::Snapshot snap = oml::load_snapshot(snap_in);
  CHECK(snap.method == oml::Method::oml);
  CHECK(snap.state.store.size() == 200);
  CHECK(snap.state.V.mat.cols() == 2);
}

TEST_CASE("run with both methods produces two curve files") {
  TempDir dir;
  const fs::path data = make_synth(dir, "data.txt", 11);
  const fs::path out = dir.path / "out";
  REQUIRE(run_cli("run --data " + data.string() +
                  " --method knn --method oml --k 3 --d 2 --seed 1 --out " + out.string()) == 0);
  CHECK(fs::exists(out / "oml_curve.csv"));
  CHECK(fs::exists(out / "knn_curve.csv"));
  CHECK(fs::exists(out / "knn_model.snapshot"));
  CHECK(slurp(out / "knn_summary.txt").find("method: knn") != std::string::npos);
}

TEST_CASE("missing dataset fails without partial outputs") {
  TempDir dir;
  const fs::path out = dir.path / "out";
  const int rc = run_cli("run --data " + (dir.path / "missing.txt").string() + " --out " +
                         out.string());
  CHECK(rc != 0);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("config file values apply and flags override them") {
  TempDir dir;
  const fs::path data = make_synth(dir, "data.txt", 13);
  const fs::path config = dir.path / "run.conf";
  {
    std::ofstream out(config);
    out << "k=5\nd=2\nseed=3\n";
  }
  const fs::path out1 = dir.path / "out1";
  const fs::path out2 = dir.path / "out2";
  REQUIRE(run_cli("run --data " + data.string() + " --config " + config.string() + " --out " +
                  out1.string()) == 0);
  CHECK(slurp(out1 / "oml_summary.txt").find("config: k=5") != std::string::npos);
  REQUIRE(run_cli("run --data " + data.string() + " --config " + config.string() +
                  " --k 7 --out " + out2.string()) == 0);
  CHECK(slurp(out2 / "oml_summary.txt").find("config: k=7") != std::string::npos);
}

TEST_CASE("convert round-trips sparse through csv") {
  TempDir dir;
  const fs::path sparse1 = make_synth(dir, "data.txt", 17);
  const fs::path csv = dir.path / "data.csv";
  const fs::path sparse2 = dir.path / "back.txt";

  REQUIRE(run_cli("convert --in " + sparse1.string() + " --to csv --out " + csv.string()) == 0);
  REQUIRE(run_cli("convert --in " + csv.string() + " --to sparse --labels 4 --out " +
                  sparse2.string()) == 0);
  CHECK(slurp(sparse1) == slurp(sparse2));

  // Unknown format flag is a usage error.
  CHECK(run_cli("convert --in " + sparse1.string() + " --to arff --out x.txt") != 0);
  // csv input without --labels fails.
  CHECK(run_cli("convert --in " + csv.string() + " --to sparse --out y.txt") != 0);
  // Empty input surfaces a parse error.
  const fs::path empty = dir.path / "empty.txt";
  std::ofstream(empty).close();
  CHECK(run_cli("convert --in " + empty.string() + " --to csv --out z.txt") != 0);
}

TEST_CASE("report renders four charts and a table row per series") {
  TempDir dir;
  const fs::path data = make_synth(dir, "data.txt", 19);
  const fs::path out = dir.path / "out";
  REQUIRE(run_cli("run --data " + data.string() +
                  " --method oml --method knn --k 3 --d 2 --seed 2 --out " + out.string()) == 0);

  const fs::path charts = dir.path / "charts";
  const std::string table_cmd = std::string(cli_path()) + " report " +
                                (out / "oml_curve.csv").string() + " " +
                                (out / "knn_curve.csv").string() + " --out " + charts.string() +
                                " > " + (dir.path / "table.txt").string() + " 2>/dev/null";
  REQUIRE(std::system(table_cmd.c_str()) == 0);

  for (const char* name : {"macro_f1.svg", "micro_f1.svg", "example_f1.svg", "hamming_loss.svg"})
    CHECK(fs::exists(charts / name));
  const std::string svg = slurp(charts / "macro_f1.svg");
  CHECK(svg.find("oml_curve") != std::string::npos);
  CHECK(svg.find("knn_curve") != std::string::npos);

  const std::string table = slurp(dir.path / "table.txt");
  CHECK(table.find("oml_curve") != std::string::npos);
  CHECK(table.find("knn_curve") != std::string::npos);

  // Malformed csv names the file and exits nonzero.
  const fs::path bad = dir.path / "bad.csv";
  {
    std::ofstream o(bad);
    o << "not,a,curve\n";
  }
  CHECK(run_cli("report " + bad.string() + " --out " + charts.string()) != 0);
}

TEST_CASE("run does not mutate its input file") {
  TempDir dir;
  const fs::path data = make_synth(dir, "data.txt", 23);
  const std::string before = slurp(data);
  REQUIRE(run_cli("run --data " + data.string() + " --k 3 --d 2 --out " +
                  (dir.path / "out").string()) == 0);
  CHECK(slurp(data) == before);
}
