#include "gradbench/bench.hpp"

#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

using namespace gradbench;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gradbench");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gradbench_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({"run", "--no-such-flag"}).code == 1);
  CHECK(cli({"run", "--opt", "lbfgs"}).code == 1);
  CHECK(cli({"run", "--batch", "abc", "--epochs", "1"}).code == 1);
  CHECK(cli({"run", "--batch", "5000", "--epochs", "1"}).code == 1);
  CHECK(cli({"run", "--momentum", "1.5", "--opt", "momentum"}).code == 1);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("run prints one line per epoch") {
  const auto r = cli({"run", "--opt", "sgd", "--lr", "0", "--epochs", "3"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::vector<std::string> all;
  for (std::string l; std::getline(lines, l);) all.push_back(l);
  REQUIRE(all.size() == 4);
  CHECK(all[0] == "epoch,train_loss,val_loss,diverged");
  // lr = 0: identical losses every epoch.
  CHECK(all[1].substr(2) == all[2].substr(2));
  CHECK(all[2].substr(2) == all[3].substr(2));
}

TEST_CASE("divergence exits 2") {
  const auto r = cli({"run", "--opt", "sgd", "--lr", "1", "--epochs", "1000"});
  CHECK(r.code == 2);
  CHECK(r.err.find("diverged") != std::string::npos);
}

TEST_CASE("run can write the results csv") {
  const fs::path dir = scratch("run");
  const auto r = cli({"run", "--opt", "momentum", "--variant", "classic", "--batch", "32",
                      "--epochs", "4", "--out", (dir / "r.csv").string()});
  REQUIRE(r.code == 0);
  const auto rows = read_csv(dir / "r.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].run_id == "momentum/classic/0.01/0.9/32");
  CHECK(rows[0].batch_size == 32);
  fs::remove_all(dir);
}

TEST_CASE("generate writes the dataset and its sidecar") {
  const fs::path dir = scratch("generate");
  const auto r = cli({"generate", "--seed", "7", "--rows", "20", "--features", "3", "--out",
                      (dir / "data.csv").string()});
  REQUIRE(r.code == 0);
  std::ifstream csv(dir / "data.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "x1,x2,x3,y");
  std::size_t n = 0;
  for (std::string l; std::getline(csv, l);) ++n;
  CHECK(n == 20);

  std::ifstream side(dir / "data.json");
  const auto meta = nlohmann::json::parse(side);
  CHECK(meta["seed"] == 7);
  CHECK(meta["n"] == 20);
  CHECK(meta["p"] == 3);
  const Dataset d = generate(7, 20, 3);
  CHECK(meta["true_bias"].get<double>() == d.true_bias);
  CHECK(meta["true_theta"].size() == 3);
  fs::remove_all(dir);
}

TEST_CASE("oracle and gradcheck") {
  const auto o = cli({"oracle"});
  REQUIRE(o.code == 0);
  CHECK(o.out.find("val_mse ") != std::string::npos);

  CHECK(cli({"gradcheck", "--points", "20"}).code == 0);
  CHECK(cli({"gradcheck", "--loss", "mae", "--points", "20"}).code == 0);
  // A far too coarse step cannot meet a tiny tolerance on MAE kinks nearby.
  CHECK(cli({"gradcheck", "--loss", "mae", "--h", "10", "--tol", "1e-12"}).code == 3);
}

TEST_CASE("grid and plot") {
  const fs::path dir = scratch("grid");
  const auto g = cli({"grid", "--epochs", "5", "--parallelism", "4", "--out", dir.string()});
  REQUIRE(g.code == 0);
  CHECK(fs::exists(dir / "results.csv"));
  CHECK(fs::exists(dir / "adam.svg"));
  CHECK(read_csv(dir / "results.csv").size() > 108);

  const auto p = cli({"plot", "--csv", (dir / "results.csv").string(), "--out",
                      (dir / "b").string(), "--group-by", "batch"});
  CHECK(p.code == 0);
  CHECK(fs::exists(dir / "b" / "batch_32.svg"));
  CHECK(cli({"plot", "--csv", (dir / "missing.csv").string()}).code == 1);
  fs::remove_all(dir);
}
