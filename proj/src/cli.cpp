#include "gradbench/bench.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace gradbench {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDiverged = 2;
constexpr int kExitGradcheckFailed = 3;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct DataFlags {
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t split_seed = kDefaultSeed;
  std::size_t rows = kDefaultRows;
  std::size_t features = kDefaultFeatures;
  double noise = kDefaultNoiseScale;
  double train_fraction = kDefaultTrainFraction;

  void add_to(CLI::App& app, bool with_split) {
    app.add_option("--seed", seed, "dataset generation seed")->capture_default_str();
    app.add_option("--rows", rows, "number of examples")->capture_default_str();
    app.add_option("--features", features, "number of features")->capture_default_str();
    app.add_option("--noise", noise, "noise scale")->capture_default_str();
    if (with_split) {
      app.add_option("--split-seed", split_seed, "train/validation shuffle seed")
          ->capture_default_str();
      app.add_option("--train-fraction", train_fraction)->capture_default_str();
    }
  }
};

struct OptimizerFlags {
  std::string opt = "sgd";
  std::string variant = "decoupled";
  std::optional<double> lr, momentum, decay, beta1, beta2, eps;

  void add_to(CLI::App& app) {
    app.add_option("--opt", opt, "sgd|momentum|nag|adagrad|rmsprop|adadelta|adam")
        ->check(CLI::IsMember({"sgd", "momentum", "nag", "adagrad", "rmsprop", "adadelta", "adam"}))
        ->capture_default_str();
    app.add_option("--variant", variant, "classic|decoupled (momentum and nag)")
        ->check(CLI::IsMember({"classic", "decoupled"}))
        ->capture_default_str();
    app.add_option("--lr", lr, "learning rate (default depends on --opt)");
    app.add_option("--momentum", momentum, "momentum coefficient");
    app.add_option("--decay", decay, "running-average decay (rmsprop, adadelta)");
    app.add_option("--beta1", beta1);
    app.add_option("--beta2", beta2);
    app.add_option("--eps", eps);
  }

  OptimizerSpec<double> spec() const {
    auto s = OptimizerSpec<double>::defaults(parse_optimizer_kind(opt));
    s.variant = parse_variant(variant);
    if (lr) s.lr = *lr;
    if (momentum) s.momentum = *momentum;
    if (decay) s.decay = *decay;
    if (beta1) s.beta1 = *beta1;
    if (beta2) s.beta2 = *beta2;
    if (eps) s.eps = *eps;
    s.validate();
    return s;
  }
};

BatchStrategy parse_batch(const std::string& text) {
  if (text == "full") return BatchStrategy::full();
  std::size_t pos = 0;
  const unsigned long long v = std::stoull(text, &pos);
  if (pos != text.size()) throw std::invalid_argument("bad batch size '" + text + "'");
  return BatchStrategy::of(static_cast<std::size_t>(v));
}

void write_dataset(const Dataset& d, const std::filesystem::path& csv_path) {
  if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + csv_path.string() + "' for writing");
    for (std::size_t j = 0; j < d.features(); ++j) out << 'x' << j + 1 << ',';
    out << "y\n";
    for (Eigen::Index i = 0; i < d.x_norm.rows(); ++i) {
      for (Eigen::Index j = 0; j < d.x_norm.cols(); ++j) out << g17(d.x_norm(i, j)) << ',';
      out << g17(d.y(i)) << '\n';
    }
    if (!out) throw std::runtime_error("write to '" + csv_path.string() + "' failed");
  }

  nlohmann::ordered_json meta;
  meta["seed"] = d.seed;
  meta["n"] = d.rows();
  meta["p"] = d.features();
  meta["noise_scale"] = d.noise_scale;
  meta["true_theta"] = std::vector<double>(d.true_theta.begin(), d.true_theta.end());
  meta["true_bias"] = d.true_bias;
  auto sidecar = csv_path;
  sidecar.replace_extension(".json");
  std::ofstream out(sidecar, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + sidecar.string() + "' for writing");
  out << meta.dump(2) << '\n';
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gradient-based optimizers on synthetic least-squares problems", "gradbench"};
  app.require_subcommand(1);

  // generate
  DataFlags gen_data;
  std::filesystem::path gen_out = "dataset.csv";
  auto* gen = app.add_subcommand("generate", "write the synthetic dataset as CSV + JSON sidecar");
  gen_data.add_to(*gen, false);
  gen->add_option("--out", gen_out, "CSV path; the sidecar goes next to it as .json")
      ->capture_default_str();

  // run
  DataFlags run_data;
  OptimizerFlags run_opt;
  std::string run_batch = "full";
  std::string run_loss = "mse";
  std::size_t run_epochs = kDefaultEpochs;
  std::uint64_t run_init_seed = kDefaultSeed, run_batch_seed = kDefaultSeed;
  double run_threshold = kDefaultDivergenceThreshold;
  std::optional<std::filesystem::path> run_out;
  auto* run_cmd = app.add_subcommand("run", "train a single grid cell and print its losses");
  run_data.add_to(*run_cmd, true);
  run_opt.add_to(*run_cmd);
  run_cmd->add_option("--batch", run_batch, "batch size or 'full'")->capture_default_str();
  run_cmd->add_option("--loss", run_loss, "mse|mae")
      ->check(CLI::IsMember({"mse", "mae"}))
      ->capture_default_str();
  run_cmd->add_option("--epochs", run_epochs)->capture_default_str();
  run_cmd->add_option("--init-seed", run_init_seed)->capture_default_str();
  run_cmd->add_option("--batch-seed", run_batch_seed)->capture_default_str();
  run_cmd->add_option("--threshold", run_threshold, "divergence threshold")->capture_default_str();
  run_cmd->add_option("--out", run_out, "also write the results CSV here");

  // grid
  DataFlags grid_data;
  Grid grid;
  std::string grid_variant = "decoupled";
  std::size_t parallelism = 1;
  std::filesystem::path grid_out = "results";
  bool no_plot = false;
  std::optional<std::uint64_t> resplit_seed;
  auto* grid_cmd = app.add_subcommand("grid", "run the full experiment grid");
  grid_data.add_to(*grid_cmd, true);
  grid_cmd->add_option("--parallelism", parallelism, "worker threads")->capture_default_str();
  grid_cmd->add_option("--out", grid_out, "output directory for results.csv and charts")
      ->capture_default_str();
  grid_cmd->add_option("--epochs", grid.epochs)->capture_default_str();
  grid_cmd->add_option("--variant", grid_variant, "momentum/nag formulation")
      ->check(CLI::IsMember({"classic", "decoupled"}))
      ->capture_default_str();
  grid_cmd->add_option("--init-seed", grid.init_seed)->capture_default_str();
  grid_cmd->add_option("--batch-seed", grid.batch_seed)->capture_default_str();
  grid_cmd->add_option("--threshold", grid.divergence_threshold)->capture_default_str();
  grid_cmd->add_flag("--init-per-cell", grid.init_per_cell,
                     "derive a distinct init seed for every cell");
  grid_cmd->add_option("--resplit-seed", resplit_seed,
                       "re-draw the train/validation split per cell from this seed");
  grid_cmd->add_flag("--no-plot", no_plot, "skip chart generation");

  // plot
  std::filesystem::path plot_csv, plot_out = "charts";
  std::string group_by = "optimizer";
  auto* plot_cmd = app.add_subcommand("plot", "render SVG charts from a results CSV");
  plot_cmd->add_option("--csv", plot_csv, "results CSV")->required();
  plot_cmd->add_option("--out", plot_out, "output directory")->capture_default_str();
  plot_cmd->add_option("--group-by", group_by, "optimizer|batch")
      ->check(CLI::IsMember({"optimizer", "batch"}))
      ->capture_default_str();

  // gradcheck
  DataFlags gc_data;
  std::string gc_loss = "mse";
  double gc_h = 1e-6, gc_tol = 1e-6;
  std::size_t gc_points = 100, gc_batch = 32;
  auto* gc_cmd = app.add_subcommand("gradcheck", "compare analytic gradients to central differences");
  gc_cmd->set_help_flag("--help", "Print this help message and exit");  // frees -h for --h
  gc_data.add_to(*gc_cmd, false);
  gc_cmd->add_option("--loss", gc_loss)->check(CLI::IsMember({"mse", "mae"}))->capture_default_str();
  gc_cmd->add_option("--h", gc_h, "finite-difference step")->capture_default_str();
  gc_cmd->add_option("--tol", gc_tol, "maximum accepted relative error")->capture_default_str();
  gc_cmd->add_option("--points", gc_points, "random (model, batch) points")->capture_default_str();
  gc_cmd->add_option("--batch", gc_batch, "rows per point")->capture_default_str();

  // oracle
  DataFlags oracle_data;
  auto* oracle_cmd = app.add_subcommand("oracle", "closed-form least-squares fit and its validation MSE");
  oracle_data.add_to(*oracle_cmd, true);

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "gradbench: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*gen) {
      const Dataset d = generate(gen_data.seed, gen_data.rows, gen_data.features, gen_data.noise);
      write_dataset(d, gen_out);
      out << "wrote " << gen_out.string() << " (" << d.rows() << " rows)\n";
      return kExitOk;
    }

    if (*run_cmd) {
      RunConfig config;
      config.optimizer = run_opt.spec();
      config.loss = parse_loss_kind(run_loss);
      config.batch = parse_batch(run_batch);
      config.epochs = run_epochs;
      config.data_seed = run_data.seed;
      config.split_seed = run_data.split_seed;
      config.init_seed = run_init_seed;
      config.batch_seed = run_batch_seed;
      config.divergence_threshold = run_threshold;
      const Dataset d = generate(run_data.seed, run_data.rows, run_data.features, run_data.noise);
      const Split s = split(d, run_data.split_seed, run_data.train_fraction);
      const RunResult result = run(config, d, s);

      out << "epoch,train_loss,val_loss,diverged\n";
      for (const EpochRecord& r : result.records) {
        out << r.epoch << ',' << g17(r.train_loss) << ',' << g17(r.val_loss) << ','
            << (r.diverged ? 1 : 0) << '\n';
      }
      if (run_out) {
        CellResult cell{GridCell{config.optimizer, config.batch}, {}, 0, result};
        cell.id = run_id(cell.cell);
        cell.batch_size = config.batch.resolve(s.train_indices.size());
        write_csv(std::span<const CellResult>(&cell, 1), *run_out);
      }
      if (result.diverged()) {
        err << "gradbench: run diverged at epoch " << result.records.back().epoch << "\n";
        return kExitDiverged;
      }
      return kExitOk;
    }

    if (*grid_cmd) {
      grid.variant = parse_variant(grid_variant);
      grid.resplit_seed = resplit_seed;
      const Dataset d = generate(grid_data.seed, grid_data.rows, grid_data.features, grid_data.noise);
      const Split s = split(d, grid_data.split_seed, grid_data.train_fraction);
      const auto started = std::chrono::steady_clock::now();
      const auto results = run_grid(grid, d, s, parallelism);
      const auto csv_path = grid_out / "results.csv";
      write_csv(std::span<const CellResult>(results), csv_path);
      const std::chrono::duration<double> took = std::chrono::steady_clock::now() - started;

      std::size_t diverged = 0;
      for (const auto& r : results) diverged += r.result.diverged() ? 1 : 0;
      out << "ran " << results.size() << " cells (" << diverged << " diverged) in " << took.count()
          << " s\nwrote " << csv_path.string() << "\n";
      if (!no_plot) {
        for (const auto& p : plot_curves(csv_path, grid_out)) out << "wrote " << p.string() << "\n";
      }
      return kExitOk;
    }

    if (*plot_cmd) {
      for (const auto& p : plot_curves(plot_csv, plot_out, parse_group_by(group_by)))
        out << "wrote " << p.string() << "\n";
      return kExitOk;
    }

    if (*gc_cmd) {
      const LossKind kind = parse_loss_kind(gc_loss);
      const Dataset d = generate(gc_data.seed, gc_data.rows, gc_data.features, gc_data.noise);
      const std::size_t batch = std::min(gc_batch, d.rows());
      Rng rng(gc_data.seed ^ 0x6772616463686b00ULL);
      double worst = 0.0;
      std::size_t checked = 0;
      for (std::size_t point = 0; point < gc_points; ++point) {
        LinearModel<double> m;
        m.theta.resize(static_cast<Eigen::Index>(d.features()));
        for (auto& v : m.theta) v = rng.normal();
        m.bias = rng.normal();
        std::vector<std::size_t> idx(batch);
        for (auto& i : idx) i = static_cast<std::size_t>(rng.below(d.rows()));
        const MatrixXd x = gather_rows(d.x_norm, idx);
        const VectorXd y = gather(d.y, idx);
        // MAE is not differentiable where a residual is zero.
        if (kind == LossKind::MAE && ((predict(m, x) - y).array() == 0.0).any()) continue;
        worst = std::max(worst, gradient_check(kind, m, x, y, gc_h));
        ++checked;
      }
      out << "max_relative_error " << g17(worst) << " over " << checked << " points\n";
      return worst <= gc_tol ? kExitOk : kExitGradcheckFailed;
    }

    if (*oracle_cmd) {
      const Dataset d =
          generate(oracle_data.seed, oracle_data.rows, oracle_data.features, oracle_data.noise);
      const Split s = split(d, oracle_data.split_seed, oracle_data.train_fraction);
      const OracleFit fit = fit_oracle(d, s);
      out << "theta";
      for (double v : fit.model.theta) out << ' ' << g17(v);
      out << "\nbias " << g17(fit.model.bias) << "\ntrain_mse " << g17(fit.train_mse)
          << "\nval_mse " << g17(fit.val_mse) << "\n";
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "gradbench: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace gradbench
