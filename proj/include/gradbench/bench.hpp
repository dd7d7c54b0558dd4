#pragma once

#include "gradbench/dataset.hpp"
#include "gradbench/trainer.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gradbench {

/// One experiment of the grid.
struct GridCell {
  OptimizerSpec<double> optimizer;
  BatchStrategy batch;
};

/// "<optimizer>/<variant>/<lr>/<momentum>/<batch>", with "-" for axes that do
/// not apply and "full" for the whole training set, e.g. "sgd/-/0.1/-/32" or
/// "nag/decoupled/1/0.9/full". Numbers use the shortest round-trip form.
std::string run_id(const GridCell& cell);

struct Grid {
  std::vector<OptimizerKind> optimizers{OptimizerKind::SGD,     OptimizerKind::Momentum,
                                        OptimizerKind::NAG,     OptimizerKind::Adagrad,
                                        OptimizerKind::RMSProp, OptimizerKind::Adadelta,
                                        OptimizerKind::Adam};
  Variant variant = Variant::Decoupled;
  std::vector<double> learning_rates{1.0, 0.1, 0.01, 0.001};
  std::vector<BatchStrategy> batch_sizes{BatchStrategy::of(1), BatchStrategy::of(32),
                                         BatchStrategy::full()};
  std::vector<double> momenta{0.1, 0.9};  // Momentum and NAG only
  std::size_t epochs = kDefaultEpochs;
  LossKind loss = LossKind::MSE;
  std::uint64_t init_seed = kDefaultSeed;
  std::uint64_t batch_seed = kDefaultSeed;
  double divergence_threshold = kDefaultDivergenceThreshold;
  // Off: every cell starts from the same parameters. On: the init seed is
  // mixed with the cell's run id.
  bool init_per_cell = false;
  // Unset: every cell uses the split passed to run_grid. Set: each cell
  // re-draws its split from this seed mixed with the cell's run id.
  std::optional<std::uint64_t> resplit_seed;

  /// Cartesian product of the applicable axes, in enumeration order
  /// optimizer → lr → momentum → batch.
  std::vector<GridCell> cells() const;
  RunConfig config_for(const GridCell& cell) const;
};

struct CellResult {
  GridCell cell;
  std::string id;
  std::size_t batch_size = 0;  // resolved against the training set
  RunResult result;
};

/// Runs every cell with up to `parallelism` worker threads. Results are
/// sorted by run id, so the output does not depend on scheduling.
std::vector<CellResult> run_grid(const Grid& grid, const Dataset& d, const Split& s,
                                 std::size_t parallelism);

/// One line of the results CSV.
struct CsvRow {
  std::string run_id;
  std::string optimizer;
  std::string variant;              // empty when not applicable
  double lr = 0.0;
  std::optional<double> momentum;   // empty field when not applicable
  std::size_t batch_size = 0;
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  bool diverged = false;

  bool operator==(const CsvRow&) const = default;
};

inline constexpr const char* kCsvHeader =
    "run_id,optimizer,variant,lr,momentum,batch_size,epoch,train_loss,val_loss,diverged";

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<CsvRow> to_rows(std::span<const CellResult> results);

/// Rows are sorted by (run_id, epoch); losses use 17 significant digits.
void write_csv(std::span<const CsvRow> rows, std::ostream& out);
void write_csv(std::span<const CsvRow> rows, const std::filesystem::path& path);
void write_csv(std::span<const CellResult> results, const std::filesystem::path& path);

std::vector<CsvRow> read_csv(std::istream& in);
std::vector<CsvRow> read_csv(const std::filesystem::path& path);

enum class GroupBy { Optimizer, Batch };

GroupBy parse_group_by(std::string_view name);

/// Validation-MSE-vs-epoch SVG charts on a log loss axis.
///
/// GroupBy::Optimizer writes `<optimizer>.svg` per optimizer present, plus
/// `constant_lr.svg` (SGD, Momentum, NAG) and `adaptive_lr.svg` (Adagrad,
/// RMSProp, Adadelta, Adam) when at least two members of the family are
/// present, and `adam_vs_nesterov.svg` when both are present.
/// GroupBy::Batch writes `batch_<B>.svg` per batch size.
///
/// Diverged runs are drawn up to their last in-bounds point and marked
/// with a cross. Returns the written paths in creation order.
std::vector<std::filesystem::path> plot_curves(const std::filesystem::path& csv_path,
                                               const std::filesystem::path& out_dir,
                                               GroupBy group_by = GroupBy::Optimizer);

/// Closed-form fit on the training rows and its validation MSE.
struct OracleFit {
  LinearModel<double> model;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

OracleFit fit_oracle(const Dataset& d, const Split& s);

/// CLI entry point; see tools/gradbench.cpp.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gradbench
