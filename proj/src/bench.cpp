#include "gradbench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

namespace gradbench {
namespace {

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string seventeen_digits(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix_seed(std::uint64_t seed, std::string_view id) {
  std::uint64_t x = seed ^ fnv1a(id);
  return splitmix64(x);
}

}  // namespace

std::string run_id(const GridCell& cell) {
  const auto& o = cell.optimizer;
  std::string id(to_string(o.kind));
  id += '/';
  id += o.has_momentum() ? std::string(to_string(o.variant)) : "-";
  id += '/';
  id += shortest(o.lr);
  id += '/';
  id += o.has_momentum() ? shortest(o.momentum) : "-";
  id += '/';
  id += cell.batch.is_full() ? "full" : std::to_string(*cell.batch.size());
  return id;
}

std::vector<GridCell> Grid::cells() const {
  std::vector<GridCell> out;
  for (OptimizerKind kind : optimizers) {
    for (double lr : learning_rates) {
      OptimizerSpec<double> spec = OptimizerSpec<double>::defaults(kind);
      spec.lr = lr;
      spec.variant = variant;
      std::vector<double> moms{spec.momentum};
      if (spec.has_momentum()) moms = momenta;
      for (double mu : moms) {
        spec.momentum = mu;
        for (const BatchStrategy& b : batch_sizes) out.push_back(GridCell{spec, b});
      }
    }
  }
  return out;
}

RunConfig Grid::config_for(const GridCell& cell) const {
  RunConfig c;
  c.optimizer = cell.optimizer;
  c.loss = loss;
  c.batch = cell.batch;
  c.epochs = epochs;
  c.init_seed = init_per_cell ? mix_seed(init_seed, run_id(cell)) : init_seed;
  c.batch_seed = batch_seed;
  c.divergence_threshold = divergence_threshold;
  return c;
}

std::vector<CellResult> run_grid(const Grid& grid, const Dataset& d, const Split& s,
                                 std::size_t parallelism) {
  if (parallelism == 0) throw std::invalid_argument("run_grid: parallelism must be >= 1");
  const std::vector<GridCell> cells = grid.cells();
  std::vector<CellResult> results(cells.size());

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(cells.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) try {
      CellResult& r = results[i];
      r.cell = cells[i];
      r.id = run_id(cells[i]);
      RunConfig config = grid.config_for(cells[i]);
      config.data_seed = d.seed;
      if (grid.resplit_seed) {
        const Split own = split(d, mix_seed(*grid.resplit_seed, r.id));
        config.split_seed = mix_seed(*grid.resplit_seed, r.id);
        r.batch_size = cells[i].batch.resolve(own.train_indices.size());
        r.result = run(config, d, own);
      } else {
        r.batch_size = cells[i].batch.resolve(s.train_indices.size());
        r.result = run(config, d, s);
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const std::size_t n_threads = std::min(parallelism, std::max<std::size_t>(cells.size(), 1));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::sort(results.begin(), results.end(),
            [](const CellResult& a, const CellResult& b) { return a.id < b.id; });
  const auto dup = std::adjacent_find(results.begin(), results.end(),
                                      [](const auto& a, const auto& b) { return a.id == b.id; });
  if (dup != results.end()) throw std::invalid_argument("run_grid: duplicate cell " + dup->id);
  return results;
}

std::vector<CsvRow> to_rows(std::span<const CellResult> results) {
  std::vector<CsvRow> rows;
  for (const CellResult& r : results) {
    const auto& o = r.cell.optimizer;
    for (const EpochRecord& e : r.result.records) {
      CsvRow row;
      row.run_id = r.id;
      row.optimizer = std::string(to_string(o.kind));
      if (o.has_momentum()) {
        row.variant = std::string(to_string(o.variant));
        row.momentum = o.momentum;
      }
      row.lr = o.lr;
      row.batch_size = r.batch_size;
      row.epoch = e.epoch;
      row.train_loss = e.train_loss;
      row.val_loss = e.val_loss;
      row.diverged = e.diverged;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_csv(std::span<const CsvRow> rows, std::ostream& out) {
  std::vector<const CsvRow*> sorted;
  sorted.reserve(rows.size());
  for (const CsvRow& r : rows) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const CsvRow* a, const CsvRow* b) {
    if (a->run_id != b->run_id) return a->run_id < b->run_id;
    return a->epoch < b->epoch;
  });

  out << kCsvHeader << '\n';
  for (const CsvRow* r : sorted) {
    out << r->run_id << ',' << r->optimizer << ',' << r->variant << ',' << shortest(r->lr) << ','
        << (r->momentum ? shortest(*r->momentum) : std::string{}) << ',' << r->batch_size << ','
        << r->epoch << ',' << seventeen_digits(r->train_loss) << ','
        << seventeen_digits(r->val_loss) << ',' << (r->diverged ? 1 : 0) << '\n';
  }
}

void write_csv(std::span<const CsvRow> rows, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CsvError("cannot open '" + path.string() + "' for writing");
  write_csv(rows, out);
  out.flush();
  if (!out) throw CsvError("write to '" + path.string() + "' failed");
}

void write_csv(std::span<const CellResult> results, const std::filesystem::path& path) {
  const std::vector<CsvRow> rows = to_rows(results);
  write_csv(std::span<const CsvRow>(rows), path);
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

struct FieldParser {
  std::size_t line_no;

  [[noreturn]] void fail(std::string_view what, std::string_view field) const {
    throw CsvError("line " + std::to_string(line_no) + ": bad " + std::string(what) + " '" +
                   std::string(field) + "'");
  }

  double real(std::string_view what, std::string_view f) const {
    double v = 0.0;
    const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || res.ec != std::errc{} || res.ptr != f.data() + f.size()) fail(what, f);
    return v;
  }

  std::size_t count(std::string_view what, std::string_view f) const {
    std::size_t v = 0;
    const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || res.ec != std::errc{} || res.ptr != f.data() + f.size()) fail(what, f);
    return v;
  }
};

}  // namespace

std::vector<CsvRow> read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw CsvError("line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw CsvError("line 1: unexpected header '" + line + "'");

  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    const FieldParser p{line_no};
    if (f.size() != 10) {
      throw CsvError("line " + std::to_string(line_no) + ": expected 10 fields, got " +
                     std::to_string(f.size()));
    }
    CsvRow r;
    r.run_id = std::string(f[0]);
    r.optimizer = std::string(f[1]);
    r.variant = std::string(f[2]);
    r.lr = p.real("lr", f[3]);
    if (!f[4].empty()) r.momentum = p.real("momentum", f[4]);
    r.batch_size = p.count("batch_size", f[5]);
    r.epoch = p.count("epoch", f[6]);
    r.train_loss = p.real("train_loss", f[7]);
    r.val_loss = p.real("val_loss", f[8]);
    if (f[9] == "1") {
      r.diverged = true;
    } else if (f[9] != "0") {
      p.fail("diverged flag", f[9]);
    }
    if (r.run_id.empty()) p.fail("run_id", f[0]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<CsvRow> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open '" + path.string() + "'");
  try {
    return read_csv(in);
  } catch (const CsvError& e) {
    throw CsvError(path.string() + ": " + e.what());
  }
}

OracleFit fit_oracle(const Dataset& d, const Split& s) {
  const MatrixXd x_train = gather_rows(d.x_norm, s.train_indices);
  const VectorXd y_train = gather(d.y, s.train_indices);
  OracleFit fit;
  fit.model = closed_form(x_train, y_train);
  fit.train_mse = loss(LossKind::MSE, fit.model, x_train, y_train);
  fit.val_mse = loss(LossKind::MSE, fit.model, gather_rows(d.x_norm, s.val_indices),
                     gather(d.y, s.val_indices));
  return fit;
}

}  // namespace gradbench
