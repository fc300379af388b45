#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "augablate/harness/grid.hpp"
#include "augablate/nn/checkpoint.hpp"

namespace augb {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// Hashes of runs already recorded; the hash sits in the last column.
std::set<std::string> recorded_hashes(const std::string& path, const std::string& header) {
  std::set<std::string> seen;
  std::ifstream is(path);
  if (!is) return seen;
  std::string line;
  if (!std::getline(is, line)) return seen;
  if (line != header)
    throw std::runtime_error(path + ": header does not match this grid (epochs or " +
                             "schema changed); move the file aside to start fresh");
  while (std::getline(is, line)) {
    const auto comma = line.rfind(',');
    if (comma == std::string::npos || comma + 1 >= line.size())
      throw std::runtime_error(path + ": malformed row '" + line + "'");
    seen.insert(line.substr(comma + 1));
  }
  return seen;
}

void save_run_checkpoint(const std::string& dir, const std::string& hash,
                         const RunSpec& spec, Network<float>& net) {
  std::filesystem::create_directories(dir);
  std::vector<std::pair<std::string, const Tensor<float>*>> tensors;
  for (auto& [name, t] : net.state_tensors()) tensors.emplace_back(name, t);
  save_checkpoint(dir + "/" + hash + ".augb", tensors);
  std::ofstream cfg(dir + "/" + hash + ".cfg", std::ios::trunc);
  cfg << canonical_string(spec);
}

}  // namespace

std::string records_header(int epochs) {
  // Columns are 1-indexed to line up with the "epoch K/N" training logs.
  std::string h = "cell,seed,scheme,regularized";
  for (int e = 1; e <= epochs; ++e)
    h += ",e" + std::to_string(e) + "_loss,e" + std::to_string(e) + "_acc";
  return h + ",final_acc,tta_acc,wall_s,config_hash";
}

GridOutcome run_grid(const GridSpec& grid, const GridOptions& options) {
  std::filesystem::create_directories(options.out_dir);
  const std::string records_path = options.out_dir + "/records.csv";
  const std::string failures_path = options.out_dir + "/failures.txt";
  const std::string checkpoint_dir = options.out_dir + "/checkpoints";
  const std::string header = records_header(grid.base.epochs);

  std::set<std::string> done = recorded_hashes(records_path, header);
  const bool fresh = !std::filesystem::exists(records_path) ||
                     std::filesystem::file_size(records_path) == 0;
  std::ofstream records(records_path, std::ios::app);
  if (!records) throw std::runtime_error("cannot open " + records_path);
  if (fresh) records << header << "\n" << std::flush;

  auto [full_train, full_test] = load_full_data(grid.base);

  GridOutcome outcome;
  for (SchemeKind scheme : grid.schemes) {
    for (bool reg : grid.regularizers) {
      for (std::uint64_t seed : grid.seeds) {
        if (options.max_records > 0 && outcome.executed >= options.max_records)
          return outcome;
        RunSpec spec = grid.base;
        spec.scheme = scheme;
        spec.regularized = reg;
        spec.seed = seed;
        const std::string hash = config_hash(spec);
        const std::string cell = cell_name(scheme, reg);
        if (done.count(hash)) {
          ++outcome.skipped;
          if (options.log)
            *options.log << "skip " << cell << " seed " << seed << " (" << hash << ")"
                         << std::endl;
          continue;
        }
        if (options.log)
          *options.log << "run " << cell << " seed " << seed << " (" << hash << ")"
                       << std::endl;
        try {
          auto [train, test] = select_run_data(spec, full_train, full_test);
          Network<float> net = build_run_network(spec);
          TrainResult r = train_run(spec, net, train, test, options.log);

          std::string row = cell + "," + std::to_string(seed) + "," +
                            scheme_name(scheme) + "," + (reg ? "true" : "false");
          for (const EpochStats& e : r.epochs)
            row += "," + num(e.train_loss) + "," + num(e.test_acc);
          row += "," + num(r.final_acc) + "," + num(r.tta_acc) + "," +
                 num(r.wall_seconds) + "," + hash;
          records << row << "\n" << std::flush;
          save_run_checkpoint(checkpoint_dir, hash, spec, net);
          done.insert(hash);
          ++outcome.executed;
        } catch (const std::exception& ex) {
          std::ofstream failures(failures_path, std::ios::app);
          failures << hash << " " << cell << " seed=" << seed << ": " << ex.what()
                   << "\n";
          ++outcome.failed;
          if (options.log) *options.log << "FAILED: " << ex.what() << std::endl;
        }
      }
    }
  }
  return outcome;
}

}  // namespace augb
