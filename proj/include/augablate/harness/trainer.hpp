#pragma once

#include <iosfwd>
#include <stdexcept>
#include <utility>

#include "augablate/harness/config.hpp"
#include "augablate/harness/evaluate.hpp"

namespace augb {

// Raised when the loss stops being finite; the grid records such runs as
// failures instead of tearing the whole sweep down.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpochStats {
  double train_loss = 0;  // mean over the epoch's examples
  double test_acc = 0;
};

struct TrainResult {
  std::vector<EpochStats> epochs;
  double final_acc = 0;
  double tta_acc = 0;
  double wall_seconds = 0;
  std::uint64_t mask_draws = 0;         // dropout uniforms consumed
  std::uint64_t decay_applications = 0; // tensors that received weight decay
};

// Fresh network for the run; weights keyed on (seed, init stream), dropout
// layers present only when the run is regularized.
Network<float> build_run_network(const RunSpec& spec);

// Full train/test sets before any per-run selection. Identical for every run
// of a grid, so sweeps load once. CIFAR reads data_dir; blobs are generated
// under a fixed data seed (the run seed must not move the dataset).
std::pair<Dataset, Dataset> load_full_data(const RunSpec& spec);

// Per-run view of the full sets: a class-balanced train subsample keyed on
// the run seed (train_per_class > 0) and a head-limited test set.
std::pair<Dataset, Dataset> select_run_data(const RunSpec& spec, const Dataset& full_train,
                                            const Dataset& full_test);

std::pair<Dataset, Dataset> load_run_data(const RunSpec& spec);

// Trains `net` in place per `spec` on the given data; evaluates on `test`
// after every epoch. `log`, when given, receives one progress line per epoch.
TrainResult train_run(const RunSpec& spec, Network<float>& net, const Dataset& train,
                      const Dataset& test, std::ostream* log = nullptr);

}  // namespace augb
