#pragma once

#include <iosfwd>
#include <string>

#include "augablate/harness/trainer.hpp"

namespace augb {

struct GridOptions {
  std::string out_dir = "ablation";
  int max_records = 0;  // stop after this many newly executed runs; 0 = no cap
  std::ostream* log = nullptr;
};

struct GridOutcome {
  int executed = 0;
  int skipped = 0;  // config hash already present in records.csv
  int failed = 0;   // recorded in failures.txt
};

// Runs every (scheme, regularizer, seed) cell of the grid, appending one row
// per finished run to <out_dir>/records.csv and a checkpoint plus canonical
// config sidecar under <out_dir>/checkpoints/. Reruns resume: rows whose
// config hash is already in the CSV are skipped, so a killed sweep continues
// where it stopped. Failed runs land in <out_dir>/failures.txt and do not
// stop the sweep.
GridOutcome run_grid(const GridSpec& grid, const GridOptions& options);

// Column layout of records.csv for `epochs` recorded epochs.
std::string records_header(int epochs);

}  // namespace augb
