#pragma once

#include <string>
#include <vector>

namespace augb {

struct CellSummary {
  std::string cell;
  std::string scheme;
  bool regularized = false;
  int n = 0;  // seeds aggregated
  double mean_final = 0, std_final = 0;
  double mean_tta = 0, std_tta = 0;
};

struct Report {
  std::vector<CellSummary> cells;  // grid order of first appearance
  std::string headline;            // augmentation-only vs weight decay + dropout
};

// Aggregates records.csv rows per cell (mean and sample std over seeds).
Report summarize_records(const std::string& records_csv);

// Writes <out_dir>/summary.csv, <out_dir>/bars.txt, <out_dir>/summary.txt.
void emit_report(const std::string& records_csv, const std::string& out_dir);

}  // namespace augb
