#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "augablate/harness/report.hpp"

namespace augb {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name,
                   const std::string& path) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw std::runtime_error(path + ": no '" + name + "' column");
  return static_cast<std::size_t>(it - header.begin());
}

struct Samples {
  std::vector<double> final_acc, tta_acc;
  std::string scheme;
  bool regularized = false;
};

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0;
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

Report summarize_records(const std::string& records_csv) {
  std::ifstream is(records_csv);
  if (!is) throw std::runtime_error("cannot open " + records_csv);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(records_csv + ": empty file");
  const auto header = split_csv(line);
  const std::size_t c_cell = column(header, "cell", records_csv);
  const std::size_t c_scheme = column(header, "scheme", records_csv);
  const std::size_t c_reg = column(header, "regularized", records_csv);
  const std::size_t c_final = column(header, "final_acc", records_csv);
  const std::size_t c_tta = column(header, "tta_acc", records_csv);

  std::vector<std::string> order;
  std::map<std::string, Samples> by_cell;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto row = split_csv(line);
    if (row.size() != header.size())
      throw std::runtime_error(records_csv + ": row with " + std::to_string(row.size()) +
                               " fields, header has " + std::to_string(header.size()));
    const std::string& cell = row[c_cell];
    if (!by_cell.count(cell)) order.push_back(cell);
    Samples& s = by_cell[cell];
    s.scheme = row[c_scheme];
    s.regularized = row[c_reg] == "true";
    s.final_acc.push_back(std::stod(row[c_final]));
    s.tta_acc.push_back(std::stod(row[c_tta]));
  }
  if (order.empty()) throw std::runtime_error(records_csv + ": no data rows");

  Report report;
  for (const std::string& cell : order) {
    const Samples& s = by_cell[cell];
    CellSummary c;
    c.cell = cell;
    c.scheme = s.scheme;
    c.regularized = s.regularized;
    c.n = static_cast<int>(s.final_acc.size());
    c.mean_final = mean(s.final_acc);
    c.std_final = sample_std(s.final_acc);
    c.mean_tta = mean(s.tta_acc);
    c.std_tta = sample_std(s.tta_acc);
    report.cells.push_back(c);
  }

  // The experiment's headline: heavier augmentation with no explicit
  // regularizer against no augmentation with weight decay + dropout.
  const CellSummary* aug_only = nullptr;
  const CellSummary* classic = nullptr;
  for (const CellSummary& c : report.cells) {
    if (c.cell == "heavier+plain") aug_only = &c;
    if (c.cell == "none+wd+dropout") classic = &c;
  }
  std::ostringstream head;
  if (aug_only && classic) {
    const double delta = aug_only->mean_final - classic->mean_final;
    const double tta_delta = aug_only->mean_tta - classic->mean_tta;
    head << "augmentation only (heavier+plain):      " << pct(aug_only->mean_final)
         << " +/- " << pct(aug_only->std_final) << " (n=" << aug_only->n << ")\n"
         << "weight decay + dropout (none+wd+dropout): " << pct(classic->mean_final)
         << " +/- " << pct(classic->std_final) << " (n=" << classic->n << ")\n"
         << "delta (aug-only minus wd+dropout):       " << (delta >= 0 ? "+" : "")
         << pct(delta) << "\n"
         << "same delta on tta accuracy:              " << (tta_delta >= 0 ? "+" : "")
         << pct(tta_delta) << "\n";
  } else {
    head << "headline cells missing (need heavier+plain and none+wd+dropout rows)\n";
  }
  report.headline = head.str();
  return report;
}

void emit_report(const std::string& records_csv, const std::string& out_dir) {
  const Report report = summarize_records(records_csv);
  std::filesystem::create_directories(out_dir);

  std::ofstream csv(out_dir + "/summary.csv", std::ios::trunc);
  csv << "cell,scheme,regularized,n,mean_final,std_final,mean_tta,std_tta\n";
  for (const CellSummary& c : report.cells)
    csv << c.cell << "," << c.scheme << "," << (c.regularized ? "true" : "false") << ","
        << c.n << "," << pct(c.mean_final) << "," << pct(c.std_final) << ","
        << pct(c.mean_tta) << "," << pct(c.std_tta) << "\n";

  std::ofstream bars(out_dir + "/bars.txt", std::ios::trunc);
  std::size_t width = 0;
  for (const CellSummary& c : report.cells) width = std::max(width, c.cell.size());
  for (const CellSummary& c : report.cells) {
    const int filled = static_cast<int>(std::lround(c.mean_final * 50));
    bars << c.cell << std::string(width - c.cell.size() + 2, ' ') << "["
         << std::string(static_cast<std::size_t>(filled), '#')
         << std::string(static_cast<std::size_t>(50 - filled), '.') << "] "
         << pct(c.mean_final) << " +/- " << pct(c.std_final) << " (tta "
         << pct(c.mean_tta) << ")\n";
  }

  std::ofstream summary(out_dir + "/summary.txt", std::ios::trunc);
  summary << report.headline;
}

}  // namespace augb
