// Command-line front end: preview augmentations, train and evaluate single
// runs, sweep the ablation grid, and summarize results.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "augablate/augment/png_io.hpp"
#include "augablate/harness/grid.hpp"
#include "augablate/harness/report.hpp"
#include "augablate/nn/checkpoint.hpp"

namespace {

using namespace augb;

int cmd_preview(const std::string& in, const std::string& scheme_name_arg,
                std::uint64_t seed, int views, const std::string& out_dir) {
  const Image original = load_png(in);
  const Scheme scheme{scheme_from_name(scheme_name_arg), std::nullopt};
  std::filesystem::create_directories(out_dir);
  save_png(original, out_dir + "/original.png");
  for (int v = 0; v < views; ++v) {
    Rng rng = Rng::keyed({seed, rng_stream::kAugment, 0, static_cast<std::uint64_t>(v)});
    const Image view = apply_scheme(original, scheme, rng);
    char name[32];
    std::snprintf(name, sizeof name, "view_%02d.png", v);
    save_png(view, out_dir + "/" + name);
  }
  std::cout << "wrote original.png and " << views << " views to " << out_dir << "\n";
  return 0;
}

void write_run_artifacts(const std::string& out_dir, const RunSpec& spec,
                         Network<float>& net) {
  std::filesystem::create_directories(out_dir);
  const std::string hash = config_hash(spec);
  std::vector<std::pair<std::string, const Tensor<float>*>> tensors;
  for (auto& [name, t] : net.state_tensors()) tensors.emplace_back(name, t);
  save_checkpoint(out_dir + "/" + hash + ".augb", tensors);
  std::ofstream cfg(out_dir + "/" + hash + ".cfg", std::ios::trunc);
  cfg << canonical_string(spec);
  std::cout << "checkpoint " << out_dir << "/" << hash << ".augb\n";
}

int cmd_train(const std::string& config, const std::string& out_dir) {
  const RunSpec spec = run_spec_from_file(config);
  std::cout << "run " << cell_name(spec.scheme, spec.regularized) << " seed " << spec.seed
            << " (" << config_hash(spec) << ")\n";
  auto [train, test] = load_run_data(spec);
  std::cout << "train " << train.size() << " examples, test " << test.size() << "\n";
  Network<float> net = build_run_network(spec);
  train_run(spec, net, train, test, &std::cout);  // progress lines carry the metrics
  write_run_artifacts(out_dir, spec, net);
  return 0;
}

int cmd_evaluate(const std::string& checkpoint, const std::string& config, bool tta,
                 const std::string& data_dir) {
  RunSpec spec = run_spec_from_file(config);
  if (!data_dir.empty()) spec.data_dir = data_dir;
  Network<float> net = build_run_network(spec);
  load_state(net, load_checkpoint(checkpoint));
  auto [train, test] = load_run_data(spec);
  (void)train;
  const EvalResult r = evaluate(net, test, spec.batch);
  std::cout << "test examples " << test.size() << "\naccuracy " << r.accuracy
            << "\nmean_loss " << r.mean_loss << "\n";
  if (tta) {
    const double t = evaluate_tta(net, test, spec.batch, spec.tta_views, spec.seed);
    std::cout << "tta_accuracy " << t << " (" << spec.tta_views << " views)\n";
  }
  return 0;
}

int cmd_ablate(const std::string& grid_file, const std::string& out_dir, int max_records) {
  const GridSpec grid = grid_spec_from_file(grid_file);
  GridOptions options;
  options.out_dir = out_dir;
  options.max_records = max_records;
  options.log = &std::cout;
  const GridOutcome outcome = run_grid(grid, options);
  std::cout << "executed " << outcome.executed << ", skipped " << outcome.skipped
            << ", failed " << outcome.failed << "\n";
  const std::string records = out_dir + "/records.csv";
  if (std::filesystem::exists(records)) {
    emit_report(records, out_dir);
    std::cout << "\n" << summarize_records(records).headline;
  }
  return outcome.failed == 0 ? 0 : 2;
}

int cmd_report(const std::string& records, const std::string& out_dir) {
  emit_report(records, out_dir);
  std::cout << summarize_records(records).headline;
  std::cout << "wrote summary.csv, bars.txt, summary.txt to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"image-augmentation ablation harness"};
  app.require_subcommand(1);

  std::string in, out, scheme = "heavier", config, checkpoint, records, data_dir;
  std::uint64_t seed = 0;
  int views = 8, max_records = 0;
  bool tta = false;

  auto* preview = app.add_subcommand("augment-preview", "render augmented views of a PNG");
  preview->add_option("--in", in, "input PNG")->required();
  preview->add_option("--scheme", scheme, "none | light | heavier");
  preview->add_option("--seed", seed, "base seed");
  preview->add_option("--views", views, "number of views")->check(CLI::PositiveNumber);
  preview->add_option("--out", out, "output directory")->required();

  auto* train = app.add_subcommand("train", "train one run from a config file");
  train->add_option("--config", config, "run config")->required();
  train->add_option("--out", out, "checkpoint directory")->default_val("runs");

  auto* eval = app.add_subcommand("evaluate", "evaluate a checkpoint on the test set");
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--config", config, "run config or checkpoint sidecar .cfg")->required();
  eval->add_flag("--tta", tta, "also report test-time-augmented accuracy");
  eval->add_option("--data-dir", data_dir, "override the config's data directory");

  auto* ablate = app.add_subcommand("ablate", "run the scheme x regularizer grid");
  ablate->add_option("--grid", config, "grid config")->required();
  ablate->add_option("--out", out, "output directory")->default_val("ablation");
  ablate->add_option("--max-records", max_records,
                     "stop after this many new runs (resume later)");

  auto* report = app.add_subcommand("report", "summarize a records.csv");
  report->add_option("--results", records, "records.csv path")->required();
  report->add_option("--out", out, "output directory")->default_val("ablation");

  CLI11_PARSE(app, argc, argv);

  try {
    if (preview->parsed()) return cmd_preview(in, scheme, seed, views, out);
    if (train->parsed()) return cmd_train(config, out);
    if (eval->parsed()) return cmd_evaluate(checkpoint, config, tta, data_dir);
    if (ablate->parsed()) return cmd_ablate(config, out, max_records);
    if (report->parsed()) return cmd_report(records, out);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
