#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "augablate/arch/builders.hpp"
#include "augablate/augment/scheme.hpp"
#include "augablate/optim/sgd.hpp"

namespace augb {

// Plain-text configs: one `key = value` per line, '#' starts a comment,
// blank lines ignored. Values keep internal spaces; keys may not repeat.
std::map<std::string, std::string> parse_kv_file(const std::string& path);
std::map<std::string, std::string> parse_kv_text(const std::string& text);

// Everything one training run depends on. Fields here, and only fields here,
// feed the config hash that keys resumability.
struct RunSpec {
  ArchitectureSpec arch;
  SchemeKind scheme = SchemeKind::None;
  bool regularized = false;  // switches on weight decay AND dropout together

  int epochs = 1;
  int batch = 128;
  double lr = 0.01;
  double momentum = 0.9;
  bool nesterov = false;
  double weight_decay = 0.0;  // value when regularized; 0 applied otherwise
  std::vector<ScheduleEntry> schedule;

  std::uint64_t seed = 0;
  int train_per_class = 0;  // 0 = full training set
  int test_limit = 0;       // 0 = full test set
  int workers = 0;          // <= 1 runs augmentation inline
  int tta_views = 10;

  std::string dataset = "cifar10";  // cifar10 | cifar100 | blobs
  std::string data_dir = "data/cifar10";
  int blob_test_count = 1000;  // test-set size when dataset = blobs

  double effective_weight_decay() const { return regularized ? weight_decay : 0.0; }
};

struct GridSpec {
  RunSpec base;
  std::vector<SchemeKind> schemes;
  std::vector<bool> regularizers;
  std::vector<std::uint64_t> seeds;
};

// Named hyperparameter bundles. "allcnn-cifar" and "wrn-cifar" carry the
// full-scale 32x32 recipes; the imagenet variants the large-input ones.
void apply_preset(RunSpec& spec, const std::string& name);
std::vector<std::string> preset_names();

// Builds a RunSpec from parsed keys (preset first, explicit keys override).
// Unknown keys throw; `consumed` keys are erased from the map by grid parsing.
RunSpec run_spec_from(std::map<std::string, std::string> kv);
RunSpec run_spec_from_file(const std::string& path);

// Grid = run keys plus `schemes`, `regularizers`, `seeds` lists.
GridSpec grid_spec_from_file(const std::string& path);

// Stable textual identity of a run: sorted key=value lines of every field.
std::string canonical_string(const RunSpec& spec);

// FNV-1a 64 over the canonical string, as 16 hex digits.
std::string config_hash(const RunSpec& spec);

// Human-readable cell id, e.g. "heavier+plain", "none+wd+dropout".
std::string cell_name(SchemeKind scheme, bool regularized);

}  // namespace augb
