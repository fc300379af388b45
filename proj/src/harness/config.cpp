#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "augablate/harness/config.hpp"

namespace augb {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw std::invalid_argument(key + ": expected a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T, typename Fn>
T parse_num(const std::string& v, const std::string& key, Fn fn) {
  try {
    std::size_t used = 0;
    T x = fn(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": cannot parse '" + v + "'");
  }
}

int to_int(const std::string& v, const std::string& key) {
  return parse_num<int>(v, key, [](const std::string& s, std::size_t* u) {
    return std::stoi(s, u);
  });
}

double to_double(const std::string& v, const std::string& key) {
  return parse_num<double>(v, key, [](const std::string& s, std::size_t* u) {
    return std::stod(s, u);
  });
}

std::uint64_t to_u64(const std::string& v, const std::string& key) {
  return parse_num<std::uint64_t>(v, key, [](const std::string& s, std::size_t* u) {
    return std::stoull(s, u);
  });
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second)
      throw std::invalid_argument("line " + std::to_string(lineno) + ": duplicate key '" +
                                  key + "'");
  }
  return kv;
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_kv_text(ss.str());
}

void apply_preset(RunSpec& s, const std::string& name) {
  if (name == "allcnn-cifar") {
    s.arch.family = "allcnn-cifar";
    s.arch.classes = 10;
    s.lr = 0.01;
    s.momentum = 0.9;
    s.nesterov = false;
    s.weight_decay = 0.001;
    s.epochs = 350;
    s.batch = 128;
    s.schedule = {{200, 0.1}, {250, 0.1}, {300, 0.1}};
  } else if (name == "allcnn-imagenet") {
    s.arch.family = "allcnn-imagenet";
    s.arch.classes = 1000;
    s.lr = 0.01;
    s.momentum = 0.9;
    s.nesterov = false;
    s.weight_decay = 0.001;
    s.epochs = 25;
    s.batch = 64;
    s.schedule = {{10, 0.1}, {20, 0.1}};
  } else if (name == "wrn-cifar") {
    s.arch.family = "wrn";
    s.arch.classes = 10;
    s.arch.depth = 28;
    s.arch.width = 10;
    s.lr = 0.1;
    s.momentum = 0.9;
    s.nesterov = true;
    s.weight_decay = 0.0005;
    s.epochs = 200;
    s.batch = 128;
    s.schedule = {{60, 0.2}, {120, 0.2}, {160, 0.2}};
  } else if (name == "wrn-imagenet") {
    s.arch.family = "wrn";
    s.arch.classes = 1000;
    s.arch.depth = 28;
    s.arch.width = 10;
    s.lr = 0.1;
    s.momentum = 0.9;
    s.nesterov = true;
    s.weight_decay = 0.0005;
    s.epochs = 20;
    s.batch = 32;
    s.schedule = {{8, 0.2}, {15, 0.2}};
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
}

std::vector<std::string> preset_names() {
  return {"allcnn-cifar", "allcnn-imagenet", "wrn-cifar", "wrn-imagenet"};
}

namespace {

// Applies run-level keys, erasing each consumed entry so grid parsing can
// detect leftovers. Throws on anything it does not recognize.
RunSpec run_spec_consume(std::map<std::string, std::string>& kv) {
  RunSpec s;
  auto take = [&](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string value = it->second;
    kv.erase(it);
    return value;
  };

  if (auto v = take("preset")) apply_preset(s, *v);
  if (auto v = take("arch")) s.arch.family = *v;
  if (auto v = take("classes")) s.arch.classes = to_int(*v, "classes");
  if (auto v = take("width_scale")) s.arch.width_scale = to_double(*v, "width_scale");
  if (auto v = take("depth")) s.arch.depth = to_int(*v, "depth");
  if (auto v = take("width")) s.arch.width = to_int(*v, "width");
  if (auto v = take("scheme")) s.scheme = scheme_from_name(*v);
  if (auto v = take("regularized")) s.regularized = parse_bool(*v, "regularized");
  if (auto v = take("epochs")) s.epochs = to_int(*v, "epochs");
  if (auto v = take("batch")) s.batch = to_int(*v, "batch");
  if (auto v = take("lr")) s.lr = to_double(*v, "lr");
  if (auto v = take("momentum")) s.momentum = to_double(*v, "momentum");
  if (auto v = take("nesterov")) s.nesterov = parse_bool(*v, "nesterov");
  if (auto v = take("weight_decay")) s.weight_decay = to_double(*v, "weight_decay");

  const auto drop_epochs = take("lr_drop_epochs");
  const auto drop_factor = take("lr_drop_factor");
  if (drop_epochs) {
    const double factor = drop_factor
                              ? to_double(*drop_factor, "lr_drop_factor")
                              : (s.schedule.empty() ? 0.1 : s.schedule.front().multiplier);
    s.schedule.clear();
    for (const std::string& e : split_list(*drop_epochs))
      s.schedule.push_back({to_int(e, "lr_drop_epochs"), factor});
  } else if (drop_factor) {
    if (s.schedule.empty())
      throw std::invalid_argument("lr_drop_factor given without lr_drop_epochs or a preset");
    for (ScheduleEntry& e : s.schedule)
      e.multiplier = to_double(*drop_factor, "lr_drop_factor");
  }

  // Canonical form, as written to checkpoint sidecars: "200x0.1;250x0.1".
  if (auto v = take("schedule")) {
    s.schedule.clear();
    std::stringstream ss(*v);
    std::string part;
    while (std::getline(ss, part, ';')) {
      part = trim(part);
      if (part.empty()) continue;
      const auto x = part.find('x');
      if (x == std::string::npos)
        throw std::invalid_argument("schedule: expected <epoch>x<factor>, got '" + part + "'");
      s.schedule.push_back({to_int(part.substr(0, x), "schedule"),
                            to_double(part.substr(x + 1), "schedule")});
    }
  }

  if (auto v = take("seed")) s.seed = to_u64(*v, "seed");
  if (auto v = take("train_per_class")) s.train_per_class = to_int(*v, "train_per_class");
  if (auto v = take("test_limit")) s.test_limit = to_int(*v, "test_limit");
  if (auto v = take("workers")) s.workers = to_int(*v, "workers");
  if (auto v = take("tta_views")) s.tta_views = to_int(*v, "tta_views");
  if (auto v = take("dataset")) s.dataset = *v;
  if (auto v = take("data_dir")) s.data_dir = *v;
  if (auto v = take("blob_test_count")) s.blob_test_count = to_int(*v, "blob_test_count");

  if (s.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (s.batch < 2) throw std::invalid_argument("batch must be >= 2 (batchnorm needs it)");
  if (s.dataset != "cifar10" && s.dataset != "cifar100" && s.dataset != "blobs")
    throw std::invalid_argument("dataset must be cifar10, cifar100, or blobs");
  return s;
}

void reject_unknown(const std::map<std::string, std::string>& kv) {
  if (kv.empty()) return;
  std::string keys;
  for (const auto& [k, v] : kv) keys += (keys.empty() ? "" : ", ") + k;
  throw std::invalid_argument("unknown config key(s): " + keys);
}

}  // namespace

RunSpec run_spec_from(std::map<std::string, std::string> kv) {
  RunSpec s = run_spec_consume(kv);
  reject_unknown(kv);
  return s;
}

RunSpec run_spec_from_file(const std::string& path) {
  return run_spec_from(parse_kv_file(path));
}

GridSpec grid_spec_from_file(const std::string& path) {
  auto kv = parse_kv_file(path);
  GridSpec g;

  if (auto it = kv.find("schemes"); it != kv.end()) {
    for (const std::string& s : split_list(it->second))
      g.schemes.push_back(scheme_from_name(s));
    kv.erase(it);
  } else {
    g.schemes = {SchemeKind::None, SchemeKind::Light, SchemeKind::Heavier};
  }
  if (auto it = kv.find("regularizers"); it != kv.end()) {
    for (const std::string& s : split_list(it->second))
      g.regularizers.push_back(parse_bool(s, "regularizers"));
    kv.erase(it);
  } else {
    g.regularizers = {false, true};
  }
  if (auto it = kv.find("seeds"); it != kv.end()) {
    for (const std::string& s : split_list(it->second))
      g.seeds.push_back(to_u64(s, "seeds"));
    kv.erase(it);
  } else {
    g.seeds = {0, 1, 2};
  }
  if (g.schemes.empty() || g.regularizers.empty() || g.seeds.empty())
    throw std::invalid_argument("grid lists must be non-empty");

  g.base = run_spec_consume(kv);
  reject_unknown(kv);
  return g;
}

std::string canonical_string(const RunSpec& s) {
  std::map<std::string, std::string> kv;
  kv["arch"] = s.arch.family;
  kv["classes"] = std::to_string(s.arch.classes);
  kv["width_scale"] = fmt(s.arch.width_scale);
  kv["depth"] = std::to_string(s.arch.depth);
  kv["width"] = std::to_string(s.arch.width);
  kv["scheme"] = scheme_name(s.scheme);
  kv["regularized"] = s.regularized ? "true" : "false";
  kv["epochs"] = std::to_string(s.epochs);
  kv["batch"] = std::to_string(s.batch);
  kv["lr"] = fmt(s.lr);
  kv["momentum"] = fmt(s.momentum);
  kv["nesterov"] = s.nesterov ? "true" : "false";
  kv["weight_decay"] = fmt(s.weight_decay);
  std::string sched;
  for (const ScheduleEntry& e : s.schedule)
    sched += (sched.empty() ? "" : ";") + std::to_string(e.epoch) + "x" + fmt(e.multiplier);
  kv["schedule"] = sched;
  kv["seed"] = std::to_string(s.seed);
  kv["train_per_class"] = std::to_string(s.train_per_class);
  kv["test_limit"] = std::to_string(s.test_limit);
  kv["tta_views"] = std::to_string(s.tta_views);
  kv["dataset"] = s.dataset;
  kv["blob_test_count"] = std::to_string(s.blob_test_count);
  // workers and data_dir change where and how fast, not what; they stay out
  // so a rerun with different parallelism or paths still resumes.

  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::string config_hash(const RunSpec& s) {
  const std::string c = canonical_string(s);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : c) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string cell_name(SchemeKind scheme, bool regularized) {
  return scheme_name(scheme) + (regularized ? "+wd+dropout" : "+plain");
}

}  // namespace augb
