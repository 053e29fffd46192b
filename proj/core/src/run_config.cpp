#include "lpspul/run_config.hpp"

#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>

#include "lpspul/io.hpp"

namespace lpspul {

TrainConfig RunConfig::train_config() const {
  TrainConfig cfg;
  cfg.embed_dim = embed_dim;
  cfg.bond_dim = bond_dim;
  cfg.skip = skip;
  cfg.repetitions = repetitions;
  cfg.lr = lr;
  cfg.epochs = epochs;
  if (patience > 0) cfg.patience = patience;
  if (batch_size > 0) cfg.batch_size = batch_size;
  cfg.resample_labeled = resample_labeled;
  cfg.seed = seed;
  cfg.ensemble = ensemble;
  cfg.workers = workers;
  cfg.weights = weights;
  cfg.lambda7 = lambda7;
  return cfg;
}

namespace {

struct KeyBinding {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

double to_double(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty()) throw parameter_error("config: bad number for " + key + ": " + v);
  return x;
}

long long to_int(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size() || v.empty()) throw parameter_error("config: bad integer for " + key + ": " + v);
  return x;
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw parameter_error("config: bad boolean for " + key + ": " + v);
}

std::map<std::string, KeyBinding> key_schema() {
  std::map<std::string, KeyBinding> schema;
  auto str_key = [&](const std::string& key, std::string RunConfig::* member) {
    schema[key] = {[member](const RunConfig& c) { return c.*member; },
                   [member](RunConfig& c, const std::string& v) { c.*member = v; }};
  };
  auto int_key = [&](const std::string& key, int RunConfig::* member) {
    schema[key] = {[member](const RunConfig& c) { return std::to_string(c.*member); },
                   [member, key](RunConfig& c, const std::string& v) { c.*member = static_cast<int>(to_int(v, key)); }};
  };
  auto dbl_key = [&](const std::string& key, double RunConfig::* member) {
    schema[key] = {[member](const RunConfig& c) { return format_double(c.*member); },
                   [member, key](RunConfig& c, const std::string& v) { c.*member = to_double(v, key); }};
  };
  auto bool_key = [&](const std::string& key, bool RunConfig::* member) {
    schema[key] = {[member](const RunConfig& c) { return c.*member ? "true" : "false"; },
                   [member, key](RunConfig& c, const std::string& v) { c.*member = to_bool(v, key); }};
  };
  auto weight_key = [&](const std::string& key, double LossWeights::* member) {
    schema[key] = {[member](const RunConfig& c) { return format_double(c.weights.*member); },
                   [member, key](RunConfig& c, const std::string& v) { c.weights.*member = to_double(v, key); }};
  };
  auto l7_key = [&](const std::string& key, double Lambda7Settings::* member) {
    schema[key] = {[member](const RunConfig& c) { return format_double(c.lambda7.*member); },
                   [member, key](RunConfig& c, const std::string& v) { c.lambda7.*member = to_double(v, key); }};
  };

  str_key("data.path", &RunConfig::data_path);
  str_key("data.label_column", &RunConfig::label_column);
  str_key("data.missing_token", &RunConfig::missing_token);
  schema["data.labeled_fraction"] = {
      [](const RunConfig& c) { return c.labeled_fraction ? format_double(*c.labeled_fraction) : "none"; },
      [](RunConfig& c, const std::string& v) {
        if (v == "none") c.labeled_fraction.reset();
        else c.labeled_fraction = to_double(v, "data.labeled_fraction");
      }};
  schema["data.labeled_count"] = {
      [](const RunConfig& c) { return c.labeled_count ? std::to_string(*c.labeled_count) : "none"; },
      [](RunConfig& c, const std::string& v) {
        if (v == "none") c.labeled_count.reset();
        else c.labeled_count = static_cast<std::size_t>(to_int(v, "data.labeled_count"));
      }};
  bool_key("data.balance", &RunConfig::balance);

  int_key("model.embed_dim", &RunConfig::embed_dim);
  int_key("model.bond_dim", &RunConfig::bond_dim);
  int_key("model.skip", &RunConfig::skip);
  int_key("model.repetitions", &RunConfig::repetitions);
  str_key("model.basis", &RunConfig::basis);

  weight_key("loss.lambda1", &LossWeights::lambda1);
  weight_key("loss.lambda2", &LossWeights::lambda2);
  weight_key("loss.lambda3", &LossWeights::lambda3);
  weight_key("loss.lambda4", &LossWeights::lambda4);
  weight_key("loss.lambda5", &LossWeights::lambda5);
  weight_key("loss.lambda6", &LossWeights::lambda6);
  weight_key("loss.lambda8", &LossWeights::lambda8);
  weight_key("loss.mu0", &LossWeights::mu0);
  weight_key("loss.mu1", &LossWeights::mu1);
  l7_key("loss.lambda7_init", &Lambda7Settings::initial);
  l7_key("loss.lambda7_k_inc", &Lambda7Settings::k_inc);
  l7_key("loss.lambda7_k_dec", &Lambda7Settings::k_dec);
  l7_key("loss.lambda7_max", &Lambda7Settings::max_value);
  l7_key("loss.lambda7_min", &Lambda7Settings::min_value);
  l7_key("loss.lambda7_anneal", &Lambda7Settings::anneal_exponent);

  dbl_key("train.lr", &RunConfig::lr);
  int_key("train.epochs", &RunConfig::epochs);
  int_key("train.patience", &RunConfig::patience);
  int_key("train.batch_size", &RunConfig::batch_size);
  bool_key("train.resample_labeled", &RunConfig::resample_labeled);
  int_key("train.ensemble", &RunConfig::ensemble);
  int_key("train.workers", &RunConfig::workers);
  schema["train.seed"] = {[](const RunConfig& c) { return std::to_string(c.seed); },
                          [](RunConfig& c, const std::string& v) {
                            c.seed = static_cast<std::uint64_t>(to_int(v, "train.seed"));
                          }};

  str_key("select.metric", &RunConfig::metric);
  int_key("select.folds", &RunConfig::folds);
  int_key("select.models_per_tuple", &RunConfig::models_per_tuple);

  dbl_key("sample.threshold", &RunConfig::threshold);
  int_key("sample.grid_resolution", &RunConfig::grid_resolution);
  schema["sample.max_attempts_factor"] = {
      [](const RunConfig& c) { return std::to_string(c.max_attempts_factor); },
      [](RunConfig& c, const std::string& v) {
        c.max_attempts_factor = static_cast<std::size_t>(to_int(v, "sample.max_attempts_factor"));
      }};
  return schema;
}

const std::vector<std::string>& section_order() {
  static const std::vector<std::string> order = {"data", "model", "loss", "train", "select", "sample"};
  return order;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return std::string();
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string RunConfig::serialize() const {
  const auto schema = key_schema();
  std::ostringstream out;
  for (const std::string& section : section_order()) {
    out << '[' << section << "]\n";
    for (const auto& [key, binding] : schema) {
      if (key.rfind(section + ".", 0) == 0) {
        out << key.substr(section.size() + 1) << " = " << binding.get(*this) << '\n';
      }
    }
    out << '\n';
  }
  return out.str();
}

RunConfig RunConfig::parse(const std::string& text) {
  const auto schema = key_schema();
  RunConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw parameter_error("config line " + std::to_string(line_no) + ": bad section header");
      section = t.substr(1, t.size() - 2);
      bool known = false;
      for (const auto& s : section_order()) known = known || s == section;
      if (!known) throw parameter_error("config: unknown section [" + section + "]");
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) throw parameter_error("config line " + std::to_string(line_no) + ": expected key = value");
    if (section.empty()) throw parameter_error("config line " + std::to_string(line_no) + ": key outside any section");
    const std::string key = section + "." + trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const auto it = schema.find(key);
    if (it == schema.end()) throw parameter_error("config: unknown key " + key);
    it->second.set(cfg, value);
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) { return parse(read_file(path)); }

namespace {

struct Preset {
  int repetitions, skip, embed_dim, bond_dim;
  double lr;
  int epochs, patience;  // patience 0 = constant lr
};

const std::map<std::string, Preset>& categorical_presets() {
  static const std::map<std::string, Preset> presets = {
      {"audiology", {1, 10, 12, 12, 0.01, 210, 70}},
      {"breast-cancer", {2, 6, 12, 20, 0.1, 10, 0}},
      {"chess", {2, 4, 20, 6, 0.01, 400, 100}},
      {"credit-a", {1, 5, 12, 12, 0.01, 50, 0}},
      {"dermatology", {1, 11, 4, 2, 0.1, 20, 0}},
      {"heart-c", {2, 4, 12, 12, 0.01, 50, 0}},
      {"hepatitis", {1, 4, 12, 12, 0.01, 210, 70}},
      {"iris", {2, 4, 4, 2, 0.1, 20, 0}},
      {"lymph", {3, 4, 12, 6, 0.1, 150, 50}},
      {"mushroom", {2, 7, 12, 6, 0.01, 150, 50}},
      {"nursery", {2, 4, 20, 6, 0.1, 400, 100}},
      {"pima", {2, 4, 12, 12, 0.01, 210, 70}},
      {"soybean", {1, 7, 20, 6, 0.01, 400, 100}},
      {"spambase", {2, 10, 12, 12, 0.01, 210, 70}},
      {"vote", {2, 4, 20, 6, 0.1, 400, 100}},
  };
  return presets;
}

}  // namespace

RunConfig RunConfig::preset(const std::string& name) {
  RunConfig cfg;
  const auto it = categorical_presets().find(name);
  if (it != categorical_presets().end()) {
    const Preset& p = it->second;
    cfg.repetitions = p.repetitions;
    cfg.skip = p.skip;
    cfg.embed_dim = p.embed_dim;
    cfg.bond_dim = p.bond_dim;
    cfg.lr = p.lr;
    cfg.epochs = p.epochs;
    cfg.patience = p.patience;
    cfg.label_column = "class";
    cfg.metric = "f1";
    cfg.ensemble = 10;
    cfg.labeled_fraction = 0.3;
    return cfg;
  }
  if (name == "moons" || name == "circles" || name == "blobs") {
    cfg.repetitions = 9;
    cfg.skip = 3;
    cfg.embed_dim = 12;
    cfg.bond_dim = 12;
    cfg.lr = 0.1;
    cfg.epochs = 120;
    cfg.basis = "random";
    cfg.metric = "accuracy";
    cfg.ensemble = 4;
    cfg.labeled_count = 100;
    return cfg;
  }
  if (name == "mnist") {
    cfg.repetitions = 1;
    cfg.skip = 10;
    cfg.embed_dim = 6;
    cfg.bond_dim = 20;
    cfg.lr = 0.01;
    cfg.epochs = 12;
    cfg.batch_size = 256;
    cfg.resample_labeled = true;
    cfg.metric = "accuracy";
    cfg.ensemble = 4;
    cfg.labeled_count = 100;
    cfg.balance = true;
    return cfg;
  }
  throw parameter_error("unknown preset: " + name);
}

std::vector<std::string> RunConfig::preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, p] : categorical_presets()) names.push_back(name);
  names.push_back("moons");
  names.push_back("circles");
  names.push_back("blobs");
  names.push_back("mnist");
  return names;
}

}  // namespace lpspul
