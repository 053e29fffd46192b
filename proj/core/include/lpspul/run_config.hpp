#pragma once

#include <optional>
#include <string>

#include "lpspul/selection.hpp"

namespace lpspul {

/// Everything a run needs, grouped into [data] / [model] / [loss] / [train]
/// / [select] / [sample] sections of a flat key = value file. Parsing is
/// strict: unknown sections or keys are rejected, and every run writes the
/// fully resolved snapshot next to its outputs.
struct RunConfig {
  // [data]
  std::string data_path;
  std::string label_column = "label";
  std::string missing_token = "?";
  std::optional<double> labeled_fraction;
  std::optional<std::size_t> labeled_count;
  bool balance = false;

  // [model]
  int embed_dim = 4;
  int bond_dim = 2;
  int skip = 1;
  int repetitions = 1;
  std::string basis = "cosine";  // cosine | sine | random

  // [loss]
  LossWeights weights;
  Lambda7Settings lambda7;

  // [train]
  double lr = 0.1;
  int epochs = 20;
  int patience = 0;     // 0 = constant learning rate
  int batch_size = 0;   // 0 = one full batch
  bool resample_labeled = false;
  int ensemble = 4;
  int workers = 1;
  std::uint64_t seed = 12345;

  // [select]
  std::string metric = "f1";  // f1 | accuracy
  int folds = 10;
  int models_per_tuple = 10;

  // [sample]
  double threshold = 20.0;
  int grid_resolution = 1024;
  std::size_t max_attempts_factor = 100;

  TrainConfig train_config() const;
  std::string serialize() const;

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);

  /// Built-in presets: the 15 categorical benchmark datasets plus
  /// moons / circles / blobs / mnist.
  static RunConfig preset(const std::string& name);
  static std::vector<std::string> preset_names();
};

}  // namespace lpspul
