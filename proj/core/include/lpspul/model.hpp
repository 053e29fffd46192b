#pragma once

#include <cstdint>
#include <string>

#include "lpspul/embedding.hpp"
#include "lpspul/lps.hpp"
#include "lpspul/preprocess.hpp"

namespace lpspul {

/// A trained classifier/generator pair: the positive and negative maps plus
/// everything needed to take a raw row to a prediction.
struct PulModel {
  LpsNetwork positive;
  LpsNetwork negative;
  BasisSpec basis;
  PreprocessSpec preprocess;
  std::uint64_t seed = 0;
  double mu0 = 5.0;
  double mu1 = -50.0;

  bool compatible_with(const PulModel& other) const;
};

/// Versioned binary container, magic "LPSPUL1". Header (dimensions, targets,
/// seed, per-attribute basis codes, preprocessing table) followed by both
/// networks' tensors as little-endian doubles, row-major (l, r, k[, o]),
/// site by site. Round-trips bit-exactly.
void save_model(const PulModel& model, const std::string& path);
PulModel load_model(const std::string& path);

}  // namespace lpspul
