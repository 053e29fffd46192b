#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lpspul/table.hpp"

namespace lpspul {

/// Fitted per-column transform into the unit interval.
///   numeric:     affine min-max map, values clamped to [0, 1] at apply time
///   categorical: first-appearance enumeration mapped to k / (K - 1)
///   dropped:     constant in the fitting data, removed from the output
struct ColumnTransform {
  enum class Kind : std::uint8_t { numeric = 0, categorical = 1, dropped = 2 };
  Kind kind = Kind::numeric;
  std::string name;
  double min = 0.0;
  double max = 1.0;
  std::vector<std::string> categories;  // enumeration order

  int category_index(const std::string& value) const;
};

/// The pipeline from a raw row to the model's input vector: per-column
/// transforms followed by R-fold repetition of the whole transformed vector.
/// Output values are pulled to the open interval by a 1e-6 margin so that
/// sine-basis embeddings (zero at u = 0) stay nonzero for boundary samples;
/// classification margins are invariant to this nudge.
struct PreprocessSpec {
  std::vector<ColumnTransform> transforms;  // one per raw column, in order
  int repetitions = 1;

  int kept_columns() const;
  /// Number of attribute positions after repetition.
  int output_dim() const { return kept_columns() * repetitions; }

  std::vector<std::string> kept_names() const;
};

/// Fits the transform on a table. Missing cells are ignored while fitting.
/// Constant columns (including single-category and all-missing ones) are
/// dropped. Throws data_error on an empty table.
PreprocessSpec fit_preprocess(const Table& table, int repetitions);

struct PreprocessedRow {
  std::vector<double> values;         // output_dim entries in [0, 1]
  std::vector<std::uint8_t> missing;  // unseen categories and missing cells
};

/// Applies the spec to row `row` of `table`. Unseen categorical levels and
/// missing cells become masked positions, never errors.
PreprocessedRow apply_preprocess(const PreprocessSpec& spec, const Table& table, std::size_t row);

/// Inverse map for generated samples living in the repeated unit-interval
/// space: the R copies of each kept column are averaged, then numeric
/// columns are mapped back through the affine transform. Categorical
/// columns stay on their k/(K-1) scale (snapping is the caller's concern).
std::vector<double> invert_preprocess(const PreprocessSpec& spec, const std::vector<double>& values);

}  // namespace lpspul
