#include "lpspul/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "lpspul/io.hpp"

namespace lpspul {

namespace {
// Keeps preprocessed values away from the exact interval ends, where the
// sine basis vanishes identically and log norms become -inf.
constexpr double kUnitMargin = 1e-6;

double squash_unit(double u) { return std::min(1.0 - kUnitMargin, std::max(kUnitMargin, u)); }
}  // namespace

int ColumnTransform::category_index(const std::string& value) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == value) return static_cast<int>(i);
  }
  return -1;
}

int PreprocessSpec::kept_columns() const {
  int n = 0;
  for (const auto& t : transforms) {
    if (t.kind != ColumnTransform::Kind::dropped) ++n;
  }
  return n;
}

std::vector<std::string> PreprocessSpec::kept_names() const {
  std::vector<std::string> names;
  for (const auto& t : transforms) {
    if (t.kind != ColumnTransform::Kind::dropped) names.push_back(t.name);
  }
  return names;
}

PreprocessSpec fit_preprocess(const Table& table, int repetitions) {
  if (table.rows() == 0 || table.cols() == 0) throw data_error("fit_preprocess: empty table");
  if (repetitions < 1) throw parameter_error("repetitions must be >= 1");

  PreprocessSpec spec;
  spec.repetitions = repetitions;
  spec.transforms.reserve(table.cols());
  for (const Column& col : table.columns) {
    ColumnTransform t;
    t.name = col.name;
    if (col.numeric) {
      double lo = 0.0, hi = 0.0;
      bool seen = false;
      for (std::size_t r = 0; r < col.rows(); ++r) {
        if (col.missing[r]) continue;
        const double v = col.num[r];
        if (!seen) {
          lo = hi = v;
          seen = true;
        } else {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      if (!seen || lo == hi) {
        t.kind = ColumnTransform::Kind::dropped;
      } else {
        t.kind = ColumnTransform::Kind::numeric;
        t.min = lo;
        t.max = hi;
      }
    } else {
      for (std::size_t r = 0; r < col.rows(); ++r) {
        if (col.missing[r]) continue;
        if (t.category_index(col.cat[r]) < 0) t.categories.push_back(col.cat[r]);
      }
      t.kind = t.categories.size() < 2 ? ColumnTransform::Kind::dropped : ColumnTransform::Kind::categorical;
    }
    spec.transforms.push_back(std::move(t));
  }
  return spec;
}

PreprocessedRow apply_preprocess(const PreprocessSpec& spec, const Table& table, std::size_t row) {
  if (table.cols() != spec.transforms.size()) throw parameter_error("apply_preprocess: column count mismatch");

  std::vector<double> base;
  std::vector<std::uint8_t> base_missing;
  base.reserve(spec.transforms.size());
  for (std::size_t c = 0; c < spec.transforms.size(); ++c) {
    const ColumnTransform& t = spec.transforms[c];
    if (t.kind == ColumnTransform::Kind::dropped) continue;
    const Column& col = table.columns[c];
    if (col.missing[row]) {
      base.push_back(0.0);
      base_missing.push_back(1);
      continue;
    }
    if (t.kind == ColumnTransform::Kind::numeric) {
      if (!col.numeric) throw parameter_error("apply_preprocess: column " + t.name + " is not numeric");
      const double u = (col.num[row] - t.min) / (t.max - t.min);
      base.push_back(squash_unit(u));
      base_missing.push_back(0);
    } else {
      const std::string v = col.numeric ? format_double(col.num[row]) : col.cat[row];
      const int k = t.category_index(v);
      if (k < 0) {
        base.push_back(0.0);
        base_missing.push_back(1);
      } else {
        const double u = static_cast<double>(k) / static_cast<double>(t.categories.size() - 1);
        base.push_back(squash_unit(u));
        base_missing.push_back(0);
      }
    }
  }

  PreprocessedRow out;
  out.values.reserve(base.size() * static_cast<std::size_t>(spec.repetitions));
  out.missing.reserve(base.size() * static_cast<std::size_t>(spec.repetitions));
  for (int rep = 0; rep < spec.repetitions; ++rep) {
    out.values.insert(out.values.end(), base.begin(), base.end());
    out.missing.insert(out.missing.end(), base_missing.begin(), base_missing.end());
  }
  return out;
}

std::vector<double> invert_preprocess(const PreprocessSpec& spec, const std::vector<double>& values) {
  const int kept = spec.kept_columns();
  if (static_cast<int>(values.size()) != kept * spec.repetitions) {
    throw parameter_error("invert_preprocess: value count mismatch");
  }
  std::vector<double> out(static_cast<std::size_t>(kept), 0.0);
  for (int rep = 0; rep < spec.repetitions; ++rep) {
    for (int c = 0; c < kept; ++c) {
      out[static_cast<std::size_t>(c)] += values[static_cast<std::size_t>(rep) * kept + c];
    }
  }
  for (double& v : out) v /= spec.repetitions;

  int c = 0;
  for (const ColumnTransform& t : spec.transforms) {
    if (t.kind == ColumnTransform::Kind::dropped) continue;
    if (t.kind == ColumnTransform::Kind::numeric) {
      out[static_cast<std::size_t>(c)] = t.min + out[static_cast<std::size_t>(c)] * (t.max - t.min);
    }
    ++c;
  }
  return out;
}

}  // namespace lpspul
