#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "lpspul/errors.hpp"

namespace lpspul {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

enum class SiteKind : std::uint8_t { core, output };

/// One site of a locally purified state chain. Core sites carry legs
/// (bond_left, bond_right, phys); output sites add a second physical leg
/// (bond_left, bond_right, phys, out). Storage groups the physical indices
/// first so that the (phys, out) slice is a contiguous row-major
/// bond_left x bond_right matrix, which is what every contraction touches.
struct SiteTensor {
  SiteKind kind = SiteKind::core;
  int bond_left = 1;
  int bond_right = 1;
  int phys = 1;
  int out = 1;  // 1 for core sites
  std::vector<double> data;

  std::size_t size() const { return data.size(); }
  std::size_t slice_elems() const { return static_cast<std::size_t>(bond_left) * bond_right; }

  double* slice_ptr(int k, int o) { return data.data() + (static_cast<std::size_t>(k) * out + o) * slice_elems(); }
  const double* slice_ptr(int k, int o) const {
    return data.data() + (static_cast<std::size_t>(k) * out + o) * slice_elems();
  }

  ConstMatMap slice(int k, int o = 0) const { return ConstMatMap(slice_ptr(k, o), bond_left, bond_right); }
  MatMap slice(int k, int o = 0) { return MatMap(slice_ptr(k, o), bond_left, bond_right); }

  /// Entry accessor in logical (l, r, k, o) order; used by serialization
  /// and the dense oracle, not by hot paths.
  double& at(int l, int r, int k, int o = 0) { return data[(static_cast<std::size_t>(k) * out + o) * slice_elems() + static_cast<std::size_t>(l) * bond_right + r]; }
  double at(int l, int r, int k, int o = 0) const {
    return data[(static_cast<std::size_t>(k) * out + o) * slice_elems() + static_cast<std::size_t>(l) * bond_right + r];
  }
};

/// A locally purified state used as a linear map from the embedded input
/// space (one phys leg per site) to the output space (one out leg on every
/// skip-th site). Open boundary: bond dimension 1 at both ends.
class LpsNetwork {
 public:
  LpsNetwork() = default;

  /// Gaussian-initialized network. Per-site standard deviations are chosen
  /// so the expected squared Frobenius norm of the whole map is 1, which
  /// keeps log ||P||_F within O(1) of zero for any (N, d, D, S).
  static LpsNetwork init(int num_sites, int phys_dim, int bond_dim, int skip, std::uint64_t seed);

  int num_sites() const { return static_cast<int>(sites_.size()); }
  int phys_dim() const { return phys_dim_; }
  int bond_dim() const { return bond_dim_; }
  int skip() const { return skip_; }
  /// Output sites sit at 0-based positions i with i % skip == 0.
  bool is_output_site(int i) const { return i % skip_ == 0; }
  int num_output_sites() const { return (num_sites() + skip_ - 1) / skip_; }

  const SiteTensor& site(int i) const { return sites_[i]; }
  SiteTensor& site(int i) { return sites_[i]; }
  const std::vector<SiteTensor>& sites() const { return sites_; }

  void scale_site(int i, double factor);
  bool all_finite() const;
  std::size_t parameter_count() const;

  bool same_shape(const LpsNetwork& other) const;

 private:
  std::vector<SiteTensor> sites_;
  int phys_dim_ = 0;
  int bond_dim_ = 0;
  int skip_ = 1;
};

}  // namespace lpspul
