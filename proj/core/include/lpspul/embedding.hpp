#pragma once

#include <cstdint>
#include <vector>

#include "lpspul/errors.hpp"
#include "lpspul/rng.hpp"

namespace lpspul {

enum class BasisKind : std::uint8_t { cosine = 0, sine = 1 };

/// Per-attribute choice of Fourier basis. Both bases are orthonormal on
/// [0, 1]:
///   cosine: (1, sqrt(2) cos(pi u), ..., sqrt(2) cos((d-1) pi u))
///   sine:   (sqrt(2) sin(pi u), ..., sqrt(2) sin(d pi u))
struct BasisSpec {
  std::vector<BasisKind> kinds;  // one per attribute, length n
  int dim = 0;

  int num_attributes() const { return static_cast<int>(kinds.size()); }

  static BasisSpec uniform(BasisKind kind, int dim, int n);
  /// Independent coin flip per attribute position, seeded.
  static BasisSpec random(int dim, int n, std::uint64_t seed);
};

/// A data point after embedding: one length-d vector per attribute plus a
/// missing mask. Masked positions are traced out by every consumer.
struct EmbeddedSample {
  int n = 0;
  int dim = 0;
  std::vector<double> values;        // n * dim, attribute-major
  std::vector<std::uint8_t> missing; // length n

  const double* attribute(int i) const { return values.data() + static_cast<std::size_t>(i) * dim; }
  double* attribute(int i) { return values.data() + static_cast<std::size_t>(i) * dim; }
  bool any_missing() const {
    for (auto m : missing) {
      if (m) return true;
    }
    return false;
  }
  bool all_missing() const {
    for (auto m : missing) {
      if (!m) return false;
    }
    return true;
  }
};

/// Writes phi(u) into out[0..dim). Requires 0 <= u <= 1.
void embed_local(double u, BasisKind kind, int dim, double* out);
std::vector<double> embed_local(double u, BasisKind kind, int dim);

/// Embeds a preprocessed vector (values in [0,1], mask aligned) attribute by
/// attribute. The full product embedding is represented by this list of
/// per-site vectors and never materialized.
EmbeddedSample embed(const std::vector<double>& values, const std::vector<std::uint8_t>& missing,
                     const BasisSpec& basis);
EmbeddedSample embed(const std::vector<double>& values, const BasisSpec& basis);

}  // namespace lpspul
