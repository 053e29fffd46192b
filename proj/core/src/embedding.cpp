#include "lpspul/embedding.hpp"

#include <cmath>

namespace lpspul {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2 = 1.41421356237309504880;
}  // namespace

BasisSpec BasisSpec::uniform(BasisKind kind, int dim, int n) {
  BasisSpec spec;
  spec.dim = dim;
  spec.kinds.assign(static_cast<std::size_t>(n), kind);
  return spec;
}

BasisSpec BasisSpec::random(int dim, int n, std::uint64_t seed) {
  BasisSpec spec;
  spec.dim = dim;
  spec.kinds.resize(static_cast<std::size_t>(n));
  Rng rng(seed);
  for (auto& k : spec.kinds) k = (rng.next_u64() & 1u) ? BasisKind::sine : BasisKind::cosine;
  return spec;
}

void embed_local(double u, BasisKind kind, int dim, double* out) {
  if (!(u >= 0.0 && u <= 1.0)) throw parameter_error("embedding input outside [0, 1]");
  if (dim < 1) throw parameter_error("embedding dimension must be >= 1");
  if (kind == BasisKind::cosine) {
    out[0] = 1.0;
    for (int a = 1; a < dim; ++a) out[a] = kSqrt2 * std::cos(a * kPi * u);
  } else {
    for (int a = 0; a < dim; ++a) out[a] = kSqrt2 * std::sin((a + 1) * kPi * u);
  }
}

std::vector<double> embed_local(double u, BasisKind kind, int dim) {
  std::vector<double> out(static_cast<std::size_t>(dim));
  embed_local(u, kind, dim, out.data());
  return out;
}

EmbeddedSample embed(const std::vector<double>& values, const std::vector<std::uint8_t>& missing,
                     const BasisSpec& basis) {
  const int n = basis.num_attributes();
  if (static_cast<int>(values.size()) != n) throw parameter_error("embed: value count does not match basis");
  if (static_cast<int>(missing.size()) != n) throw parameter_error("embed: mask length does not match basis");

  EmbeddedSample s;
  s.n = n;
  s.dim = basis.dim;
  s.values.assign(static_cast<std::size_t>(n) * basis.dim, 0.0);
  s.missing = missing;
  for (int i = 0; i < n; ++i) {
    if (missing[i]) continue;
    embed_local(values[i], basis.kinds[i], basis.dim, s.attribute(i));
  }
  return s;
}

EmbeddedSample embed(const std::vector<double>& values, const BasisSpec& basis) {
  return embed(values, std::vector<std::uint8_t>(values.size(), 0), basis);
}

}  // namespace lpspul
