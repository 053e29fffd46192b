#pragma once

#include <optional>
#include <string>

#include "lpspul/table.hpp"
#include "lpspul/training.hpp"

namespace lpspul {

/// Feature table plus PU labeling. `truth` holds the hidden ground-truth
/// class (1 positive / 0 negative) and exists for evaluation only; training
/// code consumes a TrainView, which does not carry it.
struct PuDataset {
  Table features;
  std::vector<std::uint8_t> labeled;  // labeled-positive flags
  std::vector<int> truth;
  std::string provenance;

  std::size_t size() const { return labeled.size(); }
  std::size_t positive_count() const;
  std::size_t labeled_count() const;

  /// Features + "label" + "labeled" columns, for CSV export.
  Table to_table() const;
  /// Inverse of to_table (expects those two columns).
  static PuDataset from_table(Table table, const std::string& provenance);
};

/// Two interleaving half-circle arcs: upper arc (cos t, sin t) is the
/// positive class, lower arc (1 - cos t, 1/2 - sin t) the negative one,
/// t uniform in [0, pi], isotropic Gaussian noise added to both coordinates.
PuDataset gen_two_moons(std::size_t n, double noise_std, std::uint64_t seed);

/// Concentric circles; the inner circle (radius = factor) is positive, the
/// outer (radius 1) negative.
PuDataset gen_circles(std::size_t n, double noise_std, double factor, std::uint64_t seed);

/// Isotropic Gaussian clusters with centers equally spaced on a circle of
/// radius 3; even-indexed centers form the positive class. Half of the
/// points are positive regardless of the center count.
PuDataset gen_blobs(std::size_t n, int centers, double cluster_std, std::uint64_t seed);

/// Marks `count` positives as labeled, drawn uniformly without replacement.
void label_positives(PuDataset& data, std::size_t count, std::uint64_t seed);

struct PuTaskSpec {
  std::optional<double> labeled_fraction;      // fraction of all positives
  std::optional<std::size_t> labeled_count;    // absolute count, overrides fraction
  std::uint64_t seed = 0;
  bool balance = false;  // subsample the majority class to parity
};

/// Binary PU task from a labeled multi-class table: the most frequent class
/// becomes positive, the second most frequent negative, remaining rows are
/// discarded. Labeled positives are drawn per the spec.
PuDataset build_pu_task(Table table, const std::string& label_column, const PuTaskSpec& spec);

/// Raw 28x28 grayscale images, byte pixels.
struct ImageSet {
  int rows = 28;
  int cols = 28;
  std::vector<std::uint8_t> pixels;  // size() * rows * cols
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  const std::uint8_t* image(std::size_t i) const {
    return pixels.data() + i * static_cast<std::size_t>(rows) * cols;
  }
};

/// IDX readers (magic 0x803 for images, 0x801 for labels, big-endian dims).
ImageSet load_mnist_idx(const std::string& images_path, const std::string& labels_path);

/// Rotation then zoom about the patch center, bilinear, zero fill outside.
std::vector<double> transform_crop(const std::vector<double>& img, int side, double angle, double zoom);

/// Center-crops 28x28 to 20x20 and scales to [0, 1]; with augment, applies a
/// random rotation (uniform in [-0.05 pi, 0.05 pi]) followed by a random
/// zoom (uniform in [0.8, 1.2]). Row-major flatten, length 400.
std::vector<double> prepare_image(const std::uint8_t* img28, bool augment, std::uint64_t seed);

struct ImagePuTask {
  PuDataset train;
  PuDataset test;
};

/// Balanced one-vs-one task: class_a is positive. Train images are
/// augmented once at build time, test images are only cropped.
ImagePuTask build_ovo_task(const ImageSet& train, const ImageSet& test, int class_a, int class_b,
                           std::size_t train_per_class, std::size_t test_per_class, std::size_t n_labeled,
                           bool augment, std::uint64_t seed);

/// Balanced one-vs-rest task: negatives are subsampled evenly across the
/// other nine classes.
ImagePuTask build_ovr_task(const ImageSet& train, const ImageSet& test, int positive_class,
                           std::size_t train_per_class, std::size_t test_per_class, std::size_t n_labeled,
                           bool augment, std::uint64_t seed);

/// Embeds every row of a dataset through the fitted pipeline. The returned
/// view carries only features and labeled flags.
TrainView make_train_view(const PuDataset& data, const PreprocessSpec& preprocess, const BasisSpec& basis);
std::vector<EmbeddedSample> embed_rows(const Table& features, const PreprocessSpec& preprocess,
                                       const BasisSpec& basis);

}  // namespace lpspul
