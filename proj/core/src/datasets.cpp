#include "lpspul/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "lpspul/io.hpp"

namespace lpspul {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::size_t PuDataset::positive_count() const {
  std::size_t n = 0;
  for (int t : truth) n += t == 1;
  return n;
}

std::size_t PuDataset::labeled_count() const {
  std::size_t n = 0;
  for (auto f : labeled) n += f;
  return n;
}

Table PuDataset::to_table() const {
  Table t = features;
  Column label;
  label.name = "label";
  label.numeric = true;
  Column lab;
  lab.name = "labeled";
  lab.numeric = true;
  for (std::size_t i = 0; i < size(); ++i) {
    label.num.push_back(truth[i]);
    label.missing.push_back(0);
    lab.num.push_back(labeled[i]);
    lab.missing.push_back(0);
  }
  t.columns.push_back(std::move(label));
  t.columns.push_back(std::move(lab));
  return t;
}

PuDataset PuDataset::from_table(Table table, const std::string& provenance) {
  PuDataset ds;
  Column label = table.take_column("label");
  Column lab = table.take_column("labeled");
  if (!label.numeric || !lab.numeric) throw data_error("label/labeled columns must be numeric");
  ds.features = std::move(table);
  ds.truth.reserve(label.num.size());
  ds.labeled.reserve(lab.num.size());
  for (std::size_t i = 0; i < label.num.size(); ++i) {
    ds.truth.push_back(label.num[i] != 0.0 ? 1 : 0);
    ds.labeled.push_back(lab.num[i] != 0.0 ? 1 : 0);
    if (ds.labeled.back() && ds.truth.back() != 1) {
      throw data_error("labeled flag set on a non-positive row " + std::to_string(i));
    }
  }
  ds.provenance = provenance;
  return ds;
}

namespace {

PuDataset points_dataset(const std::vector<double>& xs, const std::vector<double>& ys,
                         const std::vector<int>& truth, std::string provenance) {
  PuDataset ds;
  Column cx, cy;
  cx.name = "x0";
  cy.name = "x1";
  cx.num = xs;
  cy.num = ys;
  cx.missing.assign(xs.size(), 0);
  cy.missing.assign(ys.size(), 0);
  ds.features.columns = {std::move(cx), std::move(cy)};
  ds.truth = truth;
  ds.labeled.assign(truth.size(), 0);
  ds.provenance = std::move(provenance);
  return ds;
}

}  // namespace

PuDataset gen_two_moons(std::size_t n, double noise_std, std::uint64_t seed) {
  if (n < 2) throw parameter_error("need at least two samples");
  if (noise_std < 0.0) throw parameter_error("noise must be >= 0");
  Rng rng(seed);
  const std::size_t n_pos = (n + 1) / 2;
  std::vector<double> xs(n), ys(n);
  std::vector<int> truth(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = rng.uniform(0.0, kPi);
    const bool upper = i < n_pos;
    double x = upper ? std::cos(t) : 1.0 - std::cos(t);
    double y = upper ? std::sin(t) : 0.5 - std::sin(t);
    if (noise_std > 0.0) {
      x += noise_std * rng.normal();
      y += noise_std * rng.normal();
    }
    xs[i] = x;
    ys[i] = y;
    truth[i] = upper ? 1 : 0;
  }
  return points_dataset(xs, ys, truth, "moons(n=" + std::to_string(n) + ")");
}

PuDataset gen_circles(std::size_t n, double noise_std, double factor, std::uint64_t seed) {
  if (n < 2) throw parameter_error("need at least two samples");
  if (!(factor > 0.0 && factor < 1.0)) throw parameter_error("factor must be in (0, 1)");
  if (noise_std < 0.0) throw parameter_error("noise must be >= 0");
  Rng rng(seed);
  const std::size_t n_pos = n / 2;  // inner circle
  std::vector<double> xs(n), ys(n);
  std::vector<int> truth(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool inner = i < n_pos;
    const double r = inner ? factor : 1.0;
    const double t = rng.uniform(0.0, 2.0 * kPi);
    xs[i] = r * std::cos(t) + (noise_std > 0.0 ? noise_std * rng.normal() : 0.0);
    ys[i] = r * std::sin(t) + (noise_std > 0.0 ? noise_std * rng.normal() : 0.0);
    truth[i] = inner ? 1 : 0;
  }
  return points_dataset(xs, ys, truth, "circles(n=" + std::to_string(n) + ")");
}

PuDataset gen_blobs(std::size_t n, int centers, double cluster_std, std::uint64_t seed) {
  if (n < 2) throw parameter_error("need at least two samples");
  if (centers < 2) throw parameter_error("need at least two centers");
  if (cluster_std < 0.0) throw parameter_error("cluster std must be >= 0");
  Rng rng(seed);

  std::vector<std::pair<double, double>> pos_centers, neg_centers;
  for (int c = 0; c < centers; ++c) {
    const double t = 2.0 * kPi * c / centers;
    auto& bucket = (c % 2 == 0) ? pos_centers : neg_centers;
    bucket.emplace_back(3.0 * std::cos(t), 3.0 * std::sin(t));
  }

  std::vector<double> xs(n), ys(n);
  std::vector<int> truth(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = (i % 2 == 0);
    const auto& bucket = positive ? pos_centers : neg_centers;
    const auto& c = bucket[(i / 2) % bucket.size()];
    xs[i] = c.first + cluster_std * rng.normal();
    ys[i] = c.second + cluster_std * rng.normal();
    truth[i] = positive ? 1 : 0;
  }
  return points_dataset(xs, ys, truth, "blobs(n=" + std::to_string(n) + ")");
}

void label_positives(PuDataset& data, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.truth[i] == 1) pos.push_back(i);
  }
  if (count > pos.size()) throw parameter_error("cannot label more positives than exist");
  Rng rng(seed);
  rng.shuffle(pos);
  std::fill(data.labeled.begin(), data.labeled.end(), 0);
  for (std::size_t i = 0; i < count; ++i) data.labeled[pos[i]] = 1;
}

PuDataset build_pu_task(Table table, const std::string& label_column, const PuTaskSpec& spec) {
  Column label = table.take_column(label_column);
  const std::size_t n = label.rows();

  std::map<std::string, std::size_t> counts;
  auto class_of = [&](std::size_t r) -> std::string {
    if (label.missing[r]) return std::string();
    return label.numeric ? format_double(label.num[r]) : label.cat[r];
  };
  for (std::size_t r = 0; r < n; ++r) {
    const std::string c = class_of(r);
    if (!c.empty()) ++counts[c];
  }
  if (counts.size() < 2) throw data_error("need at least two classes to build a PU task");

  // Most frequent class is positive, second most frequent negative; ties
  // broken by first appearance order in the file.
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) { return a.second > b.second; });
  // stable_sort on a map iterates alphabetically; recover appearance order for ties
  std::vector<std::string> appearance;
  for (std::size_t r = 0; r < n; ++r) {
    const std::string c = class_of(r);
    if (!c.empty() && std::find(appearance.begin(), appearance.end(), c) == appearance.end()) {
      appearance.push_back(c);
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return std::find(appearance.begin(), appearance.end(), a.first) <
           std::find(appearance.begin(), appearance.end(), b.first);
  });
  const std::string positive = ranked[0].first;
  const std::string negative = ranked[1].first;

  std::vector<std::size_t> keep_pos, keep_neg;
  for (std::size_t r = 0; r < n; ++r) {
    const std::string c = class_of(r);
    if (c == positive) keep_pos.push_back(r);
    else if (c == negative) keep_neg.push_back(r);
  }

  Rng rng(spec.seed);
  if (spec.balance) {
    auto& larger = keep_pos.size() > keep_neg.size() ? keep_pos : keep_neg;
    const std::size_t target = std::min(keep_pos.size(), keep_neg.size());
    rng.shuffle(larger);
    larger.resize(target);
    std::sort(larger.begin(), larger.end());
  }

  std::vector<std::size_t> keep = keep_pos;
  keep.insert(keep.end(), keep_neg.begin(), keep_neg.end());
  std::sort(keep.begin(), keep.end());

  PuDataset ds;
  ds.features = table.select_rows(keep);
  ds.truth.reserve(keep.size());
  for (std::size_t r : keep) ds.truth.push_back(class_of(r) == positive ? 1 : 0);
  ds.labeled.assign(keep.size(), 0);
  ds.provenance = "pu_task(pos=" + positive + ", neg=" + negative + ")";

  std::size_t n_labeled = 0;
  const std::size_t n_pos = ds.positive_count();
  if (spec.labeled_count) {
    n_labeled = *spec.labeled_count;
  } else if (spec.labeled_fraction) {
    if (!(*spec.labeled_fraction > 0.0 && *spec.labeled_fraction <= 1.0)) {
      throw parameter_error("labeled fraction must be in (0, 1]");
    }
    n_labeled = std::max<std::size_t>(1, std::llround(*spec.labeled_fraction * static_cast<double>(n_pos)));
  } else {
    throw parameter_error("PU task needs a labeled fraction or count");
  }
  label_positives(ds, n_labeled, Rng::mix(spec.seed, 0x6c61626cULL));
  return ds;
}

namespace {

std::uint32_t read_be32(std::ifstream& in, const std::string& path, std::size_t& offset) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw format_error("truncated IDX header in " + path, offset);
  offset += 4;
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | b[3];
}

}  // namespace

ImageSet load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw data_error("cannot open " + images_path);
  std::size_t off = 0;
  const std::uint32_t magic = read_be32(img, images_path, off);
  if (magic != 0x00000803u) throw format_error("bad image magic in " + images_path, 0);
  const std::uint32_t count = read_be32(img, images_path, off);
  const std::uint32_t rows = read_be32(img, images_path, off);
  const std::uint32_t cols = read_be32(img, images_path, off);
  if (rows != 28 || cols != 28) throw format_error("expected 28x28 images", 8);

  ImageSet set;
  set.rows = static_cast<int>(rows);
  set.cols = static_cast<int>(cols);
  set.pixels.resize(static_cast<std::size_t>(count) * rows * cols);
  img.read(reinterpret_cast<char*>(set.pixels.data()), static_cast<std::streamsize>(set.pixels.size()));
  if (!img) throw format_error("truncated image payload in " + images_path, off);

  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw data_error("cannot open " + labels_path);
  off = 0;
  const std::uint32_t lmagic = read_be32(lab, labels_path, off);
  if (lmagic != 0x00000801u) throw format_error("bad label magic in " + labels_path, 0);
  const std::uint32_t lcount = read_be32(lab, labels_path, off);
  if (lcount != count) {
    throw format_error("image/label count mismatch: " + std::to_string(count) + " vs " + std::to_string(lcount), 4);
  }
  std::vector<std::uint8_t> raw(lcount);
  lab.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!lab) throw format_error("truncated label payload in " + labels_path, off);
  set.labels.assign(raw.begin(), raw.end());
  return set;
}

std::vector<double> transform_crop(const std::vector<double>& img, int side, double angle, double zoom) {
  if (static_cast<int>(img.size()) != side * side) throw parameter_error("transform_crop: wrong image size");
  const double c = (side - 1) / 2.0;
  const double ca = std::cos(angle), sa = std::sin(angle);
  std::vector<double> out(img.size(), 0.0);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      // Inverse map: un-zoom then un-rotate about the center.
      const double dx = (x - c) / zoom;
      const double dy = (y - c) / zoom;
      const double sx = c + ca * dx + sa * dy;
      const double sy = c - sa * dx + ca * dy;
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const double fx = sx - x0;
      const double fy = sy - y0;
      double v = 0.0;
      for (int oy = 0; oy <= 1; ++oy) {
        for (int ox = 0; ox <= 1; ++ox) {
          const int xi = x0 + ox;
          const int yi = y0 + oy;
          if (xi < 0 || xi >= side || yi < 0 || yi >= side) continue;
          const double w = (ox ? fx : 1.0 - fx) * (oy ? fy : 1.0 - fy);
          v += w * img[static_cast<std::size_t>(yi) * side + xi];
        }
      }
      out[static_cast<std::size_t>(y) * side + x] = std::min(1.0, std::max(0.0, v));
    }
  }
  return out;
}

std::vector<double> prepare_image(const std::uint8_t* img28, bool augment, std::uint64_t seed) {
  constexpr int kIn = 28, kOut = 20, kOff = 4;
  std::vector<double> crop(kOut * kOut);
  for (int y = 0; y < kOut; ++y) {
    for (int x = 0; x < kOut; ++x) {
      crop[static_cast<std::size_t>(y) * kOut + x] =
          img28[static_cast<std::size_t>(y + kOff) * kIn + (x + kOff)] / 255.0;
    }
  }
  if (!augment) return crop;
  Rng rng(seed);
  const double angle = rng.uniform(-0.05 * kPi, 0.05 * kPi);
  const double zoom = rng.uniform(0.8, 1.2);
  return transform_crop(crop, kOut, angle, zoom);
}

namespace {

std::vector<std::size_t> class_indices(const ImageSet& set, int cls) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set.labels[i] == cls) idx.push_back(i);
  }
  return idx;
}

PuDataset images_to_dataset(const ImageSet& set, const std::vector<std::size_t>& idx,
                            const std::vector<int>& truth, bool augment, std::uint64_t seed,
                            const std::string& provenance) {
  constexpr int kDim = 400;
  std::vector<Column> cols(kDim);
  for (int c = 0; c < kDim; ++c) {
    cols[static_cast<std::size_t>(c)].name = "px" + std::to_string(c);
    cols[static_cast<std::size_t>(c)].numeric = true;
    cols[static_cast<std::size_t>(c)].num.resize(idx.size());
    cols[static_cast<std::size_t>(c)].missing.assign(idx.size(), 0);
  }
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto vec = prepare_image(set.image(idx[r]), augment, Rng::mix(seed, idx[r]));
    for (int c = 0; c < kDim; ++c) cols[static_cast<std::size_t>(c)].num[r] = vec[static_cast<std::size_t>(c)];
  }
  PuDataset ds;
  ds.features.columns = std::move(cols);
  ds.truth = truth;
  ds.labeled.assign(truth.size(), 0);
  ds.provenance = provenance;
  return ds;
}

std::vector<std::size_t> subsample(std::vector<std::size_t> idx, std::size_t count, Rng& rng,
                                   const std::string& what) {
  if (idx.size() < count) {
    throw data_error("not enough samples for " + what + ": have " + std::to_string(idx.size()) + ", need " +
                     std::to_string(count));
  }
  rng.shuffle(idx);
  idx.resize(count);
  return idx;
}

}  // namespace

ImagePuTask build_ovo_task(const ImageSet& train, const ImageSet& test, int class_a, int class_b,
                           std::size_t train_per_class, std::size_t test_per_class, std::size_t n_labeled,
                           bool augment, std::uint64_t seed) {
  if (class_a == class_b) throw parameter_error("one-vs-one classes must differ");
  if (n_labeled < 1) throw parameter_error("need at least one labeled positive");
  if (n_labeled > train_per_class) throw parameter_error("more labeled positives than training positives");

  Rng rng(Rng::mix(seed, 0x6f766fULL));
  const auto tr_a = subsample(class_indices(train, class_a), train_per_class, rng, "train class " + std::to_string(class_a));
  const auto tr_b = subsample(class_indices(train, class_b), train_per_class, rng, "train class " + std::to_string(class_b));
  const auto te_a = subsample(class_indices(test, class_a), test_per_class, rng, "test class " + std::to_string(class_a));
  const auto te_b = subsample(class_indices(test, class_b), test_per_class, rng, "test class " + std::to_string(class_b));

  std::vector<std::size_t> tr_idx = tr_a;
  tr_idx.insert(tr_idx.end(), tr_b.begin(), tr_b.end());
  std::vector<int> tr_truth(tr_idx.size(), 0);
  std::fill(tr_truth.begin(), tr_truth.begin() + static_cast<long>(tr_a.size()), 1);
  std::vector<std::size_t> te_idx = te_a;
  te_idx.insert(te_idx.end(), te_b.begin(), te_b.end());
  std::vector<int> te_truth(te_idx.size(), 0);
  std::fill(te_truth.begin(), te_truth.begin() + static_cast<long>(te_a.size()), 1);

  const std::string tag = std::to_string(class_a) + "v" + std::to_string(class_b);
  ImagePuTask task;
  task.train = images_to_dataset(train, tr_idx, tr_truth, augment, Rng::mix(seed, 1), "mnist_ovo_" + tag + "_train");
  task.test = images_to_dataset(test, te_idx, te_truth, false, Rng::mix(seed, 2), "mnist_ovo_" + tag + "_test");
  label_positives(task.train, n_labeled, Rng::mix(seed, 3));
  return task;
}

ImagePuTask build_ovr_task(const ImageSet& train, const ImageSet& test, int positive_class,
                           std::size_t train_per_class, std::size_t test_per_class, std::size_t n_labeled,
                           bool augment, std::uint64_t seed) {
  if (n_labeled < 1) throw parameter_error("need at least one labeled positive");
  if (n_labeled > train_per_class) throw parameter_error("more labeled positives than training positives");

  Rng rng(Rng::mix(seed, 0x6f7672ULL));
  auto build_side = [&](const ImageSet& set, std::size_t per_class) {
    auto pos = subsample(class_indices(set, positive_class), per_class, rng,
                         "class " + std::to_string(positive_class));
    // Negatives drawn evenly across the other nine classes.
    std::vector<std::size_t> neg;
    std::size_t remaining = per_class;
    int classes_left = 9;
    for (int c = 0; c < 10; ++c) {
      if (c == positive_class) continue;
      const std::size_t take = remaining / static_cast<std::size_t>(classes_left);
      auto chunk = subsample(class_indices(set, c), take, rng, "class " + std::to_string(c));
      neg.insert(neg.end(), chunk.begin(), chunk.end());
      remaining -= take;
      --classes_left;
    }
    std::vector<std::size_t> idx = pos;
    idx.insert(idx.end(), neg.begin(), neg.end());
    std::vector<int> truth(idx.size(), 0);
    std::fill(truth.begin(), truth.begin() + static_cast<long>(pos.size()), 1);
    return std::make_pair(idx, truth);
  };

  const auto [tr_idx, tr_truth] = build_side(train, train_per_class);
  const auto [te_idx, te_truth] = build_side(test, test_per_class);
  const std::string tag = std::to_string(positive_class) + "vR";
  ImagePuTask task;
  task.train = images_to_dataset(train, tr_idx, tr_truth, augment, Rng::mix(seed, 1), "mnist_ovr_" + tag + "_train");
  task.test = images_to_dataset(test, te_idx, te_truth, false, Rng::mix(seed, 2), "mnist_ovr_" + tag + "_test");
  label_positives(task.train, n_labeled, Rng::mix(seed, 3));
  return task;
}

std::vector<EmbeddedSample> embed_rows(const Table& features, const PreprocessSpec& preprocess,
                                       const BasisSpec& basis) {
  std::vector<EmbeddedSample> out;
  out.reserve(features.rows());
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const PreprocessedRow row = apply_preprocess(preprocess, features, r);
    out.push_back(embed(row.values, row.missing, basis));
  }
  return out;
}

TrainView make_train_view(const PuDataset& data, const PreprocessSpec& preprocess, const BasisSpec& basis) {
  TrainView view;
  view.samples = embed_rows(data.features, preprocess, basis);
  view.labeled = data.labeled;
  return view;
}

}  // namespace lpspul
