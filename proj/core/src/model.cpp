#include "lpspul/model.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "lpspul/io.hpp"

namespace lpspul {

bool PulModel::compatible_with(const PulModel& other) const {
  return positive.same_shape(other.positive) && negative.same_shape(other.negative) &&
         basis.kinds == other.basis.kinds && basis.dim == other.basis.dim;
}

namespace {

constexpr char kMagic[7] = {'L', 'P', 'S', 'P', 'U', 'L', '1'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u64(std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    bytes(b, 8);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  const std::string& str_buf() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  void bytes(void* p, std::size_t n) {
    if (pos_ + n > data_.size()) {
      throw format_error("model file truncated: need " + std::to_string(n) + " more bytes", pos_);
    }
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  std::uint8_t u8() {
    std::uint8_t v = 0;
    bytes(&v, 1);
    return v;
  }
  std::uint64_t u64() {
    unsigned char b[8];
    bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint64_t n = u64();
    if (n > data_.size() - pos_) throw format_error("model file truncated inside string", pos_);
    std::string s(data_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  std::string data_;
  std::size_t pos_ = 0;
};

void write_network_tensors(Writer& w, const LpsNetwork& net) {
  for (int i = 0; i < net.num_sites(); ++i) {
    const SiteTensor& s = net.site(i);
    // File order is row-major over the logical (l, r, k, o) shape.
    for (int l = 0; l < s.bond_left; ++l) {
      for (int r = 0; r < s.bond_right; ++r) {
        for (int k = 0; k < s.phys; ++k) {
          for (int o = 0; o < s.out; ++o) w.f64(s.at(l, r, k, o));
        }
      }
    }
  }
}

void read_network_tensors(Reader& rd, LpsNetwork& net) {
  for (int i = 0; i < net.num_sites(); ++i) {
    SiteTensor& s = net.site(i);
    for (int l = 0; l < s.bond_left; ++l) {
      for (int r = 0; r < s.bond_right; ++r) {
        for (int k = 0; k < s.phys; ++k) {
          for (int o = 0; o < s.out; ++o) s.at(l, r, k, o) = rd.f64();
        }
      }
    }
  }
}

void write_preprocess(Writer& w, const PreprocessSpec& spec) {
  w.u64(static_cast<std::uint64_t>(spec.repetitions));
  w.u64(spec.transforms.size());
  for (const ColumnTransform& t : spec.transforms) {
    w.u8(static_cast<std::uint8_t>(t.kind));
    w.str(t.name);
    if (t.kind == ColumnTransform::Kind::numeric) {
      w.f64(t.min);
      w.f64(t.max);
    } else if (t.kind == ColumnTransform::Kind::categorical) {
      w.u64(t.categories.size());
      for (const auto& c : t.categories) w.str(c);
    }
  }
}

PreprocessSpec read_preprocess(Reader& rd) {
  PreprocessSpec spec;
  spec.repetitions = static_cast<int>(rd.u64());
  const std::uint64_t ncols = rd.u64();
  spec.transforms.resize(ncols);
  for (auto& t : spec.transforms) {
    const std::uint8_t kind = rd.u8();
    if (kind > 2) throw format_error("bad column transform kind " + std::to_string(kind), rd.pos() - 1);
    t.kind = static_cast<ColumnTransform::Kind>(kind);
    t.name = rd.str();
    if (t.kind == ColumnTransform::Kind::numeric) {
      t.min = rd.f64();
      t.max = rd.f64();
    } else if (t.kind == ColumnTransform::Kind::categorical) {
      const std::uint64_t k = rd.u64();
      t.categories.resize(k);
      for (auto& c : t.categories) c = rd.str();
    }
  }
  return spec;
}

}  // namespace

void save_model(const PulModel& model, const std::string& path) {
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.u64(static_cast<std::uint64_t>(model.positive.num_sites()));
  w.u64(static_cast<std::uint64_t>(model.positive.phys_dim()));
  w.u64(static_cast<std::uint64_t>(model.positive.bond_dim()));
  w.u64(static_cast<std::uint64_t>(model.positive.skip()));
  w.f64(model.mu0);
  w.f64(model.mu1);
  w.u64(model.seed);
  for (BasisKind k : model.basis.kinds) w.u8(static_cast<std::uint8_t>(k));
  write_preprocess(w, model.preprocess);
  write_network_tensors(w, model.positive);
  write_network_tensors(w, model.negative);
  write_file_atomic(path, w.str_buf());
}

PulModel load_model(const std::string& path) {
  Reader rd(read_file(path));
  char magic[7];
  rd.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw format_error("bad magic: expected \"LPSPUL1\"", 0);
  }
  const auto num_sites = static_cast<int>(rd.u64());
  const auto phys_dim = static_cast<int>(rd.u64());
  const auto bond_dim = static_cast<int>(rd.u64());
  const auto skip = static_cast<int>(rd.u64());
  if (num_sites < 1 || phys_dim < 1 || bond_dim < 1 || skip < 1 || skip > num_sites) {
    throw format_error("invalid dimensions in header", rd.pos());
  }

  PulModel model;
  model.mu0 = rd.f64();
  model.mu1 = rd.f64();
  model.seed = rd.u64();
  model.basis.dim = phys_dim;
  model.basis.kinds.resize(static_cast<std::size_t>(num_sites));
  for (auto& k : model.basis.kinds) {
    const std::uint8_t v = rd.u8();
    if (v > 1) throw format_error("bad basis code " + std::to_string(v), rd.pos() - 1);
    k = static_cast<BasisKind>(v);
  }
  model.preprocess = read_preprocess(rd);

  // Layout is implied by the header, so allocate-then-fill.
  model.positive = LpsNetwork::init(num_sites, phys_dim, bond_dim, skip, 0);
  model.negative = LpsNetwork::init(num_sites, phys_dim, bond_dim, skip, 0);
  read_network_tensors(rd, model.positive);
  read_network_tensors(rd, model.negative);
  if (!rd.at_end()) throw format_error("trailing bytes after model payload", rd.pos());
  return model;
}

}  // namespace lpspul
