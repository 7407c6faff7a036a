#include "seqloc/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <string>

#include "seqloc/diagnostics.hpp"
#include "seqloc/error.hpp"

namespace seqloc {

Descriptor Descriptor::dense(std::vector<double> values) {
  if (values.empty()) throw ArgumentError("descriptor: dimension must be positive");
  for (double v : values) {
    if (!std::isfinite(v)) throw ArgumentError("descriptor: non-finite value");
  }
  Descriptor d;
  d.kind_ = DescriptorKind::dense;
  d.dim_ = values.size();
  d.values_ = std::move(values);
  return d;
}

Descriptor Descriptor::sparse(std::size_t dim, std::vector<SparseEntry> entries) {
  if (dim == 0) throw ArgumentError("descriptor: dimension must be positive");
  std::sort(entries.begin(), entries.end(),
            [](const SparseEntry& a, const SparseEntry& b) { return a.id < b.id; });
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k].id >= dim) throw ArgumentError("descriptor: sparse id out of range");
    if (!std::isfinite(entries[k].value)) throw ArgumentError("descriptor: non-finite value");
    if (k > 0 && entries[k].id == entries[k - 1].id) {
      throw ArgumentError("descriptor: duplicate sparse id " + std::to_string(entries[k].id));
    }
  }
  Descriptor d;
  d.kind_ = DescriptorKind::sparse;
  d.dim_ = dim;
  d.entries_ = std::move(entries);
  return d;
}

std::span<const double> Descriptor::values() const {
  if (kind_ != DescriptorKind::dense) throw ArgumentError("descriptor: not dense");
  return values_;
}

std::span<const SparseEntry> Descriptor::entries() const {
  if (kind_ != DescriptorKind::sparse) throw ArgumentError("descriptor: not sparse");
  return entries_;
}

std::size_t Descriptor::nonzero_count() const {
  if (kind_ == DescriptorKind::sparse) {
    return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(),
                                                  [](const SparseEntry& e) { return e.value != 0.0; }));
  }
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](double v) { return v != 0.0; }));
}

double Descriptor::value_at(std::size_t k) const {
  if (k >= dim_) throw ArgumentError("descriptor: index out of range");
  if (kind_ == DescriptorKind::dense) return values_[k];
  auto it = std::lower_bound(entries_.begin(), entries_.end(), k,
                             [](const SparseEntry& e, std::size_t id) { return e.id < id; });
  return (it != entries_.end() && it->id == k) ? it->value : 0.0;
}

std::vector<double> Descriptor::to_dense() const {
  if (kind_ == DescriptorKind::dense) return values_;
  std::vector<double> out(dim_, 0.0);
  for (const auto& e : entries_) out[e.id] = e.value;
  return out;
}

std::string_view to_string(DifferenceOp op) {
  switch (op) {
    case DifferenceOp::sad:
      return "sad";
    case DifferenceOp::cosine:
      return "cosine";
  }
  return "?";
}

DifferenceOp parse_difference_op(std::string_view name) {
  if (name == "sad") return DifferenceOp::sad;
  if (name == "cosine") return DifferenceOp::cosine;
  throw ArgumentError("unknown difference operator '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// PGM

namespace {

class PgmReader {
 public:
  explicit PgmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool at_end() const { return pos_ >= bytes_.size(); }

  void skip_space_and_comments() {
    while (!at_end()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (!at_end() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
        ++pos_;
      } else {
        return;
      }
    }
  }

  std::size_t read_header_int(const char* field) {
    skip_space_and_comments();
    if (at_end() || bytes_[pos_] < '0' || bytes_[pos_] > '9') {
      throw ParseError(ParseErrorKind::malformed_header,
                       std::string("pgm: expected integer for ") + field);
    }
    std::size_t v = 0;
    while (!at_end() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      v = v * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      if (v > (std::size_t{1} << 31)) {
        throw ParseError(ParseErrorKind::malformed_header, std::string("pgm: ") + field + " too large");
      }
      ++pos_;
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void consume_single_whitespace() {
    if (at_end()) throw ParseError(ParseErrorKind::truncated_data, "pgm: missing pixel data");
    const auto c = bytes_[pos_];
    if (c != ' ' && c != '\t' && c != '\n' && c != '\r') {
      throw ParseError(ParseErrorKind::malformed_header, "pgm: expected whitespace after maxval");
    }
    ++pos_;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::uint8_t byte(std::size_t offset) const { return bytes_[pos_ + offset]; }

  std::size_t pos_ = 0;

 private:
  std::span<const std::uint8_t> bytes_;
};

}  // namespace

GrayImage parse_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw ParseError(ParseErrorKind::empty_input, "pgm: empty input");
  if (bytes.size() < 2 || bytes[0] != 'P') {
    throw ParseError(ParseErrorKind::unsupported_format, "pgm: missing 'P' magic");
  }
  if (bytes[1] != '5') {
    throw ParseError(ParseErrorKind::unsupported_format,
                     std::string("pgm: unsupported magic P") + static_cast<char>(bytes[1]) +
                         " (only binary P5 is accepted)");
  }
  PgmReader r(bytes);
  r.pos_ = 2;
  const std::size_t width = r.read_header_int("width");
  const std::size_t height = r.read_header_int("height");
  const std::size_t maxval = r.read_header_int("maxval");
  if (width == 0 || height == 0) throw ParseError(ParseErrorKind::malformed_header, "pgm: zero dimension");
  if (maxval == 0 || maxval > 65535) {
    throw ParseError(ParseErrorKind::malformed_header, "pgm: maxval must be in [1, 65535]");
  }
  r.consume_single_whitespace();

  const std::size_t bytes_per_sample = maxval < 256 ? 1 : 2;
  const std::size_t n = width * height;
  if (r.remaining() < n * bytes_per_sample) {
    throw ParseError(ParseErrorKind::truncated_data, "pgm: truncated pixel data");
  }

  GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(n);
  const double scale = 255.0 / static_cast<double>(maxval);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t sample = 0;
    if (bytes_per_sample == 1) {
      sample = r.byte(k);
    } else {
      sample = (std::size_t{r.byte(2 * k)} << 8) | r.byte(2 * k + 1);
    }
    if (sample > maxval) throw ParseError(ParseErrorKind::malformed_record, "pgm: sample exceeds maxval");
    img.pixels[k] = maxval == 255 ? static_cast<double>(sample) : static_cast<double>(sample) * scale;
  }
  return img;
}

GrayImage load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseErrorKind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_pgm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(e.kind(), path.string() + ": " + e.what());
  }
}

GrayImage downsample(const GrayImage& img, std::size_t out_w, std::size_t out_h) {
  if (out_w == 0 || out_h == 0) throw ArgumentError("downsample: output dimensions must be >= 1");
  if (out_w > img.width || out_h > img.height) {
    throw ArgumentError("downsample: output larger than input");
  }
  GrayImage out;
  out.width = out_w;
  out.height = out_h;
  out.pixels.resize(out_w * out_h);
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    const std::size_t y0 = oy * img.height / out_h;
    const std::size_t y1 = (oy + 1) * img.height / out_h;
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      const std::size_t x0 = ox * img.width / out_w;
      const std::size_t x1 = (ox + 1) * img.width / out_w;
      double sum = 0.0;
      for (std::size_t y = y0; y < y1; ++y) {
        for (std::size_t x = x0; x < x1; ++x) sum += img.at(x, y);
      }
      out.pixels[oy * out_w + ox] = sum / static_cast<double>((y1 - y0) * (x1 - x0));
    }
  }
  return out;
}

Descriptor patch_normalize(const GrayImage& img, std::size_t patch) {
  if (patch == 0) throw ArgumentError("patch_normalize: patch size must be >= 1");
  if (img.width % patch != 0 || img.height % patch != 0) {
    throw ArgumentError("patch_normalize: image " + std::to_string(img.width) + "x" +
                        std::to_string(img.height) + " not divisible by patch " + std::to_string(patch));
  }
  std::vector<double> out(img.pixels.size(), 0.0);
  const double count = static_cast<double>(patch * patch);
  for (std::size_t py = 0; py < img.height; py += patch) {
    for (std::size_t px = 0; px < img.width; px += patch) {
      double sum = 0.0;
      double lo = img.at(px, py);
      double hi = lo;
      for (std::size_t y = py; y < py + patch; ++y) {
        for (std::size_t x = px; x < px + patch; ++x) {
          const double v = img.at(x, y);
          sum += v;
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      if (lo == hi) continue;  // constant patch stays zero
      const double mean = sum / count;
      double ss = 0.0;
      for (std::size_t y = py; y < py + patch; ++y) {
        for (std::size_t x = px; x < px + patch; ++x) {
          const double dv = img.at(x, y) - mean;
          ss += dv * dv;
        }
      }
      const double sigma = std::sqrt(ss / count);
      for (std::size_t y = py; y < py + patch; ++y) {
        for (std::size_t x = px; x < px + patch; ++x) {
          out[y * img.width + x] = (img.at(x, y) - mean) / sigma;
        }
      }
    }
  }
  return Descriptor::dense(std::move(out));
}

// ---------------------------------------------------------------------------
// Wi-Fi

namespace {

void insert_reading(std::map<std::size_t, double>& frame, const WifiRecord& r, bool& duplicate) {
  auto [it, inserted] = frame.emplace(r.ap_id, r.rssi);
  if (!inserted) {
    duplicate = true;
    it->second = std::max(it->second, r.rssi);
  }
}

Descriptor to_sparse(const std::map<std::size_t, double>& frame, std::size_t ap_count) {
  std::vector<SparseEntry> entries;
  entries.reserve(frame.size());
  for (const auto& [ap, rssi] : frame) entries.push_back({static_cast<std::uint32_t>(ap), rssi});
  return Descriptor::sparse(ap_count, std::move(entries));
}

void check_record(const WifiRecord& r, std::size_t ap_count) {
  if (r.ap_id >= ap_count) {
    throw ArgumentError("wifi: ap_id " + std::to_string(r.ap_id) + " >= ap_count " +
                        std::to_string(ap_count));
  }
  if (!std::isfinite(r.rssi)) throw ArgumentError("wifi: non-finite rssi");
}

}  // namespace

Descriptor wifi_vectorize(std::span<const WifiRecord> records, std::size_t frame_index,
                          std::size_t ap_count) {
  if (ap_count == 0) throw ArgumentError("wifi: ap_count must be >= 1");
  std::map<std::size_t, double> frame;
  bool duplicate = false;
  for (const auto& r : records) {
    check_record(r, ap_count);
    if (r.frame_index == frame_index) insert_reading(frame, r, duplicate);
  }
  if (duplicate) {
    warn("wifi: duplicate access-point readings in frame " + std::to_string(frame_index) +
         "; keeping the strongest");
  }
  return to_sparse(frame, ap_count);
}

std::vector<Descriptor> wifi_vectorize_all(std::span<const WifiRecord> records,
                                           std::size_t frame_count, std::size_t ap_count) {
  if (ap_count == 0) throw ArgumentError("wifi: ap_count must be >= 1");
  std::vector<std::map<std::size_t, double>> frames(frame_count);
  std::vector<bool> duplicate(frame_count, false);
  for (const auto& r : records) {
    check_record(r, ap_count);
    if (r.frame_index >= frame_count) {
      throw ArgumentError("wifi: frame_index " + std::to_string(r.frame_index) + " >= frame count");
    }
    bool dup = false;
    insert_reading(frames[r.frame_index], r, dup);
    if (dup) duplicate[r.frame_index] = true;
  }
  std::vector<Descriptor> out;
  out.reserve(frame_count);
  for (std::size_t f = 0; f < frame_count; ++f) {
    if (duplicate[f]) {
      warn("wifi: duplicate access-point readings in frame " + std::to_string(f) +
           "; keeping the strongest");
    }
    out.push_back(to_sparse(frames[f], ap_count));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Differences

namespace {

// Visits every index in the union of supports with (a_k, b_k).
template <class F>
void for_each_pair(const Descriptor& a, const Descriptor& b, F&& f) {
  if (a.kind() == DescriptorKind::dense && b.kind() == DescriptorKind::dense) {
    const auto va = a.values();
    const auto vb = b.values();
    for (std::size_t k = 0; k < va.size(); ++k) f(va[k], vb[k]);
    return;
  }
  if (a.kind() == DescriptorKind::sparse && b.kind() == DescriptorKind::sparse) {
    const auto ea = a.entries();
    const auto eb = b.entries();
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < ea.size() || j < eb.size()) {
      if (j == eb.size() || (i < ea.size() && ea[i].id < eb[j].id)) {
        f(ea[i].value, 0.0);
        ++i;
      } else if (i == ea.size() || eb[j].id < ea[i].id) {
        f(0.0, eb[j].value);
        ++j;
      } else {
        f(ea[i].value, eb[j].value);
        ++i;
        ++j;
      }
    }
    return;
  }
  const auto da = a.to_dense();
  const auto db = b.to_dense();
  for (std::size_t k = 0; k < da.size(); ++k) f(da[k], db[k]);
}

}  // namespace

double raw_difference(const Descriptor& a, const Descriptor& b, DifferenceOp op) {
  if (a.dim() != b.dim()) {
    throw ArgumentError("raw_difference: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                        std::to_string(b.dim()) + ")");
  }
  if (op == DifferenceOp::sad) {
    double sum = 0.0;
    for_each_pair(a, b, [&](double x, double y) { sum += std::abs(x - y); });
    return sum;
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for_each_pair(a, b, [&](double x, double y) {
    dot += x * y;
    na += x * x;
    nb += y * y;
  });
  if (na == 0.0 || nb == 0.0) {
    warn("cosine difference against a zero vector; using 1.0");
    return 1.0;
  }
  const double cosine = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(1.0 - cosine, 0.0, 2.0);
}

}  // namespace seqloc
