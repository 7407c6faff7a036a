#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace seqloc {

enum class DescriptorKind { dense, sparse };

struct SparseEntry {
  std::uint32_t id;
  double value;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// One frame's sensory vector. Dense descriptors hold exactly `dim` values;
/// sparse descriptors hold entries sorted by id, with absent ids meaning 0.
class Descriptor {
 public:
  static Descriptor dense(std::vector<double> values);
  /// Entries may arrive in any order; duplicate ids are rejected.
  static Descriptor sparse(std::size_t dim, std::vector<SparseEntry> entries);

  DescriptorKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }

  /// Valid for dense descriptors only.
  std::span<const double> values() const;
  /// Valid for sparse descriptors only.
  std::span<const SparseEntry> entries() const;

  std::size_t nonzero_count() const;
  double value_at(std::size_t k) const;
  std::vector<double> to_dense() const;

  friend bool operator==(const Descriptor&, const Descriptor&) = default;

 private:
  Descriptor() = default;

  DescriptorKind kind_ = DescriptorKind::dense;
  std::size_t dim_ = 0;
  std::vector<double> values_;
  std::vector<SparseEntry> entries_;
};

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;  // row-major, intensities in [0, 255]

  double at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

struct WifiRecord {
  std::size_t frame_index = 0;
  std::size_t ap_id = 0;
  double rssi = 0.0;
};

enum class DifferenceOp { sad, cosine };

std::string_view to_string(DifferenceOp op);
DifferenceOp parse_difference_op(std::string_view name);

/// Decodes a binary ("P5") PGM. 16-bit samples are big-endian as the format
/// requires. Intensities are rescaled so that maxval maps to 255.
GrayImage parse_pgm(std::span<const std::uint8_t> bytes);
GrayImage load_pgm(const std::filesystem::path& path);

/// Area-average pooling onto an out_w x out_h grid. Source cell boundaries are
/// floor(k * size / out_size).
GrayImage downsample(const GrayImage& img, std::size_t out_w, std::size_t out_h);

/// Standardizes each non-overlapping patch x patch block (population sigma) and
/// flattens the image row-major. Constant patches become zeros.
Descriptor patch_normalize(const GrayImage& img, std::size_t patch = 4);

/// Builds the sparse RSSI vector for one frame. Duplicate (frame, ap) records
/// keep the strongest reading and emit a warning.
Descriptor wifi_vectorize(std::span<const WifiRecord> records, std::size_t frame_index,
                          std::size_t ap_count);

/// Vectorizes frames [0, frame_count) in a single pass over the records.
std::vector<Descriptor> wifi_vectorize_all(std::span<const WifiRecord> records,
                                           std::size_t frame_count, std::size_t ap_count);

/// sad: sum of absolute differences over the union of supports.
/// cosine: 1 - cos(angle), clamped to [0, 2]; 1.0 (with a warning) when either
/// side is the zero vector.
double raw_difference(const Descriptor& a, const Descriptor& b, DifferenceOp op);

}  // namespace seqloc
