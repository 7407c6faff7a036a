#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "seqloc/descriptor.hpp"

namespace seqloc {

/// A JSON manifest `{count, dim, dtype:"f32", layout:"row-major", blob}` next to
/// a little-endian float32 blob of count*dim values. `extra` carries any
/// additional manifest keys.
struct F32Envelope {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<float> values;
  nlohmann::json extra = nlohmann::json::object();
};

/// The blob is written to the manifest path with its extension replaced by ".bin".
void write_envelope(const std::filesystem::path& manifest_path, const F32Envelope& env);
F32Envelope read_envelope(const std::filesystem::path& manifest_path);

/// Descriptor files add `kind: "dense" | "sparse"`; sparse sets are stored
/// densely and re-sparsified on load (zeros become absent).
void save_descriptors(const std::filesystem::path& manifest_path, std::span<const Descriptor> set);
std::vector<Descriptor> load_descriptors(const std::filesystem::path& manifest_path);

/// `frame_index,ap_id,rssi` per row.
std::vector<WifiRecord> read_wifi_csv(const std::filesystem::path& path);

}  // namespace seqloc
