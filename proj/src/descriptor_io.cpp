#include "seqloc/descriptor_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>

#include "seqloc/csv.hpp"
#include "seqloc/error.hpp"

namespace seqloc {

namespace {

std::filesystem::path blob_path_for(const std::filesystem::path& manifest_path) {
  auto p = manifest_path;
  p.replace_extension(".bin");
  return p;
}

}  // namespace

void write_envelope(const std::filesystem::path& manifest_path, const F32Envelope& env) {
  if (env.values.size() != env.count * env.dim) {
    throw InvariantError("envelope: value count does not match count*dim");
  }
  const auto blob = blob_path_for(manifest_path);
  std::string bytes;
  bytes.resize(env.values.size() * 4);
  for (std::size_t k = 0; k < env.values.size(); ++k) {
    const auto bits = std::bit_cast<std::uint32_t>(env.values[k]);
    for (int b = 0; b < 4; ++b) bytes[4 * k + b] = static_cast<char>((bits >> (8 * b)) & 0xFFu);
  }
  nlohmann::ordered_json manifest;
  manifest["count"] = env.count;
  manifest["dim"] = env.dim;
  manifest["dtype"] = "f32";
  manifest["layout"] = "row-major";
  manifest["blob"] = blob.filename().string();
  for (const auto& [key, value] : env.extra.items()) manifest[key] = value;
  write_file(blob, bytes);
  write_file(manifest_path, manifest.dump(2) + "\n");
}

F32Envelope read_envelope(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw ParseError(ParseErrorKind::io, "cannot open " + manifest_path.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseErrorKind::malformed_header, manifest_path.string() + ": " + e.what());
  }
  F32Envelope env;
  try {
    env.count = manifest.at("count").get<std::size_t>();
    env.dim = manifest.at("dim").get<std::size_t>();
    if (manifest.at("dtype").get<std::string>() != "f32") {
      throw ParseError(ParseErrorKind::unsupported_format, manifest_path.string() + ": dtype must be f32");
    }
    if (manifest.at("layout").get<std::string>() != "row-major") {
      throw ParseError(ParseErrorKind::unsupported_format,
                       manifest_path.string() + ": layout must be row-major");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseErrorKind::malformed_header, manifest_path.string() + ": " + e.what());
  }
  for (const auto& [key, value] : manifest.items()) {
    if (key != "count" && key != "dim" && key != "dtype" && key != "layout" && key != "blob") {
      env.extra[key] = value;
    }
  }
  auto blob = blob_path_for(manifest_path);
  if (manifest.contains("blob") && manifest["blob"].is_string()) {
    blob = manifest_path.parent_path() / manifest["blob"].get<std::string>();
  }
  std::ifstream bin(blob, std::ios::binary);
  if (!bin) throw ParseError(ParseErrorKind::io, "cannot open " + blob.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  const std::size_t n = env.count * env.dim;
  if (bytes.size() != n * 4) {
    throw ParseError(ParseErrorKind::truncated_data,
                     blob.string() + ": expected " + std::to_string(n * 4) + " bytes, found " +
                         std::to_string(bytes.size()));
  }
  env.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= std::uint32_t{bytes[4 * k + b]} << (8 * b);
    env.values[k] = std::bit_cast<float>(bits);
    if (!std::isfinite(env.values[k])) {
      throw ParseError(ParseErrorKind::malformed_record, blob.string() + ": non-finite value");
    }
  }
  return env;
}

void save_descriptors(const std::filesystem::path& manifest_path, std::span<const Descriptor> set) {
  if (set.empty()) throw ArgumentError("save_descriptors: empty descriptor set");
  F32Envelope env;
  env.count = set.size();
  env.dim = set.front().dim();
  const bool sparse = set.front().kind() == DescriptorKind::sparse;
  env.values.assign(env.count * env.dim, 0.0f);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& d = set[i];
    if (d.dim() != env.dim) throw ArgumentError("save_descriptors: inconsistent dimensions");
    if ((d.kind() == DescriptorKind::sparse) != sparse) {
      throw ArgumentError("save_descriptors: mixed dense and sparse descriptors");
    }
    float* row = env.values.data() + i * env.dim;
    if (sparse) {
      for (const auto& e : d.entries()) row[e.id] = static_cast<float>(e.value);
    } else {
      const auto v = d.values();
      for (std::size_t k = 0; k < env.dim; ++k) row[k] = static_cast<float>(v[k]);
    }
  }
  env.extra["kind"] = sparse ? "sparse" : "dense";
  write_envelope(manifest_path, env);
}

std::vector<Descriptor> load_descriptors(const std::filesystem::path& manifest_path) {
  auto env = read_envelope(manifest_path);
  if (env.count == 0 || env.dim == 0) {
    throw ParseError(ParseErrorKind::malformed_header, manifest_path.string() + ": empty descriptor set");
  }
  const std::string kind = env.extra.value("kind", std::string("dense"));
  if (kind != "dense" && kind != "sparse") {
    throw ParseError(ParseErrorKind::unsupported_format, manifest_path.string() + ": unknown kind " + kind);
  }
  std::vector<Descriptor> out;
  out.reserve(env.count);
  for (std::size_t i = 0; i < env.count; ++i) {
    const float* row = env.values.data() + i * env.dim;
    if (kind == "sparse") {
      std::vector<SparseEntry> entries;
      for (std::size_t k = 0; k < env.dim; ++k) {
        if (row[k] != 0.0f) entries.push_back({static_cast<std::uint32_t>(k), row[k]});
      }
      out.push_back(Descriptor::sparse(env.dim, std::move(entries)));
    } else {
      out.push_back(Descriptor::dense(std::vector<double>(row, row + env.dim)));
    }
  }
  return out;
}

std::vector<WifiRecord> read_wifi_csv(const std::filesystem::path& path) {
  const auto rows = read_csv(path, "frame_index,ap_id,rssi");
  std::vector<WifiRecord> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string ctx = path.string() + " row " + std::to_string(r + 1);
    const auto frame = parse_int_field(rows[r][0], ctx);
    const auto ap = parse_int_field(rows[r][1], ctx);
    if (frame < 0 || ap < 0) throw ParseError(ParseErrorKind::malformed_record, ctx + ": negative index");
    const double rssi = parse_real_field(rows[r][2], ctx);
    if (!std::isfinite(rssi)) throw ParseError(ParseErrorKind::malformed_record, ctx + ": non-finite rssi");
    out.push_back({static_cast<std::size_t>(frame), static_cast<std::size_t>(ap), rssi});
  }
  return out;
}

}  // namespace seqloc
