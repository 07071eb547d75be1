#pragma once

#include <rldp/diffcore/io.hpp>
#include <rldp/diffcore/param_store.hpp>

#include <json.hpp>

#include <filesystem>
#include <string>

namespace rldp {

/// On disk a checkpoint is two files: a JSON manifest
///
///   { "format": "rldp-checkpoint", "version": 1, "meta": {...},
///     "blob": "<file name>", "blob_bytes": N,
///     "tensors": [ {"name": ..., "shape": [...], "offset": bytes}, ... ] }
///
/// and a blob of little-endian float32 values, row-major, concatenated in
/// manifest order. Values round-trip exactly at float32 precision.
struct Checkpoint {
  ParamStore params;
  nlohmann::json meta = nlohmann::json::object();
};

inline std::filesystem::path blob_path_for(const std::filesystem::path& manifest) {
  std::filesystem::path blob = manifest;
  blob.replace_extension(".bin");
  return blob;
}

inline void save_checkpoint(const std::filesystem::path& manifest, const ParamStore& params,
                            const nlohmann::json& meta = nlohmann::json::object()) {
  std::string blob;
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& [name, v] : params) {
    tensors.push_back({{"name", name}, {"shape", v.shape()}, {"offset", blob.size()}});
    blob.reserve(blob.size() + 4 * v.value().size());
    for (double x : v.value().values()) append_f32_le(blob, x);
  }
  const auto blob_file = blob_path_for(manifest);
  nlohmann::json doc = {{"format", "rldp-checkpoint"}, {"version", 1},         {"meta", meta},
                        {"blob", blob_file.filename().string()}, {"blob_bytes", blob.size()}, {"tensors", tensors}};
  atomic_write(blob_file, blob);
  atomic_write(manifest, doc.dump(2) + "\n");
}

inline Checkpoint load_checkpoint(const std::filesystem::path& manifest) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(manifest));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("checkpoint manifest '" + manifest.string() + "' is not valid JSON: " + e.what(), e.byte);
  }
  if (doc.value("format", "") != "rldp-checkpoint") throw FormatError("not an rldp checkpoint manifest", 0);
  const auto blob_file = manifest.parent_path() / doc.at("blob").get<std::string>();
  const std::string blob = read_file(blob_file);
  const auto expected = doc.at("blob_bytes").get<std::uint64_t>();
  if (blob.size() != expected) {
    throw FormatError("checkpoint blob '" + blob_file.string() + "' has " + std::to_string(blob.size()) +
                          " bytes, manifest declares " + std::to_string(expected),
                      blob.size());
  }
  Checkpoint ck;
  ck.meta = doc.value("meta", nlohmann::json::object());
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  for (const auto& t : doc.at("tensors")) {
    Shape shape = t.at("shape").get<Shape>();
    const auto offset = t.at("offset").get<std::uint64_t>();
    const std::size_t n = shape_numel(shape);
    if (offset + 4 * n > blob.size()) {
      throw FormatError("tensor '" + t.at("name").get<std::string>() + "' runs past end of blob", offset);
    }
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = read_f32_le(bytes + offset + 4 * i);
    ck.params.add(t.at("name").get<std::string>(), Tensor(std::move(shape), std::move(values)));
  }
  return ck;
}

}  // namespace rldp
