#pragma once

#include "phonalign/common.hpp"
#include "phonalign/npy.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace phonalign {

inline constexpr double kDefaultStride = 0.02;
inline constexpr int kManifestVersion = 1;

// Frame embeddings for one utterance. Frame i spans [offset + i*stride, offset + (i+1)*stride).
struct EmbeddingMatrix {
  std::string utterance_id;
  RowMatrixF data;
  double stride = kDefaultStride;
  double offset = 0.0;

  Eigen::Index frames() const noexcept { return data.rows(); }
  Eigen::Index dim() const noexcept { return data.cols(); }
  double frame_start(Eigen::Index i) const noexcept { return offset + static_cast<double>(i) * stride; }
  double frame_end(Eigen::Index i) const noexcept { return offset + static_cast<double>(i + 1) * stride; }
};

// Reads a 2-D float32 NPY file. Stride and offset come from the manifest, not the file.
inline RowMatrixF read_embedding_array(const std::string& path) {
  auto m = npy::read_matrix<float>(path);
  if (m.rows() > 0 && m.cols() < 1) throw FormatError(path + ": embedding dimension must be >= 1");
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (!std::isfinite(m(r, c)))
        throw FormatError(path + ": non-finite value at row " + std::to_string(r) + ", column " + std::to_string(c));
  return m;
}

inline EmbeddingMatrix read_matrix(const std::string& path, std::string utterance_id = {},
                                   double stride = kDefaultStride, double offset = 0.0) {
  if (!(stride > 0.0)) throw DataError("stride must be positive");
  return {std::move(utterance_id), read_embedding_array(path), stride, offset};
}

inline void write_matrix(const EmbeddingMatrix& m, const std::string& path) { npy::write_matrix(path, m.data); }

struct ManifestEntry {
  std::string utterance_id;
  std::string embedding_path;  // relative paths resolve against the manifest's directory
  std::int64_t frames = 0;
  std::int64_t dim = 0;
  double stride = kDefaultStride;
  double offset = 0.0;
  std::optional<std::string> audio_path;
  std::optional<std::string> alignment_path;
};

struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestEntry> entries;

  std::string resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    return (path.is_absolute() ? path : base_dir / path).string();
  }

  // Loads the entry's matrix with its manifest timing.
  EmbeddingMatrix load(const ManifestEntry& e) const {
    return read_matrix(resolve(e.embedding_path), e.utterance_id, e.stride, e.offset);
  }

  std::optional<std::int64_t> dim() const {
    if (entries.empty()) return std::nullopt;
    return entries.front().dim;
  }
};

inline nlohmann::json manifest_to_json(const Manifest& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries) {
    nlohmann::json j = {{"utterance_id", e.utterance_id}, {"embedding_path", e.embedding_path},
                        {"frames", e.frames},             {"dim", e.dim},
                        {"stride", e.stride},             {"offset", e.offset}};
    if (e.audio_path) j["audio_path"] = *e.audio_path;
    if (e.alignment_path) j["alignment_path"] = *e.alignment_path;
    entries.push_back(std::move(j));
  }
  return {{"version", kManifestVersion}, {"entries", std::move(entries)}};
}

inline Manifest manifest_from_json(const nlohmann::json& j, std::filesystem::path base_dir = {}) {
  Manifest m;
  m.base_dir = std::move(base_dir);
  try {
    if (j.contains("version") && j.at("version").get<int>() != kManifestVersion)
      throw ParseError("unsupported manifest version " + j.at("version").dump());
    for (const auto& e : j.at("entries")) {
      ManifestEntry entry;
      entry.utterance_id = e.at("utterance_id").get<std::string>();
      entry.embedding_path = e.at("embedding_path").get<std::string>();
      entry.frames = e.at("frames").get<std::int64_t>();
      entry.dim = e.at("dim").get<std::int64_t>();
      entry.stride = e.value("stride", kDefaultStride);
      entry.offset = e.value("offset", 0.0);
      if (e.contains("audio_path")) entry.audio_path = e.at("audio_path").get<std::string>();
      if (e.contains("alignment_path")) entry.alignment_path = e.at("alignment_path").get<std::string>();
      m.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad manifest: ") + e.what());
  }
  return m;
}

inline Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("bad manifest " + path + ": " + e.what());
  }
  return manifest_from_json(j, std::filesystem::path(path).parent_path());
}

inline void write_manifest(const Manifest& m, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write manifest " + path);
  out << manifest_to_json(m).dump(2) << "\n";
}

// Every problem found, rather than the first. An empty result guarantees that loading
// each entry succeeds with the declared shape.
inline std::vector<std::string> validate_manifest(const Manifest& m) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  const auto dim = m.dim();
  for (const auto& e : m.entries) {
    const std::string who = "'" + e.utterance_id + "'";
    if (e.utterance_id.empty()) out.push_back("entry with empty utterance_id");
    if (!seen.insert(e.utterance_id).second) out.push_back("duplicate utterance_id " + who);
    if (dim && e.dim != *dim)
      out.push_back("dim mismatch: " + who + " has dim " + std::to_string(e.dim) + ", expected " + std::to_string(*dim));
    if (e.dim < 1) out.push_back(who + ": dim must be >= 1");
    if (e.frames < 0) out.push_back(who + ": negative frame count");
    if (!(e.stride > 0.0)) out.push_back(who + ": stride must be positive");
    if (!(e.offset >= 0.0)) out.push_back(who + ": offset must be non-negative");
    const auto path = m.resolve(e.embedding_path);
    try {
      // Full read: also catches truncation, dtype and non-finite values.
      const auto arr = read_embedding_array(path);
      if (arr.rows() != e.frames)
        out.push_back("frames mismatch: " + who + " declares " + std::to_string(e.frames) + ", file has " +
                      std::to_string(arr.rows()));
      if (arr.cols() != e.dim)
        out.push_back("dim mismatch: " + who + " declares " + std::to_string(e.dim) + ", file has " +
                      std::to_string(arr.cols()));
    } catch (const Error& err) {
      out.push_back(who + ": " + err.what());
    }
  }
  return out;
}

}  // namespace phonalign
