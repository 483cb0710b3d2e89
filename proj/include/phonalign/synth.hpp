#pragma once

#include "phonalign/alignment_json.hpp"
#include "phonalign/embedding.hpp"
#include "phonalign/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace phonalign {

// Gaussian-cluster corpus: one centroid per class on a sphere of radius `separation`,
// frames = centroid + N(0, I), labels in piecewise-constant runs of at least
// `min_run` frames with geometrically distributed extra length.
struct SynthConfig {
  int classes = 10;
  int dim = 64;
  int utterances = 50;
  int frames_per_utterance = 200;
  double separation = 20.0;
  std::uint64_t seed = 7;
  double stride = kDefaultStride;
  int min_run = 3;
  double run_stop = 0.2;  // per-frame probability of ending a run after min_run

  void validate() const {
    if (classes < 1) throw DataError("classes must be at least 1");
    if (dim < 1) throw DataError("dim must be at least 1");
    if (utterances < 0) throw DataError("utterances must be non-negative");
    if (frames_per_utterance < 0) throw DataError("frames per utterance must be non-negative");
    if (!(separation > 0.0)) throw DataError("separation must be positive");
    if (!(stride > 0.0)) throw DataError("stride must be positive");
    if (min_run < 1) throw DataError("minimum run length must be at least 1");
    if (!(run_stop > 0.0 && run_stop <= 1.0)) throw DataError("run stop probability must lie in (0, 1]");
  }
};

struct SynthUtterance {
  EmbeddingMatrix embeddings;
  Alignment reference;
};

inline std::string synth_label(int c, int classes) {
  const int width = classes > 100 ? 3 : 2;
  char buf[16];
  std::snprintf(buf, sizeof buf, "p%0*d", width, c);
  return buf;
}

inline std::vector<SynthUtterance> generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  RowMatrixD centroids(cfg.classes, cfg.dim);
  for (int c = 0; c < cfg.classes; ++c) {
    double norm = 0.0;
    while (!(norm > 1e-12)) {
      for (int d = 0; d < cfg.dim; ++d) centroids(c, d) = rng.normal();
      norm = centroids.row(c).norm();
    }
    centroids.row(c) *= cfg.separation / norm;
  }

  std::vector<SynthUtterance> out;
  for (int u = 0; u < cfg.utterances; ++u) {
    char id[32];
    std::snprintf(id, sizeof id, "utt%04d", u);
    const int frames = cfg.frames_per_utterance;
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(frames));
    int current = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.classes)));
    while (static_cast<int>(labels.size()) < frames) {
      int run = cfg.min_run;
      while (rng.uniform() >= cfg.run_stop) ++run;
      const int remaining = frames - static_cast<int>(labels.size());
      // A tail shorter than min_run joins the current run.
      if (remaining - run < cfg.min_run) run = remaining;
      labels.insert(labels.end(), static_cast<std::size_t>(run), current);
      if (cfg.classes > 1) {
        const int step = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.classes - 1)));
        current = (current + step) % cfg.classes;
      }
    }

    SynthUtterance utt;
    utt.embeddings.utterance_id = id;
    utt.embeddings.stride = cfg.stride;
    utt.embeddings.data.resize(frames, cfg.dim);
    for (int t = 0; t < frames; ++t)
      for (int d = 0; d < cfg.dim; ++d)
        utt.embeddings.data(t, d) = static_cast<float>(centroids(labels[static_cast<std::size_t>(t)], d) + rng.normal());

    utt.reference.utterance_id = id;
    utt.reference.duration = static_cast<double>(frames) * cfg.stride;
    for (int t = 0; t < frames;) {
      int e = t;
      while (e < frames && labels[static_cast<std::size_t>(e)] == labels[static_cast<std::size_t>(t)]) ++e;
      utt.reference.segments.push_back({synth_label(labels[static_cast<std::size_t>(t)], cfg.classes),
                                        static_cast<double>(t) * cfg.stride, static_cast<double>(e) * cfg.stride,
                                        std::nullopt});
      t = e;
    }
    out.push_back(std::move(utt));
  }
  return out;
}

// Writes embeddings/<id>.npy, alignments/<id>.json and manifest.json under `out_dir`.
inline Manifest write_synthetic(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  const auto corpus = generate_synthetic(cfg);
  fs::create_directories(out_dir / "embeddings");
  fs::create_directories(out_dir / "alignments");
  Manifest manifest;
  manifest.base_dir = out_dir;
  for (const auto& u : corpus) {
    const auto& id = u.embeddings.utterance_id;
    const std::string emb = "embeddings/" + id + ".npy";
    const std::string ali = "alignments/" + id + ".json";
    write_matrix(u.embeddings, (out_dir / emb).string());
    write_file(out_dir / ali, write_alignment_json(u.reference));
    manifest.entries.push_back({id, emb, u.embeddings.frames(), u.embeddings.dim(), cfg.stride, 0.0, std::nullopt, ali});
  }
  write_manifest(manifest, (out_dir / "manifest.json").string());
  return manifest;
}

}  // namespace phonalign
