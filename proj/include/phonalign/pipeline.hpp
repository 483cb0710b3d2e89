#pragma once

// End-to-end workflows behind the command-line tool: training a reducer + classifier from
// embeddings and reference alignments, aligning new embeddings, and scoring alignments.

#include "phonalign/alignment_json.hpp"
#include "phonalign/config.hpp"
#include "phonalign/embedding.hpp"
#include "phonalign/frame_labeling.hpp"
#include "phonalign/knn.hpp"
#include "phonalign/metrics.hpp"
#include "phonalign/parallel.hpp"
#include "phonalign/pca.hpp"
#include "phonalign/sampa.hpp"
#include "phonalign/segmenter.hpp"
#include "phonalign/textgrid.hpp"
#include "phonalign/timit.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace phonalign {

namespace fs = std::filesystem;

inline constexpr int kReportVersion = 1;

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << contents;
  if (!out) throw Error("write failed: " + path.string());
}

// How reference label files are interpreted.
struct AlignmentReadOptions {
  std::optional<std::string> tier;  // TextGrid tier; first interval tier when unset
  double sample_rate = kTimitSampleRate;  // .PHN and SCRIBE sample indexing
  bool fold_timit = false;                // apply the 61 -> 39 folding to .PHN files
};

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Known alignment file kinds by extension: .json, .textgrid, .phn (TIMIT), .sam (SCRIBE SAMPA).
inline bool is_alignment_file(const fs::path& p) {
  const auto ext = lower(p.extension().string());
  return ext == ".json" || ext == ".textgrid" || ext == ".phn" || ext == ".sam";
}

// Loads one alignment. Utterance ids come from the JSON payload when present, else the
// file stem.
inline Alignment load_alignment_file(const fs::path& path, const AlignmentReadOptions& opt = {}) {
  const auto ext = lower(path.extension().string());
  const auto stem = path.stem().string();
  const auto contents = read_file(path);
  try {
    Alignment a;
    if (ext == ".json") {
      a = read_alignment_json(contents);
      if (a.utterance_id.empty()) a.utterance_id = stem;
    } else if (ext == ".textgrid") {
      a = read_textgrid(contents, opt.tier, stem);
    } else if (ext == ".phn") {
      a = parse_timit_phn(contents, opt.sample_rate, stem);
      if (opt.fold_timit) a = fold_timit_39(a);
    } else if (ext == ".sam") {
      a = parse_scribe_labels(contents, opt.sample_rate, arpabet_inventory(), default_sampa_table(), stem).alignment;
    } else {
      throw DataError("unrecognised alignment file type '" + ext + "'");
    }
    require_valid(a);
    return a;
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// Reads every alignment file in a directory (sorted by name), or the alignment_path of
// every entry when `source` is a manifest.
inline std::vector<Alignment> load_alignments(const fs::path& source, const AlignmentReadOptions& opt = {}) {
  std::vector<Alignment> out;
  if (fs::is_directory(source)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(source))
      if (e.is_regular_file() && is_alignment_file(e.path())) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back(load_alignment_file(f, opt));
    return out;
  }
  const auto manifest = read_manifest(source.string());
  for (const auto& e : manifest.entries) {
    if (!e.alignment_path) throw DataError("manifest entry '" + e.utterance_id + "' has no alignment_path");
    auto a = load_alignment_file(manifest.resolve(*e.alignment_path), opt);
    a.utterance_id = e.utterance_id;
    out.push_back(std::move(a));
  }
  return out;
}

// ---------------------------------------------------------------------------------------
// train

struct TrainedModel {
  PipelineConfig config;
  PcaModel pca;
  KnnClassifier knn;
};

inline void save_model(const TrainedModel& m, const fs::path& dir) {
  fs::create_directories(dir);
  write_file(dir / "config.json", config_to_json(m.config).dump(2) + "\n");
  std::string inv;
  for (const auto& s : m.knn.inventory.symbols()) inv += s + "\n";
  write_file(dir / "inventory.txt", inv);
  save_pca(m.pca, dir);
  save_knn(m.knn, dir);
}

inline TrainedModel load_model(const fs::path& dir) {
  TrainedModel m;
  try {
    m.config = config_from_json(nlohmann::json::parse(read_file(dir / "config.json")));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("bad config.json: " + std::string(e.what()));
  }
  m.pca = load_pca(dir);
  m.knn = load_knn(dir);
  if (m.pca.output_dim() != m.knn.dim())
    throw DataError("model in " + dir.string() + ": PCA output dim " + std::to_string(m.pca.output_dim()) +
                    " does not match classifier dim " + std::to_string(m.knn.dim()));
  return m;
}

struct TrainReport {
  nlohmann::json json;
  double self_consistency = 0.0;
};

inline std::string join(const std::vector<std::string>& items, const std::string& sep = "; ") {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : sep) + s;
  return out;
}

// Fraction of training rows whose own classifier argmax equals their label.
inline double self_consistency(const KnnClassifier& clf, std::size_t jobs) {
  const auto pg = predict_posteriorgram(clf, clf.train_X, 1.0, 0.0, jobs);
  const auto decoded = decode_frames(pg);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < decoded.size(); ++i) agree += decoded[i].phone == clf.train_y[i];
  return decoded.empty() ? 0.0 : static_cast<double>(agree) / static_cast<double>(decoded.size());
}

// label -> balance -> PCA -> KNN. References come from `alignments_dir/<utterance_id>.<ext>`
// when a directory is given, else from each manifest entry's alignment_path.
inline TrainReport train(const Manifest& manifest, const std::optional<fs::path>& alignments_dir,
                         const PipelineConfig& config, const fs::path& out_dir,
                         const AlignmentReadOptions& read_opt = {}, std::size_t jobs = 1) {
  config.validate();
  if (manifest.entries.empty()) throw DataError("manifest has no entries");
  if (auto v = validate_manifest(manifest); !v.empty()) throw DataError("invalid manifest: " + join(v));

  std::vector<Alignment> refs;
  refs.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    std::optional<fs::path> path;
    if (alignments_dir) {
      for (const char* ext : {".json", ".TextGrid", ".textgrid", ".PHN", ".phn", ".sam"}) {
        const auto p = *alignments_dir / (e.utterance_id + ext);
        if (fs::exists(p)) {
          path = p;
          break;
        }
      }
    } else if (e.alignment_path) {
      path = manifest.resolve(*e.alignment_path);
    }
    if (!path || !fs::exists(*path)) throw DataError("no reference alignment for utterance '" + e.utterance_id + "'");
    try {
      auto a = load_alignment_file(*path, read_opt);
      a.utterance_id = e.utterance_id;
      refs.push_back(std::move(a));
    } catch (const Error& err) {
      throw DataError("utterance '" + e.utterance_id + "': " + err.what());
    }
  }

  std::set<std::string> labels;
  for (const auto& a : refs)
    for (const auto& s : a.segments) labels.insert(s.label);
  const PhoneInventory inventory(std::vector<std::string>(labels.begin(), labels.end()));
  if (inventory.empty()) throw DataError("reference alignments contain no segments");

  std::vector<LabeledFrameDataset> parts(manifest.entries.size());
  parallel_for(parts.size(), jobs, [&](std::size_t i) {
    auto m = manifest.load(manifest.entries[i]);
    if (config.stride) m.stride = *config.stride;
    try {
      parts[i] = label_frames(m, refs[i], inventory);
    } catch (const Error& err) {
      throw DataError("utterance '" + m.utterance_id + "': " + err.what());
    }
  });
  LabeledFrameDataset all;
  all.inventory = inventory;
  std::size_t total_frames = 0;
  for (const auto& e : manifest.entries) total_frames += static_cast<std::size_t>(e.frames);
  for (const auto& p : parts) append(all, p);
  if (all.empty()) throw DataError("no frame overlaps any reference segment");

  const auto balanced = balance(all, config.per_class, config.seed);
  auto pca = fit_pca(balanced.dataset.X, config.variance_target);
  pca.seed = config.seed;
  const RowMatrixD reduced = transform(pca, balanced.dataset.X);
  auto knn = fit_knn(reduced, balanced.dataset.y, inventory, config.knn_k);

  TrainedModel model{config, std::move(pca), std::move(knn)};
  save_model(model, out_dir);

  TrainReport report;
  report.self_consistency = self_consistency(model.knn, jobs);
  nlohmann::json before = nlohmann::json::object();
  nlohmann::json after = nlohmann::json::object();
  const auto counts_after = balanced.dataset.class_counts();
  for (std::size_t c = 0; c < inventory.size(); ++c) {
    before[inventory.symbol(static_cast<PhoneId>(c))] = balanced.counts_before[c];
    if (counts_after[c] != 0) after[inventory.symbol(static_cast<PhoneId>(c))] = counts_after[c];
  }
  const auto& ratio = model.pca.explained_ratio;
  report.json = {
      {"version", kReportVersion},
      {"utterances", manifest.entries.size()},
      {"frames_total", total_frames},
      {"frames_labeled", all.size()},
      {"class_counts_before", before},
      {"class_counts_after", after},
      {"absent_classes", balanced.absent_classes},
      {"per_class", balanced.per_class},
      {"pca",
       {{"D", model.pca.input_dim()},
        {"K", model.pca.output_dim()},
        {"retained_variance", model.pca.retained_variance()},
        {"explained_ratio", std::vector<double>(ratio.data(), ratio.data() + ratio.size())}}},
      {"knn", {{"k", model.knn.k}, {"M", model.knn.size()}}},
      {"self_consistency", report.self_consistency},
      {"config", config_to_json(config)},
  };
  write_file(out_dir / "train_report.json", report.json.dump(2) + "\n");
  return report;
}

// ---------------------------------------------------------------------------------------
// align

enum class AlignmentFormat { textgrid, json };

struct AlignSummary {
  std::vector<fs::path> written;
  std::vector<std::string> failures;  // "<utterance>: <reason>"
};

inline Alignment align_matrix(const TrainedModel& model, const EmbeddingMatrix& m, double threshold) {
  const auto reduced = transform(model.pca, m.data);
  const auto pg = predict_posteriorgram(model.knn, reduced, m.stride, m.offset);
  return segment(pg, threshold, m.utterance_id);
}

// Aligns every manifest entry. Dimension disagreement with the model fails up front;
// other per-utterance problems are collected and the remaining utterances still run.
inline AlignSummary align(const TrainedModel& model, const Manifest& manifest, const fs::path& out_dir,
                          AlignmentFormat format, std::optional<double> threshold = std::nullopt,
                          std::optional<double> stride = std::nullopt, std::size_t jobs = 1) {
  const double thr = threshold.value_or(model.config.threshold);
  if (!(thr >= 0.0 && thr <= 1.0)) throw DataError("threshold must lie in [0, 1]");
  const auto stride_override = stride ? stride : model.config.stride;
  for (const auto& e : manifest.entries)
    if (e.dim != model.pca.input_dim())
      throw DataError("utterance '" + e.utterance_id + "' has embedding dim " + std::to_string(e.dim) +
                      " but the model expects D=" + std::to_string(model.pca.input_dim()) +
                      " (reduced to K=" + std::to_string(model.pca.output_dim()) + ")");
  fs::create_directories(out_dir);
  AlignSummary summary;
  std::vector<std::optional<fs::path>> written(manifest.entries.size());
  std::vector<std::string> errors(manifest.entries.size());
  parallel_for(manifest.entries.size(), jobs, [&](std::size_t i) {
    const auto& e = manifest.entries[i];
    try {
      auto m = manifest.load(e);
      if (m.dim() != model.pca.input_dim() && m.frames() > 0)
        throw DataError("embedding dim " + std::to_string(m.dim()) + " does not match model D=" +
                        std::to_string(model.pca.input_dim()));
      if (stride_override) m.stride = *stride_override;
      const auto a = align_matrix(model, m, thr);
      const auto path = out_dir / (e.utterance_id + (format == AlignmentFormat::json ? ".json" : ".TextGrid"));
      write_file(path, format == AlignmentFormat::json ? write_alignment_json(a) : write_textgrid(a));
      written[i] = path;
    } catch (const std::exception& err) {
      errors[i] = e.utterance_id + ": " + err.what();
    }
  });
  for (std::size_t i = 0; i < written.size(); ++i) {
    if (written[i]) summary.written.push_back(*written[i]);
    if (!errors[i].empty()) summary.failures.push_back(errors[i]);
  }
  return summary;
}

// ---------------------------------------------------------------------------------------
// eval

inline nlohmann::json eval_to_json(const BoundaryEvalResult& r) {
  nlohmann::json j = {
      {"version", kReportVersion}, {"utterances", r.utterances}, {"tolerance", r.tolerance},
      {"averaging", r.macro ? "macro" : "micro"},
      {"n_ref", r.n_ref},          {"n_hyp", r.n_hyp},           {"n_hit", r.n_hit},
      {"precision", r.precision},  {"recall", r.recall},         {"f1", r.f1},
      {"r_value", r.r_value},
  };
  if (r.pearson) j["pearson"] = *r.pearson;
  return j;
}

inline std::string eval_table(const BoundaryEvalResult& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "utterances  %zu\ntolerance   %.3f s (%s)\nboundaries  ref %zu  hyp %zu  hit %zu\n"
                "%-10s %-10s %-10s %-10s\n%-10.4f %-10.4f %-10.4f %-10.4f\n",
                r.utterances, r.tolerance, r.macro ? "macro" : "micro", r.n_ref, r.n_hyp, r.n_hit, "P", "R", "F1",
                "R-value", r.precision, r.recall, r.f1, r.r_value);
  std::string out = buf;
  if (r.pearson) {
    std::snprintf(buf, sizeof buf, "pearson     %.4f\n", *r.pearson);
    out += buf;
  }
  return out;
}

inline BoundaryEvalResult evaluate_sources(const fs::path& refs, const fs::path& hyps, const EvalOptions& opt,
                                           const AlignmentReadOptions& ref_opt = {},
                                           const AlignmentReadOptions& hyp_opt = {}) {
  return evaluate_corpus(pair_by_utterance(load_alignments(refs, ref_opt), load_alignments(hyps, hyp_opt)), opt);
}

}  // namespace phonalign
