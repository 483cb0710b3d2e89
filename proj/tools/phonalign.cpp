// phonalign: text-independent phone alignment from frame embeddings.
//
//   phonalign synth   --out DIR [--classes --dim --utterances --frames --separation --seed]
//   phonalign train   --manifest M [--alignments DIR] --out MODEL [--variance --k --per-class --seed ...]
//   phonalign align   --model MODEL --manifest M --out DIR [--format textgrid|json --threshold]
//   phonalign eval    --ref SRC --hyp SRC [--tolerance --macro --exclude-endpoints --pearson --report F]
//   phonalign inspect {model DIR | manifest M | npy FILE}
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 internal error.

#include "phonalign/phonalign.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <thread>

namespace {

using namespace phonalign;

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

bool verbose() {
  static const bool v = [] {
    const char* level = std::getenv("PHONALIGN_LOG_LEVEL");
    return !(level && (std::string(level) == "quiet" || std::string(level) == "error"));
  }();
  return v;
}

void info(const std::string& msg) {
  if (verbose()) std::cerr << msg << "\n";
}

struct CommonOptions {
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string tier;
  double sample_rate = kTimitSampleRate;
  bool fold39 = false;

  AlignmentReadOptions read_options() const {
    AlignmentReadOptions o;
    if (!tier.empty()) o.tier = tier;
    o.sample_rate = sample_rate;
    o.fold_timit = fold39;
    return o;
  }
};

void add_read_options(CLI::App* cmd, CommonOptions& c) {
  cmd->add_option("--tier", c.tier, "TextGrid tier to read (default: first interval tier)");
  cmd->add_option("--sample-rate", c.sample_rate, "Sample rate of .PHN/.sam label files")->check(CLI::PositiveNumber);
  cmd->add_flag("--fold39", c.fold39, "Fold TIMIT .PHN labels from 61 to 39 phones");
}

int run_synth(const SynthConfig& cfg, const std::string& out) {
  const auto m = write_synthetic(cfg, out);
  info("wrote " + std::to_string(m.entries.size()) + " utterances to " + out);
  return kOk;
}

int run_train(const std::string& manifest_path, const std::string& alignments, const PipelineConfig& cfg,
              const std::string& out, const std::string& report_path, const CommonOptions& c) {
  const auto manifest = read_manifest(manifest_path);
  std::optional<fs::path> dir;
  if (!alignments.empty()) dir = alignments;
  const auto report = train(manifest, dir, cfg, out, c.read_options(), c.jobs);
  if (!report_path.empty()) write_file(report_path, report.json.dump(2) + "\n");
  info("trained on " + std::to_string(report.json["utterances"].get<std::size_t>()) + " utterances: K=" +
       std::to_string(report.json["pca"]["K"].get<long>()) + " of D=" + std::to_string(report.json["pca"]["D"].get<long>()) +
       ", " + std::to_string(report.json["per_class"].get<std::size_t>()) + " frames per class, self-consistency " +
       std::to_string(report.self_consistency));
  std::cout << report.json.dump(2) << "\n";
  return kOk;
}

int run_align(const std::string& model_dir, const std::string& manifest_path, const std::string& out,
              const std::string& format, std::optional<double> threshold, std::optional<double> stride,
              const CommonOptions& c) {
  const auto model = load_model(model_dir);
  const auto manifest = read_manifest(manifest_path);
  const auto summary = align(model, manifest, out, format == "json" ? AlignmentFormat::json : AlignmentFormat::textgrid,
                             threshold, stride, c.jobs);
  for (const auto& f : summary.failures) std::cerr << "error: " << f << "\n";
  info("aligned " + std::to_string(summary.written.size()) + " of " + std::to_string(manifest.entries.size()) +
       " utterances into " + out);
  return summary.failures.empty() ? kOk : kDataError;
}

int run_eval(const std::string& ref, const std::string& hyp, const EvalOptions& opt, const std::string& report_path,
             const CommonOptions& c) {
  const auto result = evaluate_sources(ref, hyp, opt, c.read_options(), c.read_options());
  std::cout << eval_table(result);
  if (!report_path.empty()) write_file(report_path, eval_to_json(result).dump(2) + "\n");
  return kOk;
}

int run_inspect(const std::string& what, const std::string& path) {
  if (what == "model") {
    const auto m = load_model(path);
    std::cout << "config    " << config_to_json(m.config).dump() << "\n"
              << "pca       D=" << m.pca.input_dim() << " K=" << m.pca.output_dim()
              << " retained=" << m.pca.retained_variance() << "\n"
              << "knn       k=" << m.knn.k << " M=" << m.knn.size() << " phones=" << m.knn.inventory.size() << "\n";
    return kOk;
  }
  if (what == "manifest") {
    const auto m = read_manifest(path);
    const auto v = validate_manifest(m);
    std::cout << m.entries.size() << " entries, " << v.size() << " violations\n";
    for (const auto& s : v) std::cout << "  " << s << "\n";
    return v.empty() ? kOk : kDataError;
  }
  const auto h = npy::read_header(path);
  std::cout << "dtype " << h.descr << " shape (";
  for (std::size_t i = 0; i < h.shape.size(); ++i) std::cout << (i ? ", " : "") << h.shape[i];
  std::cout << ")" << (h.fortran_order ? " fortran" : "") << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text-independent phone alignment from frame embeddings"};
  app.require_subcommand(1);
  CommonOptions common;

  // synth
  SynthConfig synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic Gaussian-cluster corpus");
  synth_cmd->add_option("--classes", synth.classes, "Number of phone classes")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--dim", synth.dim, "Embedding dimension")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--utterances", synth.utterances, "Number of utterances")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--frames", synth.frames_per_utterance, "Frames per utterance")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--separation", synth.separation, "Centroid sphere radius")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--stride", synth.stride, "Seconds per frame")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  // train
  PipelineConfig cfg;
  std::string variance = "0.95", per_class = "min";
  std::optional<double> stride;
  std::string manifest, alignments, model_out, train_report;
  auto* train_cmd = app.add_subcommand("train", "Fit the reducer and frame classifier");
  train_cmd->add_option("--manifest", manifest, "Embedding manifest (JSON)")->required();
  train_cmd->add_option("--alignments", alignments, "Directory of reference alignments named <utterance_id>.<ext>");
  train_cmd->add_option("--out", model_out, "Model output directory")->required();
  train_cmd->add_option("--variance", variance, "Retained variance fraction, e.g. 0.9, 0.95, 0.99, or 'none'");
  train_cmd->add_option("--k", cfg.knn_k, "Neighbours per query")->check(CLI::PositiveNumber);
  train_cmd->add_option("--per-class", per_class, "Frames per class after balancing: 'min' or a count");
  train_cmd->add_option("--seed", cfg.seed, "Balancing seed");
  train_cmd->add_option("--threshold", cfg.threshold, "Default group-confidence threshold stored with the model")
      ->check(CLI::Range(0.0, 1.0));
  train_cmd->add_option("--tolerance", cfg.tolerance, "Default boundary tolerance stored with the model (seconds)")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--stride", stride, "Override manifest frame stride (seconds)")->check(CLI::PositiveNumber);
  train_cmd->add_option("--report", train_report, "Also write the training report here");
  train_cmd->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
  add_read_options(train_cmd, common);

  // align
  std::string model_dir, align_manifest, align_out, format = "textgrid";
  std::optional<double> threshold, align_stride;
  auto* align_cmd = app.add_subcommand("align", "Align embeddings with a trained model");
  align_cmd->add_option("--model", model_dir, "Model directory")->required();
  align_cmd->add_option("--manifest", align_manifest, "Embedding manifest (JSON)")->required();
  align_cmd->add_option("--out", align_out, "Output directory")->required();
  align_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"textgrid", "json"}));
  align_cmd->add_option("--threshold", threshold, "Group-confidence threshold")->check(CLI::Range(0.0, 1.0));
  align_cmd->add_option("--stride", align_stride, "Override frame stride (seconds)")->check(CLI::PositiveNumber);
  align_cmd->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);

  // eval
  EvalOptions eval_opt;
  std::string ref, hyp, eval_report;
  auto* eval_cmd = app.add_subcommand("eval", "Boundary precision / recall / F1 / R-value");
  eval_cmd->add_option("--ref", ref, "Reference alignments: directory or manifest")->required();
  eval_cmd->add_option("--hyp", hyp, "Hypothesis alignments: directory or manifest")->required();
  eval_cmd->add_option("--tolerance", eval_opt.tolerance, "Match window in seconds")->capture_default_str()->check(CLI::NonNegativeNumber);
  eval_cmd->add_flag("--macro", eval_opt.macro, "Average per-utterance scores instead of pooling counts");
  eval_cmd->add_flag("--exclude-endpoints", eval_opt.exclude_endpoints, "Ignore each utterance's first and last boundary");
  eval_cmd->add_flag("--pearson", eval_opt.pearson, "Also report Pearson correlation of matched boundary times");
  eval_cmd->add_option("--report", eval_report, "Write the JSON report here");
  add_read_options(eval_cmd, common);

  // inspect
  std::string inspect_what, inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "Summarise a model, validate a manifest, or show an NPY header");
  inspect_cmd->add_option("what", inspect_what, "model | manifest | npy")
      ->required()
      ->check(CLI::IsMember({"model", "manifest", "npy"}));
  inspect_cmd->add_option("path", inspect_path, "Path to inspect")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*synth_cmd) return run_synth(synth, synth_out);
    if (*train_cmd) {
      cfg.variance_target = parse_variance(variance);
      cfg.per_class = parse_per_class(per_class);
      cfg.stride = stride;
      cfg.validate();
      return run_train(manifest, alignments, cfg, model_out, train_report, common);
    }
    if (*align_cmd) return run_align(model_dir, align_manifest, align_out, format, threshold, align_stride, common);
    if (*eval_cmd) return run_eval(ref, hyp, eval_opt, eval_report, common);
    if (*inspect_cmd) return run_inspect(inspect_what, inspect_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
