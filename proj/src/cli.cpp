#include "seep/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "seep/baselines.hpp"
#include "seep/dynamics.hpp"
#include "seep/metrics.hpp"
#include "seep/pca.hpp"
#include "seep/propagation.hpp"
#include "seep/report.hpp"
#include "seep/run_export.hpp"
#include "seep/synth.hpp"

namespace seep {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

// Raw flag values; turned into a PropagationConfig only after parsing succeeds.
struct DetectFlags {
  std::size_t k = 5;
  double tau = 1e-8;
  double seed_fraction = 0.01;
  std::string scorer = "inv";
  std::string density = "kde";
  double bandwidth = 1.0;
  std::size_t gmm_components = 2;
  std::uint64_t gmm_seed = 0;
  std::string density_space = "pca:8";
  std::size_t max_iterations = 0;
  bool refit_density = false;

  void add_to(CLI::App& app) {
    app.add_option("--k", k, "Neighbours per query (reference setting: 5)")->capture_default_str();
    app.add_option("--tau", tau, "Termination threshold on mean density (reference setting: 1e-8)")
        ->capture_default_str();
    app.add_option("--seed-fraction", seed_fraction,
                   "Fraction of instances used as seeds (reference setting: top 1%)")
        ->capture_default_str();
    app.add_option("--scorer", scorer, "Seed scorer: inv (inv-confidence, reference) or mean")
        ->check(CLI::IsMember({"inv", "mean"}))
        ->capture_default_str();
    app.add_option("--density", density, "Stopping density: kde (reference) or gmm (ablation)")
        ->check(CLI::IsMember({"kde", "gmm"}))
        ->capture_default_str();
    app.add_option("--bandwidth", bandwidth, "Gaussian KDE bandwidth h (reference setting: 1.0)")
        ->capture_default_str();
    app.add_option("--gmm-components", gmm_components, "GMM component count")
        ->capture_default_str();
    app.add_option("--gmm-seed", gmm_seed, "GMM k-means++ initialisation seed")->capture_default_str();
    app.add_option("--density-space", density_space,
                   "Space for the density model: pca:D or raw")
        ->capture_default_str();
    app.add_option("--max-iterations", max_iterations,
                   "Propagation safety cap; 0 means n_instances")
        ->capture_default_str();
    app.add_flag("--refit-density", refit_density,
                 "Refit the density on the flagged set after every step (experimental; the reference fits once)");
  }

  [[nodiscard]] PropagationConfig config() const {
    PropagationConfig c;
    c.k = k;
    c.tau = tau;
    c.seed_fraction = seed_fraction;
    c.scorer = scorer == "mean" ? ScorerKind::mean_confidence : ScorerKind::inv_confidence;
    c.density = density == "gmm" ? DensityKind::gmm : DensityKind::kde;
    c.bandwidth = bandwidth;
    c.gmm_components = gmm_components;
    c.gmm_seed = gmm_seed;
    c.density_space = DensitySpace::parse(density_space);
    if (max_iterations > 0) c.max_iterations = max_iterations;
    c.refit_density = refit_density;
    c.validate();
    return c;
  }
};

json metrics_or_null(const IndexSet& flagged, const RunExport& run) {
  return run.mask ? to_json(detection_metrics(flagged, *run.mask)) : json(nullptr);
}

json detection_summary(const RunExport& run, const PipelineResult& p, const PropagationConfig& c) {
  const DetectionResult& d = p.detection;
  json iterations = json::array();
  for (const auto& it : d.iterations) {
    json e = to_json(it);
    e.erase("frontier");
    iterations.push_back(std::move(e));
  }
  return json{{"n_instances", run.manifest.n_instances},
              {"config", to_json(c)},
              {"n_seeds", d.seeds.size()},
              {"n_flagged", d.flagged.size()},
              {"seed_p_mu", std::exp(d.seed_log_p_mu)},
              {"seed_log_p_mu", d.seed_log_p_mu},
              {"terminated_by", to_string(d.terminated_by)},
              {"iterations", iterations},
              {"metrics", metrics_or_null(d.flagged, run)}};
}

void write_detection(const fs::path& out, const RunExport& run, const PipelineResult& p,
                     const PropagationConfig& c) {
  ensure_dir(out);
  json report = detection_summary(run, p, c);
  report["command"] = "detect";
  write_json_file(out / "report.json", report);
  binary::write_u32(out / "flagged.u32", p.detection.flagged);
  binary::write_u32(out / "seeds.u32", p.detection.seeds);

  std::string trace;
  for (const auto& it : p.detection.iterations) trace += to_json(it).dump() + "\n";
  write_text_file(out / "trace.jsonl", trace);

  const ScoreVector mean = mean_confidence(run.dynamics);
  const std::vector<double> sd = confidence_std(run.dynamics);
  std::string csv = "instance_id,score,mean_confidence,std_confidence\n";
  for (std::size_t i = 0; i < run.manifest.n_instances; ++i) {
    csv += std::to_string(i) + "," + num(p.scores.scores[i]) + "," + num(mean.scores[i]) + "," +
           num(sd[i]) + "\n";
  }
  write_text_file(out / "scores.csv", csv);
}

int cmd_detect(const std::string& run_dir, const fs::path& out_dir, const DetectFlags& flags,
               std::ostream& out) {
  const PropagationConfig config = flags.config();
  const RunExport run = read_run_export(run_dir);
  const PipelineResult p = run_pipeline(run, config);
  write_detection(out_dir, run, p, config);
  out << "flagged " << p.detection.flagged.size() << " of " << run.manifest.n_instances
      << " instances (" << p.detection.iterations.size() << " iterations, terminated by "
      << to_string(p.detection.terminated_by) << ")\n";
  return kExitOk;
}

int cmd_ablate(const std::string& run_dir, const fs::path& out_dir, const DetectFlags& flags,
               std::ostream& out) {
  const PropagationConfig config = flags.config();
  const RunExport run = read_run_export(run_dir);
  const PipelineResult p = run_pipeline(run, config);
  const std::size_t discard = p.detection.flagged.size();
  const IndexSet dyn = dynamics_only_filter(p.scores, discard);

  ensure_dir(out_dir);
  json report{{"command", "ablate"},
              {"discard_count", discard},
              {"seep", detection_summary(run, p, config)},
              {"dynamics_only",
               {{"n_flagged", dyn.size()}, {"scorer", to_string(config.scorer)},
                {"metrics", metrics_or_null(dyn, run)}}}};
  write_json_file(out_dir / "ablation.json", report);
  binary::write_u32(out_dir / "seep_flagged.u32", p.detection.flagged);
  binary::write_u32(out_dir / "dynamics_only_flagged.u32", dyn);
  out << "discard count " << discard << " for both SEEP and dynamics-only\n";
  return kExitOk;
}

struct ClusteringFlags {
  std::size_t discard_count = 0;
  std::size_t pca_dim = 10;
  std::uint64_t seed = 0;
  std::size_t restarts = 5;
};

int cmd_baseline_clustering(const std::string& run_dir, const fs::path& out_dir,
                            const ClusteringFlags& flags, std::ostream& out) {
  if (flags.pca_dim < 1) throw ValidationError("--pca-dim must be >= 1");
  if (flags.restarts < 1) throw ValidationError("--restarts must be >= 1");
  const RunExport run = read_run_export(run_dir);
  ClusteringBaselineConfig c;
  c.discard_count = flags.discard_count;
  c.pca_dim = flags.pca_dim;
  c.rng_seed = flags.seed;
  c.n_restarts = flags.restarts;
  const IndexSet flagged = activation_clustering(run.embeddings, run.labels, c);
  ensure_dir(out_dir);
  json report{{"command", "baseline clustering"},
              {"config",
               {{"discard_count", c.discard_count}, {"pca_dim", c.pca_dim},
                {"rng_seed", c.rng_seed}, {"n_restarts", c.n_restarts}}},
              {"n_flagged", flagged.size()},
              {"metrics", metrics_or_null(flagged, run)}};
  write_json_file(out_dir / "report.json", report);
  binary::write_u32(out_dir / "flagged.u32", flagged);
  out << "clustering baseline flagged " << flagged.size() << " instances\n";
  return kExitOk;
}

struct SynthFlags {
  std::string preset = "separable";
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<double> rate;
  std::optional<double> overlap;
  std::optional<double> separation;
  std::optional<std::size_t> n;
};

int cmd_synth(const fs::path& out_dir, const SynthFlags& f, std::ostream& out, std::ostream& err) {
  SyntheticConfig c = f.preset == "mixed"   ? mixed_preset(0)
                      : f.preset == "benign" ? benign_preset(0)
                                             : separable_preset(0);
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    if (!in) throw ValidationError("cannot read config file " + f.config_file);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ValidationError("config file is not valid JSON: " + std::string(e.what()));
    }
    json merged = to_json(c);
    merged.update(j);
    c = synthetic_config_from_json(merged);
  }
  if (f.seed) c.rng_seed = *f.seed;
  if (f.rate) c.poisoning_rate = *f.rate;
  if (f.overlap) c.overlap_fraction = *f.overlap;
  if (f.separation) c.cluster_separation = *f.separation;
  if (f.n) c.n_instances = *f.n;
  c.validate();

  const SyntheticRun s = generate_run(c);
  for (const auto& w : s.warnings) err << "warning: " << w << "\n";
  write_run_export(s.run, out_dir);
  write_json_file(out_dir / "synth_config.json", to_json(c));
  out << "wrote synthetic run with " << c.n_instances << " instances to " << out_dir.string() << "\n";
  return kExitOk;
}

int cmd_eval(const fs::path& dir, const std::string& out_file, std::ostream& out) {
  fs::path pred_dir = dir;
  if (!fs::exists(dir / "manifest.json") && fs::exists(dir / "predictions" / "manifest.json")) {
    pred_dir = dir / "predictions";
  } else if (fs::exists(dir / "predictions" / "manifest.json") &&
             fs::exists(dir / "dynamics.f32")) {
    pred_dir = dir / "predictions";  // a run-export directory
  }
  const PredictionFile f = read_prediction_file(pred_dir);
  json report = to_json(evaluate_predictions(f));
  report["command"] = "eval";
  if (out_file.empty()) {
    out << report.dump(2) << "\n";
  } else {
    write_json_file(out_file, report);
  }
  return kExitOk;
}

int cmd_viz_export(const std::string& run_dir, const fs::path& out_file, const DetectFlags& flags,
                   std::ostream& out) {
  const PropagationConfig config = flags.config();
  const RunExport run = read_run_export(run_dir);
  const PipelineResult p = run_pipeline(run, config);
  const std::size_t n = run.manifest.n_instances;

  Matrix<double> coords(n, 2, 0.0);
  const Matrix<double> x = to_double(run.embeddings);
  if (n >= 2) {
    const std::size_t r = std::min<std::size_t>({2, x.cols(), n});
    const Matrix<double> z = pca_project(pca_fit(x, r), x);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < r; ++j) coords(i, j) = z(i, j);
  }
  std::vector<char> seed(n, 0), flagged(n, 0);
  for (Index i : p.detection.seeds) seed[i] = 1;
  for (Index i : p.detection.flagged) flagged[i] = 1;

  std::string csv = run.mask ? "instance_id,pc1,pc2,is_seed,is_flagged,is_poison\n"
                             : "instance_id,pc1,pc2,is_seed,is_flagged\n";
  for (std::size_t i = 0; i < n; ++i) {
    csv += std::to_string(i) + "," + num(coords(i, 0)) + "," + num(coords(i, 1)) + "," +
           (seed[i] ? "1" : "0") + "," + (flagged[i] ? "1" : "0");
    if (run.mask) csv += (*run.mask)[i] ? ",1" : ",0";
    csv += "\n";
  }
  if (out_file.has_parent_path()) ensure_dir(out_file.parent_path());
  write_text_file(out_file, csv);
  out << "wrote " << n << " rows to " << out_file.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Backdoor-poisoned training instance detection by seed-and-propagate", "seep"};
  app.require_subcommand(1);

  std::string run_dir;
  std::string out_path;
  DetectFlags detect_flags;

  auto* detect = app.add_subcommand("detect", "Score, seed and propagate over a run export");
  detect->add_option("run", run_dir, "Run-export directory")->required();
  detect->add_option("--out", out_path, "Output directory")->required();
  detect_flags.add_to(*detect);

  auto* ablate = app.add_subcommand(
      "ablate", "SEEP versus dynamics-only filtering at an equal discard count");
  ablate->add_option("run", run_dir, "Run-export directory")->required();
  ablate->add_option("--out", out_path, "Output directory")->required();
  detect_flags.add_to(*ablate);

  ClusteringFlags cluster_flags;
  auto* baseline = app.add_subcommand("baseline", "Baseline defenses");
  baseline->require_subcommand(1);
  auto* clustering = baseline->add_subcommand(
      "clustering", "Per-class latent 2-means clustering, discarding a fixed count");
  clustering->add_option("run", run_dir, "Run-export directory")->required();
  clustering->add_option("--out", out_path, "Output directory")->required();
  clustering->add_option("--discard-count", cluster_flags.discard_count,
                         "Instances to discard (protocol: equal to SEEP's flagged count)")
      ->required();
  clustering->add_option("--pca-dim", cluster_flags.pca_dim, "PCA dimension before clustering")
      ->capture_default_str();
  clustering->add_option("--seed", cluster_flags.seed, "k-means++ seed")->capture_default_str();
  clustering->add_option("--restarts", cluster_flags.restarts, "k-means restarts (best inertia)")
      ->capture_default_str();

  SynthFlags synth_flags;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic poisoned run export");
  synth->add_option("--out", out_path, "Output run-export directory")->required();
  synth->add_option("--preset", synth_flags.preset, "separable, mixed or benign")
      ->check(CLI::IsMember({"separable", "mixed", "benign"}))
      ->capture_default_str();
  synth->add_option("--config", synth_flags.config_file,
                    "JSON file overriding preset fields (same keys as synth_config.json)");
  synth->add_option("--seed", synth_flags.seed, "Generator seed");
  synth->add_option("--rate", synth_flags.rate, "Poisoning rate");
  synth->add_option("--overlap", synth_flags.overlap, "Fraction of poison placed inside the target cluster");
  synth->add_option("--separation", synth_flags.separation,
                    "Poison-to-target centroid distance in cluster std units");
  synth->add_option("--n", synth_flags.n, "Number of instances");

  std::string eval_dir;
  auto* eval = app.add_subcommand("eval", "CACC / ASR / benign-ASR gap from prediction files");
  eval->add_option("predictions", eval_dir, "Predictions directory (or a run export containing one)")
      ->required();
  eval->add_option("--out", out_path, "Write the JSON report here instead of stdout");

  auto* viz = app.add_subcommand("viz-export", "Two-component PCA CSV with seed/flag/poison columns");
  viz->add_option("run", run_dir, "Run-export directory")->required();
  viz->add_option("--out", out_path, "Output CSV file")->required();
  detect_flags.add_to(*viz);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (detect->parsed()) return cmd_detect(run_dir, out_path, detect_flags, out);
    if (ablate->parsed()) return cmd_ablate(run_dir, out_path, detect_flags, out);
    if (clustering->parsed()) return cmd_baseline_clustering(run_dir, out_path, cluster_flags, out);
    if (synth->parsed()) return cmd_synth(out_path, synth_flags, out, err);
    if (eval->parsed()) return cmd_eval(eval_dir, out_path, out);
    if (viz->parsed()) return cmd_viz_export(run_dir, out_path, detect_flags, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace seep
