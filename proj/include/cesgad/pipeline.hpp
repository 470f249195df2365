#pragma once

// Experiment orchestration behind the CLI subcommands. Every run writes a
// manifest (re-runnable config echo) into the output directory plus
// command-specific artifacts: CSV tables and JSON reports with stable key
// order. Reports embed one volatile "timestamp" field; everything else is a
// pure function of (inputs, config, seed).
//
// Requires the vendored single-header nlohmann/json on the include path.

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "cesgad/causal.hpp"
#include "cesgad/checkpoint.hpp"
#include "cesgad/config.hpp"
#include "cesgad/dataset_io.hpp"
#include "cesgad/spectral.hpp"
#include "cesgad/synthgen.hpp"
#include "cesgad/trainer.hpp"
#include "cesgad/version.hpp"

namespace cesgad {

using ordered_json = nlohmann::ordered_json;

inline std::string iso_timestamp_utc() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

namespace detail {

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write " + path.string());
  out << content;
  if (!out) throw data_error("failed writing " + path.string());
}

inline void write_json_file(const std::filesystem::path& path,
                            const ordered_json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

// Config echo: every key in declaration order, values as the exact strings a
// config file would contain.
inline ordered_json config_echo(const RunConfig& cfg) {
  ordered_json j = ordered_json::object();
  for (const ConfigField& f : config_fields()) j[f.key] = f.get(cfg);
  return j;
}

inline ordered_json report_header(const RunConfig& cfg,
                                  const std::string& command) {
  ordered_json j = ordered_json::object();
  j["toolkit"] = std::string(kToolkitName);
  j["version"] = std::string(kToolkitVersion);
  j["command"] = command;
  j["timestamp"] = iso_timestamp_utc();
  j["seed"] = cfg.seed;
  return j;
}

// The manifest doubles as a config file: comment lines carry provenance, the
// rest is the verbatim echo, so `--config manifest.cfg` re-runs the job.
inline void write_manifest(const RunConfig& cfg, const std::string& command) {
  std::string out;
  out += "# " + std::string(kToolkitName) + " run manifest\n";
  out += "# version = " + std::string(kToolkitVersion) + "\n";
  out += "# command = " + command + "\n";
  out += "# written = " + iso_timestamp_utc() + "\n";
  out += config_to_string(cfg);
  write_text_file(std::filesystem::path(cfg.out) / "manifest.cfg", out);
}

inline void ensure_out_dir(const RunConfig& cfg) {
  if (cfg.out.empty()) throw config_error("out: output directory must be set");
  std::filesystem::create_directories(cfg.out);
}

inline MultiRelationGraph load_required_dataset(const RunConfig& cfg,
                                                const std::string& command) {
  if (cfg.dataset.empty()) {
    throw config_error(command + ": config key 'dataset' must point at a "
                       "dataset directory");
  }
  return load_dataset(cfg.dataset);
}

inline ordered_json dataset_block(const MultiRelationGraph& g,
                                  const std::string& origin) {
  const DatasetSummary s = summarize_dataset(g);
  ordered_json j = ordered_json::object();
  j["origin"] = origin;
  j["num_nodes"] = s.num_nodes;
  j["num_features"] = s.num_features;
  j["num_relations"] = s.num_relations;
  ordered_json rels = ordered_json::object();
  for (const auto& [name, edges] : s.relation_edges) rels[name] = edges;
  j["relation_edges"] = rels;
  j["labeled"] = s.labeled;
  j["anomalous"] = s.anomalous;
  j["anomaly_rate_labeled"] = s.anomaly_rate_labeled;
  j["anomaly_rate_all"] = s.anomaly_rate_all;
  return j;
}

inline ordered_json split_block(const SplitAssignment& split) {
  ordered_json j = ordered_json::object();
  j["train"] = split.count(SplitTag::Train);
  j["val"] = split.count(SplitTag::Val);
  j["test"] = split.count(SplitTag::Test);
  j["excluded"] = split.count(SplitTag::Excluded);
  return j;
}

inline ordered_json metrics_block(const EvalReport& report) {
  ordered_json j = ordered_json::object();
  j["f1_macro"] = report.f1;
  j["auc"] = report.auc_score;
  ordered_json confusion = ordered_json::object();
  confusion["true_negative"] = report.confusion.counts[0][0];
  confusion["false_positive"] = report.confusion.counts[0][1];
  confusion["false_negative"] = report.confusion.counts[1][0];
  confusion["true_positive"] = report.confusion.counts[1][1];
  j["confusion"] = confusion;
  j["evaluated"] = report.evaluated;
  return j;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Separation artifacts.

inline std::vector<std::string> write_separation(
    const std::filesystem::path& dir, const MultiRelationGraph& g,
    const EdgeSeparation& sep) {
  std::vector<std::string> written;
  auto dump = [&](const EdgeSet& edges, const std::string& file_name) {
    std::string out = "src,dst\n";
    for (const auto& [a, b] : edges.edges()) {
      out += std::to_string(a) + "," + std::to_string(b) + "\n";
    }
    detail::write_text_file(dir / file_name, out);
    written.push_back(file_name);
  };
  for (std::int32_t r = 0; r < g.num_relations(); ++r) {
    dump(sep.plus.at(r), "edges_" + g.relation_name(r) + "_homo.csv");
    dump(sep.minus.at(r), "edges_" + g.relation_name(r) + "_hetero.csv");
  }
  return written;
}

// Loads a separation previously written next to the graph it belongs to and
// checks it is a genuine partition of every relation's edge set.
inline EdgeSeparation load_separation(const std::filesystem::path& dir,
                                      const MultiRelationGraph& g) {
  namespace fs = std::filesystem;
  EdgeSeparation sep;
  for (std::int32_t r = 0; r < g.num_relations(); ++r) {
    const std::string name = g.relation_name(r);
    auto read_part = [&](const std::string& suffix) {
      const fs::path file = dir / ("edges_" + name + suffix + ".csv");
      std::ifstream in(file);
      if (!in) throw data_error("cannot read separation file " + file.string());
      std::string line;
      std::int64_t line_no = 0;
      if (!std::getline(in, line)) {
        throw data_error(file.string() + ": missing header");
      }
      ++line_no;
      std::vector<Edge> edges;
      while (std::getline(in, line)) {
        ++line_no;
        const std::string_view t = trim(line);
        if (t.empty()) continue;
        const auto fields = split_fields(t, ',');
        if (fields.size() != 2) {
          throw data_error(file.string() + ":" + std::to_string(line_no) +
                           ": expected 'src,dst'");
        }
        const std::string ctx = file.string() + ":" + std::to_string(line_no);
        edges.push_back(
            {static_cast<std::int32_t>(parse_int(fields[0], ctx + ": src")),
             static_cast<std::int32_t>(parse_int(fields[1], ctx + ": dst"))});
      }
      try {
        return EdgeSet::from_edges(g.num_nodes(), std::move(edges));
      } catch (const Error& e) {
        throw Error(e.kind(), file.string() + ": " + e.what());
      }
    };
    EdgeSet plus = read_part("_homo");
    EdgeSet minus = read_part("_hetero");
    const EdgeSet& full = g.relation(r);
    if (plus.num_edges() + minus.num_edges() != full.num_edges()) {
      throw data_error("separation for relation '" + name + "' has " +
                       std::to_string(plus.num_edges() + minus.num_edges()) +
                       " edges, the graph has " +
                       std::to_string(full.num_edges()));
    }
    for (const auto& [a, b] : plus.edges()) {
      if (!full.has_edge(a, b)) {
        throw data_error("separation for relation '" + name + "' routes (" +
                         std::to_string(a) + ", " + std::to_string(b) +
                         ") which is not a graph edge");
      }
      if (minus.has_edge(a, b)) {
        throw data_error("separation for relation '" + name + "' routes (" +
                         std::to_string(a) + ", " + std::to_string(b) +
                         ") to both sides");
      }
    }
    for (const auto& [a, b] : minus.edges()) {
      if (!full.has_edge(a, b)) {
        throw data_error("separation for relation '" + name + "' routes (" +
                         std::to_string(a) + ", " + std::to_string(b) +
                         ") which is not a graph edge");
      }
    }
    sep.plus.push_back(std::move(plus));
    sep.minus.push_back(std::move(minus));
  }
  return sep;
}

// Per-relation blocks of the trained encoder's node embedding, used by the
// optional separation-refinement pass.
inline std::vector<Matrix> encoder_relation_blocks(
    const MultiRelationGraph& g, const EdgeSeparation& sep,
    const TrainedModel& model) {
  const EdgeSeparation eff =
      effective_separation(g, sep, model.use_highpass);
  const Matrix z = hybrid_forward(g.features(), eff, model.encoder);
  const Eigen::Index width = z.cols() / g.num_relations();
  std::vector<Matrix> blocks;
  blocks.reserve(g.num_relations());
  for (std::int32_t r = 0; r < g.num_relations(); ++r) {
    blocks.push_back(z.middleCols(static_cast<Eigen::Index>(r) * width, width));
  }
  return blocks;
}

namespace detail {

// Stage-1 separation, optionally refined once: train on the stage-1 routing,
// re-run the separation with the encoder's embeddings, and return the refined
// routing for the final training run.
inline EdgeSeparation computed_separation(const MultiRelationGraph& g,
                                          const RunConfig& cfg) {
  const SeparationConfig scfg = separation_config(cfg);
  EdgeSeparation sep = run_separation(g, scfg).separation;
  if (cfg.refine_separation) {
    const SplitAssignment split = split_nodes(g, split_ratios(cfg), cfg.seed);
    const TrainedModel stage1 = train_model(g, sep, train_config(cfg), split);
    const std::vector<Matrix> blocks =
        encoder_relation_blocks(g, sep, stage1);
    sep = run_separation(g, scfg, &blocks).separation;
  }
  return sep;
}

inline std::filesystem::path checkpoint_path(const RunConfig& cfg) {
  return cfg.checkpoint.empty()
             ? std::filesystem::path(cfg.out) / "model.ckpt"
             : std::filesystem::path(cfg.checkpoint);
}

inline void write_loss_curve(const std::filesystem::path& path,
                             const TrainedModel& model) {
  std::string out = "epoch,train_loss,val_f1\n";
  for (const LossCurvePoint& p : model.curve) {
    out += std::to_string(p.epoch) + "," + format_double(p.train_loss) + "," +
           format_double(p.val_f1) + "\n";
  }
  write_text_file(path, out);
}

inline ordered_json separation_summary(const MultiRelationGraph& g,
                                       const EdgeSeparation& sep) {
  ordered_json rels = ordered_json::array();
  for (std::int32_t r = 0; r < g.num_relations(); ++r) {
    ordered_json one = ordered_json::object();
    one["relation"] = g.relation_name(r);
    one["edges"] = g.relation(r).num_edges();
    one["homophilic"] = sep.plus.at(r).num_edges();
    one["heterophilic"] = sep.minus.at(r).num_edges();
    std::int64_t labeled_edges = 0;
    for (const auto& [a, b] : g.relation(r).edges()) {
      labeled_edges += g.is_labeled(a) && g.is_labeled(b);
    }
    if (labeled_edges > 0) {
      one["routing_agreement"] = routing_agreement(sep, g, r);
    } else {
      one["routing_agreement"] = nullptr;
    }
    rels.push_back(one);
  }
  return rels;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands. Each returns the main JSON report it wrote.

inline ordered_json run_spectrum(const RunConfig& cfg) {
  detail::ensure_out_dir(cfg);
  detail::write_manifest(cfg, "spectrum");
  const MultiRelationGraph g = detail::load_required_dataset(cfg, "spectrum");

  const std::int32_t r =
      cfg.relation.empty() ? 0 : g.relation_index(cfg.relation);
  LaplacianForm form;
  if (cfg.form == "regular") {
    form = LaplacianForm::Regular;
  } else if (cfg.form == "normalized") {
    form = LaplacianForm::Normalized;
  } else {
    throw config_error("form: expected 'regular' or 'normalized', got '" +
                       cfg.form + "'");
  }
  const std::int64_t k =
      cfg.split_k == 0 ? default_split_index(g.num_nodes()) : cfg.split_k;
  if (k < 1 || k > g.num_nodes()) {
    throw config_error("split_k: " + std::to_string(cfg.split_k) +
                       " is out of range for " +
                       std::to_string(g.num_nodes()) + " nodes");
  }

  const SpectralDecomposition dec =
      eigendecompose(laplacian(g.relation(r), form));
  SpectrumReport rep;
  if (cfg.signal == "labels") {
    rep = make_spectrum_report(dec, label_signal(g), k);
  } else if (cfg.signal == "features") {
    rep = make_pooled_spectrum_report(dec, g.features(), k);
  } else if (cfg.signal.rfind("feature:", 0) == 0) {
    const std::int64_t col = parse_int(cfg.signal.substr(8), "signal column",
                                       ErrorKind::Config);
    if (col < 0 || col >= g.feature_dim()) {
      throw config_error("signal: feature column " + std::to_string(col) +
                         " out of range for " +
                         std::to_string(g.feature_dim()) + " columns");
    }
    rep = make_spectrum_report(dec, g.features().col(col), k);
  } else {
    throw config_error(
        "signal: expected 'labels', 'features' or 'feature:<column>', got '" +
        cfg.signal + "'");
  }

  std::string csv = "index,eigenvalue,energy,cumulative_ratio\n";
  for (Eigen::Index i = 0; i < rep.eigenvalues.size(); ++i) {
    csv += std::to_string(i + 1) + "," + format_double(rep.eigenvalues[i]) +
           "," + format_double(rep.energy[i]) + "," +
           format_double(rep.cumulative[i]) + "\n";
  }
  detail::write_text_file(std::filesystem::path(cfg.out) / "spectrum.csv", csv);

  ordered_json j = detail::report_header(cfg, "spectrum");
  j["dataset"] = detail::dataset_block(g, cfg.dataset);
  j["relation"] = g.relation_name(r);
  j["signal"] = cfg.signal;
  j["laplacian"] = cfg.form;
  j["split_k"] = k;
  j["energy_ratio_at_k"] = rep.energy_ratio_at_k;
  j["high_freq_area"] = rep.s_high;
  j["config"] = detail::config_echo(cfg);
  detail::write_json_file(std::filesystem::path(cfg.out) / "spectrum.json", j);
  return j;
}

inline ordered_json run_inject(const RunConfig& cfg) {
  detail::ensure_out_dir(cfg);
  detail::write_manifest(cfg, "inject");

  const MultiRelationGraph base =
      cfg.dataset.empty() ? barabasi_albert(cfg.ba_n, cfg.ba_m, cfg.seed)
                          : load_dataset(cfg.dataset);
  const InjectionConfig icfg = injection_config(cfg);
  const MultiRelationGraph injected = inject_anomalies(base, icfg);
  const std::filesystem::path data_dir =
      std::filesystem::path(cfg.out) / "dataset";
  write_dataset(injected, data_dir);

  ordered_json j = detail::report_header(cfg, "inject");
  j["base"] = cfg.dataset.empty()
                  ? "synthetic preferential attachment (ba_n, ba_m)"
                  : cfg.dataset;
  j["dataset"] = detail::dataset_block(injected, data_dir.string());
  j["camouflage_budget"] = camouflage_budget(icfg);
  bool any_labeled_edge = false;
  for (const auto& [a, b] : injected.relation(0).edges()) {
    if (injected.is_labeled(a) && injected.is_labeled(b)) {
      any_labeled_edge = true;
      break;
    }
  }
  if (any_labeled_edge) {
    j["heterophily"] = graph_heterophily(injected, 0);
  } else {
    j["heterophily"] = nullptr;
  }
  j["config"] = detail::config_echo(cfg);
  detail::write_json_file(std::filesystem::path(cfg.out) / "inject.json", j);
  return j;
}

inline ordered_json run_shift(const RunConfig& cfg) {
  detail::ensure_out_dir(cfg);
  detail::write_manifest(cfg, "shift-experiment");

  const std::vector<double> grid =
      cfg.alpha_grid.empty() ? std::vector<double>{0.0, 0.05, 0.10, 0.20}
                             : cfg.alpha_grid;
  const std::vector<ShiftRow> rows = spectral_shift_experiment(
      cfg.ba_n, cfg.ba_m, grid, injection_config(cfg), cfg.num_seeds,
      cfg.seed);

  std::string csv =
      "alpha,seed,eta_features,eta_labels,s_high_labels,heterophily\n";
  for (const ShiftRow& row : rows) {
    csv += format_double(row.alpha) + "," + std::to_string(row.seed) + "," +
           format_double(row.eta_features) + "," +
           format_double(row.eta_labels) + "," +
           format_double(row.s_high_labels) + "," +
           format_double(row.heterophily) + "\n";
  }
  detail::write_text_file(std::filesystem::path(cfg.out) / "shift.csv", csv);

  ordered_json means = ordered_json::array();
  for (double alpha : grid) {
    double ef = 0.0, el = 0.0, sh = 0.0, het = 0.0;
    std::int64_t n = 0;
    for (const ShiftRow& row : rows) {
      if (row.alpha != alpha) continue;
      ef += row.eta_features;
      el += row.eta_labels;
      sh += row.s_high_labels;
      het += row.heterophily;
      ++n;
    }
    ordered_json one = ordered_json::object();
    one["alpha"] = alpha;
    one["runs"] = n;
    one["mean_eta_features"] = ef / static_cast<double>(n);
    one["mean_eta_labels"] = el / static_cast<double>(n);
    one["mean_s_high_labels"] = sh / static_cast<double>(n);
    one["mean_heterophily"] = het / static_cast<double>(n);
    means.push_back(one);
  }

  ordered_json j = detail::report_header(cfg, "shift-experiment");
  j["graph"] = {{"model", "preferential attachment"},
                {"n", cfg.ba_n},
                {"m", cfg.ba_m},
                {"seeds", cfg.num_seeds}};
  j["grid_means"] = means;
  j["config"] = detail::config_echo(cfg);
  detail::write_json_file(std::filesystem::path(cfg.out) / "shift.json", j);
  return j;
}

inline ordered_json run_separate(const RunConfig& cfg) {
  detail::ensure_out_dir(cfg);
  detail::write_manifest(cfg, "separate");
  const MultiRelationGraph g = detail::load_required_dataset(cfg, "separate");
  const EdgeSeparation sep = detail::computed_separation(g, cfg);
  write_separation(cfg.out, g, sep);

  ordered_json j = detail::report_header(cfg, "separate");
  j["dataset"] = detail::dataset_block(g, cfg.dataset);
  j["refined"] = cfg.refine_separation;
  j["relations"] = detail::separation_summary(g, sep);
  j["config"] = detail::config_echo(cfg);
  detail::write_json_file(std::filesystem::path(cfg.out) / "separation.json",
                          j);
  return j;
}

namespace detail {

// Shared by train/eval/pipeline: separation, split, and training artifacts.
struct TrainedRun {
  EdgeSeparation sep;
  SplitAssignment split;
  TrainedModel model;
};

// An explicitly given separation directory wins; otherwise the separation is
// computed fresh so a changed seed or dataset can never silently pair with a
// stale routing.
inline TrainedRun train_run(const MultiRelationGraph& g,
                            const RunConfig& cfg) {
  TrainedRun run;
  run.sep = cfg.separation_dir.empty()
                ? computed_separation(g, cfg)
                : load_separation(cfg.separation_dir, g);
  run.split = split_nodes(g, split_ratios(cfg), cfg.seed);
  run.model = train_model(g, run.sep, train_config(cfg), run.split);
  return run;
}

inline ordered_json train_block(const TrainedRun& run) {
  ordered_json j = ordered_json::object();
  j["best_epoch"] = run.model.best_epoch;
  j["best_val_f1"] = run.model.best_val_f1;
  j["final_train_loss"] = run.model.curve.back().train_loss;
  j["embedding_dim"] = run.model.encoder.embedding_dim();
  j["uses_sharpen_branch"] = run.model.use_highpass;
  return j;
}

}  // namespace detail

inline ordered_json run_train(const RunConfig& cfg) {
  detail::ensure_out_dir(cfg);
  detail::write_manifest(cfg, "train");
  const MultiRelationGraph g = detail::load_required_dataset(cfg, "train");
  const detail::TrainedRun run = detail::train_run(g, cfg);

  write_separation(cfg.out, g, run.sep);
  save_model_checkpoint(detail::checkpoint_path(cfg), run.model);
  detail::write_loss_curve(std::filesystem::path(cfg.out) / "loss_curve.csv",
                           run.model);

  ordered_json j = detail::report_header(cfg, "train");
  j["dataset"] = detail::dataset_block(g, cfg.dataset);
  j["split"] = detail::split_block(run.split);
  j["training"] = detail::train_block(run);
  j["checkpoint"] = detail::checkpoint_path(cfg).string();
  j["config"] = detail::config_echo(cfg);
  detail::write_json_file(std::filesystem::path(cfg.out) / "train.json", j);
  return j;
}

inline ordered_json run_eval(const RunConfig& cfg) {
  detail::ensure_out_dir(cfg);
  detail::write_manifest(cfg, "eval");
  const MultiRelationGraph g = detail::load_required_dataset(cfg, "eval");

  namespace fs = std::filesystem;
  EdgeSeparation sep;
  if (!cfg.separation_dir.empty()) {
    sep = load_separation(cfg.separation_dir, g);
  } else if (fs::exists(fs::path(cfg.out) /
                        ("edges_" + g.relation_name(0) + "_homo.csv"))) {
    sep = load_separation(cfg.out, g);
  } else if (cfg.refine_separation) {
    throw config_error(
        "eval: refine_separation is on, so the refined separation cannot be "
        "recomputed without its training model; set separation_dir to the "
        "training output directory");
  } else {
    sep = detail::computed_separation(g, cfg);
  }

  const TrainedModel model =
      load_model_checkpoint(detail::checkpoint_path(cfg));
  const SplitAssignment split = split_nodes(g, split_ratios(cfg), cfg.seed);

  ordered_json j = detail::report_header(cfg, "eval");
  j["dataset"] = detail::dataset_block(g, cfg.dataset);
  j["split"] = detail::split_block(split);
  j["checkpoint"] = detail::checkpoint_path(cfg).string();
  ordered_json metrics = ordered_json::object();
  metrics["train"] = detail::metrics_block(
      evaluate_model(g, sep, model, split, SplitTag::Train));
  metrics["val"] = detail::metrics_block(
      evaluate_model(g, sep, model, split, SplitTag::Val));
  metrics["test"] = detail::metrics_block(
      evaluate_model(g, sep, model, split, SplitTag::Test));
  j["metrics"] = metrics;
  j["config"] = detail::config_echo(cfg);
  detail::write_json_file(std::filesystem::path(cfg.out) / "eval.json", j);
  return j;
}

namespace detail {

// One full pass over one graph: separate, train, evaluate, write artifacts
// into `dir`, and return the combined report body.
inline ordered_json pipeline_single(const MultiRelationGraph& g,
                                    const RunConfig& cfg,
                                    const std::filesystem::path& dir,
                                    const std::string& origin) {
  std::filesystem::create_directories(dir);
  const TrainedRun run = train_run(g, cfg);
  write_separation(dir, g, run.sep);
  save_model_checkpoint(dir / "model.ckpt", run.model);
  write_loss_curve(dir / "loss_curve.csv", run.model);

  ordered_json j = ordered_json::object();
  j["dataset"] = dataset_block(g, origin);
  j["separation"] = separation_summary(g, run.sep);
  j["split"] = split_block(run.split);
  j["training"] = train_block(run);
  ordered_json metrics = ordered_json::object();
  metrics["val"] = metrics_block(
      evaluate_model(g, run.sep, run.model, run.split, SplitTag::Val));
  metrics["test"] = metrics_block(
      evaluate_model(g, run.sep, run.model, run.split, SplitTag::Test));
  j["metrics"] = metrics;
  return j;
}

inline MultiRelationGraph synthetic_graph(const RunConfig& cfg, double alpha,
                                          std::uint64_t seed) {
  InjectionConfig icfg = injection_config(cfg);
  icfg.anomaly_ratio = alpha;
  icfg.seed = seed;
  return inject_anomalies(barabasi_albert(cfg.ba_n, cfg.ba_m, seed), icfg);
}

}  // namespace detail

// With a dataset: one run. Without: synthetic mode, one run per entry of
// alpha_grid (default: the single point anomaly_ratio), each with seed
// base_seed + grid index, per-point artifacts in point_<k>/, plus a combined
// CSV across grid points.
inline ordered_json run_pipeline(const RunConfig& cfg) {
  detail::ensure_out_dir(cfg);
  detail::write_manifest(cfg, "pipeline");
  const std::filesystem::path out(cfg.out);

  if (!cfg.dataset.empty()) {
    const MultiRelationGraph g = load_dataset(cfg.dataset);
    ordered_json j = detail::report_header(cfg, "pipeline");
    ordered_json body = detail::pipeline_single(g, cfg, out, cfg.dataset);
    for (auto& [key, value] : body.items()) j[key] = value;
    j["config"] = detail::config_echo(cfg);
    detail::write_json_file(out / "report.json", j);
    return j;
  }

  const std::vector<double> grid = cfg.alpha_grid.empty()
                                       ? std::vector<double>{cfg.anomaly_ratio}
                                       : cfg.alpha_grid;
  const bool single = grid.size() == 1;
  std::string csv = "alpha,seed,best_epoch,val_f1_macro,val_auc,"
                    "test_f1_macro,test_auc\n";
  ordered_json last;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(k);
    RunConfig point = cfg;
    point.seed = seed;
    point.anomaly_ratio = grid[k];
    const MultiRelationGraph g = detail::synthetic_graph(cfg, grid[k], seed);
    const std::filesystem::path dir =
        single ? out : out / ("point_" + std::to_string(k));
    const std::string origin =
        "synthetic(ba_n=" + std::to_string(cfg.ba_n) +
        ", ba_m=" + std::to_string(cfg.ba_m) +
        ", alpha=" + format_double(grid[k]) + ")";
    ordered_json j = detail::report_header(point, "pipeline");
    ordered_json body = detail::pipeline_single(g, point, dir, origin);
    for (auto& [key, value] : body.items()) j[key] = value;
    j["config"] = detail::config_echo(point);
    const std::filesystem::path report =
        single ? out / "report.json"
               : out / ("report_" + std::to_string(k) + ".json");
    detail::write_json_file(report, j);

    csv += format_double(grid[k]) + "," + std::to_string(seed) + "," +
           std::to_string(j["training"]["best_epoch"].get<std::int64_t>()) +
           "," + format_double(j["metrics"]["val"]["f1_macro"].get<double>()) +
           "," + format_double(j["metrics"]["val"]["auc"].get<double>()) +
           "," + format_double(j["metrics"]["test"]["f1_macro"].get<double>()) +
           "," + format_double(j["metrics"]["test"]["auc"].get<double>()) +
           "\n";
    last = std::move(j);
  }
  if (!single) {
    detail::write_text_file(out / "pipeline_grid.csv", csv);
  }
  return last;
}

// Paired comparison of the full model against the smoothing-only model on the
// same data, separation, and split. One row per repetition (seed base+s);
// in synthetic mode each repetition draws its own graph.
inline ordered_json run_ablation(const RunConfig& cfg) {
  detail::ensure_out_dir(cfg);
  detail::write_manifest(cfg, "ablate");
  const std::filesystem::path out(cfg.out);
  if (cfg.num_seeds < 1) {
    throw config_error("ablate: num_seeds must be >= 1");
  }

  struct Row {
    std::uint64_t seed;
    double full_auc, full_f1, ablation_auc, ablation_f1;
  };
  std::vector<Row> rows;

  std::vector<MultiRelationGraph> loaded;
  if (!cfg.dataset.empty()) loaded.push_back(load_dataset(cfg.dataset));

  for (std::int32_t s = 0; s < cfg.num_seeds; ++s) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s);
    RunConfig rep = cfg;
    rep.seed = seed;

    const MultiRelationGraph g =
        loaded.empty() ? detail::synthetic_graph(cfg, cfg.anomaly_ratio, seed)
                       : loaded.front();
    const EdgeSeparation sep = detail::computed_separation(g, rep);
    const SplitAssignment split = split_nodes(g, split_ratios(rep), seed);

    TrainConfig full_cfg = train_config(rep);
    full_cfg.use_highpass = true;
    const TrainedModel full = train_model(g, sep, full_cfg, split);
    TrainConfig abl_cfg = train_config(rep);
    abl_cfg.use_highpass = false;
    const TrainedModel ablated = train_model(g, sep, abl_cfg, split);

    const EvalReport full_report =
        evaluate_model(g, sep, full, split, SplitTag::Test);
    const EvalReport abl_report =
        evaluate_model(g, sep, ablated, split, SplitTag::Test);
    rows.push_back({seed, full_report.auc_score, full_report.f1,
                    abl_report.auc_score, abl_report.f1});
  }

  std::string csv =
      "seed,full_test_auc,full_test_f1,ablation_test_auc,ablation_test_f1,"
      "auc_gap\n";
  double mean_full = 0.0, mean_abl = 0.0, mean_full_f1 = 0.0,
         mean_abl_f1 = 0.0;
  for (const Row& row : rows) {
    csv += std::to_string(row.seed) + "," + format_double(row.full_auc) + "," +
           format_double(row.full_f1) + "," + format_double(row.ablation_auc) +
           "," + format_double(row.ablation_f1) + "," +
           format_double(row.full_auc - row.ablation_auc) + "\n";
    mean_full += row.full_auc;
    mean_abl += row.ablation_auc;
    mean_full_f1 += row.full_f1;
    mean_abl_f1 += row.ablation_f1;
  }
  const double n = static_cast<double>(rows.size());
  mean_full /= n;
  mean_abl /= n;
  mean_full_f1 /= n;
  mean_abl_f1 /= n;
  detail::write_text_file(out / "ablation.csv", csv);

  ordered_json j = detail::report_header(cfg, "ablate");
  j["dataset"] = cfg.dataset.empty()
                     ? "synthetic (one graph per repetition)"
                     : cfg.dataset;
  j["repetitions"] = cfg.num_seeds;
  ordered_json mean = ordered_json::object();
  mean["full_test_auc"] = mean_full;
  mean["full_test_f1"] = mean_full_f1;
  mean["ablation_test_auc"] = mean_abl;
  mean["ablation_test_f1"] = mean_abl_f1;
  mean["auc_gap"] = mean_full - mean_abl;
  j["mean"] = mean;
  j["config"] = detail::config_echo(cfg);
  detail::write_json_file(out / "ablation.json", j);
  return j;
}

}  // namespace cesgad
