#pragma once

// Flat key=value run configuration. One registry describes every field
// (name, parse, format), and everything else derives from it: file parsing,
// CLI overrides, unknown-key rejection, and the verbatim echo written into
// manifests and reports. Echo order is declaration order.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "cesgad/causal.hpp"
#include "cesgad/io_util.hpp"
#include "cesgad/synthgen.hpp"
#include "cesgad/trainer.hpp"

namespace cesgad {

struct RunConfig {
  // Paths and seeding.
  std::string dataset;  // dataset directory; empty lets synthetic commands generate
  std::string out = "out";
  std::uint64_t seed = 42;

  // Edge separation.
  std::int32_t k_se = 8;
  std::int32_t d_z = 32;
  std::int32_t h_g = 32;
  std::int32_t nonedge_samples = 5;
  std::int32_t edge_epochs = 500;
  double edge_lr = 0.03;
  bool refine_separation = false;

  // Encoder and classifier training.
  std::int32_t layers = 2;
  std::int32_t hidden = 64;
  std::int32_t head_hidden = 64;
  double hp_alpha = 1.0;
  double lr = 0.01;
  double weight_decay = 5e-4;
  std::int32_t epochs = 200;
  bool residual_features = true;
  bool class_weight = false;
  double train_ratio = 0.4;
  double val_ratio = 0.2;
  double test_ratio = 0.4;

  // Synthetic generation and injection.
  std::int32_t ba_n = 500;
  std::int32_t ba_m = 2;
  std::int32_t feat_dim = 16;
  double anomaly_ratio = 0.1;
  double sigma = 2.0;
  std::int32_t rho = 2;
  double escalation = 20.0;
  std::vector<double> alpha_grid;  // empty: command-specific default
  std::int32_t num_seeds = 1;

  // Spectrum reporting.
  std::string relation;           // empty: first relation
  std::string signal = "labels";  // labels | features | feature:<column>
  std::string form = "regular";   // regular | normalized
  std::int64_t split_k = 0;       // 0: ceiling quarter of the spectrum

  // Persistence.
  std::string checkpoint;      // empty: <out>/model.ckpt
  std::string separation_dir;  // empty: compute (or reuse <out>) separation
};

struct ConfigField {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

namespace detail {

inline std::string format_grid(const std::vector<double>& grid) {
  std::string out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i) out += ',';
    out += format_double(grid[i]);
  }
  return out;
}

inline std::vector<double> parse_grid(const std::string& value,
                                      const std::string& ctx) {
  std::vector<double> grid;
  if (trim(value).empty()) return grid;
  for (std::string_view piece : split_fields(value, ',')) {
    grid.push_back(parse_double(piece, ctx, ErrorKind::Config));
  }
  return grid;
}

template <typename T>
ConfigField field_for(const std::string& key, T RunConfig::* member);

template <>
inline ConfigField field_for<std::string>(const std::string& key,
                                          std::string RunConfig::* member) {
  return {key, [member](const RunConfig& c) { return c.*member; },
          [member](RunConfig& c, const std::string& v) { c.*member = v; }};
}

template <>
inline ConfigField field_for<std::uint64_t>(const std::string& key,
                                            std::uint64_t RunConfig::* member) {
  return {key,
          [member](const RunConfig& c) { return std::to_string(c.*member); },
          [key, member](RunConfig& c, const std::string& v) {
            c.*member = parse_uint(v, key, ErrorKind::Config);
          }};
}

template <>
inline ConfigField field_for<std::int32_t>(const std::string& key,
                                           std::int32_t RunConfig::* member) {
  return {key,
          [member](const RunConfig& c) { return std::to_string(c.*member); },
          [key, member](RunConfig& c, const std::string& v) {
            c.*member = static_cast<std::int32_t>(
                parse_int(v, key, ErrorKind::Config));
          }};
}

template <>
inline ConfigField field_for<std::int64_t>(const std::string& key,
                                           std::int64_t RunConfig::* member) {
  return {key,
          [member](const RunConfig& c) { return std::to_string(c.*member); },
          [key, member](RunConfig& c, const std::string& v) {
            c.*member = parse_int(v, key, ErrorKind::Config);
          }};
}

template <>
inline ConfigField field_for<double>(const std::string& key,
                                     double RunConfig::* member) {
  return {key,
          [member](const RunConfig& c) { return format_double(c.*member); },
          [key, member](RunConfig& c, const std::string& v) {
            c.*member = parse_double(v, key, ErrorKind::Config);
          }};
}

template <>
inline ConfigField field_for<bool>(const std::string& key,
                                   bool RunConfig::* member) {
  return {key,
          [member](const RunConfig& c) {
            return std::string(c.*member ? "true" : "false");
          },
          [key, member](RunConfig& c, const std::string& v) {
            c.*member = parse_bool(v, key, ErrorKind::Config);
          }};
}

template <>
inline ConfigField field_for<std::vector<double>>(
    const std::string& key, std::vector<double> RunConfig::* member) {
  return {key,
          [member](const RunConfig& c) { return format_grid(c.*member); },
          [key, member](RunConfig& c, const std::string& v) {
            c.*member = parse_grid(v, key);
          }};
}

}  // namespace detail

inline const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = [] {
    using detail::field_for;
    std::vector<ConfigField> f;
    f.push_back(field_for("dataset", &RunConfig::dataset));
    f.push_back(field_for("out", &RunConfig::out));
    f.push_back(field_for("seed", &RunConfig::seed));
    f.push_back(field_for("k_se", &RunConfig::k_se));
    f.push_back(field_for("d_z", &RunConfig::d_z));
    f.push_back(field_for("h_g", &RunConfig::h_g));
    f.push_back(field_for("nonedge_samples", &RunConfig::nonedge_samples));
    f.push_back(field_for("edge_epochs", &RunConfig::edge_epochs));
    f.push_back(field_for("edge_lr", &RunConfig::edge_lr));
    f.push_back(field_for("refine_separation", &RunConfig::refine_separation));
    f.push_back(field_for("layers", &RunConfig::layers));
    f.push_back(field_for("hidden", &RunConfig::hidden));
    f.push_back(field_for("head_hidden", &RunConfig::head_hidden));
    f.push_back(field_for("hp_alpha", &RunConfig::hp_alpha));
    f.push_back(field_for("lr", &RunConfig::lr));
    f.push_back(field_for("weight_decay", &RunConfig::weight_decay));
    f.push_back(field_for("epochs", &RunConfig::epochs));
    f.push_back(field_for("residual_features", &RunConfig::residual_features));
    f.push_back(field_for("class_weight", &RunConfig::class_weight));
    f.push_back(field_for("train_ratio", &RunConfig::train_ratio));
    f.push_back(field_for("val_ratio", &RunConfig::val_ratio));
    f.push_back(field_for("test_ratio", &RunConfig::test_ratio));
    f.push_back(field_for("ba_n", &RunConfig::ba_n));
    f.push_back(field_for("ba_m", &RunConfig::ba_m));
    f.push_back(field_for("feat_dim", &RunConfig::feat_dim));
    f.push_back(field_for("anomaly_ratio", &RunConfig::anomaly_ratio));
    f.push_back(field_for("sigma", &RunConfig::sigma));
    f.push_back(field_for("rho", &RunConfig::rho));
    f.push_back(field_for("escalation", &RunConfig::escalation));
    f.push_back(field_for("alpha_grid", &RunConfig::alpha_grid));
    f.push_back(field_for("num_seeds", &RunConfig::num_seeds));
    f.push_back(field_for("relation", &RunConfig::relation));
    f.push_back(field_for("signal", &RunConfig::signal));
    f.push_back(field_for("form", &RunConfig::form));
    f.push_back(field_for("split_k", &RunConfig::split_k));
    f.push_back(field_for("checkpoint", &RunConfig::checkpoint));
    f.push_back(field_for("separation_dir", &RunConfig::separation_dir));
    return f;
  }();
  return fields;
}

inline void set_config_key(RunConfig& cfg, const std::string& key,
                           const std::string& value) {
  for (const ConfigField& f : config_fields()) {
    if (f.key == key) {
      f.set(cfg, value);
      return;
    }
  }
  throw config_error("unknown config key '" + key + "'");
}

// key = value lines; '#' starts a comment; blank lines ignored.
inline RunConfig parse_config_text(std::istream& in, const std::string& name) {
  RunConfig cfg;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw config_error(name + ":" + std::to_string(line_no) +
                         ": expected 'key = value'");
    }
    const std::string key(trim(t.substr(0, eq)));
    const std::string value(trim(t.substr(eq + 1)));
    try {
      set_config_key(cfg, key, value);
    } catch (const Error& e) {
      throw Error(e.kind(),
                  name + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

inline RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read config file " + path.string());
  return parse_config_text(in, path.string());
}

// Verbatim echo in declaration order; parses back to an identical config.
inline std::string config_to_string(const RunConfig& cfg) {
  std::string out;
  for (const ConfigField& f : config_fields()) {
    out += f.key;
    out += " = ";
    out += f.get(cfg);
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Projections onto the module-level configs.

inline SeparationConfig separation_config(const RunConfig& cfg) {
  SeparationConfig s;
  s.k_se = cfg.k_se;
  s.d_z = cfg.d_z;
  s.h_g = cfg.h_g;
  s.nonedge_samples = cfg.nonedge_samples;
  s.edge_epochs = cfg.edge_epochs;
  s.edge_lr = cfg.edge_lr;
  s.seed = cfg.seed;
  return s;
}

inline TrainConfig train_config(const RunConfig& cfg) {
  TrainConfig t;
  t.layers = cfg.layers;
  t.hidden = cfg.hidden;
  t.head_hidden = cfg.head_hidden;
  t.hp_alpha = cfg.hp_alpha;
  t.lr = cfg.lr;
  t.weight_decay = cfg.weight_decay;
  t.epochs = cfg.epochs;
  t.residual_features = cfg.residual_features;
  t.class_weight = cfg.class_weight;
  t.seed = cfg.seed;
  return t;
}

inline InjectionConfig injection_config(const RunConfig& cfg) {
  InjectionConfig i;
  i.anomaly_ratio = cfg.anomaly_ratio;
  i.sigma = cfg.sigma;
  i.rho = cfg.rho;
  i.escalation = cfg.escalation;
  i.feat_dim = cfg.feat_dim;
  i.seed = cfg.seed;
  return i;
}

inline SplitRatios split_ratios(const RunConfig& cfg) {
  return {cfg.train_ratio, cfg.val_ratio, cfg.test_ratio};
}

}  // namespace cesgad
