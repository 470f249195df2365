#pragma once

// Directory-based dataset format:
//   meta              key = value lines: num_nodes, num_features,
//                     num_relations, relation_names (comma separated)
//   features.csv      header f0..f{D-1}, then one row of D reals per node
//   labels.csv        header node_id,label with label in {0, 1, -1}
//   edges_<name>.csv  header src,dst, one undirected edge per row
//
// Loading validates everything the graph type requires and reports parse
// failures as "<path>:<line>: message". Writing uses shortest round-trip
// number formatting, so a write/load cycle reproduces features bit-exactly.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cesgad/graph.hpp"
#include "cesgad/io_util.hpp"

namespace cesgad {

namespace detail {

inline std::string loc(const std::filesystem::path& file, std::int64_t line) {
  return file.string() + ":" + std::to_string(line);
}

inline void require_relation_name(const std::string& name) {
  if (name.empty()) throw data_error("relation name must not be empty");
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) {
      throw data_error("relation name '" + name +
                       "' may only use letters, digits, '_' and '-'");
    }
  }
}

inline std::ofstream open_for_write(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw data_error("cannot write " + file.string());
  return out;
}

inline std::ifstream open_for_read(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw data_error("cannot read " + file.string());
  return in;
}

// Reads one line, strips a trailing carriage return, bumps the line counter.
inline bool next_line(std::ifstream& in, std::string& line, std::int64_t& no) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  ++no;
  return true;
}

inline void expect_header(std::ifstream& in, const std::filesystem::path& file,
                          std::int64_t& line_no, const std::string& want) {
  std::string line;
  if (!next_line(in, line, line_no)) {
    throw data_error(loc(file, 1) + ": missing header row (expected '" +
                     want + "')");
  }
  if (std::string(trim(line)) != want) {
    throw data_error(loc(file, line_no) + ": header is '" + line +
                     "', expected '" + want + "'");
  }
}

}  // namespace detail

inline std::string features_header(std::int32_t dim) {
  std::string h;
  for (std::int32_t c = 0; c < dim; ++c) {
    if (c) h += ',';
    h += 'f' + std::to_string(c);
  }
  return h;
}

inline void write_dataset(const MultiRelationGraph& g,
                          const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  for (std::int32_t r = 0; r < g.num_relations(); ++r) {
    detail::require_relation_name(g.relation_name(r));
  }
  fs::create_directories(dir);

  {
    auto out = detail::open_for_write(dir / "meta");
    out << "num_nodes = " << g.num_nodes() << "\n";
    out << "num_features = " << g.feature_dim() << "\n";
    out << "num_relations = " << g.num_relations() << "\n";
    out << "relation_names = ";
    for (std::int32_t r = 0; r < g.num_relations(); ++r) {
      if (r) out << ",";
      out << g.relation_name(r);
    }
    out << "\n";
  }

  {
    auto out = detail::open_for_write(dir / "features.csv");
    out << features_header(g.feature_dim()) << "\n";
    const Matrix& x = g.features();
    std::string row;
    for (std::int32_t v = 0; v < g.num_nodes(); ++v) {
      row.clear();
      for (std::int32_t c = 0; c < g.feature_dim(); ++c) {
        if (c) row += ',';
        row += format_double(x(v, c));
      }
      row += '\n';
      out << row;
    }
  }

  {
    auto out = detail::open_for_write(dir / "labels.csv");
    out << "node_id,label\n";
    for (std::int32_t v = 0; v < g.num_nodes(); ++v) {
      out << v << ',' << static_cast<int>(g.label(v)) << "\n";
    }
  }

  for (std::int32_t r = 0; r < g.num_relations(); ++r) {
    auto out = detail::open_for_write(
        dir / ("edges_" + g.relation_name(r) + ".csv"));
    out << "src,dst\n";
    for (const auto& [a, b] : g.relation(r).edges()) {
      out << a << ',' << b << "\n";
    }
  }
}

inline MultiRelationGraph load_dataset(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw data_error("dataset directory '" + dir.string() + "' does not exist");
  }

  // --- meta ---
  std::int64_t num_nodes = -1, num_features = -1, num_relations = -1;
  std::vector<std::string> names;
  {
    const fs::path file = dir / "meta";
    auto in = detail::open_for_read(file);
    std::string line;
    std::int64_t line_no = 0;
    bool saw_names = false;
    while (detail::next_line(in, line, line_no)) {
      const std::string_view t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      const std::size_t eq = t.find('=');
      if (eq == std::string_view::npos) {
        throw data_error(detail::loc(file, line_no) +
                         ": expected 'key = value'");
      }
      const std::string key(trim(t.substr(0, eq)));
      const std::string value(trim(t.substr(eq + 1)));
      const std::string ctx = detail::loc(file, line_no) + ": " + key;
      if (key == "num_nodes") {
        num_nodes = parse_int(value, ctx);
      } else if (key == "num_features") {
        num_features = parse_int(value, ctx);
      } else if (key == "num_relations") {
        num_relations = parse_int(value, ctx);
      } else if (key == "relation_names") {
        saw_names = true;
        names.clear();
        for (std::string_view piece : split_fields(value, ',')) {
          names.emplace_back(piece);
        }
      } else {
        throw data_error(ctx + ": unknown meta key");
      }
    }
    if (num_nodes < 0 || num_features < 0 || num_relations < 1 || !saw_names) {
      throw data_error(file.string() +
                       ": needs num_nodes, num_features, num_relations >= 1 "
                       "and relation_names");
    }
    if (static_cast<std::int64_t>(names.size()) != num_relations) {
      throw data_error(file.string() + ": relation_names lists " +
                       std::to_string(names.size()) + " names for " +
                       std::to_string(num_relations) + " relations");
    }
    for (const auto& name : names) detail::require_relation_name(name);
  }
  const auto n = static_cast<std::int32_t>(num_nodes);
  const auto d = static_cast<std::int32_t>(num_features);

  // --- features.csv ---
  Matrix x(n, d);
  {
    const fs::path file = dir / "features.csv";
    auto in = detail::open_for_read(file);
    std::string line;
    std::int64_t line_no = 0;
    detail::expect_header(in, file, line_no, features_header(d));
    for (std::int32_t v = 0; v < n; ++v) {
      if (!detail::next_line(in, line, line_no)) {
        throw data_error(detail::loc(file, line_no) + ": expected " +
                         std::to_string(n) + " feature rows, found " +
                         std::to_string(v));
      }
      const auto fields = split_fields(line, ',');
      if (static_cast<std::int64_t>(fields.size()) != d) {
        throw data_error(detail::loc(file, line_no) + ": row has " +
                         std::to_string(fields.size()) + " fields, expected " +
                         std::to_string(d));
      }
      for (std::int32_t c = 0; c < d; ++c) {
        x(v, c) = parse_double(fields[c], detail::loc(file, line_no) +
                                              ": column f" + std::to_string(c));
      }
    }
    if (detail::next_line(in, line, line_no) && !trim(line).empty()) {
      throw data_error(detail::loc(file, line_no) + ": extra row beyond " +
                       std::to_string(n) + " nodes");
    }
  }

  // --- labels.csv ---
  std::vector<Label> labels(n, Label::Unlabeled);
  {
    const fs::path file = dir / "labels.csv";
    auto in = detail::open_for_read(file);
    std::string line;
    std::int64_t line_no = 0;
    detail::expect_header(in, file, line_no, "node_id,label");
    std::vector<char> seen(n, 0);
    while (detail::next_line(in, line, line_no)) {
      if (trim(line).empty()) continue;
      const auto fields = split_fields(line, ',');
      if (fields.size() != 2) {
        throw data_error(detail::loc(file, line_no) +
                         ": expected 'node_id,label'");
      }
      const std::string ctx = detail::loc(file, line_no);
      const std::int64_t v = parse_int(fields[0], ctx + ": node_id");
      if (v < 0 || v >= n) {
        throw data_error(ctx + ": node_id " + std::to_string(v) +
                         " out of range for " + std::to_string(n) + " nodes");
      }
      if (seen[v]) {
        throw data_error(ctx + ": node " + std::to_string(v) +
                         " labeled twice");
      }
      seen[v] = 1;
      const std::int64_t raw = parse_int(fields[1], ctx + ": label");
      if (raw != 0 && raw != 1 && raw != -1) {
        throw data_error(ctx + ": label must be 0, 1 or -1, got " +
                         std::to_string(raw));
      }
      labels[v] = static_cast<Label>(raw);
    }
    for (std::int32_t v = 0; v < n; ++v) {
      if (!seen[v]) {
        throw data_error(file.string() + ": node " + std::to_string(v) +
                         " has no label row (use -1 for unlabeled)");
      }
    }
  }

  // --- edges_<name>.csv ---
  std::vector<EdgeSet> relations;
  relations.reserve(names.size());
  for (const auto& name : names) {
    const fs::path file = dir / ("edges_" + name + ".csv");
    auto in = detail::open_for_read(file);
    std::string line;
    std::int64_t line_no = 0;
    detail::expect_header(in, file, line_no, "src,dst");
    std::vector<Edge> edges;
    while (detail::next_line(in, line, line_no)) {
      if (trim(line).empty()) continue;
      const auto fields = split_fields(line, ',');
      if (fields.size() != 2) {
        throw data_error(detail::loc(file, line_no) + ": expected 'src,dst'");
      }
      const std::string ctx = detail::loc(file, line_no);
      const std::int64_t a = parse_int(fields[0], ctx + ": src");
      const std::int64_t b = parse_int(fields[1], ctx + ": dst");
      if (a < 0 || a >= n || b < 0 || b >= n) {
        throw data_error(ctx + ": edge (" + std::to_string(a) + ", " +
                         std::to_string(b) + ") out of range for " +
                         std::to_string(n) + " nodes");
      }
      edges.push_back({static_cast<std::int32_t>(a),
                       static_cast<std::int32_t>(b)});
    }
    try {
      relations.push_back(EdgeSet::from_edges(n, std::move(edges)));
    } catch (const Error& e) {
      throw Error(e.kind(), file.string() + ": " + e.what());
    }
  }

  try {
    return MultiRelationGraph(std::move(relations), names, std::move(x),
                              std::move(labels));
  } catch (const Error& e) {
    throw Error(e.kind(), dir.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Summary.

struct DatasetSummary {
  std::int32_t num_nodes = 0;
  std::int32_t num_features = 0;
  std::int32_t num_relations = 0;
  std::vector<std::pair<std::string, std::int64_t>> relation_edges;
  std::int64_t labeled = 0;
  std::int64_t anomalous = 0;
  double anomaly_rate_labeled = 0.0;  // anomalous / labeled
  double anomaly_rate_all = 0.0;      // anomalous / num_nodes
};

inline DatasetSummary summarize_dataset(const MultiRelationGraph& g) {
  DatasetSummary s;
  s.num_nodes = g.num_nodes();
  s.num_features = g.feature_dim();
  s.num_relations = g.num_relations();
  for (std::int32_t r = 0; r < g.num_relations(); ++r) {
    s.relation_edges.push_back({g.relation_name(r), g.relation(r).num_edges()});
  }
  s.labeled = g.num_labeled();
  s.anomalous = g.num_anomalous();
  s.anomaly_rate_labeled =
      s.labeled > 0 ? static_cast<double>(s.anomalous) /
                          static_cast<double>(s.labeled)
                    : 0.0;
  s.anomaly_rate_all =
      s.num_nodes > 0 ? static_cast<double>(s.anomalous) /
                            static_cast<double>(s.num_nodes)
                      : 0.0;
  return s;
}

// Both anomaly-rate denominators are reported: among labeled nodes and among
// all nodes. Published dataset tables are not always explicit about which
// denominator they use, so showing both avoids guessing.
inline std::string format_summary(const DatasetSummary& s) {
  std::ostringstream out;
  out << "nodes: " << s.num_nodes << ", features: " << s.num_features
      << ", relations: " << s.num_relations << "\n";
  for (const auto& [name, edges] : s.relation_edges) {
    out << "  relation " << name << ": " << edges << " edges\n";
  }
  out << "labeled: " << s.labeled << " (" << s.anomalous << " anomalous)\n";
  out << "anomaly rate: " << format_double(100.0 * s.anomaly_rate_labeled)
      << "% of labeled, " << format_double(100.0 * s.anomaly_rate_all)
      << "% of all nodes\n";
  return out.str();
}

}  // namespace cesgad
