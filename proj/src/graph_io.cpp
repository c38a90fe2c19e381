#include "ecgmm/graph_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ecgmm/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ecgmm {

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view tok, const fs::path& file, std::size_t line_no) {
  T value{};
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw FormatError(file.string() + ":" + std::to_string(line_no) + ": cannot parse '" +
                      std::string(tok) + "'");
  }
  return value;
}

// Non-empty lines of a file, with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> read_lines(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open " + file.string());
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!trim(line).empty()) lines.emplace_back(no, line);
  }
  return lines;
}

std::vector<std::int64_t> read_int_column(const fs::path& file) {
  std::vector<std::int64_t> out;
  for (const auto& [no, line] : read_lines(file)) {
    const auto toks = split_commas(line);
    if (toks.size() != 1) {
      throw FormatError(file.string() + ":" + std::to_string(no) + ": expected a single value");
    }
    out.push_back(parse_number<std::int64_t>(toks[0], file, no));
  }
  return out;
}

std::pair<std::vector<double>, std::size_t> read_real_rows(const fs::path& file) {
  std::vector<double> values;
  std::size_t width = 0;
  for (const auto& [no, line] : read_lines(file)) {
    const auto toks = split_commas(line);
    if (width == 0) width = toks.size();
    if (toks.size() != width) {
      throw FormatError(file.string() + ":" + std::to_string(no) + ": ragged row with " +
                        std::to_string(toks.size()) + " columns, expected " +
                        std::to_string(width));
    }
    for (auto t : toks) {
      const double v = parse_number<double>(t, file, no);
      if (!std::isfinite(v)) {
        throw ValueError(file.string() + ":" + std::to_string(no) + ": non-finite value");
      }
      values.push_back(v);
    }
  }
  return {std::move(values), width};
}

// Dense remap of arbitrary integer labels, ordered by label value.
std::pair<std::vector<std::uint32_t>, std::vector<std::int64_t>> dense_remap(
    const std::vector<std::int64_t>& raw) {
  std::vector<std::int64_t> uniq(raw.begin(), raw.end());
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  std::vector<std::uint32_t> ids(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    ids[i] = static_cast<std::uint32_t>(
        std::lower_bound(uniq.begin(), uniq.end(), raw[i]) - uniq.begin());
  }
  return {std::move(ids), std::move(uniq)};
}

// Adds reverse copies until every directed pair (u,v) occurs as often as (v,u).
void symmetrize(Graph& g) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::size_t>> occurrences;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    occurrences[{g.edges[e].src, g.edges[e].dst}].push_back(e);
  }
  std::vector<std::size_t> to_reverse;
  for (const auto& [key, ids] : occurrences) {
    if (key.first == key.second) continue;
    const auto it = occurrences.find({key.second, key.first});
    const std::size_t have = it == occurrences.end() ? 0 : it->second.size();
    for (std::size_t k = have; k < ids.size(); ++k) to_reverse.push_back(ids[k]);
  }
  std::sort(to_reverse.begin(), to_reverse.end());
  for (auto e : to_reverse) {
    g.edges.push_back({g.edges[e].dst, g.edges[e].src});
    if (g.a.kind == FeatureKind::categorical) {
      g.a.labels.push_back(g.a.labels[e]);
    } else if (g.a.kind == FeatureKind::continuous) {
      for (std::size_t k = 0; k < g.a.dim; ++k) g.a.values.push_back(g.a.values[e * g.a.dim + k]);
    }
  }
}

}  // namespace

Dataset load_tu_dataset(const fs::path& dir, const TuOptions& options) {
  if (!fs::is_directory(dir)) throw FormatError("not a directory: " + dir.string());
  std::string prefix;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.size() > 6 && name.ends_with("_A.txt")) {
      prefix = name.substr(0, name.size() - 6);
      break;
    }
  }
  if (prefix.empty()) throw FormatError("missing edge list <DS>_A.txt in " + dir.string());
  auto file = [&](const char* suffix) { return dir / (prefix + suffix); };
  if (!fs::exists(file("_graph_indicator.txt"))) {
    throw FormatError("missing " + file("_graph_indicator.txt").string());
  }

  const auto indicator = read_int_column(file("_graph_indicator.txt"));
  const std::size_t n_nodes = indicator.size();
  std::int64_t n_graphs = 0;
  for (auto gid : indicator) {
    if (gid < 1) throw IntegrityError("graph indicator ids must be >= 1");
    n_graphs = std::max(n_graphs, gid);
  }

  Dataset ds;
  ds.undirected = options.undirected;
  ds.graphs.resize(static_cast<std::size_t>(n_graphs));
  std::vector<std::uint32_t> local(n_nodes);
  for (std::size_t v = 0; v < n_nodes; ++v) {
    auto& g = ds.graphs[static_cast<std::size_t>(indicator[v] - 1)];
    local[v] = static_cast<std::uint32_t>(g.n_vertices++);
  }
  auto graph_of = [&](std::size_t v) { return static_cast<std::size_t>(indicator[v] - 1); };

  // vertex features
  if (fs::exists(file("_node_labels.txt"))) {
    const auto raw = read_int_column(file("_node_labels.txt"));
    if (raw.size() != n_nodes) {
      throw FormatError("node label count " + std::to_string(raw.size()) +
                        " differs from node count " + std::to_string(n_nodes));
    }
    auto [ids, map] = dense_remap(raw);
    ds.vertex_meta = {FeatureKind::categorical, 1, map.size(), map};
    for (auto& g : ds.graphs) g.x = Features::categorical({});
    for (std::size_t v = 0; v < n_nodes; ++v) ds.graphs[graph_of(v)].x.labels.push_back(ids[v]);
  } else if (fs::exists(file("_node_attributes.txt"))) {
    auto [values, width] = read_real_rows(file("_node_attributes.txt"));
    if (width == 0 || values.size() / width != n_nodes) {
      throw FormatError("node attribute rows differ from node count");
    }
    ds.vertex_meta = {FeatureKind::continuous, width, 0, {}};
    for (auto& g : ds.graphs) g.x = Features::continuous({}, width);
    for (std::size_t v = 0; v < n_nodes; ++v) {
      auto& dst = ds.graphs[graph_of(v)].x.values;
      dst.insert(dst.end(), values.begin() + static_cast<std::ptrdiff_t>(v * width),
                 values.begin() + static_cast<std::ptrdiff_t>((v + 1) * width));
    }
  } else {
    ds.vertex_meta = {FeatureKind::categorical, 1, 1, {}};
    for (auto& g : ds.graphs) g.x = Features::categorical(std::vector<std::uint32_t>(g.n_vertices, 0));
  }

  // edges
  const auto a_file = file("_A.txt");
  std::vector<std::size_t> edge_graph;
  for (const auto& [no, line] : read_lines(a_file)) {
    const auto toks = split_commas(line);
    if (toks.size() != 2) {
      throw FormatError(a_file.string() + ":" + std::to_string(no) + ": expected 'u, v'");
    }
    const auto u = parse_number<std::int64_t>(toks[0], a_file, no);
    const auto v = parse_number<std::int64_t>(toks[1], a_file, no);
    if (u < 1 || v < 1 || static_cast<std::size_t>(u) > n_nodes ||
        static_cast<std::size_t>(v) > n_nodes) {
      throw IntegrityError(a_file.string() + ":" + std::to_string(no) + ": vertex id out of range");
    }
    const auto gu = graph_of(static_cast<std::size_t>(u - 1));
    const auto gv = graph_of(static_cast<std::size_t>(v - 1));
    if (gu != gv) {
      throw IntegrityError(a_file.string() + ":" + std::to_string(no) +
                           ": edge joins vertices of different graphs");
    }
    ds.graphs[gu].edges.push_back(
        {local[static_cast<std::size_t>(u - 1)], local[static_cast<std::size_t>(v - 1)]});
    edge_graph.push_back(gu);
  }
  const std::size_t n_edges = edge_graph.size();

  if (fs::exists(file("_edge_attributes.txt"))) {
    auto [values, width] = read_real_rows(file("_edge_attributes.txt"));
    if (width == 0 || values.size() / width != n_edges) {
      throw FormatError("edge attribute rows differ from edge count " + std::to_string(n_edges));
    }
    ds.edge_meta = {FeatureKind::continuous, width, 0, {}};
    for (auto& g : ds.graphs) g.a = Features::continuous({}, width);
    for (std::size_t e = 0; e < n_edges; ++e) {
      auto& dst = ds.graphs[edge_graph[e]].a.values;
      dst.insert(dst.end(), values.begin() + static_cast<std::ptrdiff_t>(e * width),
                 values.begin() + static_cast<std::ptrdiff_t>((e + 1) * width));
    }
  } else if (fs::exists(file("_edge_labels.txt"))) {
    const auto raw = read_int_column(file("_edge_labels.txt"));
    if (raw.size() != n_edges) throw FormatError("edge label count differs from edge count");
    auto [ids, map] = dense_remap(raw);
    ds.edge_meta = {FeatureKind::categorical, 1, map.size(), map};
    for (auto& g : ds.graphs) g.a = Features::categorical({});
    for (std::size_t e = 0; e < n_edges; ++e) ds.graphs[edge_graph[e]].a.labels.push_back(ids[e]);
  }

  // targets
  if (fs::exists(file("_graph_labels.txt"))) {
    const auto raw = read_int_column(file("_graph_labels.txt"));
    if (raw.size() != ds.graphs.size()) throw FormatError("graph label count differs from graph count");
    auto [ids, map] = dense_remap(raw);
    ds.target_kind = TargetKind::classification;
    ds.n_classes = map.size();
    ds.class_map = map;
    for (std::size_t g = 0; g < ds.graphs.size(); ++g) ds.graphs[g].y.label = ids[g];
  } else if (options.regression_targets && fs::exists(file("_graph_attributes.txt"))) {
    auto [values, width] = read_real_rows(file("_graph_attributes.txt"));
    if (width == 0 || values.size() / width != ds.graphs.size()) {
      throw FormatError("graph attribute rows differ from graph count");
    }
    ds.target_kind = TargetKind::regression;
    ds.target_dim = width;
    for (std::size_t g = 0; g < ds.graphs.size(); ++g) {
      ds.graphs[g].y.values.assign(values.begin() + static_cast<std::ptrdiff_t>(g * width),
                                   values.begin() + static_cast<std::ptrdiff_t>((g + 1) * width));
    }
  }

  if (options.undirected) {
    for (auto& g : ds.graphs) symmetrize(g);
  }
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------
// JSONL

namespace {

struct LineError {
  std::size_t line;
  [[noreturn]] void format(const std::string& msg) const {
    throw FormatError("line " + std::to_string(line) + ": " + msg);
  }
  [[noreturn]] void value(const std::string& msg) const {
    throw ValueError("line " + std::to_string(line) + ": " + msg);
  }
};

double finite_number(const json& j, const LineError& err, const char* field) {
  if (!j.is_number()) err.format(std::string("'") + field + "' holds a non-numeric entry");
  const double v = j.get<double>();
  if (!std::isfinite(v)) err.value(std::string("'") + field + "' holds a non-finite value");
  return v;
}

// Empty arrays leave the kind as none; the caller resolves it from the dataset.
Features parse_features(const json& j, const LineError& err, const char* field) {
  if (j.is_null()) return {};
  if (!j.is_array()) err.format(std::string("'") + field + "' must be an array or null");
  if (j.empty()) return {};
  const bool all_int = std::all_of(j.begin(), j.end(), [](const json& e) {
    return e.is_number_integer();
  });
  if (all_int) {
    std::vector<std::uint32_t> ids;
    for (const auto& e : j) {
      const auto v = e.get<std::int64_t>();
      if (v < 0) err.format(std::string("'") + field + "' holds a negative category");
      ids.push_back(static_cast<std::uint32_t>(v));
    }
    return Features::categorical(std::move(ids));
  }
  if (j.front().is_array()) {
    const std::size_t width = j.front().size();
    if (width == 0) err.format(std::string("'") + field + "' holds an empty row");
    std::vector<double> values;
    for (const auto& row : j) {
      if (!row.is_array() || row.size() != width) {
        err.format(std::string("'") + field + "' rows are ragged or mixed");
      }
      for (const auto& e : row) values.push_back(finite_number(e, err, field));
    }
    return Features::continuous(std::move(values), width);
  }
  std::vector<double> values;
  for (const auto& e : j) values.push_back(finite_number(e, err, field));
  return Features::continuous(std::move(values), 1);
}

json features_to_json(const Features& f) {
  switch (f.kind) {
    case FeatureKind::none: return nullptr;
    case FeatureKind::categorical: return f.labels;
    case FeatureKind::continuous: {
      json rows = json::array();
      for (std::size_t i = 0; i < f.size(); ++i) {
        json row = json::array();
        for (double v : f.row(i)) {
          if (!std::isfinite(v)) throw ValueError("cannot serialize non-finite feature");
          row.push_back(v);
        }
        rows.push_back(std::move(row));
      }
      return rows;
    }
  }
  return nullptr;
}

json meta_to_json(const FeatureMeta& m) {
  return {{"kind", to_string(m.kind)}, {"dim", m.dim}, {"domain", m.domain},
          {"label_map", m.label_map}};
}

FeatureKind kind_from_string(const std::string& s) {
  if (s == "none") return FeatureKind::none;
  if (s == "categorical") return FeatureKind::categorical;
  if (s == "continuous") return FeatureKind::continuous;
  throw FormatError("unknown feature kind '" + s + "'");
}

FeatureMeta meta_from_json(const json& j) {
  FeatureMeta m;
  m.kind = kind_from_string(j.at("kind").get<std::string>());
  m.dim = j.at("dim").get<std::size_t>();
  m.domain = j.at("domain").get<std::size_t>();
  m.label_map = j.at("label_map").get<std::vector<std::int64_t>>();
  return m;
}

const char* target_kind_name(TargetKind k) {
  switch (k) {
    case TargetKind::none: return "none";
    case TargetKind::classification: return "classification";
    case TargetKind::regression: return "regression";
  }
  return "none";
}

void infer_meta(const std::vector<Features*>& feats, FeatureMeta& meta) {
  meta = {};
  for (const auto* f : feats) {
    if (f->kind == FeatureKind::none) continue;
    if (meta.kind == FeatureKind::none) {
      meta.kind = f->kind;
      meta.dim = f->dim;
    } else if (meta.kind != f->kind || meta.dim != f->dim) {
      throw FormatError("feature kinds or widths differ between graphs");
    }
    for (auto id : f->labels) meta.domain = std::max<std::size_t>(meta.domain, id + 1);
  }
}

}  // namespace

Dataset read_jsonl(std::istream& in) {
  Dataset ds;
  std::optional<json> meta;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (trim(line).empty()) continue;
    const LineError err{no};
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      err.format(std::string("malformed JSON: ") + e.what());
    } catch (const json::out_of_range& e) {
      err.value(std::string("number overflows to a non-finite value: ") + e.what());
    }
    if (!j.is_object()) err.format("expected a JSON object");
    if (j.contains("meta")) {
      meta = j["meta"];
      continue;
    }
    Graph g;
    try {
      const auto n = j.at("n").get<std::int64_t>();
      if (n < 0) err.format("'n' must be non-negative");
      g.n_vertices = static_cast<std::size_t>(n);
      for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
            !e[1].is_number_integer() || e[0].get<std::int64_t>() < 0 ||
            e[1].get<std::int64_t>() < 0) {
          err.format("edges must be pairs of non-negative integers");
        }
        g.edges.push_back({e[0].get<std::uint32_t>(), e[1].get<std::uint32_t>()});
      }
    } catch (const json::exception& e) {
      err.format(e.what());
    }
    if (j.contains("x")) g.x = parse_features(j["x"], err, "x");
    if (j.contains("a")) g.a = parse_features(j["a"], err, "a");
    if (j.contains("y") && !j["y"].is_null()) {
      const auto& y = j["y"];
      if (y.is_number_integer()) {
        g.y.label = y.get<std::int64_t>();
      } else if (y.is_number()) {
        g.y.values.push_back(finite_number(y, err, "y"));
      } else if (y.is_array()) {
        for (const auto& e : y) g.y.values.push_back(finite_number(e, err, "y"));
      } else {
        err.format("'y' must be an integer, a number, an array or null");
      }
    }
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      if (g.edges[e].src >= g.n_vertices || g.edges[e].dst >= g.n_vertices) {
        throw IntegrityError("line " + std::to_string(no) + ": edge endpoint out of range");
      }
    }
    ds.graphs.push_back(std::move(g));
  }

  std::vector<Features*> xs, as;
  for (auto& g : ds.graphs) {
    xs.push_back(&g.x);
    as.push_back(&g.a);
  }
  infer_meta(xs, ds.vertex_meta);
  infer_meta(as, ds.edge_meta);
  for (auto& g : ds.graphs) {
    if (g.y.label) {
      ds.target_kind = TargetKind::classification;
      ds.n_classes = std::max<std::size_t>(ds.n_classes, static_cast<std::size_t>(*g.y.label) + 1);
    } else if (!g.y.values.empty()) {
      ds.target_kind = TargetKind::regression;
      ds.target_dim = g.y.values.size();
    }
  }
  if (meta) {
    try {
      ds.undirected = meta->at("undirected").get<bool>();
      ds.vertex_meta = meta_from_json(meta->at("vertex_meta"));
      ds.edge_meta = meta_from_json(meta->at("edge_meta"));
      const auto tk = meta->at("target_kind").get<std::string>();
      ds.target_kind = tk == "classification" ? TargetKind::classification
                       : tk == "regression"   ? TargetKind::regression
                                              : TargetKind::none;
      ds.n_classes = meta->at("n_classes").get<std::size_t>();
      ds.target_dim = meta->at("target_dim").get<std::size_t>();
      ds.class_map = meta->at("class_map").get<std::vector<std::int64_t>>();
    } catch (const json::exception& e) {
      throw FormatError(std::string("malformed meta line: ") + e.what());
    }
  }
  // empty feature arrays take the dataset kind
  for (auto& g : ds.graphs) {
    if (g.x.kind == FeatureKind::none && g.n_vertices == 0 && ds.vertex_meta.kind != FeatureKind::none) {
      g.x.kind = ds.vertex_meta.kind;
      g.x.dim = ds.vertex_meta.kind == FeatureKind::categorical ? 1 : ds.vertex_meta.dim;
    }
    if (g.a.kind == FeatureKind::none && g.edges.empty() && ds.edge_meta.kind != FeatureKind::none) {
      g.a.kind = ds.edge_meta.kind;
      g.a.dim = ds.edge_meta.kind == FeatureKind::categorical ? 1 : ds.edge_meta.dim;
    }
  }
  ds.validate();
  return ds;
}

Dataset load_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_jsonl(in);
}

void write_jsonl(const Dataset& ds, std::ostream& out) {
  json meta = {{"undirected", ds.undirected},
               {"vertex_meta", meta_to_json(ds.vertex_meta)},
               {"edge_meta", meta_to_json(ds.edge_meta)},
               {"target_kind", target_kind_name(ds.target_kind)},
               {"n_classes", ds.n_classes},
               {"target_dim", ds.target_dim},
               {"class_map", ds.class_map}};
  out << json{{"meta", meta}}.dump() << '\n';
  for (const auto& g : ds.graphs) {
    json edges = json::array();
    for (const auto& e : g.edges) edges.push_back({e.src, e.dst});
    json y = nullptr;
    if (g.y.label) {
      y = *g.y.label;
    } else if (!g.y.values.empty()) {
      for (double v : g.y.values) {
        if (!std::isfinite(v)) throw ValueError("cannot serialize non-finite target");
      }
      y = g.y.values;
    }
    json obj = {{"n", g.n_vertices}, {"edges", std::move(edges)}, {"x", features_to_json(g.x)},
                {"a", features_to_json(g.a)}, {"y", std::move(y)}};
    out << obj.dump() << '\n';
  }
}

void save_jsonl(const Dataset& ds, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  write_jsonl(ds, out);
}

Dataset discretize_edges(const Dataset& ds, std::size_t n_bins,
                         std::span<const std::size_t> train_graphs) {
  if (n_bins < 1) throw ConfigError("discretize_edges: n_bins must be >= 1");
  if (ds.edge_meta.kind != FeatureKind::continuous) {
    throw UnsupportedError("discretize_edges: edge features are not continuous");
  }
  if (ds.edge_meta.dim != 1) {
    throw UnsupportedError("discretize_edges: only scalar edge features are supported, got width " +
                           std::to_string(ds.edge_meta.dim));
  }
  std::vector<std::size_t> train(train_graphs.begin(), train_graphs.end());
  if (train.empty()) {
    for (std::size_t g = 0; g < ds.graphs.size(); ++g) train.push_back(g);
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (auto gi : train) {
    for (double v : ds.graphs.at(gi).a.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double width = hi > lo ? hi - lo : 0.0;
  Dataset out = ds;
  out.edge_meta = {FeatureKind::categorical, 1, n_bins, {}};
  for (auto& g : out.graphs) {
    std::vector<std::uint32_t> bins(g.a.values.size(), 0);
    if (width > 0.0) {
      for (std::size_t e = 0; e < bins.size(); ++e) {
        const double pos = std::floor((g.a.values[e] - lo) / width * static_cast<double>(n_bins));
        bins[e] = static_cast<std::uint32_t>(
            std::clamp(pos, 0.0, static_cast<double>(n_bins - 1)));
      }
    }
    g.a = Features::categorical(std::move(bins));
  }
  return out;
}

}  // namespace ecgmm
