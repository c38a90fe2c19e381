#pragma once

#include <cmath>
#include <filesystem>
#include <span>
#include <string>

#include <doctest.h>

#include "ecgmm/graph.hpp"
#include "ecgmm/matrix.hpp"

inline std::filesystem::path test_data(const std::string& name) {
  return std::filesystem::path(ECGMM_TEST_DATA) / name;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("ecgmm_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  REQUIRE(a.size() == b.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double max_abs_diff(const ecgmm::Matrix& a, const ecgmm::Matrix& b) {
  REQUIRE(a.rows == b.rows);
  REQUIRE(a.cols == b.cols);
  return max_abs_diff(a.data, b.data);
}

inline ecgmm::Graph make_graph(std::size_t n, std::vector<ecgmm::Edge> edges,
                               std::vector<std::uint32_t> labels = {}) {
  ecgmm::Graph g;
  g.n_vertices = n;
  g.edges = std::move(edges);
  if (labels.empty()) labels.assign(n, 0);
  g.x = ecgmm::Features::categorical(std::move(labels));
  return g;
}

inline ecgmm::Dataset single_graph(ecgmm::Graph g, std::size_t domain) {
  ecgmm::Dataset ds;
  ds.vertex_meta = {ecgmm::FeatureKind::categorical, 1, domain, {}};
  if (g.a.kind == ecgmm::FeatureKind::continuous) ds.edge_meta = {ecgmm::FeatureKind::continuous, g.a.dim, 0, {}};
  ds.graphs.push_back(std::move(g));
  return ds;
}
