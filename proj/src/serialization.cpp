#include "ecgmm/serialization.hpp"

#include <fstream>
#include <ostream>
#include <string>

#include "ecgmm/error.hpp"
#include "ecgmm/format.hpp"

using nlohmann::json;

namespace ecgmm {

namespace {

FeatureKind kind_from(const std::string& s) {
  if (s == "categorical") return FeatureKind::categorical;
  if (s == "continuous") return FeatureKind::continuous;
  if (s == "none") return FeatureKind::none;
  throw FormatError("unknown feature kind '" + s + "'");
}

}  // namespace

json to_json(const Emission& e) {
  if (e.kind() == FeatureKind::categorical) {
    const auto& c = e.categorical();
    return {{"kind", "categorical"}, {"shape", {c.states, c.domain}}, {"table", c.table}};
  }
  const auto& g = e.gaussian();
  return {{"kind", "gaussian"},
          {"shape", {g.states, g.dim}},
          {"means", g.means},
          {"variances", g.variances}};
}

Emission emission_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  const auto shape = j.at("shape").get<std::vector<std::size_t>>();
  if (shape.size() != 2) throw FormatError("emission shape must have two entries");
  if (kind == "categorical") {
    return Emission(CategoricalEmission{shape[0], shape[1], j.at("table").get<std::vector<double>>()});
  }
  if (kind == "gaussian") {
    return Emission(GaussianEmission{shape[0], shape[1], j.at("means").get<std::vector<double>>(),
                                     j.at("variances").get<std::vector<double>>()});
  }
  throw FormatError("unknown emission kind '" + kind + "'");
}

json to_json(const TransitionTensor& t) {
  return {{"shape", {t.groups, t.targets, t.sources}}, {"probs", t.probs}};
}

TransitionTensor transition_from_json(const json& j) {
  const auto shape = j.at("shape").get<std::vector<std::size_t>>();
  if (shape.size() != 3) throw FormatError("transition shape must have three entries");
  TransitionTensor t{shape[0], shape[1], shape[2], j.at("probs").get<std::vector<double>>()};
  t.validate();
  return t;
}

json to_json(const StackConfig& c) {
  return {{"n_layers", c.n_layers},
          {"c_v", c.c_v},
          {"c_e", c.c_e},
          {"em_iterations", c.em_iterations},
          {"em_rel_tolerance", c.em_rel_tolerance},
          {"state_mode", to_string(c.state_mode)},
          {"seed", c.seed},
          {"vertex_kind", to_string(c.vertex_kind)},
          {"vertex_width", c.vertex_width},
          {"edge_kind", to_string(c.edge_kind)},
          {"edge_width", c.edge_width}};
}

StackConfig stack_config_from_json(const json& j) {
  StackConfig c;
  c.n_layers = j.value("n_layers", c.n_layers);
  c.c_v = j.value("c_v", c.c_v);
  c.c_e = j.value("c_e", c.c_e);
  c.em_iterations = j.value("em_iterations", c.em_iterations);
  c.em_rel_tolerance = j.value("em_rel_tolerance", c.em_rel_tolerance);
  c.state_mode = state_mode_from_string(j.value("state_mode", to_string(c.state_mode)));
  c.seed = j.value("seed", c.seed);
  c.vertex_kind = kind_from(j.value("vertex_kind", std::string("none")));
  c.vertex_width = j.value("vertex_width", std::size_t{0});
  c.edge_kind = kind_from(j.value("edge_kind", std::string("none")));
  c.edge_width = j.value("edge_width", std::size_t{0});
  return c;
}

json to_json(const StackModel& m) {
  json layers = json::array();
  for (const auto& l : m.layers) {
    json v = {{"emission", to_json(l.vertex.emission)},
              {"transition", to_json(l.vertex.transition)},
              {"sp", l.vertex.sp.weights},
              {"mixture", l.vertex.mixture},
              {"c_v", l.vertex.c_v},
              {"c_e", l.vertex.c_e}};
    json e = {{"emission", to_json(l.edge.emission)},
              {"transition", to_json(l.edge.transition)},
              {"sp", l.edge.sp.weights},
              {"c_e", l.edge.c_e},
              {"c_v", l.edge.c_v}};
    layers.push_back({{"vertex", std::move(v)}, {"edge", std::move(e)}});
  }
  json log = json::array();
  for (const auto& t : m.training_log) {
    log.push_back({{"layer", t.layer},
                   {"component", t.component},
                   {"iteration", t.iteration},
                   {"log_likelihood", t.log_likelihood}});
  }
  return {{"format", "ecgmm-model"},
          {"version", kModelFormatVersion},
          {"config", to_json(m.config)},
          {"layers", std::move(layers)},
          {"training_log", std::move(log)}};
}

StackModel model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "ecgmm-model") throw FormatError("not an ecgmm model");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw FormatError("unsupported model version " + std::to_string(version));
    }
    StackModel m;
    m.config = stack_config_from_json(j.at("config"));
    for (const auto& l : j.at("layers")) {
      LayerParams p;
      const auto& v = l.at("vertex");
      p.vertex.emission = emission_from_json(v.at("emission"));
      p.vertex.transition = transition_from_json(v.at("transition"));
      p.vertex.sp.weights = v.at("sp").get<std::vector<double>>();
      p.vertex.mixture = v.at("mixture").get<std::vector<double>>();
      p.vertex.c_v = v.at("c_v").get<std::size_t>();
      p.vertex.c_e = v.at("c_e").get<std::size_t>();
      p.vertex.validate();
      const auto& e = l.at("edge");
      p.edge.emission = emission_from_json(e.at("emission"));
      p.edge.transition = transition_from_json(e.at("transition"));
      p.edge.sp.weights = e.at("sp").get<std::vector<double>>();
      p.edge.c_e = e.at("c_e").get<std::size_t>();
      p.edge.c_v = e.at("c_v").get<std::size_t>();
      p.edge.validate();
      m.layers.push_back(std::move(p));
    }
    for (const auto& t : j.at("training_log")) {
      m.training_log.push_back({t.at("layer").get<std::size_t>(),
                                t.at("component").get<std::string>(),
                                t.at("iteration").get<std::size_t>(),
                                t.at("log_likelihood").get<double>()});
    }
    if (m.layers.size() != m.config.n_layers) throw FormatError("layer count differs from config");
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model document: ") + e.what());
  } catch (const ShapeError& e) {
    throw FormatError(std::string("malformed model document: ") + e.what());
  } catch (const ValueError& e) {
    throw FormatError(std::string("malformed model document: ") + e.what());
  }
}

void save_model(const StackModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << to_json(model).dump() << '\n';
  if (!out) throw FormatError("failed writing " + path.string());
}

StackModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open model file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

void write_training_log_csv(const StackModel& model, std::ostream& out) {
  out << "layer,component,iteration,log_likelihood\n";
  for (const auto& t : model.training_log) {
    out << t.layer << ',' << t.component << ',' << t.iteration << ',' << format_double(t.log_likelihood)
        << '\n';
  }
}

}  // namespace ecgmm
