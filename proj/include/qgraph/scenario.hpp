#ifndef QGRAPH_SCENARIO_HPP
#define QGRAPH_SCENARIO_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "graph.hpp"

namespace qgraph {

using Json = nlohmann::json;

/** \brief Boundary conditions as written in a scenario: a preset, an origin/ends pair or raw matrices. */
struct BoundarySpec {
  enum class Form { Preset, Composite, Explicit };
  Form form = Form::Preset;
  VertexCondition origin = VertexCondition::kirchhoff();  // also the preset kind
  VertexCondition ends = VertexCondition::dirichlet();
  BoundaryConditions matrices;

  BoundaryConditions build(std::size_t n) const {
    switch (form) {
      case Form::Preset: return build_preset(origin.kind, n, origin.theta);
      case Form::Composite: return compose_bc(origin, ends, n);
      case Form::Explicit: return matrices;
    }
    throw Error(ErrorCode::InvalidScenario, "unknown boundary form");
  }
};

struct SweepSpec {
  double lambda_min = 5.0;
  double lambda_max = 60.0;
  std::size_t samples = 0;
};

struct ScenarioOptions {
  std::size_t grid = 0;     // counting grid, 0 for the default density
  std::uint64_t seed = 1;   // randomized verification
  std::size_t trials = 8;   // lambda samples for verification
};

struct Scenario {
  std::string name;
  StarGraph graph;
  BoundarySpec boundary;
  std::optional<SplitSpec> splits;
  SweepSpec sweep;
  ScenarioOptions options;

  BoundaryConditions bc() const { return boundary.build(graph.size()); }
};

namespace detail {

inline const char* vertex_name(VertexKind k) {
  switch (k) {
    case VertexKind::Dirichlet: return "dirichlet";
    case VertexKind::Neumann: return "neumann";
    case VertexKind::Kirchhoff: return "kirchhoff";
    case VertexKind::Robin: return "robin";
  }
  return "?";
}

inline VertexKind vertex_kind(const std::string& s) {
  if (s == "dirichlet") return VertexKind::Dirichlet;
  if (s == "neumann") return VertexKind::Neumann;
  if (s == "kirchhoff") return VertexKind::Kirchhoff;
  if (s == "robin") return VertexKind::Robin;
  throw Error(ErrorCode::InvalidScenario, "unknown vertex condition '" + s + "'");
}

inline const char* split_name(SplitMode m) {
  switch (m) {
    case SplitMode::SingleCut: return "single";
    case SplitMode::DoubleSameWire: return "same_wire";
    case SplitMode::DoubleTwoWires: return "two_wires";
  }
  return "?";
}

inline SplitMode split_mode(const std::string& s) {
  if (s == "single") return SplitMode::SingleCut;
  if (s == "same_wire") return SplitMode::DoubleSameWire;
  if (s == "two_wires") return SplitMode::DoubleTwoWires;
  throw Error(ErrorCode::InvalidScenario, "unknown split mode '" + s + "'");
}

inline Json complex_json(Complex c) { return Json::array({c.real(), c.imag()}); }

inline Complex json_complex(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::InvalidScenario, "complex entries are [re, im] pairs");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

inline Json matrix_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

inline CMatrix json_matrix(const Json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::InvalidScenario, "matrix must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw Error(ErrorCode::InvalidScenario, "ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = json_complex(row.at(static_cast<std::size_t>(c)));
  }
  return m;
}

inline Json vector_json(const CVector& v) {
  Json a = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(complex_json(v(k)));
  return a;
}

inline CVector json_vector(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidScenario, "vector must be an array");
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = json_complex(j[k]);
  return v;
}

inline Json vertex_json(const VertexCondition& vc) {
  Json j{{"kind", vertex_name(vc.kind)}};
  if (!vc.theta.empty()) j["theta"] = vc.theta;
  return j;
}

inline VertexCondition json_vertex(const Json& j) {
  VertexCondition vc{vertex_kind(j.at("kind").get<std::string>()), {}};
  if (j.contains("theta")) vc.theta = j.at("theta").get<std::vector<double>>();
  return vc;
}

inline Json potential_json(const PotentialProfile& p) {
  if (p.kind() == PotentialProfile::Kind::PiecewiseConstant)
    return {{"kind", "piecewise_constant"}, {"breakpoints", p.nodes()}, {"values", p.values()}};
  return {{"kind", "sampled"}, {"x", p.nodes()}, {"v", p.values()}};
}

inline PotentialProfile json_potential(const Json& j, double length) {
  if (j.is_null()) return PotentialProfile::zero(length);
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "zero") return PotentialProfile::zero(length);
  if (kind == "constant") return PotentialProfile::constant(length, j.at("value").get<double>());
  if (kind == "piecewise_constant")
    return PotentialProfile::piecewise_constant(j.at("breakpoints").get<std::vector<double>>(),
                                                j.at("values").get<std::vector<double>>());
  if (kind == "sampled")
    return PotentialProfile::sampled(j.at("x").get<std::vector<double>>(), j.at("v").get<std::vector<double>>());
  throw Error(ErrorCode::InvalidScenario, "unknown potential kind '" + kind + "'");
}

}  // namespace detail

inline Json scenario_to_json(const Scenario& s) {
  Json edges = Json::array();
  for (const auto& e : s.graph.edges) edges.push_back({{"length", e.length}, {"potential", detail::potential_json(e.potential)}});
  Json boundary;
  switch (s.boundary.form) {
    case BoundarySpec::Form::Preset:
      boundary = {{"preset", detail::vertex_name(s.boundary.origin.kind)}};
      if (!s.boundary.origin.theta.empty()) boundary["theta"] = s.boundary.origin.theta;
      break;
    case BoundarySpec::Form::Composite:
      boundary = {{"origin", detail::vertex_json(s.boundary.origin)}, {"ends", detail::vertex_json(s.boundary.ends)}};
      break;
    case BoundarySpec::Form::Explicit:
      boundary = {{"alpha1", detail::matrix_json(s.boundary.matrices.alpha1)},
                  {"alpha2", detail::matrix_json(s.boundary.matrices.alpha2)},
                  {"beta1", detail::vector_json(s.boundary.matrices.beta1)},
                  {"beta2", detail::vector_json(s.boundary.matrices.beta2)}};
      break;
  }
  Json j{{"name", s.name},
         {"graph", {{"edges", edges}}},
         {"boundary", boundary},
         {"sweep", {{"lambda_min", s.sweep.lambda_min}, {"lambda_max", s.sweep.lambda_max}, {"samples", s.sweep.samples}}},
         {"options", {{"grid", s.options.grid}, {"seed", s.options.seed}, {"trials", s.options.trials}}}};
  if (s.splits) {
    Json cuts = Json::array();
    for (const auto& c : s.splits->cuts) cuts.push_back({{"edge", c.edge}, {"position", c.position}});
    j["splits"] = {{"mode", detail::split_name(s.splits->mode)}, {"cuts", cuts}};
  }
  return j;
}

inline std::string serialize_scenario(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

// Builds and validates a scenario; every failure is reported as a validation error.
inline Scenario scenario_from_json(const Json& j) {
  Scenario s;
  try {
    s.name = j.value("name", std::string("scenario"));
    std::vector<EdgeSpec> edges;
    for (const auto& e : j.at("graph").at("edges")) {
      const double len = EdgeSpec::checked_length(e.at("length").get<double>());
      edges.emplace_back(len, detail::json_potential(e.contains("potential") ? e.at("potential") : Json(), len));
    }
    s.graph = StarGraph(std::move(edges));

    const auto& b = j.at("boundary");
    if (b.contains("preset")) {
      s.boundary.form = BoundarySpec::Form::Preset;
      s.boundary.origin = {detail::vertex_kind(b.at("preset").get<std::string>()), {}};
      if (b.contains("theta")) s.boundary.origin.theta = b.at("theta").get<std::vector<double>>();
    } else if (b.contains("origin")) {
      s.boundary.form = BoundarySpec::Form::Composite;
      s.boundary.origin = detail::json_vertex(b.at("origin"));
      s.boundary.ends = detail::json_vertex(b.at("ends"));
    } else {
      s.boundary.form = BoundarySpec::Form::Explicit;
      s.boundary.matrices = {detail::json_matrix(b.at("alpha1")), detail::json_matrix(b.at("alpha2")),
                             detail::json_vector(b.at("beta1")), detail::json_vector(b.at("beta2"))};
    }

    if (j.contains("splits") && !j.at("splits").is_null()) {
      SplitSpec sp;
      sp.mode = detail::split_mode(j.at("splits").at("mode").get<std::string>());
      for (const auto& c : j.at("splits").at("cuts"))
        sp.cuts.push_back({c.at("edge").get<std::size_t>(), c.at("position").get<double>()});
      s.splits = sp;
    }
    if (j.contains("sweep")) {
      const auto& w = j.at("sweep");
      s.sweep.lambda_min = w.value("lambda_min", s.sweep.lambda_min);
      s.sweep.lambda_max = w.value("lambda_max", s.sweep.lambda_max);
      s.sweep.samples = w.value("samples", s.sweep.samples);
    }
    if (j.contains("options")) {
      const auto& o = j.at("options");
      s.options.grid = o.value("grid", s.options.grid);
      s.options.seed = o.value("seed", s.options.seed);
      s.options.trials = o.value("trials", s.options.trials);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidScenario, std::string("malformed scenario: ") + e.what());
  }

  if (!(s.sweep.lambda_min < s.sweep.lambda_max))
    throw Error(ErrorCode::InvalidScenario, "sweep needs lambda_min < lambda_max");
  const BoundaryConditions bc = s.bc();
  require_compatible(s.graph, bc);
  require_valid(bc);
  if (s.splits) validate_split(s.graph, *s.splits);
  return s;
}

inline Scenario parse_scenario(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidScenario, std::string("scenario is not valid JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidScenario, "cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

// ---------------------------------------------------------------------------
// The three worked examples

inline Scenario example_scenario(const std::string& name) {
  const double nu = -10.0;
  Scenario s;
  s.name = name;
  s.sweep = {5.0, 60.0, 1024};
  if (name == "barrier_end") {
    s.graph = StarGraph({EdgeSpec(1.0, PotentialProfile::piecewise_constant({0.0, 1.0 / 3.0, 1.0}, {0.0, nu})),
                         EdgeSpec(1.0)});
    s.boundary.form = BoundarySpec::Form::Preset;
    s.boundary.origin = VertexCondition::kirchhoff();
    s.splits = SplitSpec{SplitMode::SingleCut, {{0, 1.0 / 3.0}}};
  } else if (name == "barrier_interior") {
    s.graph = StarGraph({EdgeSpec(1.0, PotentialProfile::piecewise_constant({0.0, 0.25, 0.75, 1.0}, {0.0, nu, 0.0})),
                         EdgeSpec(1.0)});
    s.boundary.form = BoundarySpec::Form::Composite;
    s.boundary.origin = VertexCondition::kirchhoff();
    s.boundary.ends = VertexCondition::neumann();
    s.splits = SplitSpec{SplitMode::DoubleSameWire, {{0, 0.75}, {0, 0.25}}};
  } else if (name == "two_wire") {
    const auto p = PotentialProfile::piecewise_constant({0.0, 0.5, 1.0}, {nu, 0.0});
    s.graph = StarGraph({EdgeSpec(1.0, p), EdgeSpec(1.0, p)});
    s.boundary.form = BoundarySpec::Form::Preset;
    s.boundary.origin = VertexCondition::kirchhoff();
    s.splits = SplitSpec{SplitMode::DoubleTwoWires, {{0, 0.5}, {1, 0.5}}};
    s.sweep.lambda_min = 3.0;
  } else {
    throw Error(ErrorCode::InvalidScenario, "unknown example '" + name + "'");
  }
  return s;
}

}  // namespace qgraph

#endif  // QGRAPH_SCENARIO_HPP
