#ifndef QGRAPH_CLI_HPP
#define QGRAPH_CLI_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>

#include "counting.hpp"
#include "resolvent.hpp"
#include "scenario.hpp"

namespace qgraph {

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitNumerical = 3, kExitEndpoint = 4, kExitVerifyFail = 5 };

inline int exit_code_for(ErrorCode c) {
  if (is_validation_error(c)) return kExitValidation;
  if (c == ErrorCode::EndpointOnSpectrum || c == ErrorCode::PoleOnBoundary) return kExitEndpoint;
  return kExitNumerical;
}

// Runs a command, mapping exceptions to the exit-code contract.
inline int run_guarded(const std::function<int()>& cmd, std::ostream& err) {
  try {
    return cmd();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// evans

inline int cmd_evans(const Scenario& s, std::ostream& out) {
  const BoundaryConditions bc = s.bc();
  struct Problem {
    std::string label;
    StarGraph g;
    BoundaryConditions bc;
  };
  std::vector<Problem> probs{{"E", s.graph, bc}};
  if (s.splits) {
    const auto sr = split_graph(s.graph, bc, *s.splits);
    for (const auto* p : identity_pieces(sr)) probs.push_back({piece_label(p->region, p->conditions), p->graph, p->bc});
  }
  out << "lambda";
  for (const auto& p : probs) out << ",re_" << p.label << ",im_" << p.label;
  out << "\n";
  if (s.sweep.samples == 0) return kExitOk;
  const auto lambdas = linspace(s.sweep.lambda_min, s.sweep.lambda_max, s.sweep.samples);
  const auto rows = parallel_map<std::vector<Complex>>(lambdas, [&](double l) {
    std::vector<Complex> r;
    for (const auto& p : probs) r.push_back(evans(p.g, p.bc, l));
    return r;
  });
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    out << fmt17(lambdas[k]);
    for (const auto& v : rows[k]) out << ',' << fmt17(v.real()) << ',' << fmt17(v.imag());
    out << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// count

namespace detail {

inline Json roots_json(const std::vector<Root>& r) {
  Json a = Json::array();
  for (const auto& x : r) a.push_back({{"location", x.location}, {"multiplicity", x.multiplicity}});
  return a;
}

inline Json report_json(const CountReport& r) {
  return {{"lo", r.lo},       {"hi", r.hi},           {"count", r.count},           {"delta_N", r.delta_N},
          {"zeros", roots_json(r.zeros)}, {"poles", roots_json(r.poles)}, {"warnings", r.warnings}};
}

inline std::string roots_text(const std::vector<Root>& r) {
  std::string s;
  for (const auto& x : r) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%.10g", s.empty() ? "" : " ", x.location);
    s += buf;
    if (x.multiplicity != 1) s += "(x" + std::to_string(x.multiplicity) + ")";
  }
  return s.empty() ? "-" : s;
}

}  // namespace detail

inline CountOptions count_options(const Scenario& s) {
  CountOptions o;
  o.grid = s.options.grid;
  return o;
}

inline int cmd_count(const Scenario& s, std::ostream& out) {
  const BoundaryConditions bc = s.bc();
  const double a = s.sweep.lambda_min, b = s.sweep.lambda_max;
  out << "interval [" << a << ", " << b << "]\n";
  Json machine;
  int code = kExitOk;
  if (!s.splits) {
    CountOptions o = count_options(s);
    o.endpoints = EndpointPolicy::Throw;
    const auto rep = count_eigenvalues(s.graph, bc, a, b, o);
    out << "full  N = " << rep.count << "  zeros: " << detail::roots_text(rep.zeros) << "\n";
    machine = {{"full", detail::report_json(rep)}};
  } else {
    const auto id = verify_counting(s.graph, bc, *s.splits, a, b, count_options(s));
    out << "full  N = " << id.full.count << "  zeros: " << detail::roots_text(id.full.zeros) << "\n";
    Json pieces = Json::array();
    for (const auto& p : id.pieces) {
      out << p.label << "  N = " << p.report.count << "  zeros: " << detail::roots_text(p.report.zeros) << "\n";
      pieces.push_back({{"label", p.label}, {"report", detail::report_json(p.report)}});
    }
    out << "map  N = " << id.map.delta_N << "  zeros: " << detail::roots_text(id.map.zeros)
        << "  poles: " << detail::roots_text(id.map.poles) << "\n";
    for (const auto& w : id.map.warnings) out << "warning: " << w << "\n";
    out << id.equation() << (id.holds ? " PASS" : " FAIL") << "\n";
    machine = {{"full", detail::report_json(id.full)},
               {"pieces", pieces},
               {"map", detail::report_json(id.map)},
               {"equation", id.equation()},
               {"holds", id.holds}};
    if (!id.holds) code = kExitVerifyFail;
  }
  out << "--- machine-readable\n" << machine.dump(2) << "\n";
  return code;
}

// ---------------------------------------------------------------------------
// verify

enum class Check { Single, Double, Minors, Resolvent, Projections, UGamma };

inline Check parse_check(const std::string& s) {
  if (s == "single") return Check::Single;
  if (s == "double") return Check::Double;
  if (s == "minors") return Check::Minors;
  if (s == "resolvent") return Check::Resolvent;
  if (s == "projections") return Check::Projections;
  if (s == "ugamma") return Check::UGamma;
  throw Error(ErrorCode::InvalidScenario, "unknown check '" + s + "'");
}

/** \brief Residual table with a PASS/FAIL/SKIP status per row. */
struct VerifyTable {
  struct Row {
    std::string check;
    double lambda;
    double residual;
    double tolerance;
    std::string status;
  };
  std::vector<Row> rows;

  void add(const std::string& c, double l, double r, double tol) {
    rows.push_back({c, l, r, tol, r <= tol ? "PASS" : "FAIL"});
  }
  void skip(const std::string& c, double l, const std::string& why) {
    rows.push_back({c, l, std::nan(""), 0.0, "SKIP " + why});
  }
  bool passed() const {
    for (const auto& r : rows)
      if (r.status == "FAIL") return false;
    return true;
  }
};

// Smooth random forcing: a short cosine series per edge.
inline Forcing random_forcing(const StarGraph& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<Complex>> coef(g.size());
  std::vector<double> len;
  for (std::size_t j = 0; j < g.size(); ++j) {
    for (int k = 0; k < 4; ++k) coef[j].emplace_back(u(rng), u(rng));
    len.push_back(g.edges[j].length);
  }
  return [coef, len](std::size_t j, double x) {
    Complex s = 0.0;
    for (std::size_t k = 0; k < coef[j].size(); ++k) s += coef[j][k] * std::cos(std::acos(-1.0) * k * x / len[j]);
    return s;
  };
}

inline VerifyTable run_verify(const Scenario& s, Check which, std::uint64_t seed) {
  const BoundaryConditions bc = s.bc();
  VerifyTable t;
  std::mt19937_64 rng(seed);
  const std::size_t m = std::max<std::size_t>(1, s.options.trials);
  std::vector<double> lambdas;
  for (std::size_t k = 0; k < m; ++k)
    lambdas.push_back(s.sweep.lambda_min + (k + 0.5) * (s.sweep.lambda_max - s.sweep.lambda_min) / static_cast<double>(m));

  auto need = [&](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidScenario, std::string("this check needs ") + what);
  };
  auto guarded = [&](const std::string& name, double l, const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      const auto c = e.code();
      if (c == ErrorCode::PoleAtLambda || c == ErrorCode::OnSpectrum || c == ErrorCode::NoIndependentPartner)
        t.skip(name, l, to_string(c));
      else
        throw;
    }
  };

  switch (which) {
    case Check::Single: {
      need(s.splits.has_value(), "a split");
      const Cut cut = s.splits->cuts.front();
      const auto sr = split_graph(s.graph, bc, {SplitMode::SingleCut, {cut}});
      for (double l : lambdas) {
        guarded("single_factorization", l, [&] { t.add("single_factorization", l, verify_single_split(s.graph, bc, cut, l), 1e-8); });
        guarded("m1_dual_path", l, [&] { t.add("m1_dual_path", l, map_M1(sr.get(Region::Omega1, {CutCondition::D}), l).discrepancy(), 1e-8); });
        guarded("m2_dual_path", l, [&] {
          t.add("m2_dual_path", l, map_M2(sr.get(Region::Omega2, {CutCondition::D}), cut.edge, l).discrepancy(), 1e-8);
        });
      }
      break;
    }
    case Check::Double:
      need(s.splits && s.splits->mode != SplitMode::SingleCut, "a double split");
      for (double l : lambdas)
        guarded("double_factorization", l, [&] { t.add("double_factorization", l, verify_double_split(s.graph, bc, *s.splits, l), 1e-7); });
      break;
    case Check::Minors: {
      need(s.splits && s.splits->mode == SplitMode::DoubleTwoWires, "a two-wire split");
      const auto sr = split_graph(s.graph, bc, *s.splits);
      for (double l : lambdas) guarded("minor_identity", l, [&] { t.add("minor_identity", l, minor_identity_check(sr, l).residual, 1e-8); });
      break;
    }
    case Check::Resolvent:
      for (double l : lambdas) {
        const Forcing v = random_forcing(s.graph, rng);
        guarded("resolvent", l, [&] {
          const auto ra = resolvent_apply(s.graph, bc, l, v);
          t.add("resolvent_trace", l, ra.trace().cwiseAbs().maxCoeff(), 1e-8);
          t.add("resolvent_segment", l, ra.segment_residual(), 1e-7);
          t.add("resolvent_cramer_lu", l, ra.solver_discrepancy, 1e-9);
        });
      }
      break;
    case Check::Projections: {
      const auto ps = build_projections(bc);
      const auto inv = check_projections(ps);
      t.add("unitarity", std::nan(""), inv.unitarity, 1e-10);
      t.add("partition", std::nan(""), inv.partition, 1e-10);
      t.add("dirichlet_annihilation", std::nan(""), inv.dirichlet, 1e-10);
      t.add("neumann_annihilation", std::nan(""), inv.neumann, 1e-10);
      t.add("lambda_self_adjoint", std::nan(""), inv.lambda_sym, 1e-10);
      const CVector zero = CVector::Zero(static_cast<Eigen::Index>(2 * s.graph.size()));
      for (double l : lambdas) {
        const Forcing v = random_forcing(s.graph, rng);
        guarded("trace_relations", l, [&] {
          t.add("trace_relations", l, projection_trace_residual(ps, resolvent_apply(s.graph, bc, l, v).boundary_data(), zero), 1e-8);
        });
      }
      break;
    }
    case Check::UGamma:
      for (double l : lambdas)
        guarded("ugamma_dual_path", l, [&] {
          double d = 0.0;
          for (std::size_t i = 0; i < 2 * s.graph.size(); ++i) d = std::max(d, u_gamma(s.graph, bc, l, i).discrepancy);
          t.add("ugamma_dual_path", l, d, 1e-7);
        });
      break;
  }
  return t;
}

inline int cmd_verify(const Scenario& s, Check which, std::uint64_t seed, std::ostream& out) {
  const VerifyTable t = run_verify(s, which, seed);
  out << "check,lambda,residual,tolerance,status\n";
  for (const auto& r : t.rows)
    out << r.check << ',' << (std::isnan(r.lambda) ? std::string("") : fmt17(r.lambda)) << ',' << fmt17(r.residual) << ','
        << fmt17(r.tolerance) << ',' << r.status << "\n";
  out << (t.passed() ? "PASS" : "FAIL") << "\n";
  return t.passed() ? kExitOk : kExitVerifyFail;
}

// ---------------------------------------------------------------------------
// example

/** \brief One plotted curve and its vertical display factor (metadata only; data stay unscaled). */
struct ExampleCurve {
  std::string label;
  double scale;
};

inline std::vector<ExampleCurve> example_curves(const std::string& name) {
  if (name == "barrier_end") return {{"E", 1.0}, {"omega1_D", 15.0}, {"omega2_D", 10.0}, {"map", 1.0 / 25.0}};
  if (name == "barrier_interior")
    return {{"E", 0.1}, {"omega1_D", 20.0}, {"omega1t_DD", 20.0}, {"omega2t_D", 1.0}, {"map", 1.0 / 1000.0}};
  if (name == "two_wire") return {{"E", 1.0}, {"omega1_D", 100.0}, {"omega1t_D", 100.0}, {"omega2t_DD", 100.0}, {"map", 10.0}};
  throw Error(ErrorCode::InvalidScenario, "unknown example '" + name + "'");
}

// Writes <dir>/<name>.scenario.json and <dir>/<name>.csv; returns the CSV path.
inline std::string cmd_example(const std::string& name, const std::string& dir, std::ostream& log) {
  const Scenario s = example_scenario(name);
  const auto curves = example_curves(name);
  std::filesystem::create_directories(dir);
  const std::string base = (std::filesystem::path(dir) / name).string();
  {
    std::ofstream js(base + ".scenario.json", std::ios::binary);
    js << serialize_scenario(s);
  }
  const BoundaryConditions bc = s.bc();
  const auto sr = split_graph(s.graph, bc, *s.splits);
  const auto pieces = identity_pieces(sr);
  const RealFunction map = split_map_function(sr);
  const auto lambdas = linspace(s.sweep.lambda_min, s.sweep.lambda_max, s.sweep.samples);
  const auto rows = parallel_map<std::vector<double>>(lambdas, [&](double l) {
    std::vector<double> r{evans(s.graph, bc, l).real()};
    for (const auto* p : pieces) r.push_back(evans(p->graph, p->bc, l).real());
    double mv;
    try {
      mv = map(l);
    } catch (const Error&) {
      mv = std::nan("");
    }
    r.push_back(mv);
    return r;
  });
  std::ofstream csv(base + ".csv", std::ios::binary);
  csv << "lambda";
  for (const auto& c : curves) csv << ',' << c.label << ',' << c.label << "_scale";
  csv << "\n";
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    csv << fmt17(lambdas[k]);
    for (std::size_t c = 0; c < curves.size(); ++c) csv << ',' << fmt17(rows[k][c]) << ',' << fmt17(curves[c].scale);
    csv << "\n";
  }
  log << "wrote " << base << ".scenario.json and " << base << ".csv\n";
  return base + ".csv";
}

}  // namespace qgraph

#endif  // QGRAPH_CLI_HPP
