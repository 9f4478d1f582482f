#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <qgraph/cli.hpp>

#include "oracles.hpp"

using namespace qgraph;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& l) {
  std::vector<std::string> out;
  std::istringstream in(l);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

ErrorCode parse_error(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parsed without error";
  return ErrorCode::InvalidScenario;
}

const char* kTwoEdges = R"({"graph": {"edges": [{"length": 1.0}, {"length": 2.0}]}, "boundary": {"preset": "kirchhoff"}})";

}  // namespace

TEST(Scenario, RoundTripIsByteIdentical) {
  std::vector<Scenario> all;
  for (const char* n : {"barrier_end", "barrier_interior", "two_wire"}) all.push_back(example_scenario(n));
  Scenario ex = example_scenario("barrier_end");
  ex.boundary.form = BoundarySpec::Form::Explicit;
  ex.boundary.matrices = compose_bc(VertexCondition::robin({0.3, -2.0}), VertexCondition::neumann(), 2);
  ex.boundary.matrices.beta1(1) = Complex(0.0, 0.0);
  ex.graph.edges[1] = EdgeSpec(1.0, PotentialProfile::sampled({0.0, 0.1, 1.0}, {1.0, 0.123456789012345678, -3.0}));
  ex.splits.reset();
  ex.options = {300, 12345678901234ULL, 3};
  all.push_back(ex);
  for (const auto& s : all) {
    const std::string once = serialize_scenario(s);
    EXPECT_EQ(serialize_scenario(parse_scenario(once)), once) << s.name;
  }
}

TEST(Scenario, ShippedFilesMatchBuiltInExamples) {
  for (const char* n : {"barrier_end", "barrier_interior", "two_wire"}) {
    const std::string path = std::string(QGRAPH_SOURCE_DIR) + "/scenarios/" + n + ".json";
    EXPECT_EQ(slurp(path), serialize_scenario(example_scenario(n))) << path;
  }
}

TEST(Scenario, DefaultsAndShorthands) {
  const auto s = parse_scenario(kTwoEdges);
  EXPECT_EQ(s.graph.size(), 2u);
  EXPECT_EQ(s.graph.edges[1].potential(1.5), 0.0);
  EXPECT_FALSE(s.splits.has_value());
  EXPECT_EQ(s.sweep.samples, 0u);
  const auto c = parse_scenario(R"({"graph": {"edges": [{"length": 1, "potential": {"kind": "constant", "value": 4}}]},
                                   "boundary": {"origin": {"kind": "robin", "theta": [2]}, "ends": {"kind": "neumann"}}})");
  EXPECT_EQ(c.graph.edges[0].potential(0.3), 4.0);
  EXPECT_EQ(c.bc().alpha1(0, 0), Complex(2.0));
}

TEST(Scenario, ValidationErrors) {
  EXPECT_EQ(parse_error("{\"graph\": "), ErrorCode::InvalidScenario);
  EXPECT_EQ(parse_error(R"({"boundary": {"preset": "kirchhoff"}})"), ErrorCode::InvalidScenario);
  EXPECT_EQ(parse_error(R"({"graph": {"edges": [{"length": -1}]}, "boundary": {"preset": "dirichlet"}})"),
            ErrorCode::InvalidGraph);
  EXPECT_EQ(parse_error(R"({"graph": {"edges": [{"length": 1}]}, "boundary": {"preset": "sideways"}})"),
            ErrorCode::InvalidScenario);
  EXPECT_EQ(parse_error(R"({"graph": {"edges": [{"length": 1}]}, "boundary": {"preset": "dirichlet"},
                           "sweep": {"lambda_min": 9, "lambda_max": 2}})"),
            ErrorCode::InvalidScenario);
  EXPECT_EQ(parse_error(R"({"graph": {"edges": [{"length": 1}]}, "boundary": {"preset": "dirichlet"},
                           "splits": {"mode": "single", "cuts": [{"edge": 0, "position": 1.0}]}})"),
            ErrorCode::CutOnVertex);
  EXPECT_EQ(parse_error(slurp(std::string(QGRAPH_SOURCE_DIR) + "/tests/data/not_self_adjoint.json")),
            ErrorCode::NotSelfAdjoint);
  try {
    load_scenario("/nonexistent/scenario.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(exit_code_for(e.code()), kExitValidation);
  }
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(ErrorCode::NotSelfAdjoint), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::RankDeficient), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::InvalidScenario), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::CutsOutOfOrder), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::EndpointOnSpectrum), 4);
  EXPECT_EQ(exit_code_for(ErrorCode::PoleOnBoundary), 4);
  EXPECT_EQ(exit_code_for(ErrorCode::StepSizeUnderflow), 3);
  EXPECT_EQ(exit_code_for(ErrorCode::OnSpectrum), 3);
  EXPECT_EQ(exit_code_for(ErrorCode::SingularDeltaCombination), 3);
}

TEST(ExitCodes, GuardedRunner) {
  std::ostringstream err;
  EXPECT_EQ(run_guarded([] { return 0; }, err), 0);
  EXPECT_EQ(run_guarded([]() -> int { throw Error(ErrorCode::QuadratureFailure, "x"); }, err), 3);
  EXPECT_EQ(run_guarded([]() -> int { throw std::runtime_error("boom"); }, err), 3);
  EXPECT_EQ(run_guarded([]() -> int { throw Error(ErrorCode::InvalidSplit, "y"); }, err), 2);
  EXPECT_NE(err.str().find("QuadratureFailure"), std::string::npos);
  // a numerical failure surfacing from a real command: the resolvent at an eigenvalue
  const double pi = std::acos(-1.0);
  const StarGraph g({EdgeSpec(1.0)});
  EXPECT_EQ(run_guarded(
                [&] {
                  resolvent_apply(g, build_preset(VertexKind::Dirichlet, 1), pi * pi, edge_indicator(0));
                  return 0;
                },
                err),
            3);
}

TEST(EvansCsv, HeaderOnlyForEmptySweep) {
  auto s = parse_scenario(kTwoEdges);
  std::ostringstream out;
  EXPECT_EQ(cmd_evans(s, out), 0);
  EXPECT_EQ(out.str(), "lambda,re_E,im_E\n");
}

TEST(EvansCsv, ColumnPairPerPiece) {
  auto s = example_scenario("two_wire");
  s.sweep.samples = 5;
  std::ostringstream out;
  cmd_evans(s, out);
  const auto ls = lines(out.str());
  ASSERT_EQ(ls.size(), 6u);
  EXPECT_EQ(ls[0], "lambda,re_E,im_E,re_omega1_D,im_omega1_D,re_omega1t_D,im_omega1t_D,re_omega2t_DD,im_omega2t_DD");
  EXPECT_EQ(fields(ls[1]).size(), 9u);
  EXPECT_EQ(fields(ls[1])[0], "3");
  EXPECT_EQ(fields(ls[5])[0], "60");
}

TEST(EvansCsv, SignChangesCountEigenvalues) {
  const auto s = example_scenario("barrier_end");
  ASSERT_EQ(s.sweep.samples, 1024u);
  std::ostringstream out;
  cmd_evans(s, out);
  const auto ls = lines(out.str());
  ASSERT_EQ(ls.size(), 1025u);
  int changes = 0;
  double prev = std::stod(fields(ls[1])[1]);
  for (std::size_t k = 2; k < ls.size(); ++k) {
    const double v = std::stod(fields(ls[k])[1]);
    if ((v > 0) != (prev > 0)) ++changes;
    prev = v;
  }
  EXPECT_EQ(changes, 4);
}

TEST(EvansCsv, SeventeenDigits) {
  EXPECT_EQ(fmt17(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(fmt17(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(CountReport, WorkedExamples) {
  const std::vector<std::pair<std::string, std::string>> want{{"barrier_end", "4 = 1 + 3 + 0 PASS"},
                                                              {"barrier_interior", "4 = 1 + 1 + 2 + 0 PASS"},
                                                              {"two_wire", "4 = 1 + 1 + 1 + 1 PASS"}};
  for (const auto& [name, line] : want) {
    std::ostringstream out;
    EXPECT_EQ(cmd_count(example_scenario(name), out), 0) << name;
    EXPECT_NE(out.str().find("\n" + line + "\n"), std::string::npos) << out.str();
    const auto pos = out.str().find("--- machine-readable\n");
    ASSERT_NE(pos, std::string::npos);
    const auto j = Json::parse(out.str().substr(pos + 21));
    EXPECT_TRUE(j.at("holds").get<bool>());
    EXPECT_EQ(j.at("full").at("count").get<int>(), 4);
  }
}

TEST(CountReport, EndpointOnSpectrumWithoutSplit) {
  const auto s = parse_scenario(slurp(std::string(QGRAPH_SOURCE_DIR) + "/tests/data/endpoint_eigenvalue.json"));
  std::ostringstream out, err;
  EXPECT_EQ(run_guarded([&] { return cmd_count(s, out); }, err), kExitEndpoint);
}

TEST(Verify, ChecksPassOnExamples) {
  std::ostringstream out;
  EXPECT_EQ(cmd_verify(example_scenario("barrier_end"), Check::Single, 1, out), 0) << out.str();
  out.str("");
  EXPECT_EQ(cmd_verify(example_scenario("barrier_interior"), Check::Double, 1, out), 0) << out.str();
  out.str("");
  EXPECT_EQ(cmd_verify(parse_scenario(kTwoEdges), Check::Projections, 1, out), 0) << out.str();
  EXPECT_EQ(lines(out.str()).front(), "check,lambda,residual,tolerance,status");
  EXPECT_EQ(lines(out.str()).back(), "PASS");
}

TEST(Verify, DeterministicForSeed) {
  const auto s = example_scenario("barrier_end");
  std::ostringstream a, b, c;
  cmd_verify(s, Check::Resolvent, 42, a);
  cmd_verify(s, Check::Resolvent, 42, b);
  cmd_verify(s, Check::Resolvent, 43, c);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), c.str());
}

TEST(Verify, MissingSplitIsValidationError) {
  try {
    run_verify(parse_scenario(kTwoEdges), Check::Minors, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(exit_code_for(e.code()), kExitValidation);
  }
  EXPECT_THROW(parse_check("everything"), Error);
}

TEST(Example, WritesScenarioAndScaledCurveMetadata) {
  const auto dir = std::filesystem::temp_directory_path() / "qgraph_example_test";
  std::filesystem::remove_all(dir);
  std::ostringstream log;
  const std::string csv = cmd_example("barrier_interior", dir.string(), log);
  EXPECT_EQ(slurp((dir / "barrier_interior.scenario.json").string()), serialize_scenario(example_scenario("barrier_interior")));
  const auto ls = lines(slurp(csv));
  ASSERT_EQ(ls.size(), 1025u);
  EXPECT_EQ(ls[0], "lambda,E,E_scale,omega1_D,omega1_D_scale,omega1t_DD,omega1t_DD_scale,omega2t_D,omega2t_D_scale,map,map_scale");
  const auto row = fields(ls[100]);
  EXPECT_EQ(row[2], "0.10000000000000001");
  EXPECT_EQ(row[10], fmt17(1.0 / 1000.0));
  // unscaled data: the E column is the Evans function itself
  const double l = std::stod(row[0]);
  const auto s = example_scenario("barrier_interior");
  EXPECT_EQ(row[1], fmt17(evans(s.graph, s.bc(), l).real()));
  EXPECT_THROW(cmd_example("nonsense", dir.string(), log), Error);
  std::filesystem::remove_all(dir);
}
