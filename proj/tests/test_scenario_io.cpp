#include <doctest.h>

#include "mgare/scenario_io.hpp"
#include "support/test_scenarios.hpp"

using namespace mgare;
using mgare::testing::two_state_exact;

TEST_CASE("scenario json round trip is lossless") {
  Scenario sc = example1_scenario();
  const std::string text = scenario_to_json(sc);
  Scenario back = scenario_from_json(text);
  CHECK((back.A - sc.A).norm() == 0.0);
  CHECK((back.Q - sc.Q).norm() == 0.0);
  CHECK((back.Ra - sc.Ra).norm() == 0.0);
  CHECK((back.W - sc.W).norm() == 0.0);
  CHECK((back.x0 - sc.x0).norm() == 0.0);
  CHECK(back.seed == sc.seed);
  CHECK(back.sample_count == sc.sample_count);
  CHECK(back.controller_channels.coupling == sc.controller_channels.coupling);
  // The serialized form itself round-trips bit-identically.
  CHECK(scenario_to_json(back) == text);

  // Pools built from the reloaded scenario are identical.
  SamplePool a = build_pool(sc, 11, 64);
  SamplePool b = build_pool(back, 11, 64);
  REQUIRE(a.bc.atoms.size() == b.bc.atoms.size());
  for (std::size_t i = 0; i < a.bc.atoms.size(); ++i)
    CHECK((a.bc.atoms[i] - b.bc.atoms[i]).norm() == 0.0);
}

TEST_CASE("finite-support channels round trip") {
  Scenario sc = two_state_exact();
  Scenario back = scenario_from_json(scenario_to_json(sc));
  SamplePool a = build_pool(sc, 3, 8);
  SamplePool b = build_pool(back, 3, 8);
  REQUIRE(a.exact());
  REQUIRE(b.exact());
  REQUIRE(a.bc.atoms.size() == b.bc.atoms.size());
  for (std::size_t i = 0; i < a.bc.atoms.size(); ++i) {
    CHECK((a.bc.atoms[i] - b.bc.atoms[i]).norm() == 0.0);
    CHECK(a.bc.weights[i] == b.bc.weights[i]);
  }
}

TEST_CASE("schema errors name the offending key") {
  CHECK_THROWS_WITH_AS(scenario_from_json("{"), doctest::Contains("invalid JSON"),
                       SchemaError);
  CHECK_THROWS_WITH_AS(scenario_from_json("{}"), doctest::Contains("state"), SchemaError);

  Scenario sc = two_state_exact();
  std::string text = scenario_to_json(sc);
  // Break a matrix row.
  auto pos = text.find("\"A\"");
  REQUIRE(pos != std::string::npos);
  std::string broken = text;
  broken.replace(pos, 3, "\"AA\"");
  CHECK_THROWS_WITH_AS(scenario_from_json(broken), doctest::Contains("'A'"), SchemaError);
}

TEST_CASE("trace csv layout") {
  PolicyTrace trace;
  trace.states = {(Vector(2) << 1, 2).finished(), (Vector(2) << 3, 4).finished()};
  trace.controls = {(Vector(1) << 5).finished()};
  trace.attacks = {(Vector(1) << 6).finished()};
  trace.stage_costs = {7.0};
  const std::string csv = trace_csv(trace);
  CHECK(csv.find("run,k,x0,x1,u_c0,u_a0,stage_cost") == 0);
  CHECK(csv.find("0,0,1,2,5,6,7") != std::string::npos);
}
