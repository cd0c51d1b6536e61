#include <gtest/gtest.h>

#include "procforge/automaton.hpp"
#include "procforge/bpmn.hpp"
#include "procforge/validate.hpp"
#include "support.hpp"

using namespace procforge;
using testsupport::ModelBuilder;

namespace {

ModelBuilder linear() {
  ModelBuilder b;
  b.node("S", NodeKind::StartEvent).node("A", NodeKind::UserTask, "A").node("E", NodeKind::EndEvent);
  b.flow("S", "A").flow("A", "E");
  return b;
}

bool mentions(const ValidationReport& r, const std::string& text) {
  for (const auto& d : r.diagnostics) {
    if (d.message.find(text) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST(Validate, GrainFixtureHasNoErrors) {
  ValidationReport r = validate_model(testsupport::fixture_model("grain-title/process.bpmn"));
  EXPECT_TRUE(r.valid());
  EXPECT_TRUE(r.diagnostics.empty()) << (r.diagnostics.empty() ? "" : to_string(r.diagnostics[0]));
}

TEST(Validate, AllFixturesHaveNoErrors) {
  for (const char* f : {"grain-title/process.bpmn", "grain-title/process-unbound.bpmn", "ico/process.bpmn",
                        "quality-tracing/process.bpmn", "task-outsourcing/process.bpmn"}) {
    ValidationReport r = validate_model(testsupport::fixture_model(f));
    EXPECT_TRUE(r.diagnostics.empty()) << f << ": " << (r.diagnostics.empty() ? "" : to_string(r.diagnostics[0]));
  }
}

TEST(Validate, DanglingFlowTarget) {
  ModelBuilder b = linear();
  b.model().flows[1].target = "Ghost";
  ValidationReport r = validate_model(b.build());
  ASSERT_EQ(r.error_count(), 1u);
  EXPECT_NE(r.errors()[0].message.find("dangling flow target"), std::string::npos);
}

TEST(Validate, MarkingWidth) {
  ModelBuilder b;
  b.node("S", NodeKind::StartEvent);
  std::string prev = "S";
  for (int i = 1; i <= 256; ++i) {
    std::string id = "T" + std::to_string(i);
    b.node(id, NodeKind::DefaultTask, id);
    b.flow(prev, id);
    prev = id;
  }
  b.node("E", NodeKind::EndEvent).flow(prev, "E");
  ASSERT_EQ(b.model().flows.size(), 257u);
  ValidationReport r = validate_model(b.build());
  ASSERT_EQ(r.error_count(), 1u);
  EXPECT_NE(r.errors()[0].message.find("marking exceeds 256 bits"), std::string::npos);

  b.model().flows.pop_back();
  b.model().nodes.pop_back();
  b.model().nodes.back().kind = NodeKind::EndEvent;
  EXPECT_TRUE(validate_model(b.build()).valid());
}

TEST(Validate, StructuralErrors) {
  {
    ModelBuilder b = linear();
    b.node("S2", NodeKind::StartEvent).flow("S2", "E");
    EXPECT_TRUE(mentions(validate_model(b.build()), "exactly one start event"));
  }
  {
    ModelBuilder b = linear();
    b.node("B", NodeKind::UserTask, "B").flow("B", "E");
    EXPECT_TRUE(mentions(validate_model(b.build()), "not reachable"));
  }
  {
    ModelBuilder b = linear();
    b.node("B", NodeKind::UserTask, "B").flow("S", "B");
    ValidationReport r = validate_model(b.build());
    EXPECT_FALSE(r.valid());
  }
  {
    ModelBuilder b = linear();
    b.model().flows[1].condition = parse_condition("true");
    EXPECT_TRUE(mentions(validate_model(b.build()), "only allowed on outgoing flows of exclusive gateways"));
  }
  {
    ModelBuilder b = linear();
    b.model().nodes[1].name = "";
    b.node("B", NodeKind::UserTask, "A");
    EXPECT_FALSE(validate_model(b.build()).valid());
  }
}

TEST(Validate, ScriptTypeErrors) {
  ModelBuilder b;
  b.variable("w", Type::Uint256).variable("flag", Type::Bool);
  b.node("S", NodeKind::StartEvent).node("X", NodeKind::ScriptTask, "X").node("E", NodeKind::EndEvent);
  b.flow("S", "X").flow("X", "E");
  b.model().nodes[1].script = parse_script("flag = w + 1");
  EXPECT_TRUE(mentions(validate_model(b.build()), "script"));
  b.model().nodes[1].script = parse_script("w = undeclared + 1");
  EXPECT_FALSE(validate_model(b.build()).valid());
  b.model().nodes[1].script = parse_script("w = w + 1");
  EXPECT_TRUE(validate_model(b.build()).valid());
}

TEST(Validate, ExclusiveGatewayConditions) {
  ModelBuilder b;
  b.variable("x", Type::Uint256);
  b.node("S", NodeKind::StartEvent).node("G", NodeKind::XorGateway).node("A", NodeKind::UserTask, "A");
  b.node("B", NodeKind::UserTask, "B").node("E", NodeKind::EndEvent).node("E2", NodeKind::EndEvent);
  b.flow("S", "G").flow("G", "A", "x + 1").flow("G", "B", "", true).flow("A", "E").flow("B", "E2");
  EXPECT_TRUE(mentions(validate_model(b.build()), "must be bool"));
  b.model().flows[1].condition = parse_condition("x > 1");
  EXPECT_TRUE(validate_model(b.build()).valid());
  b.model().flows[1].is_default = true;
  b.model().flows[1].condition = nullptr;
  EXPECT_TRUE(mentions(validate_model(b.build()), "more than one default"));
}

TEST(Validate, InvocationBindings) {
  ProcessModel m = testsupport::fixture_model("grain-title/process.bpmn");
  ProcessModel broken = m;
  broken.invocations[0].inputs.pop_back();
  EXPECT_TRUE(mentions(validate_model(broken), "is not bound"));

  broken = m;
  broken.invocations[0].fn_name = "record_destroy";
  EXPECT_TRUE(mentions(validate_model(broken), "not declared"));

  broken = m;
  broken.invocations[0].inputs[1].source.name = "nonexistent";
  EXPECT_FALSE(validate_model(broken).valid());

  broken = m;
  broken.invocations[0].inputs.push_back(broken.invocations[0].inputs[0]);
  EXPECT_TRUE(mentions(validate_model(broken), "bound more than once"));
}

TEST(Validate, IsIdempotent) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    ProcessModel m = testsupport::random_block_model(seed);
    EXPECT_EQ(validate_model(m), validate_model(m));
  }
}

TEST(Validate, RandomValidModelsCompile) {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    ProcessModel m = testsupport::random_block_model(seed);
    ValidationReport r = validate_model(m);
    ASSERT_TRUE(r.valid()) << "seed " << seed << ": " << to_string(r.errors()[0]);
    EXPECT_NO_THROW({
      MarkingAutomaton a = compile_marking(m);
      (void)a.close_nondeterministic(a.initial_marking());
    }) << "seed " << seed;
  }
}
