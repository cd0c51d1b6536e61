#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "procforge/bpmn.hpp"
#include "support.hpp"

using namespace procforge;

namespace {

std::string doc(const std::string& body, const std::string& extra_ns = "") {
  return R"(<?xml version="1.0"?>
<bpmn:definitions xmlns:bpmn="http://www.omg.org/spec/BPMN/20100524/MODEL" xmlns:bcext="urn:procforge:bcext:1")" +
         extra_ns + R"(>
  <bpmn:process id="P">)" +
         body + R"(</bpmn:process>
</bpmn:definitions>)";
}

const char* kThreeNodes = R"(
    <bpmn:startEvent id="S"/>
    <bpmn:userTask id="A" name="A"/>
    <bpmn:endEvent id="E"/>
    <bpmn:sequenceFlow id="f1" sourceRef="S" targetRef="A"/>
    <bpmn:sequenceFlow id="f2" sourceRef="A" targetRef="E"/>)";

BpmnErrorKind error_kind(const std::string& xml) {
  try {
    (void)parse_bpmn(xml);
  } catch (const BpmnError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "document parsed without error";
  return BpmnErrorKind::InvalidValue;
}

}  // namespace

TEST(BpmnParser, ThreeNodeDocument) {
  ProcessModel m = parse_bpmn(doc(kThreeNodes));
  EXPECT_EQ(m.id, "P");
  ASSERT_EQ(m.nodes.size(), 3u);
  EXPECT_EQ(std::count_if(m.nodes.begin(), m.nodes.end(), [](const Node& n) { return n.kind == NodeKind::UserTask; }),
            1);
  ASSERT_EQ(m.flows.size(), 2u);
  EXPECT_EQ(m.flows[0].id, "f1");
  EXPECT_EQ(m.flows[1].target, "E");
}

TEST(BpmnParser, TaskKindsFromElementNames) {
  ProcessModel m = parse_bpmn(doc(R"(
    <bpmn:startEvent id="S"/>
    <bpmn:task id="T1"/>
    <bpmn:userTask id="T2"/>
    <bpmn:scriptTask id="T3"><bpmn:script>x = 1</bpmn:script></bpmn:scriptTask>
    <bpmn:exclusiveGateway id="G1"/>
    <bpmn:parallelGateway id="G2"/>
    <bpmn:endEvent id="E"/>)"));
  std::vector<NodeKind> kinds;
  for (const auto& n : m.nodes) kinds.push_back(n.kind);
  EXPECT_EQ(kinds, (std::vector<NodeKind>{NodeKind::StartEvent, NodeKind::DefaultTask, NodeKind::UserTask,
                                          NodeKind::ScriptTask, NodeKind::XorGateway, NodeKind::AndGateway,
                                          NodeKind::EndEvent}));
  ASSERT_EQ(m.nodes[3].script.size(), 1u);
  EXPECT_EQ(m.nodes[3].script[0].target, "x");
}

TEST(BpmnParser, GrainFixtureInterface) {
  ProcessModel m = testsupport::fixture_model("grain-title/process.bpmn");
  auto it = std::find_if(m.interfaces.begin(), m.interfaces.end(),
                         [](const InterfaceDecl& i) { return i.name == "GrainTitleRegistry"; });
  ASSERT_NE(it, m.interfaces.end());
  EXPECT_GE(it->functions.size(), 3u);
  for (const char* fn : {"record_get_owner", "record_get_attrs", "record_create"}) {
    EXPECT_NE(it->find_function(fn), nullptr) << fn;
  }
  const FunctionDecl* attrs = it->find_function("record_get_attrs");
  ASSERT_EQ(attrs->inputs.size(), 1u);
  EXPECT_EQ(attrs->inputs[0], (FunctionParameter{"record_id", Type::Address}));
  EXPECT_EQ(attrs->outputs, (std::vector<FunctionParameter>{{"weight", Type::Uint256}, {"quality", Type::Uint256}}));
  ASSERT_TRUE(it->contract_address.has_value());
  EXPECT_EQ(it->contract_address->to_checksum(), "0xA9998dBe75D795556eA821E37cD2DE1F373BFd91");
}

TEST(BpmnParser, GrainFixtureShape) {
  ProcessModel m = testsupport::fixture_model("grain-title/process.bpmn");
  EXPECT_EQ(m.task_count(), 12u);
  EXPECT_EQ(m.gateway_count(), 3u);
  EXPECT_EQ(m.flows.size(), 18u);
  const SequenceFlow* swap = m.find_flow("Flow_15");
  ASSERT_NE(swap, nullptr);
  ASSERT_TRUE(swap->condition);
  EXPECT_EQ(to_source(*swap->condition), "escrowBalance == price");
  EXPECT_TRUE(m.find_flow("Flow_16")->is_default);

  const InvocationBinding* create = nullptr;
  for (const auto& inv : m.invocations) {
    if (inv.id == "Inv_CreateTitle") create = &inv;
  }
  ASSERT_NE(create, nullptr);
  EXPECT_EQ(create->fn_name, "record_create");
  ASSERT_EQ(create->inputs.size(), 3u);
  EXPECT_EQ(create->inputs[0].source.kind, BindingSource::Kind::ProcessAddress);
  EXPECT_EQ(create->inputs[1].source.kind, BindingSource::Kind::Variable);
  EXPECT_EQ(create->inputs[1].source.name, "consignmentWeight");
}

TEST(BpmnParser, TaskInputBindingResolvedAgainstSourceTask) {
  ProcessModel m = testsupport::fixture_model("grain-title/process.bpmn");
  for (const auto& inv : m.invocations) {
    if (inv.id != "Inv_Deposit") continue;
    EXPECT_TRUE(inv.sender_is_caller);
    EXPECT_EQ(inv.inputs[1].source.kind, BindingSource::Kind::TaskInput);
    EXPECT_EQ(inv.inputs[1].source.name, "deposit");
    return;
  }
  FAIL() << "Inv_Deposit missing";
}

TEST(BpmnParser, MalformedContractAddress) {
  EXPECT_EQ(error_kind(doc(std::string(kThreeNodes) +
                           R"(<bcext:smartContractInterface id="I" name="X" contractAddress="0x123"/>)")),
            BpmnErrorKind::MalformedAddress);
}

TEST(BpmnParser, ErrorKinds) {
  EXPECT_EQ(error_kind("<bpmn:definitions"), BpmnErrorKind::XmlSyntaxError);
  EXPECT_EQ(error_kind(doc(std::string(kThreeNodes) + R"(<bpmn:inclusiveGateway id="G"/>)")),
            BpmnErrorKind::UnknownElement);
  EXPECT_EQ(error_kind(doc(std::string(kThreeNodes) + R"(<x:thing id="G"/>)", R"( xmlns:x="urn:other")")),
            BpmnErrorKind::UnknownElement);
  EXPECT_EQ(error_kind(doc(std::string(kThreeNodes) + R"(<bcext:gadget/>)")), BpmnErrorKind::UnknownElement);
  EXPECT_EQ(error_kind(doc(std::string(kThreeNodes) + R"(<bpmn:task id="A"/>)")), BpmnErrorKind::DuplicateId);
  EXPECT_EQ(error_kind(doc(std::string(kThreeNodes) +
                           R"(<bpmn:sequenceFlow id="f3" sourceRef="A" targetRef="Nowhere"/>)")),
            BpmnErrorKind::DanglingReference);
  EXPECT_EQ(error_kind(doc(std::string(kThreeNodes) +
                           R"(<bcext:invocation sourceTask="A" targetInterface="Missing" fnName="f"/>)")),
            BpmnErrorKind::DanglingReference);
  EXPECT_EQ(error_kind(doc(std::string(kThreeNodes) + R"(
    <bpmn:sequenceFlow id="f3" sourceRef="A" targetRef="E">
      <bpmn:conditionExpression>a + * b</bpmn:conditionExpression>
    </bpmn:sequenceFlow>)")),
            BpmnErrorKind::ConditionParseError);
}

TEST(BpmnParser, XmlErrorsCarryPosition) {
  try {
    (void)parse_bpmn("<a>\n  <b>\n</a>");
    FAIL();
  } catch (const BpmnError& e) {
    EXPECT_EQ(e.kind(), BpmnErrorKind::XmlSyntaxError);
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(BpmnParser, UnknownAttributesAreWarnings) {
  std::vector<Diagnostic> warnings;
  ProcessModel m = parse_bpmn(doc(R"(
    <bpmn:startEvent id="S" colour="red"/>
    <bpmn:userTask id="A" name="A"/>
    <bpmn:endEvent id="E"/>
    <bpmn:sequenceFlow id="f1" sourceRef="S" targetRef="A"/>
    <bpmn:sequenceFlow id="f2" sourceRef="A" targetRef="E"/>)"),
                              &warnings);
  EXPECT_EQ(m.nodes.size(), 3u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_EQ(warnings[0].severity, Severity::Warning);
  EXPECT_NE(warnings[0].message.find("colour"), std::string::npos);
}

TEST(BpmnParser, ExtensionVocabulary) {
  ProcessModel m = parse_bpmn(doc(std::string(kThreeNodes) + R"(
    <bpmn:extensionElements>
      <bcext:variables>
        <bcext:variable name="n" type="uint256" initial="7"/>
        <bcext:variable name="s" type="int256" initial="-3"/>
        <bcext:variable name="ok" type="bool" initial="true"/>
        <bcext:variable name="who" type="address" initial="0xD3E4EBe81b55EA73b559da31ADf2CAc3b254ea11"/>
        <bcext:variable name="label" type="string" initial="grain lot"/>
      </bcext:variables>
      <bcext:participant name="Farmer"/>
    </bpmn:extensionElements>)"));
  ASSERT_EQ(m.variables.size(), 5u);
  EXPECT_EQ(*m.variables[0].initial, Value::uint256(7));
  EXPECT_EQ(*m.variables[1].initial, Value::int256(-3));
  EXPECT_EQ(*m.variables[2].initial, Value::boolean(true));
  EXPECT_EQ(m.variables[3].initial->type(), Type::Address);
  EXPECT_EQ(*m.variables[4].initial, Value::string("grain lot"));
  EXPECT_EQ(m.participants, std::vector<std::string>{"Farmer"});
}

TEST(BpmnParser, IdentifiersRoundTrip) {
  std::string xml = testsupport::read_text(testsupport::source_path("fixtures/grain-title/process.bpmn"));
  ProcessModel m = parse_bpmn(xml);
  std::multiset<std::string> model_ids{m.id};
  for (const auto& n : m.nodes) model_ids.insert(n.id);
  for (const auto& f : m.flows) model_ids.insert(f.id);
  for (const auto& i : m.interfaces) model_ids.insert(i.id);
  for (const auto& i : m.invocations) model_ids.insert(i.id);

  std::multiset<std::string> xml_ids;
  std::size_t pos = 0;
  while ((pos = xml.find(" id=\"", pos)) != std::string::npos) {
    pos += 5;
    xml_ids.insert(xml.substr(pos, xml.find('"', pos) - pos));
  }
  xml_ids.erase("Definitions_GrainTitle");
  EXPECT_EQ(model_ids, xml_ids);
}

TEST(BpmnParser, FlowOrderStableUnderShufflingOtherElements) {
  const std::vector<std::string> flows = {
      R"(<bpmn:sequenceFlow id="f1" sourceRef="S" targetRef="A"/>)",
      R"(<bpmn:sequenceFlow id="f2" sourceRef="A" targetRef="B"/>)",
      R"(<bpmn:sequenceFlow id="f3" sourceRef="B" targetRef="E"/>)"};
  std::vector<std::string> others = {R"(<bpmn:startEvent id="S"/>)", R"(<bpmn:task id="A"/>)",
                                     R"(<bpmn:task id="B"/>)", R"(<bpmn:endEvent id="E"/>)",
                                     R"(<bpmn:textAnnotation id="note"/>)"};
  std::mt19937 rng(3);
  for (int round = 0; round < 50; ++round) {
    std::shuffle(others.begin(), others.end(), rng);
    // interleave flows (in fixed relative order) with the shuffled others
    std::string body;
    std::size_t fi = 0;
    for (const auto& o : others) {
      body += o;
      if (fi < flows.size() && rng() % 2) body += flows[fi++];
    }
    while (fi < flows.size()) body += flows[fi++];
    ProcessModel m = parse_bpmn(doc(body));
    ASSERT_EQ(m.flows.size(), 3u);
    EXPECT_EQ(m.flows[0].id, "f1");
    EXPECT_EQ(m.flows[1].id, "f2");
    EXPECT_EQ(m.flows[2].id, "f3");
  }
}

TEST(BpmnParser, WriterRoundTripOnFixtures) {
  for (const char* f : {"grain-title/process.bpmn", "grain-title/process-unbound.bpmn", "ico/process.bpmn",
                        "task-outsourcing/process.bpmn", "quality-tracing/process.bpmn"}) {
    ProcessModel m = testsupport::fixture_model(f);
    std::string written = testsupport::write_bpmn(m);
    ProcessModel again = parse_bpmn(written);
    EXPECT_EQ(testsupport::dump_model(again), testsupport::dump_model(m)) << f;
    EXPECT_EQ(testsupport::write_bpmn(again), written) << f;
  }
}

TEST(BpmnParser, WriterRoundTripOnRandomModels) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    ProcessModel m = testsupport::random_block_model(seed, 16);
    ProcessModel again = parse_bpmn(testsupport::write_bpmn(m));
    ASSERT_EQ(testsupport::dump_model(again), testsupport::dump_model(m)) << "seed " << seed;
  }
}
