#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "procforge/cli.hpp"
#include "support.hpp"

using namespace procforge;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fx(const std::string& rel) { return testsupport::source_path("fixtures/" + rel).string(); }
std::string reg(const std::string& name) { return fx("registries/" + name); }

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("procforge-cli-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

const std::string kBuyer = "0xfB6916095ca1df60bB79Ce92cE3Ea74c37c5d359";
const std::string kFarmer = "0x5aAeb6053F3E94C9b9A09f33669435E7Ef1BeAed";
const std::string kRequester = "0xdbF03B407c01E7cD3CBea99509d93f8DDDC8C6FB";
const std::string kWorker = "0xD1220A0cf47c7B9Be7A2E6BA89F429762e7b9aDb";

std::vector<std::string> grain_sim(const std::string& trace) {
  return {"simulate", fx("grain-title/process.bpmn"), "-r", reg("lorikeet-coin.json"), "-r", reg("grain-title.json"),
          "--trace", fx("grain-title/traces/" + trace), "--json"};
}

std::vector<std::string> outsourcing_sim(const std::string& trace) {
  return {"simulate", fx("task-outsourcing/process.bpmn"), "-r", reg("lorikeet-coin.json"),
          "--trace", fx("task-outsourcing/traces/" + trace), "--json"};
}

long balance(const json& sim, const std::string& who) {
  const auto& b = sim["registries"]["LorikeetCoin"]["balances"];
  return b.contains(who) ? std::stol(b[who].get<std::string>()) : 0;
}

long genesis(const std::string& who) {
  json spec = json::parse(testsupport::read_text(reg("lorikeet-coin.json")));
  for (const auto& a : spec["initiallyDistributedAccounts"]) {
    if (a["address"] == who) return std::stol(a["amount"].get<std::string>());
  }
  return 0;
}

}  // namespace

// ---------------------------------------------------------------- validate

TEST(Validate, GrainFixtureIsValid) {
  CliRun r = cli({"validate", fx("grain-title/process.bpmn"), "-r", reg("grain-title.json")});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("valid (12 tasks, 3 gateways"), std::string::npos);
}

TEST(Validate, DanglingFlowIsAnError) {
  fs::path dir = scratch("dangling");
  std::string xml = testsupport::read_text(fx("grain-title/process.bpmn"));
  auto at = xml.find("targetRef=\"");
  ASSERT_NE(at, std::string::npos);
  xml.insert(at + 11, "Nowhere_");
  write(dir / "broken.bpmn", xml);
  CliRun r = cli({"validate", (dir / "broken.bpmn").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE((r.out + r.err).find("Nowhere_"), std::string::npos) << r.out << r.err;
}

TEST(Validate, JsonOutput) {
  CliRun r = cli({"validate", fx("ico/process.bpmn"), "--json"});
  ASSERT_EQ(r.code, 0);
  json j = json::parse(r.out);
  EXPECT_TRUE(j["valid"].get<bool>());
  EXPECT_EQ(j["errors"], 0);
}

TEST(Validate, BadRegistrySpec) {
  fs::path dir = scratch("badspec");
  write(dir / "bad.json", "{\"name\": \"X\"}");
  CliRun r = cli({"validate", fx("ico/process.bpmn"), "-r", (dir / "bad.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("bad.json"), std::string::npos) << r.out;
}

TEST(Usage, MissingFileIs66) {
  EXPECT_EQ(cli({"validate", "/no/such/model.bpmn"}).code, 66);
  EXPECT_EQ(cli({"validate", fx("ico/process.bpmn"), "-r", "/no/such.json"}).code, 66);
  EXPECT_EQ(cli({"simulate", fx("ico/process.bpmn"), "--trace", "/no/such.jsonl"}).code, 66);
}

TEST(Usage, BadInvocationsAre64) {
  EXPECT_EQ(cli({}).code, 64);
  EXPECT_EQ(cli({"frobnicate"}).code, 64);
  EXPECT_EQ(cli({"validate"}).code, 64);
  EXPECT_EQ(cli({"compile", fx("ico/process.bpmn"), "--bogus"}).code, 64);
  EXPECT_EQ(cli({"simulate", fx("ico/process.bpmn")}).code, 64);
  auto both = grain_sim("swap.jsonl");
  both.push_back("--strict");
  both.push_back("--prefix");
  EXPECT_EQ(cli(both).code, 64);
  EXPECT_EQ(cli({"conformance", fx("grain-title/process.bpmn"), "--seed", "minus-one"}).code, 64);
}

TEST(Usage, HelpExitsZero) {
  CliRun r = cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("conformance"), std::string::npos);
}

// ----------------------------------------------------------------- compile

TEST(Compile, GrainWritesThreeUnits) {
  fs::path dir = scratch("grain");
  CliRun r = cli({"compile", fx("grain-title/process.bpmn"), "-r", reg("grain-title.json"), "-r", reg("lorikeet-coin.json"),
               "-o", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::set<std::string> files;
  for (const auto& e : fs::directory_iterator(dir / "out")) files.insert(e.path().filename().string());
  EXPECT_EQ(files, (std::set<std::string>{"ProcessFactory.sol", "GrainTitleRegistry.sol", "LorikeetCoin.sol"}));
  EXPECT_EQ(r.out.find("automaton.txt"), std::string::npos);
}

TEST(Compile, IcoWritesTwoUnitsAndAutomaton) {
  fs::path dir = scratch("ico");
  CliRun r = cli({"compile", fx("ico/process.bpmn"), "-r", reg("lorikeet-coin.json"), "-o", dir.string(),
               "--dump-automaton", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  json j = json::parse(r.out);
  EXPECT_EQ(j["files"].size(), 3u);
  EXPECT_TRUE(fs::exists(dir / "ProcessFactory.sol"));
  EXPECT_TRUE(fs::exists(dir / "LorikeetCoin.sol"));
  EXPECT_TRUE(fs::exists(dir / "automaton.txt"));
}

TEST(Compile, InvalidModelWritesNothing) {
  fs::path dir = scratch("invalid");
  std::string xml = testsupport::read_text(fx("ico/process.bpmn"));
  auto at = xml.find("targetRef=\"");
  xml.insert(at + 11, "Nowhere_");
  write(dir / "broken.bpmn", xml);
  CliRun r = cli({"compile", (dir / "broken.bpmn").string(), "-o", (dir / "out").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Compile, MatchesGoldenAndIsRepeatable) {
  const std::vector<std::pair<std::string, std::vector<std::string>>> sets = {
      {"grain-title", {"lorikeet-coin.json", "grain-title.json"}},
      {"ico", {"lorikeet-coin.json"}},
      {"task-outsourcing", {"lorikeet-coin.json"}},
      {"quality-tracing", {"certificate-of-origin.json"}},
  };
  for (const auto& [name, specs] : sets) {
    std::vector<std::string> args = {"compile", fx(name + "/process.bpmn")};
    for (const auto& s : specs) {
      args.push_back("-r");
      args.push_back(reg(s));
    }
    fs::path a = scratch("golden-a-" + name);
    fs::path b = scratch("golden-b-" + name);
    auto run_a = args;
    run_a.insert(run_a.end(), {"-o", a.string()});
    auto run_b = args;
    run_b.insert(run_b.end(), {"-o", b.string()});
    ASSERT_EQ(cli(run_a).code, 0);
    ASSERT_EQ(cli(run_b).code, 0);
    for (const auto& e : fs::directory_iterator(a)) {
      std::string file = e.path().filename().string();
      std::string text = testsupport::read_text(e.path());
      EXPECT_EQ(text, testsupport::read_text(b / file)) << name << "/" << file;
      EXPECT_EQ(text, testsupport::read_text(testsupport::source_path("tests/golden/" + name + "/" + file)))
          << name << "/" << file;
    }
  }
}

// ---------------------------------------------------------------- simulate

TEST(Simulate, GrainSwapTransfersTitleToBuyer) {
  CliRun r = cli(grain_sim("swap.jsonl"));
  ASSERT_EQ(r.code, 0) << r.err;
  json j = json::parse(r.out);
  EXPECT_TRUE(j["conforming"].get<bool>());
  EXPECT_EQ(j["status"], "Completed");
  const auto& records = j["registries"]["GrainTitleRegistry"]["records"];
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0]["owner"], kBuyer);
  EXPECT_EQ(records[0]["id"], j["processAddress"]);
  EXPECT_EQ(balance(j, kFarmer), genesis(kFarmer) + 500);
  EXPECT_EQ(balance(j, kBuyer), genesis(kBuyer) - 500);
}

TEST(Simulate, GrainRefundLeavesBuyerWhole) {
  CliRun r = cli(grain_sim("refund.jsonl"));
  ASSERT_EQ(r.code, 0) << r.err;
  json j = json::parse(r.out);
  EXPECT_EQ(j["endEvent"], "EndEvent_Failed");
  EXPECT_EQ(balance(j, kBuyer), genesis(kBuyer));
  EXPECT_EQ(balance(j, kFarmer), genesis(kFarmer));
  EXPECT_EQ(j["registries"]["GrainTitleRegistry"]["records"][0]["owner"], kFarmer);
}

TEST(Simulate, ShuffledTraceIsNonConforming) {
  CliRun r = cli(grain_sim("shuffled.jsonl"));
  EXPECT_EQ(r.code, 2);
  json j = json::parse(r.out);
  EXPECT_FALSE(j["conforming"].get<bool>());
  EXPECT_EQ(j["firstBadIndex"], 5);
  EXPECT_EQ(j["events"][5]["reason"], "NotEnabled");
}

TEST(Simulate, HumanOutput) {
  auto args = grain_sim("shuffled.jsonl");
  args.pop_back();
  CliRun r = cli(args);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("Rejected  Create Grain Title  [NotEnabled]"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("NonConforming: first bad event at index 5"), std::string::npos);
  EXPECT_NE(r.out.find("GrainTitleRegistry @ 0xA9998dBe75D795556eA821E37cD2DE1F373BFd91"), std::string::npos);
}

TEST(Simulate, OutsourcingEscrow) {
  CliRun paid = cli(outsourcing_sim("paid.jsonl"));
  ASSERT_EQ(paid.code, 0) << paid.err;
  json p = json::parse(paid.out);
  EXPECT_EQ(balance(p, kWorker), genesis(kWorker) + 300);
  EXPECT_EQ(balance(p, kRequester), genesis(kRequester) - 300);

  CliRun wrong = cli(outsourcing_sim("wrong-deposit.jsonl"));
  ASSERT_EQ(wrong.code, 0) << wrong.err;
  json w = json::parse(wrong.out);
  EXPECT_EQ(w["endEvent"], "EndEvent_Refunded");
  EXPECT_EQ(balance(w, kRequester), genesis(kRequester));
}

TEST(Simulate, PrefixMode) {
  fs::path dir = scratch("prefix");
  std::string text = testsupport::read_text(fx("grain-title/traces/swap.jsonl"));
  write(dir / "cut.jsonl", text.substr(0, text.find("\n") + 1));
  std::vector<std::string> args = {"simulate", fx("grain-title/process.bpmn"), "-r", reg("lorikeet-coin.json"),
                                   "-r", reg("grain-title.json"), "--trace", (dir / "cut.jsonl").string()};
  EXPECT_EQ(cli(args).code, 2);
  args.push_back("--prefix");
  EXPECT_EQ(cli(args).code, 0);
}

TEST(Simulate, MalformedTraceIsAnError) {
  fs::path dir = scratch("malformed");
  write(dir / "bad.jsonl", "{\"task\": 3}\n");
  CliRun r = cli({"simulate", fx("ico/process.bpmn"), "-r", reg("lorikeet-coin.json"), "--trace", (dir / "bad.jsonl").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 1"), std::string::npos);
}

TEST(Simulate, MissingRegistryIsAnError) {
  CliRun r = cli({"simulate", fx("grain-title/process.bpmn"), "--trace", fx("grain-title/traces/swap.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("UnknownRegistryAddress"), std::string::npos) << r.err;
}

// ------------------------------------------------------------- conformance

TEST(Conformance, GrainSummary) {
  CliRun r = cli({"conformance", fx("grain-title/process.bpmn"), "--seed", "42", "--mutants", "250"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* line : {"Tasks           12\n", "Gateways        3\n", "Traces          502\n",
                           "Correctness     100.00%\n", "Seed            42\n"}) {
    EXPECT_NE(r.out.find(line), std::string::npos) << line << "\n" << r.out;
  }
}

TEST(Conformance, NoMutants) {
  CliRun r = cli({"conformance", fx("grain-title/process.bpmn"), "--mutants", "0", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  json j = json::parse(r.out);
  EXPECT_EQ(j["traces"], 2);
  EXPECT_EQ(j["totals"]["conforming"], 2);
  EXPECT_EQ(j["totals"]["nonConforming"], 0);
}

TEST(Conformance, SameSeedSameReport) {
  fs::path dir = scratch("reports");
  for (const char* name : {"a.json", "b.json"}) {
    ASSERT_EQ(cli({"conformance", fx("grain-title/process.bpmn"), "--seed", "1234", "--no-timing", "--report",
                   (dir / name).string()})
                  .code,
              0);
  }
  std::string a = testsupport::read_text(dir / "a.json");
  EXPECT_EQ(a, testsupport::read_text(dir / "b.json"));
  EXPECT_EQ(json::parse(a)["seed"], 1234);
}

TEST(Conformance, SeedFromEnvironment) {
  ::setenv("PROCFORGE_SEED", "99", 1);
  CliRun r = cli({"conformance", fx("grain-title/process.bpmn"), "--mutants", "3", "--json"});
  ::unsetenv("PROCFORGE_SEED");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["seed"], 99);
  CliRun flag = cli({"conformance", fx("grain-title/process.bpmn"), "--mutants", "3", "--json", "--seed", "5"});
  EXPECT_EQ(json::parse(flag.out)["seed"], 5);
}
