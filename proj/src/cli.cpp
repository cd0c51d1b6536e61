#include "procforge/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "procforge/bpmn.hpp"
#include "procforge/codegen.hpp"
#include "procforge/harness.hpp"
#include "procforge/interpreter.hpp"
#include "procforge/validate.hpp"

namespace procforge {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

/// Carries an exit code out of a command.
struct Exit {
  int code;
};

struct Io {
  std::ostream& out;
  std::ostream& err;
  bool json_out = false;
};

std::string read_input(const std::string& path, Io& io) {
  std::ifstream in(path, std::ios::binary);
  if (!in || fs::is_directory(path)) {
    io.err << "error: cannot read " << path << "\n";
    throw Exit{kExitNoInput};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

[[noreturn]] void fail(Io& io, const std::string& message) {
  io.err << "error: " << message << "\n";
  throw Exit{kExitErrors};
}

json diagnostics_json(const std::vector<Diagnostic>& ds) {
  json arr = json::array();
  for (const auto& d : ds) {
    arr.push_back({{"severity", d.severity == Severity::Error ? "error" : "warning"},
                   {"element", d.element},
                   {"message", d.message}});
  }
  return arr;
}

/// Parsed and validated inputs shared by every command.
struct Inputs {
  ProcessModel model;
  std::vector<Diagnostic> diagnostics;
  std::vector<RegistrySpec> specs;
  bool valid = false;
};

Inputs load(const std::string& model_path, const std::vector<std::string>& registry_paths, Io& io) {
  Inputs in;
  std::string xml = read_input(model_path, io);
  std::vector<std::string> spec_texts;
  for (const auto& p : registry_paths) spec_texts.push_back(read_input(p, io));

  try {
    std::vector<Diagnostic> warnings;
    in.model = parse_bpmn(xml, &warnings);
    ValidationReport report = validate_model(in.model);
    in.diagnostics = report.diagnostics;
    in.diagnostics.insert(in.diagnostics.end(), warnings.begin(), warnings.end());
  } catch (const BpmnError& e) {
    std::string where = model_path;
    if (e.line()) where += ":" + std::to_string(e.line()) + ":" + std::to_string(e.column());
    in.diagnostics.push_back({Severity::Error, where, std::string(bpmn_error_name(e.kind())) + ": " + e.what()});
  }
  for (std::size_t i = 0; i < spec_texts.size(); ++i) {
    try {
      RegistrySpec s = parse_registry(spec_texts[i]);
      std::visit([](const auto& x) { check_invariants(x); }, s);
      in.specs.push_back(std::move(s));
    } catch (const SpecError& e) {
      std::string where = registry_paths[i];
      if (!e.path().empty()) where += " " + e.path();
      in.diagnostics.push_back({Severity::Error, where, std::string(spec_error_name(e.kind())) + ": " + e.what()});
    }
  }
  in.valid = std::none_of(in.diagnostics.begin(), in.diagnostics.end(),
                          [](const Diagnostic& d) { return d.severity == Severity::Error; });
  return in;
}

void print_diagnostics(const std::vector<Diagnostic>& ds, std::ostream& os) {
  for (const auto& d : ds) os << to_string(d) << "\n";
}

/// Stops with exit 1 after printing diagnostics when the inputs are invalid.
void require_valid(const Inputs& in, Io& io) {
  if (in.valid) return;
  print_diagnostics(in.diagnostics, io.err);
  throw Exit{kExitErrors};
}

// ---------------------------------------------------------------- validate

int cmd_validate(const std::string& model, const std::vector<std::string>& registries, Io& io) {
  Inputs in = load(model, registries, io);
  std::size_t errors = 0;
  for (const auto& d : in.diagnostics) errors += d.severity == Severity::Error;
  if (io.json_out) {
    json j;
    j["valid"] = in.valid;
    j["errors"] = errors;
    j["diagnostics"] = diagnostics_json(in.diagnostics);
    io.out << j.dump(2) << "\n";
  } else {
    print_diagnostics(in.diagnostics, io.out);
    if (in.valid) {
      io.out << model << ": valid (" << in.model.task_count() << " tasks, " << in.model.gateway_count()
             << " gateways, " << in.model.flows.size() << " flows)\n";
    } else {
      io.out << model << ": " << errors << " error" << (errors == 1 ? "" : "s") << "\n";
    }
  }
  return in.valid ? kExitOk : kExitErrors;
}

// ----------------------------------------------------------------- compile

int cmd_compile(const std::string& model, const std::vector<std::string>& registries, const std::string& out_dir,
                bool dump_automaton, Io& io) {
  Inputs in = load(model, registries, io);
  require_valid(in, io);
  MarkingAutomaton automaton = compile_marking(in.model);

  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& s : in.specs) {
    SourceUnit u = gen_registry(s);
    files.emplace_back(u.file_name, u.text);
  }
  SourceUnit process = gen_process(in.model, automaton);
  files.emplace_back(process.file_name, process.text);
  if (dump_automaton) files.emplace_back("automaton.txt", automaton.dump());

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(io, "cannot create " + out_dir + ": " + ec.message());
  json written = json::array();
  for (const auto& [name, text] : files) {
    fs::path p = fs::path(out_dir) / name;
    std::ofstream f(p, std::ios::binary);
    if (!(f << text)) fail(io, "cannot write " + p.string());
    written.push_back(p.string());
    if (!io.json_out) io.out << p.string() << "\n";
  }
  if (io.json_out) io.out << json{{"files", written}}.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

json value_json(const Value& v) {
  switch (v.type()) {
    case Type::Bool: return v.as_bool();
    case Type::Address: return v.as_address().to_checksum();
    case Type::String: return v.as_string();
    default: return v.as_int().str();
  }
}

std::string value_text(const Value& v) { return v.to_string(); }

Address parse_address_option(const std::string& text, Io& io) {
  auto a = Address::parse(text);
  if (!a) {
    io.err << "error: '" << text << "' is not an address\n";
    throw Exit{kExitUsage};
  }
  return *a;
}

int cmd_simulate(const std::string& model, const std::vector<std::string>& registries, const std::string& trace_path,
                 TraceMode mode, const Address& deployer, Io& io) {
  Inputs in = load(model, registries, io);
  std::string trace_text = read_input(trace_path, io);
  require_valid(in, io);
  MarkingAutomaton automaton = compile_marking(in.model);

  Trace trace;
  try {
    trace = read_trace(trace_text, in.model);
  } catch (const HarnessError& e) {
    fail(io, trace_path + ": " + e.what());
  }

  World world;
  Deployment deployment = deploy_registries(in.model, in.specs, world, deployer);
  std::optional<ProcessInstance> inst;
  try {
    inst.emplace(automaton, world, deployment.bindings);
  } catch (const InstanceError& e) {
    fail(io, std::string(instance_error_name(e.kind())) + ": " + e.what());
  }
  for (const auto& e : trace) (void)inst->invoke(e);
  Verdict verdict = classify(automaton, trace, mode, DataContext{in.specs, deployer});

  std::vector<std::string> active;
  for (std::size_t b = 0; b < automaton.flow_count(); ++b) {
    if (inst->marking().test(b)) active.push_back(automaton.flow_ids()[b]);
  }

  // Registries by interface, in model order.
  std::vector<std::pair<std::string, Address>> regs;
  for (const auto& iface : in.model.interfaces) {
    const Address& at = inst->interface_addresses().at(iface.id);
    bool seen = std::any_of(regs.begin(), regs.end(), [&](const auto& r) { return r.second == at; });
    if (!seen) regs.emplace_back(iface.name, at);
  }

  if (io.json_out) {
    json j;
    json events = json::array();
    for (std::size_t i = 0; i < inst->log().size(); ++i) {
      const auto& e = inst->log()[i];
      json ev = {{"index", i}, {"task", e.event.task}, {"accepted", e.accepted}};
      if (!e.accepted) {
        ev["reason"] = e.reason;
        ev["message"] = e.message;
      }
      events.push_back(std::move(ev));
    }
    j["mode"] = std::string(trace_mode_name(mode));
    j["conforming"] = verdict.conforming;
    if (!verdict.conforming) {
      j["firstBadIndex"] = verdict.first_bad;
      j["endNotReached"] = verdict.end_not_reached;
    }
    j["events"] = std::move(events);
    j["status"] = std::string(instance_status_name(inst->status()));
    j["processAddress"] = inst->process_address().to_checksum();
    j["marking"] = inst->marking().to_hex();
    j["activeFlows"] = active;
    if (inst->end_event()) j["endEvent"] = *inst->end_event();
    json env = json::object();
    for (const auto& [k, v] : inst->env()) env[k] = value_json(v);
    j["env"] = std::move(env);
    json reg = json::object();
    for (const auto& [name, at] : regs) {
      json r;
      r["address"] = at.to_checksum();
      if (const auto* l = std::get_if<FungibleLedger>(&world.registry(at))) {
        r["totalSupply"] = l->total_supply().str();
        json bal = json::object();
        for (const auto& [who, amt] : l->balances()) bal[who.to_checksum()] = amt.str();
        r["balances"] = std::move(bal);
      } else {
        const auto& s = std::get<NonFungibleStore>(world.registry(at));
        json recs = json::array();
        for (const auto& [id, rec] : s.records()) {
          json attrs = json::object();
          for (std::size_t k = 0; k < rec.attrs.size(); ++k) attrs[s.spec().attributes[k].name] = value_json(rec.attrs[k]);
          recs.push_back({{"id", id.to_checksum()}, {"owner", rec.owner.to_checksum()}, {"attrs", attrs}});
        }
        r["records"] = std::move(recs);
      }
      reg[name] = std::move(r);
    }
    j["registries"] = std::move(reg);
    io.out << j.dump(2) << "\n";
  } else {
    auto& o = io.out;
    for (std::size_t i = 0; i < inst->log().size(); ++i) {
      const auto& e = inst->log()[i];
      o << std::setw(3) << i << "  " << (e.accepted ? "Accepted" : "Rejected") << "  " << e.event.task;
      if (!e.accepted) o << "  [" << e.reason << "] " << e.message;
      o << "\n";
    }
    o << "\nstatus   " << instance_status_name(inst->status());
    if (inst->end_event()) o << " (" << *inst->end_event() << ")";
    o << "\nmarking  " << inst->marking().to_hex();
    for (const auto& f : active) o << " " << f;
    o << "\nprocess  " << inst->process_address().to_checksum() << "\n";
    if (!inst->env().empty()) {
      o << "\nvariables\n";
      for (const auto& [k, v] : inst->env()) o << "  " << k << " = " << value_text(v) << "\n";
    }
    for (const auto& [name, at] : regs) {
      o << "\n" << name << " @ " << at.to_checksum() << "\n";
      if (const auto* l = std::get_if<FungibleLedger>(&world.registry(at))) {
        for (const auto& [who, amt] : l->balances()) o << "  " << who.to_checksum() << "  " << amt.str() << "\n";
        o << "  total supply " << l->total_supply().str() << "\n";
      } else {
        const auto& s = std::get<NonFungibleStore>(world.registry(at));
        if (s.records().empty()) o << "  (no records)\n";
        for (const auto& [id, rec] : s.records()) {
          o << "  " << id.to_checksum() << "  owner " << rec.owner.to_checksum();
          for (std::size_t k = 0; k < rec.attrs.size(); ++k) {
            o << "  " << s.spec().attributes[k].name << "=" << value_text(rec.attrs[k]);
          }
          o << "\n";
        }
      }
    }
    o << "\n";
    if (verdict.conforming) {
      o << "Conforming (" << trace_mode_name(mode) << ")\n";
    } else if (verdict.end_not_reached) {
      o << "NonConforming: end not reached after " << verdict.first_bad << " events\n";
    } else {
      o << "NonConforming: first bad event at index " << verdict.first_bad << "\n";
    }
  }
  return verdict.conforming ? kExitOk : kExitNonConforming;
}

// ------------------------------------------------------------- conformance

int cmd_conformance(const std::string& model, const std::vector<std::string>& registries, const ExperimentConfig& cfg,
                    const std::string& report_path, bool timing, Io& io) {
  Inputs in = load(model, registries, io);
  require_valid(in, io);
  MarkingAutomaton automaton = compile_marking(in.model);
  Report r;
  try {
    r = run_experiment(automaton, cfg);
  } catch (const HarnessError& e) {
    fail(io, std::string(harness_error_name(e.kind())) + ": " + e.what());
  }
  std::string report = report_json(r, timing);
  if (!report_path.empty()) {
    fs::path p(report_path);
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    std::ofstream f(p, std::ios::binary);
    if (!(f << report)) fail(io, "cannot write " + report_path);
  }
  if (io.json_out) {
    io.out << report;
  } else {
    auto row = [&](const std::string& k, const std::string& v) { io.out << std::left << std::setw(16) << k << v << "\n"; };
    std::ostringstream pct;
    pct << std::fixed << std::setprecision(2) << r.correctness_pct << "%";
    row("Model", in.model.name.empty() ? in.model.id : in.model.name);
    row("Tasks", std::to_string(r.tasks));
    row("Gateways", std::to_string(r.gateways));
    row("Base traces", std::to_string(r.bases.size()));
    row("Mutants/base", std::to_string(r.mutants_per_base));
    row("Traces", std::to_string(r.total()));
    row("Conforming", std::to_string(r.conforming));
    row("Not conforming", std::to_string(r.non_conforming));
    row("Correctness", pct.str());
    row("Seed", std::to_string(r.seed));
    if (timing) row("Elapsed", std::to_string(r.elapsed_ms) + " ms");
    if (!report_path.empty()) row("Report", report_path);
  }
  if (!r.disagreements.empty()) {
    io.err << "error: " << r.disagreements.size() << " trace(s) classified differently by the oracle\n";
    return kExitErrors;
  }
  return kExitOk;
}

std::optional<std::uint64_t> parse_seed(const std::string& s) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) return std::nullopt;
  try {
    return std::stoull(s);
  } catch (const std::out_of_range&) {
    return std::nullopt;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compile, simulate and check blockchain-backed BPMN processes", "procforge"};
  app.require_subcommand(1);
  bool json_out = false;
  app.add_flag("--json", json_out, "Machine-readable output on stdout");

  std::string model;
  std::vector<std::string> registries;
  auto common = [&](CLI::App* sub) {
    sub->add_option("model", model, "BPMN model file")->required();
    sub->add_option("-r,--registry", registries, "Registry spec JSON (repeatable)");
    sub->add_flag("--json", json_out, "Machine-readable output on stdout");
  };

  auto* validate = app.add_subcommand("validate", "Check a model and registry specs");
  common(validate);

  auto* compile = app.add_subcommand("compile", "Generate Solidity for a model and its registries");
  common(compile);
  std::string out_dir = ".";
  bool dump = false;
  compile->add_option("-o,--output", out_dir, "Output directory (created if absent)");
  compile->add_flag("--dump-automaton", dump, "Also write the mask table to automaton.txt");

  auto* simulate = app.add_subcommand("simulate", "Replay a JSONL trace through the interpreter");
  common(simulate);
  std::string trace_path;
  std::string deployer_text;
  bool strict = false;
  bool prefix = false;
  simulate->add_option("-t,--trace", trace_path, "Trace file, one JSON event per line")->required();
  auto* strict_flag = simulate->add_flag("--strict", strict, "Require completion (default)");
  simulate->add_flag("--prefix", prefix, "Accept traces that stop early")->excludes(strict_flag);
  simulate->add_option("--deployer", deployer_text, "Account that deploys the registries");

  auto* conformance = app.add_subcommand("conformance", "Run the mutation experiment against the oracle");
  common(conformance);
  std::string seed_text;
  std::size_t mutants = 250;
  std::size_t bases = 2;
  std::string report_path;
  bool no_timing = false;
  bool c_prefix = false;
  unsigned threads = 0;
  std::optional<std::size_t> max_len;
  conformance->add_option("--seed", seed_text, "PRNG seed (default: $PROCFORGE_SEED, else 42)");
  conformance->add_option("--mutants", mutants, "Mutants per base trace");
  conformance->add_option("--bases", bases, "Number of base traces");
  conformance->add_option("--max-len", max_len, "Longest base trace searched");
  conformance->add_option("--report", report_path, "Write the JSON report here");
  conformance->add_option("--threads", threads, "Classification threads (0 = all cores)");
  conformance->add_flag("--prefix", c_prefix, "Classify prefixes instead of complete runs");
  conformance->add_flag("--no-timing", no_timing, "Report elapsedMs as 0 for byte-identical reports");

  std::vector<std::string> argv_store{"procforge"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  Io io{out, err, json_out};
  try {
    if (*validate) return cmd_validate(model, registries, io);
    if (*compile) return cmd_compile(model, registries, out_dir, dump, io);
    if (*simulate) {
      Address deployer = deployer_text.empty() ? Address::derive("deployer") : parse_address_option(deployer_text, io);
      return cmd_simulate(model, registries, trace_path, prefix ? TraceMode::Prefix : TraceMode::Strict, deployer, io);
    }
    ExperimentConfig cfg;
    if (seed_text.empty()) {
      if (const char* env = std::getenv("PROCFORGE_SEED")) seed_text = env;
    }
    if (!seed_text.empty()) {
      auto s = parse_seed(seed_text);
      if (!s) {
        err << "error: seed '" << seed_text << "' is not an unsigned integer\n";
        return kExitUsage;
      }
      cfg.seed = *s;
    }
    cfg.mutants_per_base = mutants;
    cfg.base_traces = bases;
    cfg.mode = c_prefix ? TraceMode::Prefix : TraceMode::Strict;
    cfg.threads = threads;
    cfg.max_len = max_len;
    return cmd_conformance(model, registries, cfg, report_path, !no_timing, io);
  } catch (const Exit& e) {
    return e.code;
  }
}

}  // namespace procforge
