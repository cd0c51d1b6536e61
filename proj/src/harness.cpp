#include "procforge/harness.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <set>
#include <thread>

#include <json.hpp>

#include "procforge/token_game.hpp"

namespace procforge {

using json = nlohmann::ordered_json;

std::string_view trace_mode_name(TraceMode m) { return m == TraceMode::Strict ? "Strict" : "Prefix"; }

std::string_view harness_error_name(HarnessErrorKind k) {
  switch (k) {
    case HarnessErrorKind::TraceFormat: return "TraceFormat";
    case HarnessErrorKind::BudgetExceeded: return "BudgetExceeded";
    case HarnessErrorKind::MutationExhausted: return "MutationExhausted";
    case HarnessErrorKind::BadConfig: return "BadConfig";
  }
  return "?";
}

// ------------------------------------------------------------------ JSONL

namespace {

[[noreturn]] void format_error(std::size_t line, const std::string& what) {
  throw HarnessError(HarnessErrorKind::TraceFormat, "line " + std::to_string(line) + ": " + what);
}

std::optional<BigInt> json_integer(const json& v) {
  if (v.is_number_unsigned()) return BigInt(v.get<std::uint64_t>());
  if (v.is_number_integer()) return BigInt(v.get<std::int64_t>());
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    std::string_view digits = s;
    if (!digits.empty() && digits[0] == '-') digits.remove_prefix(1);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return std::nullopt;
    }
    return BigInt(s);
  }
  return std::nullopt;
}

Value arg_value(const json& v, std::optional<Type> declared, std::size_t line, const std::string& name) {
  auto bad = [&](std::string_view expected) -> Value {
    format_error(line, "argument '" + name + "' is not " + std::string(expected));
  };
  if (declared) {
    switch (*declared) {
      case Type::Uint256:
      case Type::Int256:
      case Type::IntLiteral: {
        auto i = json_integer(v);
        return i ? Value::literal(*i) : bad("an integer");
      }
      case Type::Bool: return v.is_boolean() ? Value::boolean(v.get<bool>()) : bad("a boolean");
      case Type::Address: {
        if (!v.is_string()) return bad("an address");
        auto a = Address::parse(v.get<std::string>());
        return a ? Value::address(*a) : bad("an address");
      }
      case Type::String: return v.is_string() ? Value::string(v.get<std::string>()) : bad("a string");
    }
  }
  // Undeclared: best guess, left for the interpreter to reject.
  if (v.is_boolean()) return Value::boolean(v.get<bool>());
  if (auto i = json_integer(v); i && !v.is_string()) return Value::literal(*i);
  if (v.is_string()) {
    if (auto a = Address::parse(v.get<std::string>())) return Value::address(*a);
    return Value::string(v.get<std::string>());
  }
  return bad("a scalar");
}

json value_json(const Value& v) {
  switch (v.type()) {
    case Type::Bool: return v.as_bool();
    case Type::Address: return v.as_address().to_checksum();
    case Type::String: return v.as_string();
    default: break;
  }
  const BigInt& i = v.as_int();
  if (i >= std::numeric_limits<std::int64_t>::min() && i <= std::numeric_limits<std::int64_t>::max()) {
    return static_cast<std::int64_t>(i);
  }
  return i.str();
}

}  // namespace

Trace read_trace(std::string_view jsonl, const ProcessModel& model) {
  Trace out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= jsonl.size()) {
    auto end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      format_error(line_no, e.what());
    }
    if (!j.is_object()) format_error(line_no, "expected an object");
    for (const auto& [k, v] : j.items()) {
      if (k != "task" && k != "args" && k != "caller") format_error(line_no, "unknown field '" + k + "'");
    }
    if (!j.contains("task") || !j["task"].is_string()) format_error(line_no, "'task' must be a string");
    TraceEvent e;
    e.task = j["task"].get<std::string>();
    const Node* node = model.find_task(e.task);
    if (j.contains("args")) {
      if (!j["args"].is_object()) format_error(line_no, "'args' must be an object");
      for (const auto& [k, v] : j["args"].items()) {
        std::optional<Type> declared;
        if (node) {
          for (const auto& in : node->inputs) {
            if (in.name == k) declared = in.type;
          }
        }
        e.args.insert_or_assign(k, arg_value(v, declared, line_no, k));
      }
    }
    if (j.contains("caller")) {
      auto a = j["caller"].is_string() ? Address::parse(j["caller"].get<std::string>()) : std::nullopt;
      if (!a) format_error(line_no, "'caller' must be an address");
      e.caller = *a;
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::string write_trace(const Trace& trace) {
  std::string out;
  for (const auto& e : trace) {
    json j;
    j["task"] = e.task;
    if (!e.args.empty()) {
      json args = json::object();
      for (const auto& [k, v] : e.args) args[k] = value_json(v);
      j["args"] = std::move(args);
    }
    if (e.caller) j["caller"] = e.caller->to_checksum();
    out += j.dump() + "\n";
  }
  return out;
}

Trace plain_trace(const std::vector<std::string>& tasks) {
  Trace t;
  for (const auto& name : tasks) t.push_back(TraceEvent{name, {}, std::nullopt});
  return t;
}

std::vector<std::string> task_names(const Trace& trace) {
  std::vector<std::string> out;
  for (const auto& e : trace) out.push_back(e.task);
  return out;
}

// ---------------------------------------------------------------- classify

namespace {

using States = std::set<Marking>;

States nd_step(const MarkingAutomaton& a, const States& from, std::string_view task) {
  States out;
  const ExternalTransition* t = a.find_external(task);
  if (!t) return out;
  for (const auto& m : from) {
    for (const auto& alt : t->alternatives) {
      if ((m & alt.pre) != alt.pre) continue;
      for (const auto& q : a.close_nondeterministic((m & ~alt.pre) | alt.post)) out.insert(q);
    }
  }
  return out;
}

bool any_complete(const States& s) {
  return std::any_of(s.begin(), s.end(), [](const Marking& m) { return m.none(); });
}

Verdict classify_search(const MarkingAutomaton& a, const Trace& trace, TraceMode mode) {
  States states = a.close_nondeterministic(a.initial_marking());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    states = nd_step(a, states, trace[i].task);
    if (states.empty()) return {false, i, false};
  }
  if (mode == TraceMode::Strict && !any_complete(states)) return {false, trace.size(), true};
  return {true, 0, false};
}

Verdict classify_data(const MarkingAutomaton& a, const Trace& trace, TraceMode mode, const DataContext& data) {
  World world;
  Deployment d = deploy_registries(a.model(), data.specs, world, data.deployer);
  ProcessInstance inst(a, world, d.bindings);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (!inst.invoke(trace[i]).accepted) return {false, i, false};
  }
  if (mode == TraceMode::Strict && inst.status() != InstanceStatus::Completed) return {false, trace.size(), true};
  return {true, 0, false};
}

}  // namespace

Verdict classify(const MarkingAutomaton& automaton, const Trace& trace, TraceMode mode, const DataContext& data) {
  bool carries_data =
      std::any_of(trace.begin(), trace.end(), [](const TraceEvent& e) { return !e.args.empty() || e.caller; });
  return carries_data ? classify_data(automaton, trace, mode, data) : classify_search(automaton, trace, mode);
}

std::vector<std::vector<std::string>> enumerate_conforming(const MarkingAutomaton& a, std::size_t max_len,
                                                           TraceMode mode, std::size_t state_budget) {
  std::vector<std::string> alphabet;
  for (const auto& t : a.externals()) {
    const std::string& l = label_of(*t.node);
    if (std::find(alphabet.begin(), alphabet.end(), l) == alphabet.end()) alphabet.push_back(l);
  }
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> prefix;
  std::size_t visited = 0;
  std::function<void(const States&)> walk = [&](const States& states) {
    if (++visited > state_budget) {
      throw HarnessError(HarnessErrorKind::BudgetExceeded,
                         "more than " + std::to_string(state_budget) + " states explored");
    }
    if (mode == TraceMode::Prefix || any_complete(states)) out.push_back(prefix);
    if (prefix.size() == max_len) return;
    for (const auto& label : alphabet) {
      States next = nd_step(a, states, label);
      if (next.empty()) continue;
      prefix.push_back(label);
      walk(next);
      prefix.pop_back();
    }
  };
  walk(a.close_nondeterministic(a.initial_marking()));
  std::sort(out.begin(), out.end());
  return out;
}

// ------------------------------------------------------------------ mutate

std::size_t draw_index(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

namespace {

enum class Op { Add, Remove, Swap };

Op draw_op(std::mt19937_64& rng, const OperatorWeights& w) {
  double total = w.add + w.remove + w.swap;
  double x = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
  if (x < w.add) return Op::Add;
  if (x < w.add + w.remove || w.swap <= 0) return w.remove > 0 ? Op::Remove : Op::Add;
  return Op::Swap;
}

void check_weights(const OperatorWeights& w) {
  if (w.add < 0 || w.remove < 0 || w.swap < 0 || w.add + w.remove + w.swap <= 0) {
    throw HarnessError(HarnessErrorKind::BadConfig, "operator weights must be nonnegative and not all zero");
  }
}

}  // namespace

Trace mutate(const Trace& trace, std::mt19937_64& rng, const OperatorWeights& weights,
             const std::vector<std::string>& alphabet, const std::vector<Trace>& avoid) {
  check_weights(weights);
  for (int attempt = 0; attempt < 100; ++attempt) {
    Op op = draw_op(rng, weights);
    if ((op == Op::Remove && trace.empty()) || (op == Op::Swap && trace.size() < 2)) continue;
    if (op == Op::Add && alphabet.empty()) continue;
    Trace t = trace;
    switch (op) {
      case Op::Add: {
        std::size_t at = draw_index(rng, t.size() + 1);
        const std::string& task = alphabet[draw_index(rng, alphabet.size())];
        t.insert(t.begin() + static_cast<std::ptrdiff_t>(at), TraceEvent{task, {}, std::nullopt});
        break;
      }
      case Op::Remove: t.erase(t.begin() + static_cast<std::ptrdiff_t>(draw_index(rng, t.size()))); break;
      case Op::Swap: {
        std::size_t i = draw_index(rng, t.size());
        std::size_t j = draw_index(rng, t.size() - 1);
        if (j >= i) ++j;
        std::swap(t[i], t[j]);
        break;
      }
    }
    if (std::find(avoid.begin(), avoid.end(), t) == avoid.end()) return t;
  }
  throw HarnessError(HarnessErrorKind::MutationExhausted, "no distinct mutant after 100 attempts");
}

// -------------------------------------------------------------- experiment

namespace {

/// Round robin over groups of traces with the same task multiset, so that
/// bases differ in what they do rather than only in interleaving.
std::vector<std::vector<std::string>> pick_bases(const std::vector<std::vector<std::string>>& language,
                                                 std::size_t wanted) {
  std::vector<std::vector<const std::vector<std::string>*>> groups;
  std::map<std::vector<std::string>, std::size_t> group_of;
  for (const auto& t : language) {
    if (t.empty()) continue;
    auto key = t;
    std::sort(key.begin(), key.end());
    auto [it, fresh] = group_of.emplace(key, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(&t);
  }
  std::vector<std::vector<std::string>> out;
  for (std::size_t round = 0; out.size() < wanted; ++round) {
    bool any = false;
    for (const auto& g : groups) {
      if (round < g.size() && out.size() < wanted) {
        out.push_back(*g[round]);
        any = true;
      }
    }
    if (!any) break;
  }
  return out;
}

}  // namespace

Report run_experiment(const MarkingAutomaton& automaton, const ExperimentConfig& cfg) {
  check_weights(cfg.weights);
  auto started = std::chrono::steady_clock::now();
  const ProcessModel& model = automaton.model();

  Report r;
  r.model_id = model.id;
  r.seed = cfg.seed;
  r.mode = cfg.mode;
  r.tasks = model.task_count();
  r.gateways = model.gateway_count();
  r.base_traces = cfg.base_traces;
  r.mutants_per_base = cfg.mutants_per_base;

  std::size_t max_len = cfg.max_len.value_or(automaton.externals().size());
  r.bases = pick_bases(enumerate_conforming(automaton, max_len, cfg.mode, cfg.state_budget), cfg.base_traces);
  if (r.bases.size() < cfg.base_traces) {
    throw HarnessError(HarnessErrorKind::BadConfig, "only " + std::to_string(r.bases.size()) +
                                                        " conforming base traces of length <= " +
                                                        std::to_string(max_len));
  }

  std::vector<Trace> bases;
  for (const auto& b : r.bases) bases.push_back(plain_trace(b));
  TokenGame oracle(model);
  std::vector<std::string> alphabet = oracle.alphabet();

  std::vector<Trace> traces = bases;
  std::mt19937_64 rng(cfg.seed);
  for (const auto& base : bases) {
    for (std::size_t k = 0; k < cfg.mutants_per_base; ++k) traces.push_back(mutate(base, rng, cfg.weights, alphabet, bases));
  }

  std::vector<Verdict> ours(traces.size());
  std::vector<Verdict> theirs(traces.size());
  bool strict = cfg.mode == TraceMode::Strict;
  auto work = [&](std::size_t from, std::size_t step) {
    for (std::size_t i = from; i < traces.size(); i += step) {
      ours[i] = classify(automaton, traces[i], cfg.mode);
      auto v = oracle.classify(task_names(traces[i]), strict);
      theirs[i] = Verdict{v.conforming, v.conforming ? 0 : v.first_bad, v.end_not_reached};
    }
  };
  unsigned n = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(1, traces.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n; ++w) pool.emplace_back(work, w, n);
  work(0, n);
  for (auto& t : pool) t.join();

  std::size_t agree = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    (ours[i].conforming ? r.conforming : r.non_conforming) += 1;
    if (ours[i] == theirs[i]) {
      ++agree;
    } else {
      r.disagreements.push_back({i, task_names(traces[i]), ours[i], theirs[i]});
    }
  }
  r.correctness_pct = traces.empty() ? 100.0 : 100.0 * static_cast<double>(agree) / static_cast<double>(traces.size());
  r.elapsed_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
  return r;
}

namespace {

json verdict_json(const Verdict& v) {
  json j;
  j["conforming"] = v.conforming;
  if (!v.conforming) {
    j["firstBadIndex"] = v.first_bad;
    j["endNotReached"] = v.end_not_reached;
  }
  return j;
}

}  // namespace

std::string report_json(const Report& r, bool with_timing) {
  json j;
  j["model"] = r.model_id;
  j["seed"] = r.seed;
  j["mode"] = std::string(trace_mode_name(r.mode));
  j["tasks"] = r.tasks;
  j["gateways"] = r.gateways;
  j["baseTraces"] = r.base_traces;
  j["mutantsPerBase"] = r.mutants_per_base;
  j["bases"] = r.bases;
  j["traces"] = r.total();
  j["totals"] = {{"conforming", r.conforming}, {"nonConforming", r.non_conforming}};
  j["correctnessPct"] = r.correctness_pct;
  json dis = json::array();
  for (const auto& d : r.disagreements) {
    dis.push_back({{"index", d.index},
                   {"trace", d.trace},
                   {"interpreter", verdict_json(d.interpreter)},
                   {"oracle", verdict_json(d.oracle)}});
  }
  j["disagreements"] = std::move(dis);
  j["elapsedMs"] = with_timing ? r.elapsed_ms : 0;
  return j.dump(2) + "\n";
}

}  // namespace procforge
