#include "procforge/token_game.hpp"

#include <functional>

namespace procforge {

TokenGame::TokenGame(const ProcessModel& model) : model_(model) {
  for (const auto& n : model_.nodes) {
    if (is_external(n.kind)) alphabet_.push_back(label_of(n));
  }
}

std::vector<TokenGame::Firing> TokenGame::firings(const Node& n, const State& s) const {
  std::vector<std::string> in;
  std::vector<std::string> out;
  for (const auto& f : model_.flows) {
    if (f.target == n.id) in.push_back(f.id);
    if (f.source == n.id) out.push_back(f.id);
  }

  std::vector<Firing> result;
  if (n.kind == NodeKind::AndGateway) {
    if (in.empty()) return result;
    State rest = s;
    for (const auto& f : in) {
      if (rest.erase(f) == 0) return result;
    }
    result.push_back({std::move(rest), out});
    return result;
  }

  // Every other node consumes a single incoming token.
  for (const auto& f : in) {
    if (s.count(f) == 0) continue;
    State rest = s;
    rest.erase(f);
    if (n.kind == NodeKind::XorGateway) {
      for (const auto& o : out) result.push_back({rest, {o}});
    } else if (n.kind == NodeKind::EndEvent) {
      result.push_back({rest, {}});
    } else {
      result.push_back({rest, out});
    }
  }
  return result;
}

std::set<TokenGame::State> TokenGame::settle(const State& s) const {
  std::set<State> quiescent;
  std::set<State> seen;
  std::vector<State> stack{s};
  while (!stack.empty()) {
    State cur = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(cur).second) continue;
    bool any = false;
    for (const auto& n : model_.nodes) {
      bool automatic = n.kind == NodeKind::ScriptTask || is_gateway(n.kind) || n.kind == NodeKind::EndEvent;
      if (!automatic) continue;
      for (auto& fire : firings(n, cur)) {
        any = true;
        State next = std::move(fire.consumed_state);
        for (auto& p : fire.produced) next.insert(p);
        stack.push_back(std::move(next));
      }
    }
    if (!any) quiescent.insert(cur);
  }
  return quiescent;
}

std::set<TokenGame::State> TokenGame::initial_states() const {
  State s;
  for (const auto& n : model_.nodes) {
    if (n.kind != NodeKind::StartEvent) continue;
    for (const auto& f : model_.flows) {
      if (f.source == n.id) s.insert(f.id);
    }
  }
  return settle(s);
}

std::set<TokenGame::State> TokenGame::step(const std::set<State>& from, const std::string& task) const {
  std::set<State> out;
  const Node* node = model_.find_task(task);
  if (node == nullptr || !is_external(node->kind)) return out;
  for (const auto& s : from) {
    for (auto& fire : firings(*node, s)) {
      State next = std::move(fire.consumed_state);
      for (auto& p : fire.produced) next.insert(p);
      for (auto& q : settle(next)) out.insert(q);
    }
  }
  return out;
}

TokenGame::Verdict TokenGame::classify(const std::vector<std::string>& trace, bool strict) const {
  std::set<State> states = initial_states();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    states = step(states, trace[i]);
    if (states.empty()) return {false, i, false};
  }
  if (strict) {
    bool done = states.count(State{}) > 0;
    if (!done) return {false, trace.size(), true};
  }
  return {true, 0, false};
}

std::map<std::vector<std::string>, bool> TokenGame::language(std::size_t max_len) const {
  std::map<std::vector<std::string>, bool> out;
  std::vector<std::string> prefix;
  std::function<void(const std::set<State>&)> walk = [&](const std::set<State>& states) {
    out[prefix] = states.count(State{}) > 0;
    if (prefix.size() == max_len) return;
    for (const auto& t : alphabet_) {
      auto next = step(states, t);
      if (next.empty()) continue;
      prefix.push_back(t);
      walk(next);
      prefix.pop_back();
    }
  };
  walk(initial_states());
  return out;
}

std::optional<std::string> TokenGame::find_unsafe_firing(std::size_t state_budget) const {
  State start;
  for (const auto& n : model_.nodes) {
    if (n.kind != NodeKind::StartEvent) continue;
    for (const auto& f : model_.flows) {
      if (f.source == n.id) start.insert(f.id);
    }
  }
  std::set<State> seen;
  std::vector<State> stack{start};
  while (!stack.empty() && seen.size() < state_budget) {
    State cur = std::move(stack.back());
    stack.pop_back();
    if (!seen.insert(cur).second) continue;
    for (const auto& n : model_.nodes) {
      if (n.kind == NodeKind::StartEvent) continue;
      for (auto& fire : firings(n, cur)) {
        State next = std::move(fire.consumed_state);
        for (auto& p : fire.produced) {
          if (!next.insert(p).second) return n.id;
        }
        stack.push_back(std::move(next));
      }
    }
  }
  return std::nullopt;
}

}  // namespace procforge
