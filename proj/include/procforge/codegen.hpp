#pragma once

#include <map>
#include <string>
#include <vector>

#include "procforge/automaton.hpp"
#include "procforge/model.hpp"
#include "procforge/registry.hpp"

namespace procforge {

inline constexpr const char* kSolidityPragma = "^0.5.8";

/// One emitted `.sol` file.
struct SourceUnit {
  std::string file_name;
  std::string pragma_version;
  /// Rendered contracts, in file order.
  std::vector<std::string> contracts;
  /// Complete file: pragma line, then the contracts separated by blank lines.
  std::string text;
};

SourceUnit gen_fungible(const FungibleRegistrySpec& spec);
/// Single registries produce one contract; distributed ones a record
/// contract followed by the registry that creates and tracks them.
SourceUnit gen_nonfungible(const NonFungibleRegistrySpec& spec);
SourceUnit gen_registry(const RegistrySpec& spec);

/// ProcessFactory.sol: interface contracts, ProcessFactory, ProcessMonitor.
SourceUnit gen_process(const ProcessModel& model, const MarkingAutomaton& automaton);

/// The callable surface of a generated registry, as a model would declare it.
InterfaceDecl project_interface(const RegistrySpec& spec);

/// `contract Name { function f(...) external returns (...); ... }`
std::string render_interface(const InterfaceDecl& iface);

/// Solidity function name of every external task, keyed by node id.
/// `Create Grain Title` becomes `Create_grain_title`; clashes get `_2`, `_3`.
std::map<std::string, std::string> task_function_names(const MarkingAutomaton& automaton);

std::string solidity_type(Type t);

/// Solidity expression with checked arithmetic through `_add`-style helpers.
/// Constant subexpressions are folded. Helper names used are added to `helpers`.
std::string solidity_expr(const Expr& e, const TypeScope& scope, std::vector<std::string>* helpers = nullptr);

}  // namespace procforge
