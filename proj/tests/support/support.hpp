#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "procforge/model.hpp"

namespace testsupport {

std::filesystem::path source_path(const std::string& relative);
std::string read_text(const std::filesystem::path& p);

/// Parsed fixture model, e.g. fixture_model("grain-title/process.bpmn").
procforge::ProcessModel fixture_model(const std::string& relative);

}  // namespace testsupport

namespace testsupport {

/// Random block-structured (hence safe) model with at most `max_flows`
/// sequence flows. Mixes user, default and script tasks, parallel and
/// exclusive blocks, and occasional loops.
procforge::ProcessModel random_block_model(std::uint64_t seed, std::size_t max_flows = 10);

/// In-memory builder for small hand-written models.
class ModelBuilder {
 public:
  explicit ModelBuilder(std::string id = "P");
  ModelBuilder& node(const std::string& id, procforge::NodeKind kind, const std::string& name = "");
  ModelBuilder& flow(const std::string& source, const std::string& target, const std::string& condition = "",
                     bool is_default = false);
  ModelBuilder& variable(const std::string& name, procforge::Type type);
  procforge::ProcessModel build() const { return model_; }
  procforge::ProcessModel& model() { return model_; }

 private:
  procforge::ProcessModel model_;
};

}  // namespace testsupport

namespace testsupport {

/// Serializes a model back to BPMN with the bcext vocabulary the parser reads.
std::string write_bpmn(const procforge::ProcessModel& m);

/// Canonical text dump; two models are equal iff their dumps are.
std::string dump_model(const procforge::ProcessModel& m);

}  // namespace testsupport
