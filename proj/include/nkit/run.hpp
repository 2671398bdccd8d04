#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nkit/io.hpp"

namespace nkit {

struct RunOptions {
  std::vector<std::string> commands;  // overrides the document list when nonempty
  std::optional<std::pair<int, int>> precision;  // (N, M) override
  std::optional<int> i_max;
  std::optional<std::uint64_t> seed;
  std::optional<int> escalate;  // second precision for a stability rerun
};

struct RunOutcome {
  nlohmann::json report;
  int exit_code = 0;  // 0 ok, 1 verdict failure, 2 usage/schema, 3 precision
};

// Executes the requested commands in dependency order. Per-command errors are
// embedded under report["errors"] and folded into the exit code with
// precedence usage/schema > precision > verdict failure.
RunOutcome run_doc(const InstanceDoc& doc, const std::string& input_hash, const RunOptions& opt);

// "json": canonical sorted-key JSON, "text": aligned tables. Unknown format
// raises a usage error. Output is byte-identical for identical reports.
std::string emit_report(const nlohmann::json& report, const std::string& format);

}  // namespace nkit
