#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mec/config.hpp"
#include "mec/connection.hpp"
#include "mec/report.hpp"

namespace mec {

inline constexpr const char* kSchemaVersion = "mec-report/1";

using Details = std::vector<std::pair<std::string, std::string>>;

// What a single check produced.
struct CheckOutcome {
  std::string verdict;
  double worst_residual = 0.0;
  std::optional<Witness> witness;
  std::size_t samples = 0;
  Details details;
};

struct CheckEntry {
  std::string name;
  std::string expected;
  CheckOutcome outcome;
  std::optional<double> wall_time;
  std::optional<std::string> error;  // the check threw instead of producing a verdict

  bool matches() const { return !error && outcome.verdict == expected; }
};

struct ReportDocument {
  std::string schema_version = kSchemaVersion;
  std::string scenario;
  std::string description;
  std::string anchor;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> tolerances;
  std::vector<CheckEntry> checks;

  bool pass() const;
  const CheckEntry* find(const std::string& check) const;
};

struct ScenarioCheck {
  std::string name;
  std::string expected;
  std::function<CheckOutcome()> run;
};

// Checks bound to one (config, seed); closures may share state so later
// checks can read what earlier ones stored.
struct ScenarioPlan {
  std::vector<ScenarioCheck> checks;
  // The connection on which the pointwise and path criteria run.
  std::function<Connection()> primary;
};

struct ScenarioInfo {
  std::string name;
  std::string description;
  std::string anchor;
  std::function<ScenarioPlan(const Config&, std::uint64_t seed)> plan;
};

// Stable order.
const std::vector<ScenarioInfo>& scenario_registry();
// Throws UnknownScenario.
const ScenarioInfo& find_scenario(const std::string& name);

struct RunOptions {
  bool timing = false;
};

ReportDocument run_scenario(const std::string& name, std::uint64_t seed, const Config& config,
                            const RunOptions& options = {});

enum class ReportFormat { Json, Text };

std::string emit_report(const ReportDocument& doc, ReportFormat format);
std::string emit_reports(const std::vector<ReportDocument>& docs, ReportFormat format);
// Inverse of the JSON emitter.
ReportDocument parse_report(const std::string& json);

struct ReplayResult {
  ReportDocument recorded;
  ReportDocument rerun;
  std::vector<std::string> mismatches;
  bool reproduced() const { return mismatches.empty(); }
};

// Re-runs the scenario of a JSON report with its seed and tolerance snapshot
// and compares verdicts and witness coordinates.
ReplayResult replay_report(const std::string& json);

// Transports along the first sampled arrow path of the primary connection
// and writes "t c0 c1 ..." lines.
void dump_primary_trajectory(const std::string& name, std::uint64_t seed, const Config& config, std::ostream& os);

}  // namespace mec
