#include <chrono>
#include <sstream>

#include "json.hpp"
#include "mec/error.hpp"
#include "mec/scenario.hpp"
#include "mec/transport.hpp"

namespace mec {

using json = nlohmann::ordered_json;

bool ReportDocument::pass() const {
  if (checks.empty()) return false;
  for (const auto& c : checks) {
    if (!c.matches()) return false;
  }
  return true;
}

const CheckEntry* ReportDocument::find(const std::string& check) const {
  for (const auto& c : checks) {
    if (c.name == check) return &c;
  }
  return nullptr;
}

ReportDocument run_scenario(const std::string& name, std::uint64_t seed, const Config& config,
                            const RunOptions& options) {
  const ScenarioInfo& info = find_scenario(name);
  ReportDocument doc;
  doc.scenario = info.name;
  doc.description = info.description;
  doc.anchor = info.anchor;
  doc.seed = seed;
  doc.tolerances = config.snapshot();

  ScenarioPlan plan;
  try {
    plan = info.plan(config, seed);
  } catch (const std::exception& e) {
    CheckEntry entry;
    entry.name = "setup";
    entry.expected = "ok";
    entry.error = e.what();
    doc.checks.push_back(std::move(entry));
    return doc;
  }
  for (const auto& check : plan.checks) {
    CheckEntry entry;
    entry.name = check.name;
    entry.expected = check.expected;
    const auto start = std::chrono::steady_clock::now();
    try {
      entry.outcome = check.run();
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    if (options.timing) {
      entry.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    doc.checks.push_back(std::move(entry));
  }
  return doc;
}

// ---------------------------------------------------------------- JSON

namespace {

json to_json(const CheckEntry& c) {
  json j;
  j["name"] = c.name;
  j["expected"] = c.expected;
  j["verdict"] = c.outcome.verdict;
  j["match"] = c.matches();
  j["worst_residual"] = format_real(c.outcome.worst_residual);
  j["samples"] = std::to_string(c.outcome.samples);
  if (c.outcome.witness) {
    json coords = json::array();
    for (double x : c.outcome.witness->coords) coords.push_back(format_real(x));
    j["witness"] = {{"description", c.outcome.witness->description}, {"coords", coords}};
  } else {
    j["witness"] = nullptr;
  }
  j["wall_time"] = c.wall_time ? json(format_real(*c.wall_time)) : json(nullptr);
  json details = json::object();
  for (const auto& [k, v] : c.outcome.details) details[k] = v;
  j["details"] = details;
  j["error"] = c.error ? json(*c.error) : json(nullptr);
  return j;
}

json to_json(const ReportDocument& doc) {
  json j;
  j["schema_version"] = doc.schema_version;
  j["scenario"] = doc.scenario;
  j["description"] = doc.description;
  j["anchor"] = doc.anchor;
  j["seed"] = std::to_string(doc.seed);
  json cfg = json::object();
  for (const auto& [k, v] : doc.tolerances) cfg[k] = v;
  j["config"] = cfg;
  json checks = json::array();
  for (const auto& c : doc.checks) checks.push_back(to_json(c));
  j["checks"] = checks;
  j["pass"] = doc.pass();
  return j;
}

std::string text_line(const CheckEntry& c) {
  std::ostringstream os;
  os << "  " << (c.matches() ? "ok       " : "MISMATCH ") << c.name << ": ";
  if (c.error) {
    os << "error: " << *c.error;
  } else {
    os << c.outcome.verdict << " (expected " << c.expected << "), worst residual "
       << format_real(c.outcome.worst_residual) << ", samples " << c.outcome.samples;
  }
  if (c.wall_time) os << ", " << format_real(*c.wall_time) << " s";
  return os.str();
}

std::string to_text(const ReportDocument& doc) {
  std::ostringstream os;
  os << doc.scenario << " (seed " << doc.seed << "): " << (doc.pass() ? "PASS" : "FAIL") << "\n";
  os << "  " << doc.description << "\n";
  for (const auto& c : doc.checks) os << text_line(c) << "\n";
  return os.str();
}

ReportDocument from_json(const json& j) {
  ReportDocument doc;
  doc.schema_version = j.at("schema_version").get<std::string>();
  if (doc.schema_version != kSchemaVersion) {
    throw Error(ErrorCode::ConfigError, "unsupported report schema '" + doc.schema_version + "'");
  }
  doc.scenario = j.at("scenario").get<std::string>();
  doc.description = j.at("description").get<std::string>();
  doc.anchor = j.at("anchor").get<std::string>();
  doc.seed = std::stoull(j.at("seed").get<std::string>());
  for (const auto& [k, v] : j.at("config").items()) doc.tolerances.emplace_back(k, v.get<std::string>());
  for (const auto& c : j.at("checks")) {
    CheckEntry e;
    e.name = c.at("name").get<std::string>();
    e.expected = c.at("expected").get<std::string>();
    e.outcome.verdict = c.at("verdict").get<std::string>();
    e.outcome.worst_residual = std::stod(c.at("worst_residual").get<std::string>());
    e.outcome.samples = std::stoull(c.at("samples").get<std::string>());
    if (!c.at("witness").is_null()) {
      Witness w;
      w.description = c["witness"].at("description").get<std::string>();
      for (const auto& x : c["witness"].at("coords")) w.coords.push_back(std::stod(x.get<std::string>()));
      e.outcome.witness = w;
    }
    if (!c.at("wall_time").is_null()) e.wall_time = std::stod(c["wall_time"].get<std::string>());
    for (const auto& [k, v] : c.at("details").items()) e.outcome.details.emplace_back(k, v.get<std::string>());
    if (!c.at("error").is_null()) e.error = c["error"].get<std::string>();
    doc.checks.push_back(std::move(e));
  }
  return doc;
}

}  // namespace

std::string emit_report(const ReportDocument& doc, ReportFormat format) {
  if (format == ReportFormat::Text) return to_text(doc);
  return to_json(doc).dump(2) + "\n";
}

std::string emit_reports(const std::vector<ReportDocument>& docs, ReportFormat format) {
  if (docs.size() == 1) return emit_report(docs.front(), format);
  if (format == ReportFormat::Text) {
    std::string out;
    for (const auto& d : docs) out += to_text(d);
    return out;
  }
  json arr = json::array();
  for (const auto& d : docs) arr.push_back(to_json(d));
  return arr.dump(2) + "\n";
}

ReportDocument parse_report(const std::string& text) {
  try {
    return from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed report: ") + e.what());
  }
}

// ---------------------------------------------------------------- replay

ReplayResult replay_report(const std::string& text) {
  ReplayResult out;
  out.recorded = parse_report(text);
  Config cfg;
  for (const auto& [k, v] : out.recorded.tolerances) cfg.set(k, v);
  out.rerun = run_scenario(out.recorded.scenario, out.recorded.seed, cfg);
  const auto& rec = out.recorded.checks;
  const auto& now = out.rerun.checks;
  if (rec.size() != now.size()) {
    out.mismatches.push_back("check count " + std::to_string(rec.size()) + " vs " + std::to_string(now.size()));
    return out;
  }
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const auto& a = rec[i];
    const auto& b = now[i];
    const std::string tag = a.name + ": ";
    if (a.name != b.name) out.mismatches.push_back(tag + "renamed to " + b.name);
    if (a.outcome.verdict != b.outcome.verdict) {
      out.mismatches.push_back(tag + "verdict " + a.outcome.verdict + " vs " + b.outcome.verdict);
    }
    if (format_real(a.outcome.worst_residual) != format_real(b.outcome.worst_residual)) {
      out.mismatches.push_back(tag + "worst residual " + format_real(a.outcome.worst_residual) + " vs " +
                               format_real(b.outcome.worst_residual));
    }
    if (a.outcome.witness.has_value() != b.outcome.witness.has_value()) {
      out.mismatches.push_back(tag + "witness presence differs");
    } else if (a.outcome.witness) {
      const auto& wa = a.outcome.witness->coords;
      const auto& wb = b.outcome.witness->coords;
      bool same = wa.size() == wb.size();
      for (std::size_t k = 0; same && k < wa.size(); ++k) same = format_real(wa[k]) == format_real(wb[k]);
      if (!same) out.mismatches.push_back(tag + "witness coordinates differ");
    }
  }
  return out;
}

// ---------------------------------------------------------------- dump

void dump_primary_trajectory(const std::string& name, std::uint64_t seed, const Config& config, std::ostream& os) {
  const ScenarioPlan plan = find_scenario(name).plan(config, seed);
  if (!plan.primary) throw Error(ErrorCode::UnknownScenario, name + " has no primary connection");
  const Connection c = plan.primary();
  const ProbeSample sample = random_arrow_paths(c)(seed, 0);
  std::vector<double> times;
  for (int k = 0; k <= 100; ++k) times.push_back(k / 100.0);
  const TransportOutcome o = parallel_transport(c, sample.path, sample.start, 1.0, config.tol, times);
  dump_trajectory(os, o.trajectory);
}

}  // namespace mec
