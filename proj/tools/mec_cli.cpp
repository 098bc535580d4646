#include <cstdint>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mec/error.hpp"
#include "mec/scenario.hpp"

namespace {

struct Options {
  std::uint64_t seed = 0;
  std::string config_path;
  std::string format = "text";
  double budget_scale = 1.0;
  std::string out_path;
  bool timing = false;
  int jobs = 4;
};

mec::Config load(const Options& o) {
  mec::Config cfg = o.config_path.empty() ? mec::Config{} : mec::load_config(o.config_path);
  return o.budget_scale == 1.0 ? cfg : cfg.scaled(o.budget_scale);
}

mec::ReportFormat format_of(const Options& o) {
  return o.format == "json" ? mec::ReportFormat::Json : mec::ReportFormat::Text;
}

void write(const Options& o, const std::string& text) {
  if (o.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out_path, std::ios::binary);
  if (!f) throw mec::Error(mec::ErrorCode::ConfigError, "cannot write " + o.out_path);
  f << text;
}

int run_many(const Options& o, const std::vector<std::string>& names) {
  const mec::Config cfg = load(o);
  const mec::RunOptions ro{o.timing};
  std::vector<mec::ReportDocument> docs(names.size());
  // Scenarios are independent; reports are collected in registry order.
  const std::size_t jobs = static_cast<std::size_t>(std::max(1, o.jobs));
  for (std::size_t start = 0; start < names.size(); start += jobs) {
    std::vector<std::future<mec::ReportDocument>> batch;
    for (std::size_t i = start; i < std::min(names.size(), start + jobs); ++i) {
      batch.push_back(std::async(std::launch::async, [&, i] { return mec::run_scenario(names[i], o.seed, cfg, ro); }));
    }
    for (std::size_t k = 0; k < batch.size(); ++k) docs[start + k] = batch[k].get();
  }
  write(o, mec::emit_reports(docs, format_of(o)));
  bool ok = true;
  for (const auto& d : docs) ok = ok && d.pass();
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiplicative Ehresmann connection scenarios"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--seed", o.seed, "Sampling seed")->capture_default_str();
  app.add_option("--config", o.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
  app.add_option("--budget-scale", o.budget_scale, "Multiplier for all sample budgets")->capture_default_str();
  app.add_option("--out", o.out_path, "Write output to this file instead of stdout");
  app.add_flag("--timing", o.timing, "Record wall time per check (breaks byte-identical output)");

  auto* list = app.add_subcommand("list", "List registered scenarios");
  std::string name;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("name", name, "Scenario name")->required();
  auto* all = app.add_subcommand("all", "Run every scenario");
  all->add_option("--jobs", o.jobs, "Scenarios run concurrently")->capture_default_str();
  std::string report_path;
  auto* replay = app.add_subcommand("replay", "Re-run a JSON report and compare verdicts and witnesses");
  replay->add_option("report", report_path, "JSON report")->required()->check(CLI::ExistingFile);
  auto* dump = app.add_subcommand("dump", "Transport along the first sampled path of a scenario's connection");
  dump->add_option("name", name, "Scenario name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      std::ostringstream os;
      for (const auto& s : mec::scenario_registry()) os << s.name << "\t" << s.description << "\t" << s.anchor << "\n";
      write(o, os.str());
      return 0;
    }
    if (*run) return run_many(o, {name});
    if (*all) {
      std::vector<std::string> names;
      for (const auto& s : mec::scenario_registry()) names.push_back(s.name);
      return run_many(o, names);
    }
    if (*replay) {
      std::ifstream f(report_path, std::ios::binary);
      const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
      const mec::ReplayResult r = mec::replay_report(text);
      std::ostringstream os;
      os << r.recorded.scenario << " (seed " << r.recorded.seed << "): "
         << (r.reproduced() ? "reproduced" : "NOT reproduced") << "\n";
      for (const auto& m : r.mismatches) os << "  " << m << "\n";
      write(o, os.str());
      return r.reproduced() ? 0 : 1;
    }
    if (*dump) {
      std::ostringstream os;
      mec::dump_primary_trajectory(name, o.seed, load(o), os);
      write(o, os.str());
      return 0;
    }
  } catch (const mec::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}
