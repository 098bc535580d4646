#include "mec/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mec/error.hpp"

namespace mec {

namespace {

struct Field {
  std::function<std::string(const Config&)> get;
  std::function<void(Config&, const std::string&)> set;
};

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "cannot parse '" + value + "' for " + key);
  }
  if (used != value.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::ConfigError, "cannot parse '" + value + "' for " + key);
  }
  return v;
}

long long parse_integer(const std::string& key, const std::string& value) {
  double v = parse_double(key, value);
  if (v < 0 || std::floor(v) != v) {
    throw Error(ErrorCode::ConfigError, key + " expects a nonnegative integer");
  }
  return static_cast<long long>(v);
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    auto real = [&t](std::string key, double Tolerances::*m) {
      t.emplace_back(key, Field{[m](const Config& c) { return format_real(c.tol.*m); },
                                [m, key](Config& c, const std::string& v) { c.tol.*m = parse_double(key, v); }});
    };
    auto integer = [&t](std::string key, int Tolerances::*m) {
      t.emplace_back(key, Field{[m](const Config& c) { return std::to_string(c.tol.*m); },
                                [m, key](Config& c, const std::string& v) {
                                  c.tol.*m = static_cast<int>(parse_integer(key, v));
                                }});
    };
    auto count = [&t](std::string key, std::size_t Budgets::*m) {
      t.emplace_back(key, Field{[m](const Config& c) { return std::to_string(c.budget.*m); },
                                [m, key](Config& c, const std::string& v) {
                                  c.budget.*m = static_cast<std::size_t>(parse_integer(key, v));
                                }});
    };
    real("numeric.tol_fd", &Tolerances::tol_fd);
    real("numeric.fd_step", &Tolerances::fd_step);
    real("numeric.ode_tol", &Tolerances::ode_tol);
    real("numeric.h_ode", &Tolerances::h_ode);
    real("numeric.blowup_bound", &Tolerances::blowup_bound);
    real("numeric.delta_excl", &Tolerances::delta_excl);
    real("numeric.rank_tol", &Tolerances::rank_tol);
    real("numeric.tol_time", &Tolerances::tol_time);
    integer("numeric.max_halvings", &Tolerances::max_halvings);
    real("groupoid.tol_alg", &Tolerances::tol_alg);
    real("groupoid.tol_compose", &Tolerances::tol_compose);
    real("groupoid.cover_tol", &Tolerances::cover_tol);
    real("groupoid.sv_tol", &Tolerances::sv_tol);
    real("connections.tol_mult", &Tolerances::tol_mult);
    real("connections.angle_tol", &Tolerances::angle_tol);
    real("transport.drift_tol", &Tolerances::drift_tol);
    real("transport.hol_tol", &Tolerances::hol_tol);
    integer("constructions.quad_nodes", &Tolerances::quad_nodes);
    integer("constructions.quad_refine", &Tolerances::quad_refine);
    real("constructions.quad_tol", &Tolerances::quad_tol);
    real("constructions.partition_tol", &Tolerances::partition_tol);
    real("constructions.flat_tol", &Tolerances::flat_tol);
    real("constructions.atlas_margin", &Tolerances::atlas_margin);
    count("budget.axiom_samples", &Budgets::axiom_samples);
    count("budget.pointwise_samples", &Budgets::pointwise_samples);
    count("budget.path_pairs", &Budgets::path_pairs);
    count("budget.probe_paths", &Budgets::probe_paths);
    count("budget.fiber_samples", &Budgets::fiber_samples);
    count("budget.jacobian_samples", &Budgets::jacobian_samples);
    return t;
  }();
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> Config::snapshot() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, field] : fields()) out.emplace_back(key, field.get(*this));
  return out;
}

void Config::set(const std::string& key, const std::string& value) {
  for (const auto& [k, field] : fields()) {
    if (k == key) {
      field.set(*this, value);
      return;
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown key '" + key + "'");
}

Config Config::scaled(double budget_scale) const {
  if (!(budget_scale > 0.0)) throw Error(ErrorCode::ConfigError, "budget scale must be positive");
  Config c = *this;
  auto scale = [budget_scale](std::size_t n) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(n) * budget_scale)));
  };
  c.budget.axiom_samples = scale(budget.axiom_samples);
  c.budget.pointwise_samples = scale(budget.pointwise_samples);
  c.budget.path_pairs = scale(budget.path_pairs);
  c.budget.probe_paths = scale(budget.probe_paths);
  c.budget.fiber_samples = scale(budget.fiber_samples);
  c.budget.jacobian_samples = scale(budget.jacobian_samples);
  return c;
}

Config parse_config(const std::string& text) {
  Config config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": expected key = value");
    }
    config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", value);
  return buf;
}

}  // namespace mec
