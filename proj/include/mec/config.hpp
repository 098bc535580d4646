#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace mec {

// Named numerical thresholds. Every value can be overridden from a
// `module.key = value` configuration file.
struct Tolerances {
  // numeric
  double tol_fd = 1e-5;
  double fd_step = 1e-6;
  double ode_tol = 1e-8;
  double h_ode = 1e-3;
  double blowup_bound = 1e6;
  double delta_excl = 1e-3;
  double rank_tol = 1e-9;
  double tol_time = 1e-9;
  int max_halvings = 24;

  // groupoid
  double tol_alg = 1e-9;
  double tol_compose = 1e-7;
  double cover_tol = 1e-2;
  double sv_tol = 1e-6;

  // connections
  double tol_mult = 1e-6;
  double angle_tol = 1e-6;

  // transport
  double drift_tol = 1e-6;
  double hol_tol = 1e-6;

  // constructions
  int quad_nodes = 256;
  int quad_refine = 4;
  double quad_tol = 1e-10;
  double partition_tol = 1e-10;
  double flat_tol = 1e-8;
  double atlas_margin = 0.1;
};

struct Budgets {
  std::size_t axiom_samples = 200;
  std::size_t pointwise_samples = 100;
  std::size_t path_pairs = 25;
  std::size_t probe_paths = 500;
  std::size_t fiber_samples = 16;
  std::size_t jacobian_samples = 100;
};

struct Config {
  Tolerances tol;
  Budgets budget;

  // Flat key/value view in a stable order, used for report snapshots.
  std::vector<std::pair<std::string, std::string>> snapshot() const;

  // Applies one `key = value` assignment; throws Error(ConfigError) on
  // unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);

  Config scaled(double budget_scale) const;
};

Config load_config(const std::filesystem::path& path);
Config parse_config(const std::string& text);

// Scientific notation with 17 significant digits, as used in reports.
std::string format_real(double value);

}  // namespace mec
