#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace mec {

struct Witness {
  std::string description;
  std::vector<double> coords;
};

// Outcome of a sampled check: worst residual, the witness attaining it and
// the sample count.
struct Report {
  std::string check;
  bool pass = true;
  double worst_residual = 0.0;
  std::optional<Witness> witness;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::string note;

  // Keeps the largest residual; ties keep the earlier witness.
  void absorb(double residual, const Witness& w);
  void finalize(double threshold) { pass = worst_residual < threshold; }
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Three-band classification used by the multiplicativity checks.
enum class MultVerdict { Multiplicative, NotMultiplicative, Inconclusive };

const char* to_string(MultVerdict verdict);
MultVerdict classify(double worst_residual, double tol_mult);

}  // namespace mec
