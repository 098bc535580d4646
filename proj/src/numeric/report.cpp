#include "mec/report.hpp"

#include <cmath>

namespace mec {

void Report::absorb(double residual, const Witness& w) {
  if (std::isnan(residual)) residual = kInf;
  if (witness && residual <= worst_residual) return;
  worst_residual = residual;
  witness = w;
}

const char* to_string(MultVerdict verdict) {
  switch (verdict) {
    case MultVerdict::Multiplicative: return "Multiplicative";
    case MultVerdict::NotMultiplicative: return "NotMultiplicative";
    case MultVerdict::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

MultVerdict classify(double worst_residual, double tol_mult) {
  if (worst_residual < tol_mult) return MultVerdict::Multiplicative;
  if (worst_residual > 10.0 * tol_mult) return MultVerdict::NotMultiplicative;
  return MultVerdict::Inconclusive;
}

}  // namespace mec
