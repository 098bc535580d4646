#pragma once

#include <stdexcept>
#include <string>

namespace mec {

enum class ErrorCode {
  EvaluationOutsideDomain,
  InvalidHorizon,
  DegenerateBasis,
  SamplerFailure,
  UnknownName,
  InvalidParams,
  NotComposable,
  FrameRankMismatch,
  NotASplitting,
  RankDeficientLift,
  KernelNotExposed,
  IncompatibleMorphisms,
  NotAnActionMorphism,
  NotAFamily,
  StartFiberMismatch,
  NotALoop,
  PairSamplerFailure,
  NotAFibration,
  NotASubmersion,
  PartitionGap,
  NonProjectableInput,
  QuadratureMissing,
  NotSourceProper,
  SupremumUnbounded,
  CertificateFailure,
  AtlasMismatch,
  UnknownScenario,
  ConfigError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mec
