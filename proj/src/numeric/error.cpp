#include "mec/error.hpp"

namespace mec {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EvaluationOutsideDomain: return "EvaluationOutsideDomain";
    case ErrorCode::InvalidHorizon: return "InvalidHorizon";
    case ErrorCode::DegenerateBasis: return "DegenerateBasis";
    case ErrorCode::SamplerFailure: return "SamplerFailure";
    case ErrorCode::UnknownName: return "UnknownName";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NotComposable: return "NotComposable";
    case ErrorCode::FrameRankMismatch: return "FrameRankMismatch";
    case ErrorCode::NotASplitting: return "NotASplitting";
    case ErrorCode::RankDeficientLift: return "RankDeficientLift";
    case ErrorCode::KernelNotExposed: return "KernelNotExposed";
    case ErrorCode::IncompatibleMorphisms: return "IncompatibleMorphisms";
    case ErrorCode::NotAnActionMorphism: return "NotAnActionMorphism";
    case ErrorCode::NotAFamily: return "NotAFamily";
    case ErrorCode::StartFiberMismatch: return "StartFiberMismatch";
    case ErrorCode::NotALoop: return "NotALoop";
    case ErrorCode::PairSamplerFailure: return "PairSamplerFailure";
    case ErrorCode::NotAFibration: return "NotAFibration";
    case ErrorCode::NotASubmersion: return "NotASubmersion";
    case ErrorCode::PartitionGap: return "PartitionGap";
    case ErrorCode::NonProjectableInput: return "NonProjectableInput";
    case ErrorCode::QuadratureMissing: return "QuadratureMissing";
    case ErrorCode::NotSourceProper: return "NotSourceProper";
    case ErrorCode::SupremumUnbounded: return "SupremumUnbounded";
    case ErrorCode::CertificateFailure: return "CertificateFailure";
    case ErrorCode::AtlasMismatch: return "AtlasMismatch";
    case ErrorCode::UnknownScenario: return "UnknownScenario";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace mec
