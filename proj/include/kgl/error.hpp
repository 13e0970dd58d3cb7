#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kgl {

enum class ErrorCode {
  NotHermitian,
  NonFinite,
  NegativeForSqrt,
  ShapeMismatch,
  UnknownPoint,
  DimMismatch,
  BundleMismatch,
  SupportOutsidePart,
  CrossPartSupport,
  MalformedTable,
  InvalidSemigroupoid,
  BadFamilyParams,
  OrbitBundleNotTrivial,
  NotPSD,
  NotPartiallyPSD,
  NotInvariant,
  QuotientIncompatible,
  RankMismatch,
  PairingViolated,
  KernelNotDominated,
  UnsupportedFamily,
  ParseError,
  CrossRefError,
  AxiomError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NegativeForSqrt: return "NegativeForSqrt";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::UnknownPoint: return "UnknownPoint";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::BundleMismatch: return "BundleMismatch";
    case ErrorCode::SupportOutsidePart: return "SupportOutsidePart";
    case ErrorCode::CrossPartSupport: return "CrossPartSupport";
    case ErrorCode::MalformedTable: return "MalformedTable";
    case ErrorCode::InvalidSemigroupoid: return "InvalidSemigroupoid";
    case ErrorCode::BadFamilyParams: return "BadFamilyParams";
    case ErrorCode::OrbitBundleNotTrivial: return "OrbitBundleNotTrivial";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::NotPartiallyPSD: return "NotPartiallyPSD";
    case ErrorCode::NotInvariant: return "NotInvariant";
    case ErrorCode::QuotientIncompatible: return "QuotientIncompatible";
    case ErrorCode::RankMismatch: return "RankMismatch";
    case ErrorCode::PairingViolated: return "PairingViolated";
    case ErrorCode::KernelNotDominated: return "KernelNotDominated";
    case ErrorCode::UnsupportedFamily: return "UnsupportedFamily";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::CrossRefError: return "CrossRefError";
    case ErrorCode::AxiomError: return "AxiomError";
  }
  return "Unknown";
}

/// Every failure in the library surfaces as this exception; `code()` is the
/// machine-readable category, `what()` carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kgl
