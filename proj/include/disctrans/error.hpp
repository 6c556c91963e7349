#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace disctrans {

enum class Errc {
  NotSquare,
  NegativeRate,
  NonzeroDiagonal,
  NotIrreducible,
  DetailedBalanceViolated,
  StationaryMismatch,
  UnknownState,
  SubsetEmpty,
  SubsetNotConnected,
  NegativeInput,
  BoundaryPoint,
  InvalidMeasure,
  InvalidCurve,
  NotAntisymmetric,
  InvalidConfig,
  InfeasibleEndpoints,
  SupportLeak,
  NotARetraction,
  UncertifiedInput,
  MapNotIntoSubset,
  NotSimpleWalk,
  NoRetraction,
  EmptyRectangle,
  NotATree,
  NotASubtree,
  InvalidCut,
  SubsetOrderViolated,
  UnknownAnchor,
  NotADeadEnd,
  HypothesisViolated,
  AssumptionViolated,
  ParseError,
};

std::string_view errc_name(Errc code);

/// Structured failure carrying a machine-readable code and detail payload.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, nlohmann::json detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  Errc code() const noexcept { return code_; }
  const nlohmann::json& detail() const noexcept { return detail_; }

  nlohmann::json to_json() const {
    nlohmann::json j{{"error", std::string(errc_name(code_))}, {"message", what()}};
    if (!detail_.is_null()) j["detail"] = detail_;
    return j;
  }

 private:
  Errc code_;
  nlohmann::json detail_;
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::NotSquare: return "NotSquare";
    case Errc::NegativeRate: return "NegativeRate";
    case Errc::NonzeroDiagonal: return "NonzeroDiagonal";
    case Errc::NotIrreducible: return "NotIrreducible";
    case Errc::DetailedBalanceViolated: return "DetailedBalanceViolated";
    case Errc::StationaryMismatch: return "StationaryMismatch";
    case Errc::UnknownState: return "UnknownState";
    case Errc::SubsetEmpty: return "SubsetEmpty";
    case Errc::SubsetNotConnected: return "SubsetNotConnected";
    case Errc::NegativeInput: return "NegativeInput";
    case Errc::BoundaryPoint: return "BoundaryPoint";
    case Errc::InvalidMeasure: return "InvalidMeasure";
    case Errc::InvalidCurve: return "InvalidCurve";
    case Errc::NotAntisymmetric: return "NotAntisymmetric";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InfeasibleEndpoints: return "InfeasibleEndpoints";
    case Errc::SupportLeak: return "SupportLeak";
    case Errc::NotARetraction: return "NotARetraction";
    case Errc::UncertifiedInput: return "UncertifiedInput";
    case Errc::MapNotIntoSubset: return "MapNotIntoSubset";
    case Errc::NotSimpleWalk: return "NotSimpleWalk";
    case Errc::NoRetraction: return "NoRetraction";
    case Errc::EmptyRectangle: return "EmptyRectangle";
    case Errc::NotATree: return "NotATree";
    case Errc::NotASubtree: return "NotASubtree";
    case Errc::InvalidCut: return "InvalidCut";
    case Errc::SubsetOrderViolated: return "SubsetOrderViolated";
    case Errc::UnknownAnchor: return "UnknownAnchor";
    case Errc::NotADeadEnd: return "NotADeadEnd";
    case Errc::HypothesisViolated: return "HypothesisViolated";
    case Errc::AssumptionViolated: return "AssumptionViolated";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace disctrans
