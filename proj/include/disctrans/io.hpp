#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "disctrans/action.hpp"
#include "disctrans/dual.hpp"
#include "disctrans/geodesic.hpp"
#include "disctrans/retraction.hpp"

namespace disctrans {

using Json = nlohmann::json;

/// Reads and parses a JSON file. Throws Errc::ParseError.
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// { "states": [...], "rates": [[...]], "pi": [...] }.
Json triple_to_json(const MarkovTriple& triple);
/// Validates on the way in; structural problems keep their own error codes.
MarkovTriple triple_from_json(const Json& j);
MarkovTriple read_triple(const std::filesystem::path& path);

/// Map state -> mass; omitted states carry zero mass.
Json measure_to_json(const MarkovTriple& triple, const Vector& mu);
/// Throws Errc::UnknownState, Errc::InvalidMeasure.
Vector measure_from_json(const MarkovTriple& triple, const Json& j);

/// Curve with its graph and mean embedded so it can be re-checked alone.
Json curve_to_json(const MarkovTriple& triple, const Mean& mean, const DiscreteCurve& curve);
struct StoredCurve {
  MarkovTriple triple;
  std::string mean;
  DiscreteCurve curve;
};
StoredCurve curve_from_json(const Json& j);

Json potential_to_json(const HJPotential& phi);
HJPotential potential_from_json(const Json& j);

Json certificate_to_json(const HJCertificate& cert);
Json retraction_to_json(const MarkovTriple& triple, const Retraction& r);

/// One row per (time, state, mass).
void write_curve_csv(std::ostream& out, const MarkovTriple& triple, const DiscreteCurve& curve);

/// FNV-1a over the compact JSON dump.
std::uint64_t fnv1a(const std::string& bytes);
std::string graph_hash(const MarkovTriple& triple);

}  // namespace disctrans
