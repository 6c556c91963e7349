#include "disctrans/io.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace disctrans {

namespace {

Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json matrix_to_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vector_to_json(m.row(i).transpose()));
  return a;
}

Vector vector_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw Error(Errc::ParseError, std::string(what) + " must be an array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(Errc::ParseError, std::string(what) + " entries must be numbers");
    v(i) = j[i].get<double>();
  }
  return v;
}

Matrix matrix_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw Error(Errc::ParseError, std::string(what) + " must be an array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = rows ? j[0].size() : 0;
  for (const Json& r : j)
    if (!r.is_array() || r.size() != cols) throw Error(Errc::NotSquare, std::string(what) + " rows differ in length");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) m.row(i) = vector_from_json(j[i], what).transpose();
  return m;
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(Errc::ParseError, std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ParseError, "cannot open " + path.string(), {{"path", path.string()}});
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(Errc::ParseError, e.what(), {{"path", path.string()}});
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::InvalidConfig, "cannot write " + path.string(), {{"path", path.string()}});
  out << text;
}

Json triple_to_json(const MarkovTriple& triple) {
  return {{"states", triple.states()},
          {"rates", matrix_to_json(triple.rates())},
          {"pi", vector_to_json(triple.stationary())}};
}

MarkovTriple triple_from_json(const Json& j) {
  const Json& s = field(j, "states");
  if (!s.is_array()) throw Error(Errc::ParseError, "states must be an array");
  std::vector<std::string> states;
  for (const Json& x : s) {
    if (!x.is_string()) throw Error(Errc::ParseError, "state names must be strings");
    states.push_back(x.get<std::string>());
  }
  Matrix rates = matrix_from_json(field(j, "rates"), "rates");
  std::optional<Vector> pi;
  if (j.contains("pi") && !j.at("pi").is_null()) pi = vector_from_json(j.at("pi"), "pi");
  return MarkovTriple::validate(std::move(states), std::move(rates), std::move(pi));
}

MarkovTriple read_triple(const std::filesystem::path& path) { return triple_from_json(read_json_file(path)); }

Json measure_to_json(const MarkovTriple& triple, const Vector& mu) {
  Json j = Json::object();
  for (int x = 0; x < triple.size(); ++x)
    if (mu(x) != 0.0) j[triple.states()[x]] = mu(x);
  return j;
}

Vector measure_from_json(const MarkovTriple& triple, const Json& j) {
  if (!j.is_object()) throw Error(Errc::ParseError, "measure must be an object state -> mass");
  Vector mu = Vector::Zero(triple.size());
  for (const auto& [name, mass] : j.items()) {
    if (!mass.is_number()) throw Error(Errc::ParseError, "mass of '" + name + "' is not a number");
    mu(triple.index_of(name)) = mass.get<double>();
  }
  check_probability(triple, mu);
  return mu;
}

Json curve_to_json(const MarkovTriple& triple, const Mean& mean, const DiscreteCurve& curve) {
  Json measures = Json::array();
  for (const Vector& m : curve.measures) measures.push_back(vector_to_json(m));
  Json momenta = Json::array();
  for (const EdgeField& v : curve.momenta) momenta.push_back(matrix_to_json(v.values()));
  return {{"graph", triple_to_json(triple)},
          {"mean", mean.name()},
          {"grid", curve.grid},
          {"measures", measures},
          {"momenta", momenta}};
}

StoredCurve curve_from_json(const Json& j) {
  StoredCurve s;
  s.triple = triple_from_json(field(j, "graph"));
  s.mean = j.value("mean", std::string("log"));
  const Json& grid = field(j, "grid");
  if (!grid.is_array()) throw Error(Errc::ParseError, "grid must be an array");
  for (const Json& t : grid) s.curve.grid.push_back(t.get<double>());
  for (const Json& m : field(j, "measures")) s.curve.measures.push_back(vector_from_json(m, "measures"));
  for (const Json& v : field(j, "momenta")) s.curve.momenta.emplace_back(matrix_from_json(v, "momenta"));
  check_curve(s.triple, s.curve);
  return s;
}

Json potential_to_json(const HJPotential& phi) {
  Json values = Json::array();
  for (const Vector& v : phi.values) values.push_back(vector_to_json(v));
  return {{"grid", phi.grid}, {"values", values}};
}

HJPotential potential_from_json(const Json& j) {
  HJPotential phi;
  for (const Json& t : field(j, "grid")) phi.grid.push_back(t.get<double>());
  for (const Json& v : field(j, "values")) phi.values.push_back(vector_from_json(v, "values"));
  if (phi.grid.size() < 2 || phi.grid.size() != phi.values.size())
    throw Error(Errc::ParseError, "potential needs matching grid and values with at least two nodes");
  for (const Vector& v : phi.values)
    if (v.size() != phi.values.front().size()) throw Error(Errc::ParseError, "potential values differ in length");
  return phi;
}

Json certificate_to_json(const HJCertificate& cert) {
  return {{"max_violation", cert.max_violation},
          {"upper_bound", cert.upper_bound},
          {"subsolution", cert.subsolution},
          {"interval_values", cert.interval_values},
          {"interval_upper", cert.interval_upper}};
}

Json retraction_to_json(const MarkovTriple& triple, const Retraction& r) {
  Json map = Json::object();
  for (int x = 0; x < triple.size(); ++x) map[triple.states()[x]] = triple.states()[r.map[x]];
  Json violations = Json::array();
  for (const RetractionViolation& v : r.violations)
    violations.push_back({{"x", triple.states()[v.x]},
                          {"y", triple.states()[v.y]},
                          {"y_prime", triple.states()[v.y_prime]},
                          {"lhs", v.lhs},
                          {"rhs", v.rhs}});
  Json fixed = Json::array();
  for (int x : r.fixed_point_failures) fixed.push_back(triple.states()[x]);
  return {{"map", map}, {"verified", r.verified}, {"violations", violations}, {"fixed_point_failures", fixed}};
}

void write_curve_csv(std::ostream& out, const MarkovTriple& triple, const DiscreteCurve& curve) {
  out << "time,state,mass\n";
  out << std::setprecision(17);
  for (std::size_t k = 0; k < curve.measures.size(); ++k)
    for (int x = 0; x < triple.size(); ++x)
      out << curve.grid[k] << ',' << triple.states()[x] << ',' << curve.measures[k](x) << '\n';
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string graph_hash(const MarkovTriple& triple) {
  Json j{{"states", triple.states()}, {"rates", matrix_to_json(triple.rates())}};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

}  // namespace disctrans
