// disctrans: command-line front end.
//
// Exit codes: 0 pass, 1 fail, 2 input error. Results and errors are JSON on stdout.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "disctrans/constructions.hpp"
#include "disctrans/dual.hpp"
#include "disctrans/experiments.hpp"
#include "disctrans/geodesic.hpp"
#include "disctrans/io.hpp"
#include "disctrans/retraction.hpp"

using namespace disctrans;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  int steps = 128;
  std::string mean = "log";
  double tol = 1e-6;
};

SolveConfig solve_config(const Globals& g) {
  SolveConfig c;
  c.seed = g.seed;
  c.time_steps = g.steps;
  c.objective_tol = g.tol;
  c.validate();
  return c;
}

void print(const Json& j) { std::cout << j.dump(2) << "\n"; }

void write_json(const std::string& path, const Json& j) {
  if (!path.empty()) write_text_file(path, j.dump(2) + "\n");
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

SubsetMask parse_subset(const MarkovTriple& t, const std::string& list) {
  const std::vector<std::string> names = split(list);
  if (names.empty()) throw Error(Errc::SubsetEmpty, "subset is empty");
  return SubsetMask::from_names(t, names);
}

// Lattice coordinates from grid state names "v<c0>_<c1>...".
std::vector<std::vector<int>> grid_coords(const MarkovTriple& t) {
  std::vector<std::vector<int>> coords;
  for (const std::string& s : t.states()) {
    if (s.size() < 2 || s[0] != 'v') throw Error(Errc::InvalidConfig, "grid construction needs states named v<i>_<j>");
    std::vector<int> c;
    std::stringstream ss(s.substr(1));
    std::string part;
    while (std::getline(ss, part, '_')) {
      try {
        c.push_back(std::stoi(part));
      } catch (const std::exception&) {
        throw Error(Errc::InvalidConfig, "bad grid state name '" + s + "'");
      }
    }
    coords.push_back(c);
  }
  return coords;
}

Retraction construct(const MarkovTriple& t, const SubsetMask& y, const std::string& kind, const std::string& side) {
  if (kind == "cycle") {
    const std::vector<int> idx = y.indices();
    for (std::size_t a = 0; a < idx.size(); ++a)
      if (idx[a] != static_cast<int>(a))
        throw Error(Errc::InvalidConfig, "cycle construction needs the subset {1..k}");
    return cycle_retraction(t, y.count());
  }
  if (kind == "grid") {
    const auto coords = grid_coords(t);
    std::vector<int> lo = coords[y.indices().front()];
    std::vector<int> hi = lo;
    for (int x : y.indices())
      for (std::size_t d = 0; d < lo.size(); ++d) {
        lo[d] = std::min(lo[d], coords[x][d]);
        hi[d] = std::max(hi[d], coords[x][d]);
      }
    return grid_retraction(t, coords, lo, hi);
  }
  if (kind == "tree") return tree_retraction(t, y);
  if (kind == "cut") {
    const std::vector<int> idx = y.indices();
    if (idx.size() != 2) throw Error(Errc::InvalidCut, "cut construction needs a two-state subset");
    return cut_retraction(t, idx[0], idx[1], parse_subset(t, side));
  }
  throw Error(Errc::InvalidConfig, "unknown construction '" + kind + "'");
}

Json geodesic_summary(const GeodesicResult& r) {
  Json stages = Json::array();
  for (const SmoothingStage& s : r.trace)
    stages.push_back({{"delta", s.delta}, {"objective", s.objective}, {"gap", s.gap}, {"iterations", s.iterations},
                      {"converged", s.converged}});
  Json j{{"distance", r.distance},
         {"action", r.action},
         {"smoothed_objective", r.smoothed_objective},
         {"residual", r.residual},
         {"converged", r.converged},
         {"trace", stages}};
  if (r.dual_gap) j["dual_gap"] = *r.dual_gap;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete dynamical optimal transport on finite Markov chains"};
  app.set_config("--config", "", "Read options from a TOML/INI file");
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--steps", g.steps, "Time steps of the discretization")->capture_default_str();
  app.add_option("--mean", g.mean, "log | harmonic | geometric | arithmetic")->capture_default_str();
  app.add_option("--tol", g.tol, "Objective tolerance")->capture_default_str();

  int code = 0;
  std::string file, out, from, to, curve_path, potential_path, subset, construct_kind, side, family, x1, x2, file2;
  std::string dims;
  int n = 0, radius = 1, percent = 30;
  std::uint64_t budget = 10'000'000;
  bool search = false, certify = false, parallel = false;
  std::string preset = "cycle9", out_dir;

  auto* validate = app.add_subcommand("validate", "Validate a graph file");
  validate->add_option("file", file)->required();
  validate->callback([&] {
    const MarkovTriple t = read_triple(file);
    print({{"valid", true},
           {"states", t.size()},
           {"edges", t.edges().size()},
           {"detailed_balance_residual", t.detailed_balance_residual()},
           {"hash", graph_hash(t)}});
  });

  auto* stationary = app.add_subcommand("stationary", "Print the stationary measure");
  stationary->add_option("file", file)->required();
  stationary->callback([&] {
    const MarkovTriple t = read_triple(file);
    print({{"pi", measure_to_json(t, t.stationary())}});
  });

  auto* generate_cmd = app.add_subcommand("generate", "Generate an example graph");
  generate_cmd->add_option("--family", family, "cycle | path | complete | grid | honeycomb | tree | random")
      ->required();
  generate_cmd->add_option("--n", n, "Number of states");
  generate_cmd->add_option("--dims", dims, "Grid sides, comma separated");
  generate_cmd->add_option("--radius", radius, "Honeycomb radius")->capture_default_str();
  generate_cmd->add_option("--percent", percent, "Edge probability in percent (random)")->capture_default_str();
  generate_cmd->add_option("--out", out, "Output graph file");
  generate_cmd->callback([&] {
    GraphFamily f{family, {}, g.seed};
    if (family == "grid") {
      for (const std::string& d : split(dims)) f.params.push_back(std::stoi(d));
    } else if (family == "honeycomb") {
      f.params = {radius};
    } else if (family == "random") {
      f.params = {n, percent};
    } else {
      f.params = {n};
    }
    const Json j = triple_to_json(generate(f));
    if (out.empty()) print(j);
    else write_json(out, j);
  });

  auto* glue_cmd = app.add_subcommand("glue", "Glue two graphs at one vertex");
  glue_cmd->add_option("first", file)->required();
  glue_cmd->add_option("x1", x1)->required();
  glue_cmd->add_option("second", file2)->required();
  glue_cmd->add_option("x2", x2)->required();
  glue_cmd->add_option("--out", out, "Output graph file");
  glue_cmd->callback([&] {
    const GluedTriple gt = glue(read_triple(file), x1, read_triple(file2), x2);
    const Json j = triple_to_json(gt.result);
    if (out.empty()) print(j);
    else {
      write_json(out, j);
      print({{"star", gt.result.states()[gt.star]}, {"stationary_discrepancy", gt.stationary_discrepancy}});
    }
  });

  auto* retr = app.add_subcommand("retraction", "Construct, search or verify a retraction");
  retr->add_option("file", file)->required();
  retr->add_option("--subset", subset, "Comma-separated target states")->required();
  retr->add_option("--construct", construct_kind, "cycle | grid | tree | cut");
  retr->add_option("--side", side, "States mapped to the first cut vertex (cut)");
  retr->add_flag("--search", search, "Search for any retraction");
  retr->add_option("--budget", budget, "Search node budget")->capture_default_str();
  retr->callback([&] {
    const MarkovTriple t = read_triple(file);
    const SubsetMask y = parse_subset(t, subset);
    Json j;
    if (!construct_kind.empty()) {
      const Retraction r = construct(t, y, construct_kind, side);
      j = retraction_to_json(t, r);
      j["exists"] = r.verified;
      code = r.verified ? 0 : 1;
    } else {
      const SearchResult s = find_retraction(t, y, budget);
      j = {{"nodes", s.nodes}};
      if (s.status == SearchStatus::Found) {
        j.update(retraction_to_json(t, *s.retraction));
        j["exists"] = true;
      } else if (s.status == SearchStatus::ProvedAbsent) {
        j["exists"] = false;
        code = 1;
      } else {
        j["exists"] = nullptr;
        j["status"] = "budget_exhausted";
        code = 1;
      }
    }
    print(j);
  });

  auto* geo = app.add_subcommand("geodesic", "Solve for a discrete geodesic");
  geo->add_option("file", file)->required();
  geo->add_option("--from", from, "Initial measure file")->required();
  geo->add_option("--to", to, "Final measure file")->required();
  geo->add_option("--out", out, "Curve output file");
  geo->add_flag("--certify", certify, "Also compute a certified dual lower bound");
  geo->callback([&] {
    const MarkovTriple t = read_triple(file);
    const Mean mean = Mean::parse(g.mean);
    const Vector mu0 = measure_from_json(t, read_json_file(from));
    const Vector mu1 = measure_from_json(t, read_json_file(to));
    const SolveConfig cfg = solve_config(g);
    GeodesicResult r = solve_geodesic(t, mean, mu0, mu1, cfg);
    Json extra;
    if (certify) {
      DualConfig dc;
      dc.primal = cfg;
      const DualResult d = solve_dual(t, mean, mu0, mu1, dc);
      r.dual_gap = 0.5 * r.action - d.lower_bound;
      extra = {{"lower_bound", d.lower_bound}, {"max_violation", d.max_violation}};
    }
    Json j = geodesic_summary(r);
    if (!extra.is_null()) j["dual"] = extra;
    write_json(out, curve_to_json(t, mean, r.curve));
    print(j);
    code = r.converged ? 0 : 1;
  });

  auto* dual = app.add_subcommand("dual", "Compute a certified dual lower bound");
  dual->add_option("file", file)->required();
  dual->add_option("--from", from, "Initial measure file")->required();
  dual->add_option("--to", to, "Final measure file")->required();
  dual->add_option("--out", out, "Potential output file");
  dual->callback([&] {
    const MarkovTriple t = read_triple(file);
    const Mean mean = Mean::parse(g.mean);
    DualConfig dc;
    dc.primal = solve_config(g);
    const DualResult d = solve_dual(t, mean, measure_from_json(t, read_json_file(from)),
                                    measure_from_json(t, read_json_file(to)), dc);
    write_json(out, potential_to_json(d.potential));
    print({{"lower_bound", d.lower_bound},
           {"max_violation", d.max_violation},
           {"iterations", d.iterations},
           {"primal_half_action", 0.5 * d.primal_action}});
    code = d.certificate.subsolution ? 0 : 1;
  });

  auto* cert = app.add_subcommand("certify", "Check a potential against a curve");
  cert->add_option("--curve", curve_path, "Curve file")->required();
  cert->add_option("--potential", potential_path, "Potential file")->required();
  cert->callback([&] {
    const StoredCurve c = curve_from_json(read_json_file(curve_path));
    const Mean mean = Mean::parse(c.mean);
    const HJPotential phi = potential_from_json(read_json_file(potential_path));
    if (phi.values.front().size() != c.triple.size())
      throw Error(Errc::ParseError, "potential and curve live on different state sets");
    const HJCertificate hc = is_hj_subsolution(c.triple, mean, phi);
    const double action = curve_action(c.triple, mean, c.curve);
    const double lb = dual_value(phi, c.curve.measures.front(), c.curve.measures.back());
    Json j = certificate_to_json(hc);
    j["dual_value"] = lb;
    j["half_action"] = 0.5 * action;
    j["gap"] = 0.5 * action - lb;
    print(j);
    code = hc.subsolution ? 0 : 1;
  });

  auto* exp = app.add_subcommand("export-curve", "Write a curve as CSV rows (time, state, mass)");
  exp->add_option("curve", curve_path)->required();
  exp->add_option("--out", out, "CSV output file (stdout if omitted)");
  exp->callback([&] {
    const StoredCurve c = curve_from_json(read_json_file(curve_path));
    if (out.empty()) {
      write_curve_csv(std::cout, c.triple, c.curve);
    } else {
      std::ofstream f(out);
      if (!f) throw Error(Errc::InvalidConfig, "cannot write " + out);
      write_curve_csv(f, c.triple, c.curve);
    }
  });

  auto* experiment = app.add_subcommand("experiment", "Run reproducible experiments");
  experiment->require_subcommand(1);
  experiment->add_flag("--parallel", parallel, "Run independent experiments concurrently");
  experiment->add_option("--out-dir", out_dir, "Directory for reports and CSV curves");
  auto run = [&](const std::vector<std::string>& names) {
    ExperimentConfig ec;
    ec.solve = solve_config(g);
    ec.mean = g.mean;
    if (!out_dir.empty()) ec.output_dir = out_dir;
    const std::vector<ExperimentReport> reports = run_experiments(names, ec, parallel);
    Json j = Json::array();
    bool ok = true;
    for (const ExperimentReport& r : reports) {
      j.push_back(r.to_json());
      ok = ok && (r.passed || r.skipped);
    }
    print(reports.size() == 1 ? j[0] : j);
    code = ok ? 0 : 1;
  };
  experiment->add_subcommand("triangle", "Third-vertex mass on K3")->callback([&] { run({"triangle"}); });
  experiment->add_subcommand("dead-end", "Tail mass on a cycle with a glued path")->callback([&] {
    run({"dead-end"});
  });
  auto* loc = experiment->add_subcommand("locality", "Restricted versus full distance");
  loc->add_option("--preset", preset, "cycle9 | grid | k3")->capture_default_str();
  loc->callback([&] { run({"locality:" + preset}); });
  experiment->add_subcommand("all", "Every experiment")->callback([&] {
    run({"triangle", "dead-end", "locality:cycle9", "locality:grid", "locality:k3"});
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print({{"error", "ParseError"}, {"message", e.what()}});
    return 2;
  } catch (const Error& e) {
    print(e.to_json());
    return 2;
  } catch (const std::exception& e) {
    print({{"error", "InputError"}, {"message", e.what()}});
    return 2;
  }
  return code;
}
