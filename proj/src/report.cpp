#include "haantjes/report.hpp"

#include <fstream>
#include <sstream>

namespace haan {

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

DefinitionFile load_definition(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open definition file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_definition(buf.str(), fnv1a_hex(buf.str()));
}

DefinitionFile parse_definition(const std::string& text, const std::string& digest_of) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("definition file is not valid JSON: ") + e.what(),
                     static_cast<std::size_t>(e.byte));
  }

  DefinitionFile def;
  def.digest = digest_of;
  if (!doc.contains("dim") || !doc["dim"].is_number_integer())
    throw ParseError("definition file needs an integer 'dim'", 0);
  def.dim = doc["dim"].get<int>();
  if (def.dim < 1) throw ParseError("'dim' must be >= 1", 0);

  if (doc.contains("operators")) {
    for (auto& [name, rows] : doc["operators"].items()) {
      if (!rows.is_array() || rows.size() != static_cast<std::size_t>(def.dim))
        throw ParseError("operator '" + name + "' must be a " + std::to_string(def.dim) + "x" +
                             std::to_string(def.dim) + " matrix of expression strings", 0);
      std::vector<Expr> entries;
      entries.reserve(static_cast<std::size_t>(def.dim) * def.dim);
      for (const auto& row : rows) {
        if (!row.is_array() || row.size() != static_cast<std::size_t>(def.dim))
          throw ParseError("operator '" + name + "' has a malformed row", 0);
        for (const auto& cell : row) entries.push_back(parse(cell.get<std::string>(), def.dim));
      }
      def.operators.emplace(name, OperatorField(def.dim, std::move(entries)));
    }
  }

  if (doc.contains("vectors")) {
    for (auto& [name, comps] : doc["vectors"].items()) {
      if (!comps.is_array() || comps.size() != static_cast<std::size_t>(def.dim))
        throw ParseError("vector field '" + name + "' must have " + std::to_string(def.dim) +
                             " expression strings", 0);
      std::vector<Expr> entries;
      for (const auto& cell : comps) entries.push_back(parse(cell.get<std::string>(), def.dim));
      def.vectors.emplace(name, VectorField(def.dim, std::move(entries)));
    }
  }

  if (doc.contains("points")) {
    const auto& pts = doc["points"];
    if (pts.contains("explicit"))
      for (const auto& row : pts["explicit"]) {
        Point p;
        for (const auto& c : row) p.coords.push_back(c.get<double>());
        if (p.dim() != def.dim) throw ParseError("explicit point has the wrong dimension", 0);
        if (!p.finite()) throw ParseError("explicit point has a non-finite entry", 0);
        def.explicit_points.push_back(std::move(p));
      }
    if (pts.contains("random")) {
      const auto& rnd = pts["random"];
      def.random_count = rnd.value("count", 0);
      if (rnd.contains("box")) {
        def.box_lo = rnd["box"][0].get<double>();
        def.box_hi = rnd["box"][1].get<double>();
      }
      def.seed = rnd.value("seed", 1ull);
    }
  }

  if (doc.contains("tolerances")) {
    const auto& tol = doc["tolerances"];
    def.tol_identity = tol.value("identity", def.tol_identity);
    def.tol_rank = tol.value("rank", def.tol_rank);
    def.tol_eig = tol.value("eig", def.tol_eig);
  }
  return def;
}

std::vector<Point> sample_points(const DefinitionFile& def, int count_override,
                                 std::uint64_t seed_override) {
  std::vector<Point> pts = def.explicit_points;
  const int count = count_override >= 0 ? count_override : def.random_count;
  const std::uint64_t seed = seed_override != 0 ? seed_override : def.seed;
  if (count > 0) {
    Rng rng(seed);
    for (const Point& p : random_points(rng, def.dim, count, def.box_lo, def.box_hi))
      pts.push_back(p);
  }
  if (pts.empty()) throw std::invalid_argument("no sample points configured");
  return pts;
}

const OperatorField& find_operator(const DefinitionFile& def, const std::string& name) {
  auto it = def.operators.find(name);
  if (it == def.operators.end())
    throw std::invalid_argument("unknown operator '" + name + "'");
  return it->second;
}

// ---------------------------------------------------------------------------

nlohmann::json report_envelope(const std::string& command, const std::string& digest) {
  nlohmann::json j;
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  if (!digest.empty()) j["input_digest"] = digest;
  return j;
}

nlohmann::json to_json(const Point& p) { return nlohmann::json(p.coords); }

nlohmann::json to_json(const Tensor12& t) {
  nlohmann::json comps = nlohmann::json::array();
  const int n = t.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        comps.push_back({{"i", i + 1}, {"j", j + 1}, {"k", k + 1}, {"value", t(i, j, k)}});
  return {{"dim", n}, {"components_j_lt_k", comps}, {"max_abs", t.max_abs()},
          {"scale", t.scale()}};
}

nlohmann::json to_json(const SpectrumReport& r) {
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : r.clusters) {
    nlohmann::json basis = nlohmann::json::array();
    for (int col = 0; col < c.basis.cols(); ++col) {
      nlohmann::json v = nlohmann::json::array();
      for (int row = 0; row < c.basis.rows(); ++row) v.push_back(c.basis(row, col));
      basis.push_back(v);
    }
    clusters.push_back({{"lambda", c.lambda},
                        {"multiplicity", c.multiplicity},
                        {"riesz_index", c.riesz_index},
                        {"basis_columns", basis}});
  }
  nlohmann::json j{{"clusters", clusters},
                   {"tol_eig", r.tol_eig},
                   {"tol_rank", r.tol_rank},
                   {"near_degenerate", r.near_degenerate}};
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  return j;
}

nlohmann::json to_json(const ScanResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"level", row.level},
                    {"max_residual", row.max_residual},
                    {"scale", row.scale},
                    {"vanishes", row.vanishes}});
  nlohmann::json j{{"rows", rows}};
  if (r.first_vanishing_level)
    j["first_vanishing_level"] = *r.first_vanishing_level;
  else
    j["first_vanishing_level"] = nullptr;
  return j;
}

nlohmann::json to_json(const TriangularReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json jr{{"k", row.k},
                      {"max_residual", row.max_residual},
                      {"scale", row.scale},
                      {"vanishes", row.vanishes},
                      {"vacuous", row.vacuous}};
    if (!row.note.empty()) jr["note"] = row.note;
    rows.push_back(jr);
  }
  return {{"structurally_upper", r.structurally_upper},
          {"nilcyclic", r.nilcyclic},
          {"rows", rows},
          {"all_pass", r.all_pass}};
}

nlohmann::json to_json(const SemidirectReport& r) {
  return {{"lambda_mu", r.lambda_mu},
          {"lambda_nu", r.lambda_nu},
          {"tau_residual", r.tau_residual},
          {"tau_scale", r.tau_scale},
          {"tau_vanishes", r.tau_vanishes},
          {"membership_residual", r.membership_residual},
          {"membership_ok", r.membership_ok},
          {"withheld", r.withheld},
          {"note", r.note}};
}

nlohmann::json to_json(const SuiteReport& r) {
  nlohmann::json ids = nlohmann::json::array();
  for (const auto& rec : r.identities) {
    ids.push_back({{"name", rec.name},
                   {"max_residual", rec.max_residual},
                   {"scale", rec.scale},
                   {"tol", rec.tol},
                   {"pass", rec.pass},
                   {"worst_seed", rec.worst_seed},
                   {"worst_dim", rec.worst_dim},
                   {"worst_point", rec.worst_point}});
  }
  return {{"identities", ids}, {"all_pass", r.all_pass},     {"trials", r.trials},
          {"points", r.points}, {"seed", r.seed},            {"dims", r.dims},
          {"tol", r.tol}};
}

nlohmann::json to_json(const ProbeReport& r) {
  auto trial_json = [](const ProbeTrial& t) {
    nlohmann::json j{{"seed", t.seed},
                     {"qualifying", t.qualifying},
                     {"pair_residual", t.lhs_residual},
                     {"pair_scale", t.lhs_scale},
                     {"sum_residual", t.rhs_residual},
                     {"sum_scale", t.rhs_scale},
                     {"candidate", t.candidate}};
    if (!t.points.empty()) {
      nlohmann::json pts = nlohmann::json::array();
      for (const Point& p : t.points) pts.push_back(to_json(p));
      j["points"] = pts;
    }
    return j;
  };
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : r.per_trial) trials.push_back(trial_json(t));
  nlohmann::json candidates = nlohmann::json::array();
  for (const auto& t : r.candidates) candidates.push_back(trial_json(t));
  return {{"conjecture", r.conjecture},
          {"kind", r.kind},
          {"dim", r.dim},
          {"trials", r.trials},
          {"qualifying", r.qualifying},
          {"discarded", r.discarded},
          {"seed", r.seed},
          {"tol", r.tol},
          {"band", r.band},
          {"per_trial", trials},
          {"candidates", candidates},
          {"note", r.note}};
}

nlohmann::json to_json(const GoldenReport& r) {
  nlohmann::json pts = nlohmann::json::array();
  for (const Point& p : r.points) pts.push_back(to_json(p));
  return {{"points", pts},
          {"tau1_max", r.tau1_max},
          {"tau2_max", r.tau2_max},
          {"tau3_residual", r.tau3_residual},
          {"tau3_scale", r.tau3_scale},
          {"tau3_vanishes", r.tau3_vanishes},
          {"low_levels_nonzero", r.low_levels_nonzero},
          {"riesz_indices", {r.riesz_1, r.riesz_2}},
          {"multiplicities", {r.mult_1, r.mult_2}},
          {"spectrum_ok", r.spectrum_ok},
          {"defective_span_residual", r.d1_span_residual},
          {"defective_span_is_coordinate_plane", r.d1_is_coordinate_plane},
          {"defective_distribution_involutive", r.d1_involutive},
          {"pass", r.pass}};
}

}  // namespace haan
