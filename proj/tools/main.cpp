#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "haantjes/report.hpp"

using namespace haan;

namespace {

void emit(const nlohmann::json& report, const std::string& out_path) {
  const std::string text = report.dump(2);
  if (out_path.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    out << text << "\n";
  }
}

struct CommonOpts {
  std::string file, op, op2, out;
  int points = -1;
  std::uint64_t seed = 0;
  double tol = 1e-8;
};

int run_eval(const CommonOpts& opts, const std::string& tensor, int level) {
  const DefinitionFile def = load_definition(opts.file);
  const std::vector<Point> pts = sample_points(def, opts.points, opts.seed);
  const OperatorField& a = find_operator(def, opts.op);
  const bool needs_pair = tensor == "fn" || tensor == "binary" || tensor == "binary-level" ||
                          tensor == "delta";
  if (needs_pair && opts.op2.empty())
    throw std::invalid_argument("tensor '" + tensor + "' needs two operators (--op and --op2)");
  const bool needs_level = tensor == "binary-level" || tensor == "tau" || tensor == "tau-closed";
  if (needs_level && level < 1)
    throw std::invalid_argument("tensor '" + tensor + "' needs --level >= 1");

  auto compute = [&](const Point& p) -> Tensor12 {
    if (tensor == "nijenhuis") return nijenhuis(a, p);
    if (tensor == "haantjes") return haantjes(a, p);
    if (tensor == "tau") return tau_level(a, level, p);
    if (tensor == "tau-closed") return tau_closed_form(a, level, p);
    const OperatorField& b = find_operator(def, opts.op2);
    if (tensor == "fn") return fn_bracket(a, b, p);
    if (tensor == "binary") return binary_haantjes(a, b, p);
    if (tensor == "binary-level") return binary_level(a, b, level, p);
    if (tensor == "delta") return delta_tensor(a, b, p);
    throw std::invalid_argument("unknown tensor '" + tensor + "'");
  };

  nlohmann::json report = report_envelope("eval", def.digest);
  report["operator"] = opts.op;
  if (!opts.op2.empty()) report["operator2"] = opts.op2;
  report["tensor"] = tensor;
  if (needs_level) report["level"] = level;
  report["seed"] = opts.seed != 0 ? opts.seed : def.seed;

  double max_abs = 0.0, max_scale = 0.0;
  nlohmann::json per_point = nlohmann::json::array();
  for (const Point& p : pts) {
    const Tensor12 t = compute(p);
    max_abs = std::max(max_abs, t.max_abs());
    max_scale = std::max(max_scale, t.scale());
    per_point.push_back({{"point", to_json(p)}, {"tensor", to_json(t)}});
  }
  report["per_point"] = per_point;
  report["summary"] = {{"max_abs", max_abs},
                       {"scale", max_scale},
                       {"vanishes_at_tol", max_abs <= opts.tol * (1.0 + max_scale)},
                       {"tol", opts.tol}};
  emit(report, opts.out);
  std::cerr << "eval " << tensor << " on '" << opts.op << "': max |component| = " << max_abs
            << " (scale " << max_scale << ") over " << pts.size() << " points\n";
  return kExitOk;
}

int run_spectrum(const CommonOpts& opts) {
  const DefinitionFile def = load_definition(opts.file);
  const std::vector<Point> pts = sample_points(def, opts.points, opts.seed);
  const OperatorField& a = find_operator(def, opts.op);

  nlohmann::json report = report_envelope("spectrum", def.digest);
  report["operator"] = opts.op;
  report["seed"] = opts.seed != 0 ? opts.seed : def.seed;
  nlohmann::json per_point = nlohmann::json::array();
  for (const Point& p : pts) {
    const SpectrumReport sp = spectrum(a, p, def.tol_eig, def.tol_rank);
    per_point.push_back({{"point", to_json(p)}, {"spectrum", to_json(sp)}});
  }
  report["per_point"] = per_point;
  emit(report, opts.out);
  std::cerr << "spectrum of '" << opts.op << "' over " << pts.size() << " points written\n";
  return kExitOk;
}

int run_integrability(const CommonOpts& opts, int m_max) {
  const DefinitionFile def = load_definition(opts.file);
  const std::vector<Point> pts = sample_points(def, opts.points, opts.seed);
  const OperatorField& a = find_operator(def, opts.op);
  const int levels = m_max > 0 ? m_max : 2 * def.dim;

  const ScanResult scan = main_theorem_scan(a, pts, levels, opts.tol);

  nlohmann::json report = report_envelope("integrability", def.digest);
  report["operator"] = opts.op;
  report["m_max"] = levels;
  report["seed"] = opts.seed != 0 ? opts.seed : def.seed;
  report["scan"] = to_json(scan);

  // per-distribution and pairwise verdicts at the anchor spectrum; the scan
  // itself needs no spectral data, so an unsupported spectrum only drops the
  // distribution table
  SpectrumReport anchor;
  try {
    anchor = spectrum(a, pts.front(), def.tol_eig, def.tol_rank);
  } catch (const SpectrumError& e) {
    report["distributions"] = nlohmann::json::array();
    report["semidirect_sums"] = nlohmann::json::array();
    report["spectrum_note"] = e.what();
    // the vanishing criterion presumes a real spectrum; without it no
    // integrability claim is made even when a level vanishes
    report["verdict"] = "inconclusive";
    emit(report, opts.out);
    std::cerr << "integrability: spectrum outside the real-eigenvalue assumption; "
                 "inconclusive (scan table still reported)\n";
    return kExitInconclusive;
  }
  // the Riesz structure is assumed locally constant; disagreement across the
  // sample set is reported, not resolved
  bool structure_consistent = true;
  for (const Point& p : pts) {
    SpectrumReport sp;
    try {
      sp = spectrum(a, p, def.tol_eig, def.tol_rank);
    } catch (const SpectrumError&) {
      structure_consistent = false;
      break;
    }
    if (sp.clusters.size() != anchor.clusters.size()) {
      structure_consistent = false;
      break;
    }
    for (std::size_t c = 0; c < sp.clusters.size(); ++c)
      if (sp.clusters[c].riesz_index != anchor.clusters[c].riesz_index ||
          sp.clusters[c].multiplicity != anchor.clusters[c].multiplicity)
        structure_consistent = false;
  }
  report["spectral_structure_consistent"] = structure_consistent;
  if (!structure_consistent)
    report["spectral_structure_note"] =
        "cluster structure or Riesz indices vary across the sample points";

  nlohmann::json distributions = nlohmann::json::array();
  for (const auto& cluster : anchor.clusters) {
    const InvolutivityReport inv =
        projector_involutivity_check(a, cluster.lambda, pts, 1e-6);
    const bool integrable = scan.first_vanishing_level.has_value() || inv.involutive;
    distributions.push_back(
        {{"lambda", cluster.lambda},
         {"multiplicity", cluster.multiplicity},
         {"riesz_index", cluster.riesz_index},
         {"involutivity_residual", inv.max_residual},
         {"involutivity_points_used", inv.points_used},
         {"involutivity_check", inv.involutive ? "pass" : "fail"},
         {"verdict", integrable ? "integrable" : "inconclusive"},
         {"note", "numeric projector frames, derivative-approximate check"}});
  }
  report["distributions"] = distributions;

  nlohmann::json sums = nlohmann::json::array();
  const int level_for_pairs = scan.first_vanishing_level.value_or(levels);
  for (std::size_t i = 0; i < anchor.clusters.size(); ++i)
    for (std::size_t j = i + 1; j < anchor.clusters.size(); ++j) {
      const SemidirectReport sd =
          semidirect_sum_check(a, anchor.clusters[i].lambda, anchor.clusters[j].lambda, pts,
                               level_for_pairs, 1e-6);
      sums.push_back(to_json(sd));
    }
  report["semidirect_sums"] = sums;

  const bool conclusive = scan.first_vanishing_level.has_value();
  report["verdict"] = conclusive ? "integrable" : "inconclusive";
  emit(report, opts.out);
  if (conclusive)
    std::cerr << "integrability: level " << *scan.first_vanishing_level
              << " torsion vanishes; eigen-distributions and semidirect sums integrable\n";
  else
    std::cerr << "integrability: no vanishing level up to " << levels << "; inconclusive\n";
  return conclusive ? kExitOk : kExitInconclusive;
}

int run_suite(int trials, int points, std::uint64_t seed, double tol, const std::string& out) {
  const SuiteReport suite = identity_suite(trials, points, seed, {2, 3, 4}, tol);
  nlohmann::json report = report_envelope("suite", "");
  report["suite"] = to_json(suite);
  emit(report, out);
  int failed = 0;
  for (const auto& rec : suite.identities)
    if (!rec.pass) {
      ++failed;
      std::cerr << "FAIL " << rec.name << ": residual " << rec.max_residual << " (scale "
                << rec.scale << ") seed " << rec.worst_seed << " dim " << rec.worst_dim << "\n";
    }
  std::cerr << "identity suite: " << (suite.identities.size() - failed) << "/"
            << suite.identities.size() << " identities pass\n";
  return suite.all_pass ? kExitOk : kExitCheckFailed;
}

int run_probe(int conjecture, const std::string& kind, int dim, int trials, int points,
              std::uint64_t seed, double tol, double band, const std::string& out) {
  GeneratorSpec spec;
  spec.kind = kind.empty() ? (conjecture == 1 ? OperatorKind::CommutingNilpotentPair
                                              : OperatorKind::CommutingNilpotentPair)
                           : operator_kind_from_name(kind);
  spec.dim = dim;
  spec.seed = seed;
  const ProbeReport probe = conjecture == 1
                                ? conjecture1_probe(spec, trials, points, tol, band)
                                : conjecture2_probe(spec, trials, points, tol, band);
  nlohmann::json report = report_envelope("probe", "");
  report["probe"] = to_json(probe);
  emit(report, out);
  std::cerr << "probe " << conjecture << ": " << probe.qualifying << "/" << probe.trials
            << " qualifying pairs, " << probe.candidates.size()
            << " counterexample candidates\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"torsion tensors, spectral analysis and integrability criteria for operator "
               "fields given as matrices of chart functions"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string tensor = "nijenhuis";
  int level = 1;
  int m_max = 0;
  int trials = 20;
  int suite_points = 20;
  std::uint64_t seed = 1;
  double band = 100.0;
  int probe_conjecture = 1;
  std::string probe_kind;
  int probe_dim = 3;

  auto add_common = [&](CLI::App* cmd, bool needs_file) {
    if (needs_file) cmd->add_option("--file", opts.file, "definition file (JSON)")->required();
    cmd->add_option("--points", opts.points, "random sample point count override");
    cmd->add_option("--seed", opts.seed, "seed override for sampled points");
    cmd->add_option("--tol", opts.tol, "residual tolerance (scale-relative)");
    cmd->add_option("--out", opts.out, "write the JSON report to this path");
  };

  CLI::App* eval = app.add_subcommand("eval", "component dump of a torsion tensor at the "
                                              "sample points");
  add_common(eval, true);
  eval->add_option("--op", opts.op, "operator name")->required();
  eval->add_option("--op2", opts.op2, "second operator (binary tensors)");
  eval->add_option("--tensor", tensor,
                   "nijenhuis | haantjes | fn | binary | binary-level | tau | tau-closed | delta");
  eval->add_option("--level", level, "level m for the leveled tensors");

  CLI::App* spec_cmd = app.add_subcommand("spectrum", "eigenvalue clusters, Riesz indices and "
                                                      "eigen-distribution bases per point");
  add_common(spec_cmd, true);
  spec_cmd->add_option("--op", opts.op, "operator name")->required();

  CLI::App* integ = app.add_subcommand("integrability", "vanishing-level scan plus "
                                                        "eigen-distribution verdicts");
  add_common(integ, true);
  integ->add_option("--op", opts.op, "operator name")->required();
  integ->add_option("--m-max", m_max, "largest level to scan (default 2*dim)");

  CLI::App* suite = app.add_subcommand("suite", "run the identity regression suite");
  suite->add_option("--trials", trials, "operator instances per identity and dimension");
  suite->add_option("--points", suite_points, "sample points per instance");
  suite->add_option("--seed", seed, "suite seed");
  suite->add_option("--tol", opts.tol, "residual tolerance (scale-relative)");
  suite->add_option("--out", opts.out, "write the JSON report to this path");

  CLI::App* probe = app.add_subcommand("probe", "randomized falsification probe for the two "
                                                "conjectured vanishing statements");
  probe->add_option("conjecture", probe_conjecture, "1 (pair/sum additivity) or 2 (level n-1)")
      ->required()
      ->check(CLI::Range(1, 2));
  probe->add_option("--kind", probe_kind, "operator kind (default commuting_nilpotent_pair; "
                                          "probe 1 also accepts diagonal)");
  probe->add_option("--dim", probe_dim, "chart dimension");
  probe->add_option("--trials", trials, "number of generated pairs");
  probe->add_option("--points", suite_points, "sample points per pair");
  probe->add_option("--seed", seed, "probe seed");
  probe->add_option("--tol", opts.tol, "vanishing tolerance (scale-relative)");
  probe->add_option("--band", band, "candidate band factor");
  probe->add_option("--out", opts.out, "write the JSON report to this path");

  try {
    app.parse(argc, argv);
    if (eval->parsed()) return run_eval(opts, tensor, level);
    if (spec_cmd->parsed()) return run_spectrum(opts);
    if (integ->parsed()) return run_integrability(opts, m_max);
    if (suite->parsed()) return run_suite(trials, suite_points, seed, opts.tol, opts.out);
    if (probe->parsed())
      return run_probe(probe_conjecture, probe_kind, probe_dim, trials, suite_points, seed,
                       opts.tol, band, opts.out);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const SpectrumError& e) {
    std::cerr << "spectrum error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
