#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

#include "haantjes/harness.hpp"

namespace haan {

inline constexpr const char* kToolVersion = "0.1.0";

// process exit codes shared by the CLI and its tests
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitParse = 3,
  kExitDomain = 4,
  kExitCheckFailed = 5,
  kExitInconclusive = 6,
};

/// A batch input: chart dimension, named operators and vector fields,
/// sample-point specification and tolerance overrides.
struct DefinitionFile {
  int dim = 0;
  std::map<std::string, OperatorField> operators;
  std::map<std::string, VectorField> vectors;
  std::vector<Point> explicit_points;
  int random_count = 0;
  double box_lo = -1.0, box_hi = 1.0;
  std::uint64_t seed = 1;
  double tol_identity = 1e-8;
  double tol_rank = 1e-8;
  double tol_eig = 1e-6;
  std::string digest;  // FNV-1a of the file bytes
};

DefinitionFile load_definition(const std::string& path);
DefinitionFile parse_definition(const std::string& text, const std::string& digest_of = "");

/// Explicit points followed by the seeded random ones. `count_override` < 0
/// keeps the file's count; `seed_override` of 0 keeps the file's seed.
std::vector<Point> sample_points(const DefinitionFile& def, int count_override = -1,
                                 std::uint64_t seed_override = 0);

const OperatorField& find_operator(const DefinitionFile& def, const std::string& name);

std::string fnv1a_hex(const std::string& bytes);

// JSON serialization, stable key order and value formatting
nlohmann::json report_envelope(const std::string& command, const std::string& digest);
nlohmann::json to_json(const Point& p);
nlohmann::json to_json(const Tensor12& t);
nlohmann::json to_json(const SpectrumReport& r);
nlohmann::json to_json(const ScanResult& r);
nlohmann::json to_json(const TriangularReport& r);
nlohmann::json to_json(const SemidirectReport& r);
nlohmann::json to_json(const SuiteReport& r);
nlohmann::json to_json(const ProbeReport& r);
nlohmann::json to_json(const GoldenReport& r);

}  // namespace haan
