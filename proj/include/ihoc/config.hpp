#pragma once

#include "ihoc/catalog.hpp"
#include "ihoc/continuation.hpp"
#include "ihoc/fa_lab.hpp"
#include "ihoc/finite_horizon.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ihoc {

enum class Command { solve, verify, continuation, falab, audit };
const char *to_string(Command c);

struct CandidateSpec {
  enum class Kind { none, oracle, explicit_process };
  Kind kind = Kind::none;
  Process process; ///< explicit_process only
};

struct MultiplierSpec {
  enum class Kind { solver, oracle, zero, explicit_path };
  Kind kind = Kind::solver;
  MultiplierPath path; ///< explicit_path only
};

struct FaLabSpec {
  SubadditiveFamily family;
  std::string family_kind;
  std::optional<ConvexBody> body;
  std::vector<Mat> operators;
  VecSeq operator_probes;
  int resolution = 33;
  int ladder_max = 20;
};

/// Flags given on the command line; they override the file.
struct CliOverrides {
  std::optional<std::string> out;
  std::optional<std::vector<int>> schedule;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<Mode> mode;
};

struct RunConfig {
  Command command = Command::verify;
  std::string problem_name;
  std::optional<ControlProblem> problem;
  std::optional<CatalogEntry> entry;
  int horizon = 20;
  int anchor_s = 1;
  std::vector<int> schedule = default_schedule();
  double tol = 1e-6;
  int direction_samples = 64;
  std::uint64_t seed = 0;
  SolverConfig solver;
  ContinuationConfig continuation;
  bool continuation_verify = true;
  std::optional<Vec> terminal;
  CandidateSpec candidate;
  MultiplierSpec multipliers;
  FaLabSpec falab;
  std::string out_dir = ".";
  std::string config_hash;
};

/// Parses a JSON configuration. Throws ConfigError with the line and column
/// for syntax errors and the JSON path for field errors.
RunConfig parse_config(const std::string &text, const CliOverrides &overrides = {});

Mode mode_from_string(const std::string &name);
std::vector<int> parse_schedule(const std::string &text);

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string fnv1a_hex(const std::string &bytes);

} // namespace ihoc
