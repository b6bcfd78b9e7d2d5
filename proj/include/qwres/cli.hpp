#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qwres/errors.hpp"

namespace qwres::cli {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFormat = 3;
inline constexpr int kExitRange = 4;

/// Carries the process exit code for a rejected invocation.
class CliError : public Error {
 public:
  CliError(int code, const std::string& what) : Error(what), code(code) {}
  int code;
};

struct RunConfig {
  std::string command;
  std::string preset;     ///< resolved per command when left empty
  std::string coin_path;  ///< coin JSON, overrides the preset
  std::optional<nlohmann::json> coin_doc;  ///< coin embedded in a config file

  long t = 100;
  double strip_depth = 2.0;
  double tol = 1e-7;
  double eps = 0.0;
  std::vector<double> eps_grid;
  std::optional<double> s;
  std::optional<double> mu0;
  int M0 = 1;
  int m0 = 2;
  int n0 = 2;
  std::uint64_t seed = 1;
  int x = 0, y = 0;
  std::string chirality = "left";
  std::string interior = "identity";
  std::string weave = "both-axes";
  std::string emit;  ///< json or csv
  std::string output;
  int threads = 0;
  bool timing = true;

  std::vector<std::string> warnings;

  /// Fills command-dependent defaults and range-checks everything;
  /// throws CliError with exit code 4.
  void resolve();
  nlohmann::json to_json() const;
};

/// args excludes the program name. A --config file is read first and
/// explicit flags override it. Throws CliError (2 usage, 3 file, 4 range);
/// a help request surfaces as CliError with code 0 and the help text.
RunConfig parse_config(const std::vector<std::string>& args);

struct RunResult {
  int exit_code = kExitOk;
  std::string text;  ///< JSON envelope or CSV
};

/// Dispatches to the library. Numerical failures give exit 1 with an
/// envelope whose payload describes the error.
RunResult run(const RunConfig& cfg);

/// Full front end: parse, run, write. Returns the process exit code.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qwres::cli
