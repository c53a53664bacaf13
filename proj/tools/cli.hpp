#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hqis/protocol.hpp"

namespace hqis::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitUsage = 2;

// Chi-square critical values at significance 0.001.
inline constexpr double kChiSqCrit3Dof = 16.266;    // 4-bin Bell histogram
inline constexpr double kChiSqCrit15Dof = 37.697;   // 16-bin joint histogram

// Complex literal in the "RE", "IMj", or "RE+IMj" forms ("1.5-0.5j", "2j",
// "-1", "j"). Throws std::invalid_argument on anything else.
cplx parse_complex(const std::string& text);

struct RunOptions {
  std::string receiver = "bob";
  std::optional<std::string> lambda;
  std::optional<std::string> alpha;
  std::optional<std::string> beta;
  std::string basis_b = "z";
  std::string basis_c = "z";
  std::vector<std::string> drop;
  std::size_t shots = 1;
  std::uint64_t seed = 0;
  double tolerance = 1e-10;
  std::string json_path;
};

struct VerifyOptions {
  std::size_t secrets = 4;
  std::uint64_t seed = 0;
  double tolerance = 1e-10;
  std::string json_path;
};

struct AuditOptions {
  std::size_t secrets = 128;
  std::uint64_t seed = 0;
  std::string json_path;
};

struct SampleOptions {
  std::size_t shots = 100000;
  std::uint64_t seed = 0;
  std::string json_path;
};

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err);
// `which` selects one table ("bob", "charlie", "diana-zz", "diana-x");
// empty prints all four.
int cmd_table(const std::string& which, std::ostream& out, std::ostream& err);
int cmd_audit(const AuditOptions& opt, std::ostream& out, std::ostream& err);
int cmd_sample(const SampleOptions& opt, std::ostream& out, std::ostream& err);

// Rendered correction table, rows generated from the correction functions.
// Throws std::invalid_argument for an unknown name.
std::string render_table(const std::string& which);

// argv dispatcher shared by main() and the in-process CLI tests.
int run_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace hqis::cli
