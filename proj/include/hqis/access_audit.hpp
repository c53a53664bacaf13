#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hqis/protocol.hpp"

namespace hqis::audit {

struct AuditError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A strategy was asked to handle a reachable branch it has no recovery for.
struct UncoveredBranchError : AuditError {
  using AuditError::AuditError;
};

// A receiver plus the subset of helpers cooperating with it. Helpers are
// listed in register order and exclude the receiver.
struct Coalition {
  Agent receiver;
  std::vector<Agent> helpers;

  void validate() const;  // throws InvalidCoalitionError on malformed input
  std::string str() const;
};

// Branch key: Bell outcome index in the high bits, then the cooperating
// helpers' outcome bits in helper order (first helper most significant).
int branch_id(BellOutcome bell, std::span<const int> outcomes);
std::string branch_name(int id, std::size_t n_helpers);  // e.g. "Psi+|01"

// ZYZ recovery unitary U = Rz(rz_after) Ry(ry) Rz(rz_before), fixed up to
// global phase.
struct EulerAngles {
  double rz_after;
  double ry;
  double rz_before;
};

std::array<cplx, 4> euler_matrix(const EulerAngles& e);

// ZYZ decomposition of a unitary, inverse of euler_matrix up to global
// phase.
EulerAngles euler_from_matrix(const std::array<cplx, 4>& u);

// What a coalition can do: each cooperating helper picks one measurement
// basis for the whole experiment, and the receiver picks one recovery
// unitary per announced branch.
struct Strategy {
  std::vector<Basis> bases;              // parallel to Coalition::helpers
  std::map<int, EulerAngles> recovery;   // branch id -> recovery
};

struct AuditResult {
  Coalition coalition;
  double best_avg_fidelity;
  Strategy best_strategy;
  std::size_t n_secret_samples;
  // Objective evaluations spent across all basis assignments and branches.
  std::size_t optimizer_iterations;
};

// Haar-random secret pool; a fixed seed gives a fixed pool, so audits of
// different coalitions under one seed are compared on identical secrets.
std::vector<SecretSpec> sample_secrets(std::size_t n, std::uint64_t seed);

// Mean reconstruction fidelity of a fixed strategy over a secret pool,
// evaluated directly: enumerate every reachable branch, trace out the
// agents outside the coalition, apply the branch recovery, overlap with
// the secret. Serves as the slow cross-check for audit_access.
double avg_fidelity(const Coalition& c, const Strategy& strategy,
                    std::span<const SecretSpec> secrets);

// Best average fidelity for one fixed basis assignment, optimizing each
// branch's recovery independently (24 Clifford seeds, then coordinate
// descent on the Euler angles).
AuditResult optimize_bases(const Coalition& c, const std::vector<Basis>& bases,
                           std::span<const SecretSpec> secrets);

// Margin a later basis assignment must clear to displace the incumbent;
// assignments whose optima agree to rounding noise keep scan order.
inline constexpr double kAssignmentTieTol = 1e-9;

// Exhaustive scan over the coalition's basis assignments (2^k for k
// cooperating helpers); ties within kAssignmentTieTol keep the first
// assignment in scan order (all-Z first).
AuditResult audit_access(const Coalition& c, std::size_t n_secrets,
                         std::uint64_t seed);

// The twelve coalitions: every receiver with each subset of its helpers.
std::vector<Coalition> all_coalitions();

// audit_access over all coalitions with one shared secret pool.
std::vector<AuditResult> hierarchy_report(std::size_t n_secrets,
                                          std::uint64_t seed);

// The 24 single-qubit Cliffords modulo global phase, in a deterministic
// generation order (closure of {I, H, S}).
const std::vector<std::array<cplx, 4>>& clifford_group();

// Comparison channel: (|0000> + |1111>)/sqrt(2) on {A,B,C,D}.
StateVector build_ghz4();

// Entanglement persistency thresholds.
inline constexpr double kPersistentEntropyFloor = 0.5;   // bits
inline constexpr double kGhzResidualCeiling = 1e-10;     // bits

// Residual entanglement after measuring one qubit. The per-measurement
// certificate is the largest entropy among the residual's three bipartite
// cuts (zero only for a fully product residual); rows aggregate that
// certificate's extremes over the tested bases and outcomes.
struct ResidualRow {
  QubitId qubit;
  std::size_t bases_tested;
  double min_residual_entropy;  // min over measurements of the max-cut entropy
  double max_residual_entropy;  // max over measurements of the max-cut entropy
};

struct PersistencyReport {
  std::vector<ResidualRow> chi_rows;
  std::vector<ResidualRow> ghz_rows;  // Z basis only
  double chi_min_entropy;             // min over chi rows
  double ghz_max_entropy;             // max over ghz rows
  bool chi_persistent;                // chi_min_entropy > kPersistentEntropyFloor
  bool ghz_fragile;                   // ghz_max_entropy < kGhzResidualCeiling
};

// Measures every qubit of the chi channel in Z plus n_random_bases
// Haar-random bases (both outcomes each) and checks the residual three
// qubits stay entangled; the GHZ comparison channel must instead separate
// under any Z measurement.
PersistencyReport persistency_check(std::size_t n_random_bases,
                                    std::uint64_t seed);

}  // namespace hqis::audit
