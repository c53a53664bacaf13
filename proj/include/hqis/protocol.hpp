#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hqis/qmath.hpp"
#include "hqis/rng.hpp"

namespace hqis {

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when the cooperation pattern handed to run_protocol cannot
// reconstruct the secret deterministically.
struct InvalidCoalitionError : ProtocolError {
  using ProtocolError::ProtocolError;
};

// The three receiving parties. Alice (dealer, qubits S and A) is implicit.
enum class Agent { Bob, Charlie, Diana };

inline constexpr std::array<Agent, 3> kAgents = {Agent::Bob, Agent::Charlie,
                                                 Agent::Diana};

QubitId qubit_of(Agent a);        // 'B', 'C', 'D'
const char* to_string(Agent a);   // "bob", "charlie", "diana"
std::optional<Agent> agent_from_string(const std::string& name);

// The two non-receiving agents, in register order.
std::array<Agent, 2> helpers_of(Agent receiver);

// Normalized single-qubit secret alpha|0> + beta|1>, stored with the global
// phase fixed so alpha is real >= 0 (beta real > 0 when alpha == 0).
struct SecretSpec {
  cplx alpha;
  cplx beta;

  static SecretSpec from_amplitudes(cplx a, cplx b);
  // Secret (|0> + lambda|1>)/sqrt(1 + |lambda|^2).
  static SecretSpec from_lambda(cplx lambda);
  // Haar-uniform random secret (four normal draws, normalized).
  static SecretSpec haar_random(Rng& rng);

  // beta/alpha; nullopt for the |1> pole where alpha == 0.
  std::optional<cplx> lambda_view() const;
};

// The four-qubit chi channel state on register {A,B,C,D}:
//   (|0>_A phi0 + |1>_A phi1)/sqrt(2) with
//   phi0 = (|000> - |011> - |101> + |110>)_BCD / 2
//   phi1 = (|001> + |010> + |100> + |111>)_BCD / 2
// Symmetric under exchanging B and C.
StateVector build_chi();

// The secret as a one-qubit state on the given label.
StateVector build_secret(const SecretSpec& spec, QubitId label = 'S');

// Secret tensor channel: the five-qubit pre-measurement system.
StateVector compose_system(const StateVector& secret,
                           const StateVector& channel);

// Dealer's Bell measurement on (S, A).
BellResult alice_bell_measure(const StateVector& system, const Selector& sel);

// Post-measurement state of {B,C,D} for each Bell outcome, built directly
// from the secret amplitudes:
//   Psi+/- -> alpha phi0 +/- beta phi1
//   Phi+/- -> alpha phi1 +/- beta phi0
StateVector analytic_collapse(BellOutcome o, const SecretSpec& spec);

// Bell outcomes pair up by the sign structure of the collapsed state:
// Plus = {Psi+, Phi-}, Minus = {Psi-, Phi+}.
enum class OutcomeClass { Plus, Minus };
OutcomeClass outcome_class(BellOutcome o);

// Single-agent reduced state after the dealer's measurement, before any
// helper acts. B and C are maximally mixed. D carries I/2 + t sigma_y for
// the Plus class and I/2 - t sigma_y for Minus, with
// t = Im(lambda)/(1 + |lambda|^2) = Re(alpha) Im(beta); it is maximally
// mixed exactly when lambda is real.
DensityMatrix reduced_state(OutcomeClass cls, const SecretSpec& spec,
                            Agent agent);

// Correction words over the generators {I, X, Z, H}; word[0] is applied
// last (leftmost factor of the operator product).
enum class Gen { I, X, Z, H };

struct Correction {
  std::vector<Gen> word;

  std::array<cplx, 4> matrix() const;
  std::string str() const;
  StateVector apply(const StateVector& s, QubitId q) const;
};

// True when a == e^{i phi} b for some phase.
bool phase_equal(const std::array<cplx, 4>& a, const std::array<cplx, 4>& b,
                 double tol);

// Receiver correction for Bob given the dealer's Bell outcome and the
// helpers' Z outcomes in register order (Charlie, Diana). The same table
// serves Charlie with outcomes (Bob, Diana): the channel is B/C symmetric.
Correction correction_bob(BellOutcome bell, int c_out, int d_out);

// Diana's correction when both helpers measure in Z. Depends only on the
// outcome parity b_out XOR c_out.
Correction correction_diana_zz(BellOutcome bell, int b_out, int c_out);

// Diana's correction from a single helper X outcome (0 -> |+>, 1 -> |->).
// Either helper works; their X outcomes coincide branch by branch.
Correction correction_diana_x(BellOutcome bell, int x_out);

// One helper's role in a run: measurement basis and whether the outcome is
// delivered to the receiver. A dropped helper still measures; the receiver
// just never learns the result.
struct HelperPlan {
  Agent agent;
  Basis basis;
  bool delivered;
};

struct HelperEvent {
  Agent agent;
  Basis basis;
  int outcome;
  bool delivered;
};

// Forced branch coordinates for exhaustive verification: the Bell outcome
// and the two helper outcomes in register order.
struct ForcedOutcomes {
  BellOutcome bell;
  int first;
  int second;
};

struct ProtocolTranscript {
  Agent receiver;
  SecretSpec secret;
  BellOutcome bell;
  std::vector<HelperEvent> helper_events;
  Correction correction;
  double fidelity;
  std::uint64_t rng_seed;  // 0 for forced runs
};

// Full protocol round: compose, dealer Bell measurement, helper
// measurements in register order, receiver correction, fidelity against
// the original secret. Throws InvalidCoalitionError when the plan cannot
// reconstruct: Bob/Charlie need both helpers delivered in Z; Diana needs
// either both helpers delivered in one shared basis (Z or X) or a single
// delivered helper in X.
ProtocolTranscript run_protocol(Agent receiver, const SecretSpec& secret,
                                const std::array<HelperPlan, 2>& helpers,
                                Rng& rng);

ProtocolTranscript run_protocol_forced(Agent receiver,
                                       const SecretSpec& secret,
                                       const std::array<HelperPlan, 2>& helpers,
                                       const ForcedOutcomes& forced);

}  // namespace hqis
