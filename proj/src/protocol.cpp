#include "hqis/protocol.hpp"

#include <cmath>
#include <utility>

namespace hqis {

namespace {

// phi0/phi1 sign patterns over the BCD register (index = 4b + 2c + d),
// each pattern scaled by 1/2 to unit norm.
constexpr std::array<int, 8> kPhi0 = {+1, 0, 0, -1, 0, -1, +1, 0};
constexpr std::array<int, 8> kPhi1 = {0, +1, +1, 0, +1, 0, 0, +1};

std::size_t bell_index(BellOutcome o) { return static_cast<std::size_t>(o); }

enum class WordId { I, X, Z, XZ, H, XH, ZH, XZH };

Correction make_word(WordId id) {
  switch (id) {
    case WordId::I:
      return Correction{{Gen::I}};
    case WordId::X:
      return Correction{{Gen::X}};
    case WordId::Z:
      return Correction{{Gen::Z}};
    case WordId::XZ:
      return Correction{{Gen::X, Gen::Z}};
    case WordId::H:
      return Correction{{Gen::H}};
    case WordId::XH:
      return Correction{{Gen::X, Gen::H}};
    case WordId::ZH:
      return Correction{{Gen::Z, Gen::H}};
    case WordId::XZH:
      return Correction{{Gen::X, Gen::Z, Gen::H}};
  }
  throw ProtocolError("unknown correction word");
}

// Receiver corrections, rows in BellOutcome order
// (Psi+, Psi-, Phi+, Phi-).
constexpr WordId kBobTable[4][2][2] = {
    {{WordId::I, WordId::XZ}, {WordId::X, WordId::Z}},
    {{WordId::Z, WordId::X}, {WordId::XZ, WordId::I}},
    {{WordId::X, WordId::Z}, {WordId::I, WordId::XZ}},
    {{WordId::XZ, WordId::I}, {WordId::Z, WordId::X}},
};

constexpr WordId kDianaZZTable[4][2] = {
    {WordId::I, WordId::XZ},
    {WordId::Z, WordId::X},
    {WordId::X, WordId::Z},
    {WordId::XZ, WordId::I},
};

constexpr WordId kDianaXTable[4][2] = {
    {WordId::XH, WordId::ZH},
    {WordId::XZH, WordId::H},
    {WordId::H, WordId::XZH},
    {WordId::ZH, WordId::XH},
};

std::array<cplx, 4> gen_matrix(Gen g) {
  switch (g) {
    case Gen::I:
      return gate::identity().m;
    case Gen::X:
      return gate::pauli_x().m;
    case Gen::Z:
      return gate::pauli_z().m;
    case Gen::H:
      return gate::hadamard().m;
  }
  throw ProtocolError("unknown correction generator");
}

std::array<cplx, 4> mat_mul(const std::array<cplx, 4>& a,
                            const std::array<cplx, 4>& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

void check_outcome_bit(int outcome) {
  if (outcome != 0 && outcome != 1) {
    throw ProtocolError("helper outcome must be 0 or 1");
  }
}

void validate_plan(Agent receiver, const std::array<HelperPlan, 2>& helpers) {
  const auto expected = helpers_of(receiver);
  if (helpers[0].agent != expected[0] || helpers[1].agent != expected[1]) {
    throw InvalidCoalitionError(
        "helper plans must cover the two non-receiving agents in register "
        "order");
  }
  const int delivered =
      (helpers[0].delivered ? 1 : 0) + (helpers[1].delivered ? 1 : 0);
  if (receiver != Agent::Diana) {
    if (delivered != 2) {
      throw InvalidCoalitionError(
          std::string(to_string(receiver)) +
          " can only reconstruct when both " +
          to_string(expected[0]) + " and " + to_string(expected[1]) +
          " deliver their outcomes");
    }
    if (helpers[0].basis != Basis::Z || helpers[1].basis != Basis::Z) {
      throw InvalidCoalitionError(
          std::string(to_string(receiver)) +
          " reconstruction requires both helpers to measure in the Z basis");
    }
    return;
  }
  if (delivered == 0) {
    throw InvalidCoalitionError(
        "diana cannot reconstruct without at least one delivered helper "
        "outcome");
  }
  if (delivered == 2 && helpers[0].basis != helpers[1].basis) {
    throw InvalidCoalitionError(
        "diana with two delivered outcomes needs both helpers in the same "
        "basis");
  }
  if (delivered == 1) {
    const HelperPlan& sole = helpers[0].delivered ? helpers[0] : helpers[1];
    if (sole.basis != Basis::X) {
      throw InvalidCoalitionError(
          "diana with a single delivered outcome needs that helper to "
          "measure in the X basis");
    }
  }
}

Correction pick_correction(Agent receiver, BellOutcome bell,
                           const std::vector<HelperEvent>& events) {
  if (receiver != Agent::Diana) {
    return correction_bob(bell, events[0].outcome, events[1].outcome);
  }
  if (events[0].delivered && events[1].delivered) {
    if (events[0].basis == Basis::Z) {
      return correction_diana_zz(bell, events[0].outcome, events[1].outcome);
    }
    if (events[0].outcome != events[1].outcome) {
      throw ProtocolError(
          "helper X outcomes must agree branchwise; the channel does not "
          "populate anticorrelated X branches");
    }
    return correction_diana_x(bell, events[0].outcome);
  }
  const HelperEvent& sole = events[0].delivered ? events[0] : events[1];
  return correction_diana_x(bell, sole.outcome);
}

ProtocolTranscript run_impl(Agent receiver, const SecretSpec& secret,
                            const std::array<HelperPlan, 2>& helpers,
                            const ForcedOutcomes* forced, Rng* rng,
                            std::uint64_t seed_record) {
  validate_plan(receiver, helpers);

  StateVector state = compose_system(build_secret(secret, 'S'), build_chi());
  const Selector bell_sel =
      forced ? Selector{Forced{static_cast<int>(bell_index(forced->bell))}}
             : Selector{rng};
  BellResult bell = alice_bell_measure(state, bell_sel);
  state = std::move(bell.collapsed);

  std::vector<HelperEvent> events;
  events.reserve(2);
  const std::array<int, 2> forced_bits =
      forced ? std::array<int, 2>{forced->first, forced->second}
             : std::array<int, 2>{0, 0};
  for (std::size_t k = 0; k < 2; ++k) {
    const HelperPlan& plan = helpers[k];
    const Selector sel =
        forced ? Selector{Forced{forced_bits[k]}} : Selector{rng};
    MeasureResult r = measure(state, qubit_of(plan.agent), plan.basis, sel);
    state = std::move(r.collapsed);
    events.push_back({plan.agent, plan.basis, r.outcome, plan.delivered});
  }

  Correction corr = pick_correction(receiver, bell.outcome, events);
  state = corr.apply(state, qubit_of(receiver));
  const double fid =
      fidelity_pure(build_secret(secret, qubit_of(receiver)), state);
  return ProtocolTranscript{receiver,         secret,
                            bell.outcome,     std::move(events),
                            std::move(corr),  fid,
                            seed_record};
}

}  // namespace

QubitId qubit_of(Agent a) {
  switch (a) {
    case Agent::Bob:
      return 'B';
    case Agent::Charlie:
      return 'C';
    case Agent::Diana:
      return 'D';
  }
  throw ProtocolError("unknown agent");
}

const char* to_string(Agent a) {
  switch (a) {
    case Agent::Bob:
      return "bob";
    case Agent::Charlie:
      return "charlie";
    case Agent::Diana:
      return "diana";
  }
  return "?";
}

std::optional<Agent> agent_from_string(const std::string& name) {
  for (Agent a : kAgents) {
    if (name == to_string(a)) return a;
  }
  return std::nullopt;
}

std::array<Agent, 2> helpers_of(Agent receiver) {
  switch (receiver) {
    case Agent::Bob:
      return {Agent::Charlie, Agent::Diana};
    case Agent::Charlie:
      return {Agent::Bob, Agent::Diana};
    case Agent::Diana:
      return {Agent::Bob, Agent::Charlie};
  }
  throw ProtocolError("unknown agent");
}

SecretSpec SecretSpec::from_amplitudes(cplx a, cplx b) {
  if (!std::isfinite(a.real()) || !std::isfinite(a.imag()) ||
      !std::isfinite(b.real()) || !std::isfinite(b.imag())) {
    throw ProtocolError("secret amplitudes must be finite");
  }
  const double norm = std::sqrt(std::norm(a) + std::norm(b));
  if (norm <= 1e-12) {
    throw ProtocolError("secret amplitudes are numerically null");
  }
  const double am = std::abs(a) / norm;
  if (am <= 1e-15) {
    return SecretSpec{cplx{0.0, 0.0}, cplx{1.0, 0.0}};
  }
  // Rotate the global phase so alpha lands on the positive real axis.
  const cplx rot = std::conj(a) / std::abs(a);
  return SecretSpec{cplx{am, 0.0}, b * rot / norm};
}

SecretSpec SecretSpec::from_lambda(cplx lambda) {
  if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag())) {
    throw ProtocolError("lambda must be finite");
  }
  const double inv = 1.0 / std::sqrt(1.0 + std::norm(lambda));
  return SecretSpec{cplx{inv, 0.0}, lambda * inv};
}

SecretSpec SecretSpec::haar_random(Rng& rng) {
  for (;;) {
    const cplx a{rng.normal(), rng.normal()};
    const cplx b{rng.normal(), rng.normal()};
    if (std::sqrt(std::norm(a) + std::norm(b)) > 1e-6) {
      return from_amplitudes(a, b);
    }
  }
}

std::optional<cplx> SecretSpec::lambda_view() const {
  if (alpha.real() <= 1e-12) return std::nullopt;
  return beta / alpha;
}

StateVector build_chi() {
  const double k = 0.5 / std::sqrt(2.0);
  std::vector<cplx> amps(16, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < 8; ++i) {
    amps[i] = cplx{k * kPhi0[i], 0.0};       // |0>_A phi0
    amps[8 + i] = cplx{k * kPhi1[i], 0.0};   // |1>_A phi1
  }
  return StateVector({'A', 'B', 'C', 'D'}, std::move(amps));
}

StateVector build_secret(const SecretSpec& spec, QubitId label) {
  return StateVector({label}, {spec.alpha, spec.beta});
}

StateVector compose_system(const StateVector& secret,
                           const StateVector& channel) {
  return tensor(secret, channel);
}

BellResult alice_bell_measure(const StateVector& system, const Selector& sel) {
  return measure_bell(system, 'S', 'A', sel);
}

StateVector analytic_collapse(BellOutcome o, const SecretSpec& spec) {
  std::vector<cplx> amps(8);
  for (std::size_t i = 0; i < 8; ++i) {
    const double p0 = 0.5 * kPhi0[i];
    const double p1 = 0.5 * kPhi1[i];
    switch (o) {
      case BellOutcome::PsiPlus:
        amps[i] = spec.alpha * p0 + spec.beta * p1;
        break;
      case BellOutcome::PsiMinus:
        amps[i] = spec.alpha * p0 - spec.beta * p1;
        break;
      case BellOutcome::PhiPlus:
        amps[i] = spec.alpha * p1 + spec.beta * p0;
        break;
      case BellOutcome::PhiMinus:
        amps[i] = spec.alpha * p1 - spec.beta * p0;
        break;
    }
  }
  return StateVector({'B', 'C', 'D'}, std::move(amps));
}

OutcomeClass outcome_class(BellOutcome o) {
  return (o == BellOutcome::PsiPlus || o == BellOutcome::PhiMinus)
             ? OutcomeClass::Plus
             : OutcomeClass::Minus;
}

DensityMatrix reduced_state(OutcomeClass cls, const SecretSpec& spec,
                            Agent agent) {
  const QubitId q = qubit_of(agent);
  if (agent != Agent::Diana) {
    return DensityMatrix({q}, {cplx{0.5, 0.0}, cplx{0.0, 0.0},
                               cplx{0.0, 0.0}, cplx{0.5, 0.0}});
  }
  const double t = spec.alpha.real() * spec.beta.imag();
  const double s = (cls == OutcomeClass::Plus) ? 1.0 : -1.0;
  return DensityMatrix({q}, {cplx{0.5, 0.0}, cplx{0.0, -s * t},
                             cplx{0.0, s * t}, cplx{0.5, 0.0}});
}

std::array<cplx, 4> Correction::matrix() const {
  std::array<cplx, 4> acc = gen_matrix(Gen::I);
  for (Gen g : word) acc = mat_mul(acc, gen_matrix(g));
  return acc;
}

std::string Correction::str() const {
  if (word.empty()) return "I";
  std::string out;
  for (Gen g : word) {
    switch (g) {
      case Gen::I:
        out += 'I';
        break;
      case Gen::X:
        out += 'X';
        break;
      case Gen::Z:
        out += 'Z';
        break;
      case Gen::H:
        out += 'H';
        break;
    }
  }
  return out;
}

StateVector Correction::apply(const StateVector& s, QubitId q) const {
  return apply_single(s, q, SingleQubitOp(matrix()));
}

bool phase_equal(const std::array<cplx, 4>& a, const std::array<cplx, 4>& b,
                 double tol) {
  cplx ov{0.0, 0.0};
  for (std::size_t i = 0; i < 4; ++i) ov += std::conj(a[i]) * b[i];
  const double mag = std::abs(ov);
  if (mag < tol) return false;
  const cplx rot = ov / mag;
  for (std::size_t i = 0; i < 4; ++i) {
    if (std::abs(rot * a[i] - b[i]) > tol) return false;
  }
  return true;
}

Correction correction_bob(BellOutcome bell, int c_out, int d_out) {
  check_outcome_bit(c_out);
  check_outcome_bit(d_out);
  return make_word(kBobTable[bell_index(bell)][c_out][d_out]);
}

Correction correction_diana_zz(BellOutcome bell, int b_out, int c_out) {
  check_outcome_bit(b_out);
  check_outcome_bit(c_out);
  return make_word(kDianaZZTable[bell_index(bell)][b_out ^ c_out]);
}

Correction correction_diana_x(BellOutcome bell, int x_out) {
  check_outcome_bit(x_out);
  return make_word(kDianaXTable[bell_index(bell)][x_out]);
}

ProtocolTranscript run_protocol(Agent receiver, const SecretSpec& secret,
                                const std::array<HelperPlan, 2>& helpers,
                                Rng& rng) {
  return run_impl(receiver, secret, helpers, nullptr, &rng, rng.seed());
}

ProtocolTranscript run_protocol_forced(Agent receiver,
                                       const SecretSpec& secret,
                                       const std::array<HelperPlan, 2>& helpers,
                                       const ForcedOutcomes& forced) {
  return run_impl(receiver, secret, helpers, &forced, nullptr, 0);
}

}  // namespace hqis
