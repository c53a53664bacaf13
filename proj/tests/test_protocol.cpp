#include "doctest.h"

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "hqis/protocol.hpp"

using namespace hqis;

namespace {

constexpr double kTol = 1e-12;

// The channel's sixteen amplitudes over {A,B,C,D}, written out from its
// definition: (|0>_A phi0 + |1>_A phi1)/sqrt(2) with
//   phi0 = (|000> - |011> - |101> + |110>)/2
//   phi1 = (|001> + |010> + |100> + |111>)/2
std::vector<cplx> expected_chi_amps() {
  const double u = 1.0 / (2.0 * std::sqrt(2.0));
  std::vector<cplx> amps(16, cplx{0.0, 0.0});
  amps[0b0000] = cplx{u, 0.0};
  amps[0b0011] = cplx{-u, 0.0};
  amps[0b0101] = cplx{-u, 0.0};
  amps[0b0110] = cplx{u, 0.0};
  amps[0b1001] = cplx{u, 0.0};
  amps[0b1010] = cplx{u, 0.0};
  amps[0b1100] = cplx{u, 0.0};
  amps[0b1111] = cplx{u, 0.0};
  return amps;
}

const std::array<SecretSpec, 4> kSecrets = {
    SecretSpec::from_lambda(cplx{0.0, 1.0}),
    SecretSpec::from_lambda(cplx{1.5, -0.5}),
    SecretSpec::from_lambda(cplx{2.0, 0.0}),
    SecretSpec::from_amplitudes(cplx{0.0, 0.0}, cplx{1.0, 0.0}),
};

std::array<HelperPlan, 2> z_helpers(Agent receiver) {
  const auto hs = helpers_of(receiver);
  return {HelperPlan{hs[0], Basis::Z, true}, HelperPlan{hs[1], Basis::Z, true}};
}

}  // namespace

TEST_CASE("channel state matches its written-out amplitudes") {
  const StateVector chi = build_chi();
  REQUIRE(chi.labels == std::vector<QubitId>{'A', 'B', 'C', 'D'});
  const std::vector<cplx> expected = expected_chi_amps();
  for (std::size_t i = 0; i < 16; ++i) {
    CAPTURE(i);
    CHECK(std::abs(chi.amps[i] - expected[i]) < kTol);
  }
  CHECK(chi.norm_sq() == doctest::Approx(1.0).epsilon(kTol));

  // Exchanging B and C leaves every amplitude in place.
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t d = 0; d < 2; ++d) {
          const std::size_t i = (a << 3) | (b << 2) | (c << 1) | d;
          const std::size_t j = (a << 3) | (c << 2) | (b << 1) | d;
          CHECK(chi.amps[i] == chi.amps[j]);
        }
      }
    }
  }

  // The two branch states are orthonormal, so the dealer cut carries
  // exactly one bit.
  CHECK(entanglement_entropy(chi, {'A'}) ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("secret canonicalization fixes the global phase") {
  const SecretSpec s =
      SecretSpec::from_amplitudes(cplx{0.0, 2.0}, cplx{2.0, 0.0});
  CHECK(s.alpha.imag() == 0.0);
  CHECK(s.alpha.real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(kTol));
  CHECK(std::abs(s.beta - cplx{0.0, -1.0 / std::sqrt(2.0)}) < kTol);
  const auto lv = s.lambda_view();
  REQUIRE(lv);
  CHECK(std::abs(*lv - cplx{0.0, -1.0}) < kTol);

  const SecretSpec via_lambda = SecretSpec::from_lambda(cplx{0.0, -1.0});
  CHECK(std::abs(via_lambda.alpha - s.alpha) < kTol);
  CHECK(std::abs(via_lambda.beta - s.beta) < kTol);

  // |1> pole: no finite lambda, beta pinned real positive.
  const SecretSpec pole =
      SecretSpec::from_amplitudes(cplx{0.0, 0.0}, cplx{0.0, -3.0});
  CHECK(pole.alpha == cplx{0.0, 0.0});
  CHECK(pole.beta == cplx{1.0, 0.0});
  CHECK_FALSE(pole.lambda_view());

  CHECK_THROWS_AS(SecretSpec::from_amplitudes(cplx{0.0, 0.0}, cplx{0.0, 0.0}),
                  ProtocolError);

  Rng rng(9);
  for (int i = 0; i < 16; ++i) {
    const SecretSpec h = SecretSpec::haar_random(rng);
    CHECK(std::norm(h.alpha) + std::norm(h.beta) ==
          doctest::Approx(1.0).epsilon(kTol));
    CHECK(h.alpha.imag() == 0.0);
    CHECK(h.alpha.real() >= 0.0);
  }
  Rng r1(13), r2(13);
  const SecretSpec a = SecretSpec::haar_random(r1);
  const SecretSpec b = SecretSpec::haar_random(r2);
  CHECK(a.alpha == b.alpha);
  CHECK(a.beta == b.beta);
}

TEST_CASE("five-qubit composition is the literal tensor product") {
  const SecretSpec spec = SecretSpec::from_lambda(cplx{0.0, 1.0});
  const StateVector system =
      compose_system(build_secret(spec, 'S'), build_chi());
  REQUIRE(system.labels == std::vector<QubitId>{'S', 'A', 'B', 'C', 'D'});

  const std::vector<cplx> chi = expected_chi_amps();
  const cplx a{1.0 / std::sqrt(2.0), 0.0};
  const cplx b{0.0, 1.0 / std::sqrt(2.0)};
  for (std::size_t i = 0; i < 16; ++i) {
    CAPTURE(i);
    CHECK(std::abs(system.amps[i] - a * chi[i]) < kTol);
    CHECK(std::abs(system.amps[16 + i] - b * chi[i]) < kTol);
  }

  CHECK_THROWS_AS(compose_system(build_secret(spec, 'A'), build_chi()),
                  LabelError);
}

TEST_CASE("every dealer outcome has probability exactly 1/4") {
  for (const SecretSpec& spec : kSecrets) {
    const StateVector system =
        compose_system(build_secret(spec, 'S'), build_chi());
    for (BellOutcome o : kBellOutcomes) {
      const auto r = try_bell_outcome(system, 'S', 'A', o);
      REQUIRE(r);
      CHECK(std::abs(r->prob - 0.25) < kTol);
    }
  }
}

TEST_CASE("projected collapse matches the analytic collapse") {
  Rng rng(77);
  std::vector<SecretSpec> pool(kSecrets.begin(), kSecrets.end());
  for (int i = 0; i < 8; ++i) pool.push_back(SecretSpec::haar_random(rng));

  for (const SecretSpec& spec : pool) {
    const StateVector system =
        compose_system(build_secret(spec, 'S'), build_chi());
    for (BellOutcome o : kBellOutcomes) {
      const auto r = try_bell_outcome(system, 'S', 'A', o);
      REQUIRE(r);
      const StateVector analytic = analytic_collapse(o, spec);
      REQUIRE(analytic.labels == std::vector<QubitId>{'B', 'C', 'D'});
      CHECK(analytic.norm_sq() == doctest::Approx(1.0).epsilon(kTol));
      CHECK(max_phase_aligned_deviation(r->collapsed, analytic) < kTol);
    }
  }
}

TEST_CASE("helper Z outcomes are uniform within every dealer branch") {
  const SecretSpec spec = SecretSpec::from_lambda(cplx{0.7, -0.2});
  for (BellOutcome o : kBellOutcomes) {
    const StateVector collapsed = analytic_collapse(o, spec);
    for (int b : {0, 1}) {
      const auto rb = try_measure_outcome(collapsed, 'B', Basis::Z, b);
      REQUIRE(rb);
      CHECK(std::abs(rb->prob - 0.5) < kTol);
      for (int c : {0, 1}) {
        const auto rc = try_measure_outcome(rb->collapsed, 'C', Basis::Z, c);
        REQUIRE(rc);
        CHECK(std::abs(rc->prob - 0.5) < kTol);
      }
    }
  }
}

TEST_CASE("outcome classes pair the dealer outcomes by sign structure") {
  CHECK(outcome_class(BellOutcome::PsiPlus) == OutcomeClass::Plus);
  CHECK(outcome_class(BellOutcome::PhiMinus) == OutcomeClass::Plus);
  CHECK(outcome_class(BellOutcome::PsiMinus) == OutcomeClass::Minus);
  CHECK(outcome_class(BellOutcome::PhiPlus) == OutcomeClass::Minus);
}

TEST_CASE("reduced single-agent states match the closed forms") {
  for (const SecretSpec& spec : kSecrets) {
    const double t = spec.alpha.real() * spec.beta.imag();
    for (OutcomeClass cls : {OutcomeClass::Plus, OutcomeClass::Minus}) {
      const double sign = (cls == OutcomeClass::Plus) ? 1.0 : -1.0;
      for (Agent agent : kAgents) {
        const DensityMatrix rho = reduced_state(cls, spec, agent);
        CHECK(std::abs(rho.at(0, 0) - 0.5) < kTol);
        CHECK(std::abs(rho.at(1, 1) - 0.5) < kTol);
        const cplx off = (agent == Agent::Diana)
                             ? cplx{0.0, -sign * t}
                             : cplx{0.0, 0.0};
        CHECK(std::abs(rho.at(0, 1) - off) < kTol);
        CHECK(std::abs(rho.at(1, 0) - std::conj(off)) < kTol);
      }
    }
  }

  // Real lambda leaves even the supervisor maximally mixed.
  const DensityMatrix flat = reduced_state(
      OutcomeClass::Plus, SecretSpec::from_lambda(cplx{2.0, 0.0}),
      Agent::Diana);
  CHECK(std::abs(flat.at(0, 1)) < kTol);

  // lambda = i maximizes the imbalance: the supervisor state is pure.
  const DensityMatrix pure = reduced_state(
      OutcomeClass::Plus, SecretSpec::from_lambda(cplx{0.0, 1.0}),
      Agent::Diana);
  CHECK(std::abs(pure.at(0, 1) - cplx{0.0, -0.5}) < kTol);
  const std::vector<double> eig = hermitian_eigenvalues(pure.m, 2);
  CHECK(eig[0] == doctest::Approx(0.0).epsilon(kTol));
  CHECK(eig[1] == doctest::Approx(1.0).epsilon(kTol));
}

TEST_CASE("correction words match their spot values") {
  CHECK(correction_bob(BellOutcome::PsiPlus, 0, 0).str() == "I");
  CHECK(correction_bob(BellOutcome::PsiPlus, 0, 1).str() == "XZ");
  CHECK(correction_bob(BellOutcome::PsiPlus, 1, 0).str() == "X");
  CHECK(correction_bob(BellOutcome::PsiPlus, 1, 1).str() == "Z");
  CHECK(correction_bob(BellOutcome::PsiMinus, 1, 0).str() == "XZ");
  CHECK(correction_bob(BellOutcome::PhiPlus, 0, 0).str() == "X");
  CHECK(correction_bob(BellOutcome::PhiMinus, 1, 1).str() == "X");

  // Parity is all that matters for the supervisor's ZZ table.
  for (BellOutcome o : kBellOutcomes) {
    CHECK(correction_diana_zz(o, 0, 1).str() == correction_diana_zz(o, 1, 0).str());
    CHECK(correction_diana_zz(o, 0, 0).str() == correction_diana_zz(o, 1, 1).str());
  }
  CHECK(correction_diana_zz(BellOutcome::PsiPlus, 0, 0).str() == "I");
  CHECK(correction_diana_zz(BellOutcome::PsiMinus, 0, 0).str() == "Z");
  CHECK(correction_diana_zz(BellOutcome::PsiMinus, 0, 1).str() == "X");
  CHECK(correction_diana_zz(BellOutcome::PhiMinus, 1, 0).str() == "I");

  CHECK(correction_diana_x(BellOutcome::PsiPlus, 0).str() == "XH");
  CHECK(correction_diana_x(BellOutcome::PhiPlus, 0).str() == "H");
  CHECK(correction_diana_x(BellOutcome::PsiMinus, 0).str() == "XZH");
  CHECK(correction_diana_x(BellOutcome::PhiMinus, 1).str() == "XH");

  // Word order: "XZ" means apply Z first, then X.
  const std::array<cplx, 4> xz = correction_bob(BellOutcome::PsiPlus, 0, 1)
                                     .matrix();
  const std::array<cplx, 4> expect = {cplx{0.0, 0.0}, cplx{-1.0, 0.0},
                                      cplx{1.0, 0.0}, cplx{0.0, 0.0}};
  CHECK(phase_equal(xz, expect, kTol));
  const StateVector flipped = correction_bob(BellOutcome::PsiPlus, 0, 1)
                                  .apply(StateVector::basis("B", 0), 'B');
  CHECK(std::abs(std::abs(flipped.amps[1]) - 1.0) < kTol);
}

TEST_CASE("forced branches reconstruct exactly for every receiver") {
  for (Agent receiver : kAgents) {
    const auto plans = z_helpers(receiver);
    for (const SecretSpec& spec : kSecrets) {
      for (BellOutcome bell : kBellOutcomes) {
        for (int o1 : {0, 1}) {
          for (int o2 : {0, 1}) {
            CAPTURE(to_string(receiver));
            CAPTURE(to_string(bell));
            const ProtocolTranscript t = run_protocol_forced(
                receiver, spec, plans, ForcedOutcomes{bell, o1, o2});
            CHECK(std::abs(t.fidelity - 1.0) < kTol);
            CHECK(t.bell == bell);
            CHECK(t.receiver == receiver);
            REQUIRE(t.helper_events.size() == 2);
            CHECK(t.helper_events[0].outcome == o1);
            CHECK(t.helper_events[1].outcome == o2);
            CHECK(t.rng_seed == 0);
          }
        }
      }
    }
  }
}

TEST_CASE("transcript corrections agree with the tables") {
  const SecretSpec spec = SecretSpec::from_lambda(cplx{0.4, 0.9});
  for (BellOutcome bell : kBellOutcomes) {
    for (int o1 : {0, 1}) {
      for (int o2 : {0, 1}) {
        const ProtocolTranscript bob = run_protocol_forced(
            Agent::Bob, spec, z_helpers(Agent::Bob),
            ForcedOutcomes{bell, o1, o2});
        CHECK(bob.correction.str() == correction_bob(bell, o1, o2).str());

        const ProtocolTranscript diana = run_protocol_forced(
            Agent::Diana, spec, z_helpers(Agent::Diana),
            ForcedOutcomes{bell, o1, o2});
        CHECK(diana.correction.str() ==
              correction_diana_zz(bell, o1, o2).str());
      }
    }
  }
}

TEST_CASE("supervisor recovers from a single X helper, either one") {
  for (const SecretSpec& spec : kSecrets) {
    for (BellOutcome bell : kBellOutcomes) {
      for (int x_out : {0, 1}) {
        for (int idle_out : {0, 1}) {
          const ProtocolTranscript via_b = run_protocol_forced(
              Agent::Diana, spec,
              {HelperPlan{Agent::Bob, Basis::X, true},
               HelperPlan{Agent::Charlie, Basis::Z, false}},
              ForcedOutcomes{bell, x_out, idle_out});
          CHECK(std::abs(via_b.fidelity - 1.0) < kTol);
          CHECK(via_b.correction.str() ==
                correction_diana_x(bell, x_out).str());

          const ProtocolTranscript via_c = run_protocol_forced(
              Agent::Diana, spec,
              {HelperPlan{Agent::Bob, Basis::Z, false},
               HelperPlan{Agent::Charlie, Basis::X, true}},
              ForcedOutcomes{bell, idle_out, x_out});
          CHECK(std::abs(via_c.fidelity - 1.0) < kTol);
        }
      }
    }
  }
}

TEST_CASE("X helpers agree branch by branch") {
  const std::array<HelperPlan, 2> xx = {
      HelperPlan{Agent::Bob, Basis::X, true},
      HelperPlan{Agent::Charlie, Basis::X, true}};
  const SecretSpec spec = SecretSpec::from_lambda(cplx{-0.3, 0.8});
  for (BellOutcome bell : kBellOutcomes) {
    for (int x : {0, 1}) {
      const ProtocolTranscript t = run_protocol_forced(
          Agent::Diana, spec, xx, ForcedOutcomes{bell, x, x});
      CHECK(std::abs(t.fidelity - 1.0) < kTol);
    }
    // Anticorrelated X outcomes have probability zero.
    CHECK_THROWS_AS(run_protocol_forced(Agent::Diana, spec, xx,
                                        ForcedOutcomes{bell, 0, 1}),
                    ImpossibleOutcomeError);
  }
}

TEST_CASE("cooperation patterns that cannot reconstruct are rejected") {
  const SecretSpec spec = SecretSpec::from_lambda(cplx{1.0, 0.0});
  const ForcedOutcomes f{BellOutcome::PsiPlus, 0, 0};

  // Bob needs both outcomes, in Z.
  CHECK_THROWS_AS(run_protocol_forced(
                      Agent::Bob, spec,
                      {HelperPlan{Agent::Charlie, Basis::Z, true},
                       HelperPlan{Agent::Diana, Basis::Z, false}},
                      f),
                  InvalidCoalitionError);
  CHECK_THROWS_AS(run_protocol_forced(
                      Agent::Bob, spec,
                      {HelperPlan{Agent::Charlie, Basis::X, true},
                       HelperPlan{Agent::Diana, Basis::Z, true}},
                      f),
                  InvalidCoalitionError);

  // Helper plans must cover exactly the non-receivers, in register order.
  CHECK_THROWS_AS(run_protocol_forced(
                      Agent::Bob, spec,
                      {HelperPlan{Agent::Diana, Basis::Z, true},
                       HelperPlan{Agent::Charlie, Basis::Z, true}},
                      f),
                  InvalidCoalitionError);
  CHECK_THROWS_AS(run_protocol_forced(
                      Agent::Bob, spec,
                      {HelperPlan{Agent::Bob, Basis::Z, true},
                       HelperPlan{Agent::Diana, Basis::Z, true}},
                      f),
                  InvalidCoalitionError);

  // Diana: no outcomes, a lone Z outcome, or mixed bases are not enough.
  CHECK_THROWS_AS(run_protocol_forced(
                      Agent::Diana, spec,
                      {HelperPlan{Agent::Bob, Basis::Z, false},
                       HelperPlan{Agent::Charlie, Basis::Z, false}},
                      f),
                  InvalidCoalitionError);
  CHECK_THROWS_AS(run_protocol_forced(
                      Agent::Diana, spec,
                      {HelperPlan{Agent::Bob, Basis::Z, true},
                       HelperPlan{Agent::Charlie, Basis::Z, false}},
                      f),
                  InvalidCoalitionError);
  CHECK_THROWS_AS(run_protocol_forced(
                      Agent::Diana, spec,
                      {HelperPlan{Agent::Bob, Basis::Z, true},
                       HelperPlan{Agent::Charlie, Basis::X, true}},
                      f),
                  InvalidCoalitionError);
}

TEST_CASE("sampled rounds always reconstruct and are seed-deterministic") {
  Rng secret_rng(101);
  for (int i = 0; i < 20; ++i) {
    const SecretSpec spec = SecretSpec::haar_random(secret_rng);
    Rng rng(derive_seed(55, static_cast<std::uint64_t>(i)));
    const ProtocolTranscript t =
        run_protocol(Agent::Bob, spec, z_helpers(Agent::Bob), rng);
    CHECK(std::abs(t.fidelity - 1.0) < kTol);
  }

  const SecretSpec spec = SecretSpec::from_lambda(cplx{0.2, 0.6});
  Rng r1(99), r2(99);
  const ProtocolTranscript a =
      run_protocol(Agent::Diana, spec, z_helpers(Agent::Diana), r1);
  const ProtocolTranscript b =
      run_protocol(Agent::Diana, spec, z_helpers(Agent::Diana), r2);
  CHECK(a.bell == b.bell);
  REQUIRE(a.helper_events.size() == 2);
  CHECK(a.helper_events[0].outcome == b.helper_events[0].outcome);
  CHECK(a.helper_events[1].outcome == b.helper_events[1].outcome);
  CHECK(a.correction.str() == b.correction.str());
  CHECK(a.fidelity == b.fidelity);
}

TEST_CASE("agent naming round-trips") {
  for (Agent a : kAgents) {
    const auto back = agent_from_string(to_string(a));
    REQUIRE(back);
    CHECK(*back == a);
  }
  CHECK_FALSE(agent_from_string("alice"));
  CHECK(qubit_of(Agent::Bob) == 'B');
  CHECK(qubit_of(Agent::Charlie) == 'C');
  CHECK(qubit_of(Agent::Diana) == 'D');
  CHECK(helpers_of(Agent::Bob) ==
        std::array<Agent, 2>{Agent::Charlie, Agent::Diana});
  CHECK(helpers_of(Agent::Charlie) ==
        std::array<Agent, 2>{Agent::Bob, Agent::Diana});
  CHECK(helpers_of(Agent::Diana) ==
        std::array<Agent, 2>{Agent::Bob, Agent::Charlie});

  for (BellOutcome o : kBellOutcomes) {
    const auto back = bell_from_string(to_string(o));
    REQUIRE(back);
    CHECK(*back == o);
  }
  CHECK_FALSE(bell_from_string("Psi"));
}
