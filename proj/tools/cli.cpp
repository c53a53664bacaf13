#include "cli.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

#include "hqis/access_audit.hpp"

namespace hqis::cli {

namespace {

using nlohmann::json;

std::string fnum(double v, int prec = 12) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
  return buf;
}

std::string fcplx(const cplx& z) {
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%.6g%+.6gi", z.real(), z.imag());
  return buf;
}

double parse_real_strict(const std::string& s) {
  if (s.empty()) {
    throw std::invalid_argument("empty number in complex literal");
  }
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number \"" + s + "\" in complex literal");
  }
  if (pos != s.size()) {
    throw std::invalid_argument("trailing characters in \"" + s + "\"");
  }
  return v;
}

json complex_json(const cplx& z) { return json::array({z.real(), z.imag()}); }

json secret_json(const SecretSpec& s) {
  json j;
  j["alpha"] = complex_json(s.alpha);
  j["beta"] = complex_json(s.beta);
  const auto lv = s.lambda_view();
  j["lambda"] = lv ? complex_json(*lv) : json();
  return j;
}

json transcript_json(const ProtocolTranscript& t) {
  json events = json::array();
  for (const HelperEvent& e : t.helper_events) {
    events.push_back({
        {"agent", to_string(e.agent)},
        {"basis", to_string(e.basis)},
        {"outcome", e.outcome},
        {"delivered", e.delivered},
    });
  }
  return json{
      {"receiver", to_string(t.receiver)},
      {"secret", secret_json(t.secret)},
      {"bell", to_string(t.bell)},
      {"helper_events", std::move(events)},
      {"correction", t.correction.str()},
      {"fidelity", t.fidelity},
      {"rng_seed", t.rng_seed},
  };
}

bool write_json_file(const std::string& path, const json& j,
                     std::ostream& err) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    err << "error: cannot open \"" << path << "\" for writing\n";
    return false;
  }
  f << j.dump(2) << "\n";
  f.flush();
  if (!f) {
    err << "error: failed while writing \"" << path << "\"\n";
    return false;
  }
  return true;
}

struct SuiteResult {
  std::string name;
  std::size_t total = 0;
  std::size_t passed = 0;
  double max_error = 0.0;
  std::string first_failure;
};

void record(SuiteResult& r, double error, double tol,
            const std::string& desc) {
  ++r.total;
  r.max_error = std::max(r.max_error, error);
  if (error <= tol) {
    ++r.passed;
  } else if (r.first_failure.empty()) {
    r.first_failure = desc;
  }
}

std::string branch_desc(Agent receiver, BellOutcome bell, int o1, int o2,
                        std::size_t si) {
  std::ostringstream os;
  os << "receiver=" << to_string(receiver) << " bell=" << to_string(bell)
     << " outcomes=" << o1 << o2 << " secret#" << si;
  return os.str();
}

}  // namespace

cplx parse_complex(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  }
  if (s.empty()) throw std::invalid_argument("empty complex literal");
  const bool has_j = (s.back() == 'j' || s.back() == 'J');
  if (!has_j) return cplx{parse_real_strict(s), 0.0};
  s.pop_back();

  // Last sign that is neither leading nor an exponent sign splits the
  // real part from the imaginary part.
  std::size_t split = std::string::npos;
  for (std::size_t i = s.size(); i-- > 1;) {
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split == std::string::npos) {
    if (s.empty() || s == "+") return cplx{0.0, 1.0};
    if (s == "-") return cplx{0.0, -1.0};
    return cplx{0.0, parse_real_strict(s)};
  }
  const std::string re = s.substr(0, split);
  std::string im = s.substr(split);
  if (im == "+") im = "1";
  if (im == "-") im = "-1";
  return cplx{parse_real_strict(re), parse_real_strict(im)};
}

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  const auto recv = agent_from_string(opt.receiver);
  if (!recv) {
    err << "error: unknown receiver \"" << opt.receiver << "\"\n";
    return kExitUsage;
  }

  SecretSpec secret{cplx{1.0, 0.0}, cplx{0.0, 0.0}};
  try {
    if (opt.alpha || opt.beta) {
      if (!opt.alpha || !opt.beta) {
        err << "error: --alpha and --beta must be given together\n";
        return kExitUsage;
      }
      if (opt.lambda) {
        err << "error: --lambda conflicts with --alpha/--beta\n";
        return kExitUsage;
      }
      secret = SecretSpec::from_amplitudes(parse_complex(*opt.alpha),
                                           parse_complex(*opt.beta));
    } else if (opt.lambda) {
      secret = SecretSpec::from_lambda(parse_complex(*opt.lambda));
    } else {
      err << "error: a secret is required (--lambda or --alpha/--beta)\n";
      return kExitUsage;
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ProtocolError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (opt.shots == 0) {
    err << "error: --shots must be >= 1\n";
    return kExitUsage;
  }

  const auto parse_basis = [](const std::string& name) -> std::optional<Basis> {
    if (name == "z") return Basis::Z;
    if (name == "x") return Basis::X;
    return std::nullopt;
  };
  const auto bb = parse_basis(opt.basis_b);
  const auto bc = parse_basis(opt.basis_c);
  if (!bb) {
    err << "error: --basis-b must be z or x\n";
    return kExitUsage;
  }
  if (!bc) {
    err << "error: --basis-c must be z or x\n";
    return kExitUsage;
  }

  std::array<bool, 3> dropped{false, false, false};
  for (const std::string& name : opt.drop) {
    const auto a = agent_from_string(name);
    if (!a) {
      err << "error: unknown agent in --drop: \"" << name << "\"\n";
      return kExitUsage;
    }
    dropped[static_cast<std::size_t>(*a)] = true;
  }
  if (dropped[static_cast<std::size_t>(*recv)]) {
    err << "error: the receiver cannot be dropped\n";
    return kExitUsage;
  }

  const auto hs = helpers_of(*recv);
  std::array<HelperPlan, 2> plans;
  for (std::size_t k = 0; k < 2; ++k) {
    const Agent a = hs[k];
    Basis b = Basis::Z;
    if (a == Agent::Bob) b = *bb;
    if (a == Agent::Charlie) b = *bc;
    plans[k] = HelperPlan{a, b, !dropped[static_cast<std::size_t>(a)]};
  }

  std::vector<ProtocolTranscript> transcripts;
  transcripts.reserve(opt.shots);
  try {
    for (std::size_t i = 0; i < opt.shots; ++i) {
      Rng rng(derive_seed(opt.seed, i));
      transcripts.push_back(run_protocol(*recv, secret, plans, rng));
    }
  } catch (const InvalidCoalitionError& e) {
    err << "error: invalid scenario: " << e.what() << "\n";
    return kExitUsage;
  }

  std::array<std::size_t, 4> bell_counts{};
  double fid_sum = 0.0;
  double fid_min = 2.0;
  std::size_t below = 0;
  for (const auto& t : transcripts) {
    bell_counts[static_cast<std::size_t>(t.bell)]++;
    fid_sum += t.fidelity;
    fid_min = std::min(fid_min, t.fidelity);
    if (t.fidelity < 1.0 - opt.tolerance) ++below;
  }
  const double mean_fid = fid_sum / static_cast<double>(transcripts.size());
  const double expected = static_cast<double>(opt.shots) / 4.0;
  double chi2 = 0.0;
  for (std::size_t c : bell_counts) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }

  out << "run: receiver=" << to_string(*recv) << " shots=" << opt.shots
      << " seed=" << opt.seed << "\n";
  out << "secret: alpha=" << fcplx(secret.alpha)
      << " beta=" << fcplx(secret.beta) << " lambda=";
  if (const auto lv = secret.lambda_view()) {
    out << fcplx(*lv);
  } else {
    out << "none";
  }
  out << "\n";
  out << "helpers:";
  for (const HelperPlan& p : plans) {
    out << " " << to_string(p.agent) << "(basis=" << to_string(p.basis)
        << (p.delivered ? "" : ", dropped") << ")";
  }
  out << "\n";
  out << "bell outcomes:";
  for (std::size_t b = 0; b < 4; ++b) {
    out << " " << to_string(kBellOutcomes[b]) << "=" << bell_counts[b];
  }
  out << "\n";
  out << "mean_fidelity=" << fnum(mean_fid) << " min_fidelity="
      << fnum(fid_min) << "\n";
  out << "shots_below_tolerance=" << below
      << " (tolerance=" << fnum(opt.tolerance, 6) << ")\n";
  out << "chi_square=" << fnum(chi2, 6) << " (3 dof, threshold "
      << fnum(kChiSqCrit3Dof, 6) << ")\n";

  if (!opt.json_path.empty()) {
    json config{
        {"command", "run"},
        {"receiver", to_string(*recv)},
        {"secret", secret_json(secret)},
        {"basis_b", opt.basis_b},
        {"basis_c", opt.basis_c},
        {"drop", json(opt.drop)},
        {"shots", opt.shots},
        {"seed", opt.seed},
        {"tolerance", opt.tolerance},
    };
    json ts = json::array();
    if (opt.shots <= 256) {
      for (const auto& t : transcripts) ts.push_back(transcript_json(t));
    }
    json histogram;
    for (std::size_t b = 0; b < 4; ++b) {
      histogram[to_string(kBellOutcomes[b])] = bell_counts[b];
    }
    const json report{
        {"config", std::move(config)},
        {"transcripts", std::move(ts)},
        {"summary",
         {{"mean_fidelity", mean_fid},
          {"min_fidelity", fid_min},
          {"outcome_histogram", std::move(histogram)},
          {"chi_square", chi2},
          {"shots_below_tolerance", below}}},
    };
    if (!write_json_file(opt.json_path, report, err)) return kExitUsage;
  }
  return kExitOk;
}

int cmd_verify(const VerifyOptions& opt, std::ostream& out,
               std::ostream& err) {
  if (opt.secrets == 0) {
    err << "error: --secrets must be >= 1\n";
    return kExitUsage;
  }
  const std::vector<SecretSpec> pool =
      audit::sample_secrets(opt.secrets, opt.seed);

  std::vector<SuiteResult> suites;

  // Bob / Charlie: all Bell outcomes x helper Z outcomes, per secret.
  for (Agent receiver : {Agent::Bob, Agent::Charlie}) {
    SuiteResult r;
    r.name = std::string(to_string(receiver)) + " branches";
    const auto hs = helpers_of(receiver);
    const std::array<HelperPlan, 2> plans{
        HelperPlan{hs[0], Basis::Z, true}, HelperPlan{hs[1], Basis::Z, true}};
    for (BellOutcome bell : kBellOutcomes) {
      for (int o1 : {0, 1}) {
        for (int o2 : {0, 1}) {
          for (std::size_t si = 0; si < pool.size(); ++si) {
            const double fid =
                run_protocol_forced(receiver, pool[si], plans,
                                    ForcedOutcomes{bell, o1, o2})
                    .fidelity;
            record(r, std::abs(1.0 - fid), opt.tolerance,
                   branch_desc(receiver, bell, o1, o2, si));
          }
        }
      }
    }
    suites.push_back(std::move(r));
  }

  {
    SuiteResult r;
    r.name = "diana-zz branches";
    const std::array<HelperPlan, 2> plans{
        HelperPlan{Agent::Bob, Basis::Z, true},
        HelperPlan{Agent::Charlie, Basis::Z, true}};
    for (BellOutcome bell : kBellOutcomes) {
      for (int o1 : {0, 1}) {
        for (int o2 : {0, 1}) {
          for (std::size_t si = 0; si < pool.size(); ++si) {
            const double fid =
                run_protocol_forced(Agent::Diana, pool[si], plans,
                                    ForcedOutcomes{bell, o1, o2})
                    .fidelity;
            record(r, std::abs(1.0 - fid), opt.tolerance,
                   branch_desc(Agent::Diana, bell, o1, o2, si));
          }
        }
      }
    }
    suites.push_back(std::move(r));
  }

  {
    // Each Diana-X branch is checked for both delivering helpers and both
    // outcomes of the dropped helper's (unused) Z measurement.
    SuiteResult r;
    r.name = "diana-x branches";
    for (BellOutcome bell : kBellOutcomes) {
      for (int x_out : {0, 1}) {
        for (std::size_t si = 0; si < pool.size(); ++si) {
          double worst = 0.0;
          for (bool bob_delivers : {true, false}) {
            for (int other_out : {0, 1}) {
              std::array<HelperPlan, 2> plans;
              ForcedOutcomes f{bell, 0, 0};
              if (bob_delivers) {
                plans = {HelperPlan{Agent::Bob, Basis::X, true},
                         HelperPlan{Agent::Charlie, Basis::Z, false}};
                f.first = x_out;
                f.second = other_out;
              } else {
                plans = {HelperPlan{Agent::Bob, Basis::Z, false},
                         HelperPlan{Agent::Charlie, Basis::X, true}};
                f.first = other_out;
                f.second = x_out;
              }
              const double fid =
                  run_protocol_forced(Agent::Diana, pool[si], plans, f)
                      .fidelity;
              worst = std::max(worst, std::abs(1.0 - fid));
            }
          }
          std::ostringstream desc;
          desc << "receiver=diana bell=" << to_string(bell)
               << " x_out=" << x_out << " secret#" << si;
          record(r, worst, opt.tolerance, desc.str());
        }
      }
    }
    suites.push_back(std::move(r));
  }

  {
    // Analytic single-agent states against the collapsed state's partial
    // trace.
    SuiteResult r;
    r.name = "density-matrix oracle";
    for (std::size_t si = 0; si < pool.size(); ++si) {
      for (BellOutcome bell : kBellOutcomes) {
        for (Agent agent : kAgents) {
          const DensityMatrix lhs =
              reduced_state(outcome_class(bell), pool[si], agent);
          const DensityMatrix rhs = partial_trace(
              analytic_collapse(bell, pool[si]), {qubit_of(agent)});
          std::ostringstream desc;
          desc << "reduced-state bell=" << to_string(bell)
               << " agent=" << to_string(agent) << " secret#" << si;
          record(r, lhs.max_deviation(rhs), opt.tolerance, desc.str());
        }
      }
    }
    suites.push_back(std::move(r));
  }

  bool all_ok = true;
  for (const SuiteResult& s : suites) {
    const bool ok = (s.passed == s.total);
    all_ok = all_ok && ok;
    out << s.passed << "/" << s.total << " " << s.name
        << (ok ? " OK" : " FAILED") << " (max error " << fnum(s.max_error, 3)
        << ")";
    if (!ok) out << " first failure: " << s.first_failure;
    out << "\n";
  }
  out << (all_ok ? "PASS" : "FAIL") << " tolerance=" << fnum(opt.tolerance, 6)
      << " secrets=" << opt.secrets << " seed=" << opt.seed << "\n";

  if (!opt.json_path.empty()) {
    json jsuites = json::array();
    for (const SuiteResult& s : suites) {
      jsuites.push_back({
          {"name", s.name},
          {"total", s.total},
          {"passed", s.passed},
          {"max_error", s.max_error},
          {"first_failure",
           s.first_failure.empty() ? json() : json(s.first_failure)},
      });
    }
    const json report{
        {"config",
         {{"command", "verify"},
          {"secrets", opt.secrets},
          {"seed", opt.seed},
          {"tolerance", opt.tolerance}}},
        {"summary", {{"pass", all_ok}, {"suites", std::move(jsuites)}}},
    };
    if (!write_json_file(opt.json_path, report, err)) return kExitUsage;
  }
  return all_ok ? kExitOk : kExitVerificationFailed;
}

std::string render_table(const std::string& which) {
  std::ostringstream os;
  const std::array<std::array<BellOutcome, 2>, 2> halves = {{
      {BellOutcome::PsiPlus, BellOutcome::PhiPlus},
      {BellOutcome::PsiMinus, BellOutcome::PhiMinus},
  }};
  if (which == "bob" || which == "charlie") {
    os << "# " << which << " corrections (helpers "
       << (which == "bob" ? "charlie, diana" : "bob, diana")
       << " in Z; outcome bits " << (which == "bob" ? "c d" : "b d") << ")\n";
    for (const auto& half : halves) {
      for (int o1 : {0, 1}) {
        for (int o2 : {0, 1}) {
          for (BellOutcome bell : half) {
            os << to_string(bell) << " " << o1 << o2 << " "
               << correction_bob(bell, o1, o2).str() << "\n";
          }
        }
      }
    }
    return os.str();
  }
  if (which == "diana-zz") {
    os << "# diana corrections (helpers bob, charlie in Z; outcome parity)\n";
    for (const auto& half : halves) {
      for (int parity : {0, 1}) {
        for (BellOutcome bell : half) {
          os << to_string(bell) << " " << (parity ? "differ" : "equal") << " "
             << correction_diana_zz(bell, 0, parity).str() << "\n";
        }
      }
    }
    return os.str();
  }
  if (which == "diana-x") {
    os << "# diana corrections (single helper X outcome)\n";
    for (const auto& half : halves) {
      for (int x : {0, 1}) {
        for (BellOutcome bell : half) {
          os << to_string(bell) << " " << (x ? "-" : "+") << " "
             << correction_diana_x(bell, x).str() << "\n";
        }
      }
    }
    return os.str();
  }
  throw std::invalid_argument("unknown table \"" + which +
                              "\" (expected bob, charlie, diana-zz, diana-x)");
}

int cmd_table(const std::string& which, std::ostream& out, std::ostream& err) {
  try {
    if (which.empty()) {
      out << render_table("bob") << "\n"
          << render_table("charlie") << "\n"
          << render_table("diana-zz") << "\n"
          << render_table("diana-x");
    } else {
      out << render_table(which);
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

int cmd_audit(const AuditOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.secrets == 0) {
    err << "error: --secrets must be >= 1\n";
    return kExitUsage;
  }
  std::vector<audit::AuditResult> results =
      audit::hierarchy_report(opt.secrets, opt.seed);
  std::stable_sort(results.begin(), results.end(),
                   [](const audit::AuditResult& a, const audit::AuditResult& b) {
                     return a.best_avg_fidelity > b.best_avg_fidelity;
                   });

  out << "access audit: secrets=" << opt.secrets << " seed=" << opt.seed
      << "\n";
  out << "rank  avg_fidelity  bases  coalition\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const audit::AuditResult& r = results[i];
    std::string bases;
    for (Basis b : r.best_strategy.bases) bases += (b == Basis::Z ? 'Z' : 'X');
    if (bases.empty()) bases = "-";
    char line[160];
    std::snprintf(line, sizeof(line), "%-5zu %-13.9f %-6s %s", i + 1,
                  r.best_avg_fidelity, bases.c_str(), r.coalition.str().c_str());
    out << line << "\n";
  }

  if (!opt.json_path.empty()) {
    json jresults = json::array();
    for (const audit::AuditResult& r : results) {
      json helpers = json::array();
      for (Agent h : r.coalition.helpers) helpers.push_back(to_string(h));
      json bases = json::array();
      for (Basis b : r.best_strategy.bases) bases.push_back(to_string(b));
      json recovery;
      for (const auto& [id, ang] : r.best_strategy.recovery) {
        recovery[audit::branch_name(id, r.coalition.helpers.size())] = {
            {"rz_after", ang.rz_after},
            {"ry", ang.ry},
            {"rz_before", ang.rz_before},
        };
      }
      jresults.push_back({
          {"coalition",
           {{"receiver", to_string(r.coalition.receiver)},
            {"helpers", std::move(helpers)}}},
          {"best_avg_fidelity", r.best_avg_fidelity},
          {"bases", std::move(bases)},
          {"recovery", std::move(recovery)},
          {"n_secret_samples", r.n_secret_samples},
          {"optimizer_iterations", r.optimizer_iterations},
      });
    }
    const json report{
        {"config",
         {{"command", "audit"},
          {"secrets", opt.secrets},
          {"seed", opt.seed}}},
        {"summary", {{"results", std::move(jresults)}}},
    };
    if (!write_json_file(opt.json_path, report, err)) return kExitUsage;
  }
  return kExitOk;
}

int cmd_sample(const SampleOptions& opt, std::ostream& out,
               std::ostream& err) {
  if (opt.shots == 0) {
    err << "error: --shots must be >= 1\n";
    return kExitUsage;
  }

  std::array<std::size_t, 4> bell_counts{};
  std::array<std::size_t, 16> joint_counts{};
  std::size_t x_anti = 0;

  for (std::size_t i = 0; i < opt.shots; ++i) {
    {
      // Z experiment: joint (Bell, b, c) frequencies.
      Rng rng(derive_seed(opt.seed, 2 * i));
      const SecretSpec secret = SecretSpec::haar_random(rng);
      const StateVector sys =
          compose_system(build_secret(secret, 'S'), build_chi());
      const BellResult bell = alice_bell_measure(sys, &rng);
      const MeasureResult b = measure(bell.collapsed, 'B', Basis::Z, &rng);
      const MeasureResult c = measure(b.collapsed, 'C', Basis::Z, &rng);
      bell_counts[static_cast<std::size_t>(bell.outcome)]++;
      joint_counts[static_cast<std::size_t>(bell.outcome) * 4 +
                   static_cast<std::size_t>(b.outcome) * 2 +
                   static_cast<std::size_t>(c.outcome)]++;
    }
    {
      // X experiment: helper outcomes must never anticorrelate.
      Rng rng(derive_seed(opt.seed, 2 * i + 1));
      const SecretSpec secret = SecretSpec::haar_random(rng);
      const StateVector sys =
          compose_system(build_secret(secret, 'S'), build_chi());
      const BellResult bell = alice_bell_measure(sys, &rng);
      const MeasureResult b = measure(bell.collapsed, 'B', Basis::X, &rng);
      const MeasureResult c = measure(b.collapsed, 'C', Basis::X, &rng);
      if (b.outcome != c.outcome) ++x_anti;
    }
  }

  const double e_bell = static_cast<double>(opt.shots) / 4.0;
  double chi2_bell = 0.0;
  for (std::size_t c : bell_counts) {
    const double d = static_cast<double>(c) - e_bell;
    chi2_bell += d * d / e_bell;
  }
  const double e_joint = static_cast<double>(opt.shots) / 16.0;
  double chi2_joint = 0.0;
  for (std::size_t c : joint_counts) {
    const double d = static_cast<double>(c) - e_joint;
    chi2_joint += d * d / e_joint;
  }

  out << "sample: shots=" << opt.shots << " seed=" << opt.seed << "\n";
  out << "bell histogram (Z experiment):";
  for (std::size_t b = 0; b < 4; ++b) {
    out << " " << to_string(kBellOutcomes[b]) << "=" << bell_counts[b];
  }
  out << "\n";
  out << "chi_square_bell=" << fnum(chi2_bell, 6) << " (3 dof, threshold "
      << fnum(kChiSqCrit3Dof, 6) << ")\n";
  out << "chi_square_joint=" << fnum(chi2_joint, 6) << " (15 dof, threshold "
      << fnum(kChiSqCrit15Dof, 6) << ")\n";
  out << "x_anticorrelations=" << x_anti << " (must be 0)\n";

  if (!opt.json_path.empty()) {
    json bell_hist;
    for (std::size_t b = 0; b < 4; ++b) {
      bell_hist[to_string(kBellOutcomes[b])] = bell_counts[b];
    }
    json joint_hist;
    for (std::size_t b = 0; b < 4; ++b) {
      for (std::size_t o = 0; o < 4; ++o) {
        std::string key = to_string(kBellOutcomes[b]);
        key += '|';
        key += ('0' + ((o >> 1) & 1));
        key += ('0' + (o & 1));
        joint_hist[key] = joint_counts[b * 4 + o];
      }
    }
    const json report{
        {"config",
         {{"command", "sample"}, {"shots", opt.shots}, {"seed", opt.seed}}},
        {"summary",
         {{"bell_histogram", std::move(bell_hist)},
          {"joint_histogram", std::move(joint_hist)},
          {"chi_square_bell", chi2_bell},
          {"chi_square_joint", chi2_joint},
          {"x_anticorrelations", x_anti}}},
    };
    if (!write_json_file(opt.json_path, report, err)) return kExitUsage;
  }
  return kExitOk;
}

int run_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  CLI::App app{
      "state-vector simulator and verifier for hierarchical quantum "
      "information splitting over the four-qubit chi channel"};
  app.require_subcommand(1);

  RunOptions ro;
  VerifyOptions vo;
  AuditOptions ao;
  SampleOptions so;
  std::string table_which;

  CLI::App* run = app.add_subcommand("run", "execute sampled protocol rounds");
  run->add_option("--receiver", ro.receiver, "receiving agent: bob|charlie|diana")
      ->capture_default_str();
  run->add_option("--lambda", ro.lambda,
                  "secret as lambda, complex like 1.5-0.5j");
  run->add_option("--alpha", ro.alpha, "secret amplitude of |0>");
  run->add_option("--beta", ro.beta, "secret amplitude of |1>");
  run->add_option("--basis-b", ro.basis_b, "bob's basis when helping: z|x")
      ->capture_default_str();
  run->add_option("--basis-c", ro.basis_c, "charlie's basis when helping: z|x")
      ->capture_default_str();
  run->add_option("--drop", ro.drop,
                  "withhold this agent's outcome from the receiver "
                  "(repeatable)");
  run->add_option("--shots", ro.shots, "independent rounds")
      ->capture_default_str();
  run->add_option("--seed", ro.seed, "master RNG seed")->capture_default_str();
  run->add_option("--tolerance", ro.tolerance, "fidelity shortfall tolerance")
      ->capture_default_str();
  run->add_option("--json", ro.json_path, "write a JSON report to this path");

  CLI::App* verify = app.add_subcommand(
      "verify", "exhaustive branch verification of the correction tables");
  verify->add_option("--secrets", vo.secrets, "random secrets per branch")
      ->capture_default_str();
  verify->add_option("--seed", vo.seed, "master RNG seed")
      ->capture_default_str();
  verify->add_option("--tolerance", vo.tolerance, "fidelity tolerance")
      ->capture_default_str();
  verify->add_option("--json", vo.json_path, "write a JSON report to this path");

  CLI::App* table = app.add_subcommand("table", "print correction tables");
  table->add_option("which", table_which,
                    "bob|charlie|diana-zz|diana-x (default: all)");

  CLI::App* auditcmd = app.add_subcommand(
      "audit", "rank coalitions by best achievable reconstruction fidelity");
  auditcmd->add_option("--secrets", ao.secrets, "secret pool size")
      ->capture_default_str();
  auditcmd->add_option("--seed", ao.seed, "master RNG seed")
      ->capture_default_str();
  auditcmd->add_option("--json", ao.json_path,
                       "write a JSON report to this path");

  CLI::App* sample = app.add_subcommand(
      "sample", "sampled branch statistics against the analytic distribution");
  sample->add_option("--shots", so.shots, "sampling rounds per experiment")
      ->capture_default_str();
  sample->add_option("--seed", so.seed, "master RNG seed")
      ->capture_default_str();
  sample->add_option("--json", so.json_path,
                     "write a JSON report to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e, out, err);
    }
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(ro, out, err);
    if (verify->parsed()) return cmd_verify(vo, out, err);
    if (table->parsed()) return cmd_table(table_which, out, err);
    if (auditcmd->parsed()) return cmd_audit(ao, out, err);
    if (sample->parsed()) return cmd_sample(so, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  err << "error: a subcommand is required\n";
  return kExitUsage;
}

}  // namespace hqis::cli
