#include "hqis/qmath.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace hqis {

namespace {

constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;

std::string label_string(const std::vector<QubitId>& labels) {
  return std::string(labels.begin(), labels.end());
}

void check_unique(const std::vector<QubitId>& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      if (labels[i] == labels[j]) {
        throw LabelError(std::string("duplicate qubit label '") + labels[i] +
                         "'");
      }
    }
  }
}

// Insert one bit at bit-shift `shift` (counted from the least significant
// end) into a compressed index.
std::size_t insert_bit(std::size_t j, int bit, std::size_t shift) {
  const std::size_t low = j & ((std::size_t{1} << shift) - 1);
  const std::size_t high = j >> shift;
  return (high << (shift + 1)) | (std::size_t(bit) << shift) | low;
}

int bit_at(std::size_t index, std::size_t position, std::size_t n) {
  return static_cast<int>((index >> (n - 1 - position)) & 1u);
}

// Projection of `s` onto single-qubit basis vector `v` at label q: the
// unnormalized collapsed amplitudes and the outcome probability.
struct Projection {
  std::vector<cplx> raw;
  double prob;
};

Projection project_out(const StateVector& s, std::size_t pos,
                       const std::array<cplx, 2>& v) {
  const std::size_t n = s.num_qubits();
  const std::size_t shift = n - 1 - pos;
  const std::size_t rdim = s.dim() / 2;
  Projection p;
  p.raw.assign(rdim, cplx{0.0, 0.0});
  for (std::size_t j = 0; j < rdim; ++j) {
    p.raw[j] = std::conj(v[0]) * s.amps[insert_bit(j, 0, shift)] +
               std::conj(v[1]) * s.amps[insert_bit(j, 1, shift)];
  }
  p.prob = 0.0;
  for (const cplx& a : p.raw) p.prob += std::norm(a);
  return p;
}

std::vector<QubitId> labels_without(const std::vector<QubitId>& labels,
                                    std::size_t pos) {
  std::vector<QubitId> out;
  out.reserve(labels.size() - 1);
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (k != pos) out.push_back(labels[k]);
  }
  return out;
}

StateVector collapse_from(Projection&& p, std::vector<QubitId> labels) {
  const double inv = 1.0 / std::sqrt(p.prob);
  for (cplx& a : p.raw) a *= inv;
  return StateVector(std::move(labels), std::move(p.raw));
}

void check_orthonormal(const std::array<cplx, 2>& v0,
                       const std::array<cplx, 2>& v1) {
  const double n0 = std::norm(v0[0]) + std::norm(v0[1]);
  const double n1 = std::norm(v1[0]) + std::norm(v1[1]);
  const cplx ov = std::conj(v0[0]) * v1[0] + std::conj(v0[1]) * v1[1];
  if (std::abs(n0 - 1.0) > 1e-10 || std::abs(n1 - 1.0) > 1e-10 ||
      std::abs(ov) > 1e-10) {
    throw QmathError("measurement basis is not orthonormal");
  }
}

std::array<std::array<cplx, 2>, 2> basis_vectors(Basis b) {
  if (b == Basis::Z) {
    return {{{cplx{1.0, 0.0}, cplx{0.0, 0.0}},
             {cplx{0.0, 0.0}, cplx{1.0, 0.0}}}};
  }
  return {{{cplx{kInvSqrt2, 0.0}, cplx{kInvSqrt2, 0.0}},
           {cplx{kInvSqrt2, 0.0}, cplx{-kInvSqrt2, 0.0}}}};
}

// Bell coefficients over |b1 b2>, indexed by 2*b1 + b2.
std::array<cplx, 4> bell_coeffs(BellOutcome o) {
  switch (o) {
    case BellOutcome::PsiPlus:
      return {cplx{kInvSqrt2, 0.0}, 0.0, 0.0, cplx{kInvSqrt2, 0.0}};
    case BellOutcome::PsiMinus:
      return {cplx{kInvSqrt2, 0.0}, 0.0, 0.0, cplx{-kInvSqrt2, 0.0}};
    case BellOutcome::PhiPlus:
      return {0.0, cplx{kInvSqrt2, 0.0}, cplx{kInvSqrt2, 0.0}, 0.0};
    case BellOutcome::PhiMinus:
      return {0.0, cplx{kInvSqrt2, 0.0}, cplx{-kInvSqrt2, 0.0}, 0.0};
  }
  throw QmathError("unknown Bell outcome");
}

// Unnormalized projection onto one Bell vector at positions (k1, k2).
Projection project_bell(const StateVector& s, std::size_t k1, std::size_t k2,
                        BellOutcome o) {
  const std::size_t n = s.num_qubits();
  const auto c = bell_coeffs(o);
  Projection p;
  p.raw.assign(s.dim() / 4, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < s.dim(); ++i) {
    const int b1 = bit_at(i, k1, n);
    const int b2 = bit_at(i, k2, n);
    const cplx coeff = c[std::size_t(b1 * 2 + b2)];
    if (coeff == cplx{0.0, 0.0}) continue;
    std::size_t j = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == k1 || k == k2) continue;
      j = (j << 1) | std::size_t(bit_at(i, k, n));
    }
    p.raw[j] += std::conj(coeff) * s.amps[i];
  }
  p.prob = 0.0;
  for (const cplx& a : p.raw) p.prob += std::norm(a);
  return p;
}

}  // namespace

StateVector::StateVector(std::vector<QubitId> labels_in,
                         std::vector<cplx> amps_in)
    : labels(std::move(labels_in)), amps(std::move(amps_in)) {
  check_unique(labels);
  if (labels.size() > 8) {
    throw QmathError("registers wider than 8 qubits are unsupported");
  }
  if (amps.size() != (std::size_t{1} << labels.size())) {
    throw QmathError("amplitude count does not match register width");
  }
  for (const cplx& a : amps) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      throw QmathError("non-finite amplitude");
    }
  }
}

StateVector StateVector::basis(const std::string& labels_in,
                               std::size_t index) {
  std::vector<QubitId> ls(labels_in.begin(), labels_in.end());
  std::vector<cplx> amps(std::size_t{1} << ls.size(), cplx{0.0, 0.0});
  if (index >= amps.size()) throw QmathError("basis index out of range");
  amps[index] = cplx{1.0, 0.0};
  return StateVector(std::move(ls), std::move(amps));
}

int StateVector::position(QubitId q) const {
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] == q) return static_cast<int>(k);
  }
  return -1;
}

std::size_t StateVector::position_checked(QubitId q) const {
  const int p = position(q);
  if (p < 0) {
    throw LabelError(std::string("label '") + q + "' not in register \"" +
                     label_string(labels) + "\"");
  }
  return static_cast<std::size_t>(p);
}

double StateVector::norm_sq() const {
  double n = 0.0;
  for (const cplx& a : amps) n += std::norm(a);
  return n;
}

StateVector StateVector::normalized() const {
  const double n = norm_sq();
  if (n <= kProbFloor) throw QmathError("cannot normalize a null vector");
  StateVector out = *this;
  const double inv = 1.0 / std::sqrt(n);
  for (cplx& a : out.amps) a *= inv;
  return out;
}

StateVector StateVector::permuted(const std::vector<QubitId>& order) const {
  const std::size_t n = num_qubits();
  if (order.size() != n) {
    throw LabelError("permutation order has wrong register width");
  }
  std::vector<std::size_t> src_pos(n);
  for (std::size_t k = 0; k < n; ++k) {
    src_pos[k] = position_checked(order[k]);
  }
  check_unique(order);
  std::vector<cplx> out(dim(), cplx{0.0, 0.0});
  for (std::size_t j = 0; j < dim(); ++j) {
    std::size_t i = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (bit_at(j, k, n)) i |= std::size_t{1} << (n - 1 - src_pos[k]);
    }
    out[j] = amps[i];
  }
  return StateVector(order, std::move(out));
}

std::string StateVector::str() const {
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (std::abs(amps[i]) < 1e-12) continue;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "(%.6g%+.6gi)", amps[i].real(),
                  amps[i].imag());
    if (!first) os << " + ";
    os << buf << "|";
    for (std::size_t k = 0; k < num_qubits(); ++k) os << bit_at(i, k, num_qubits());
    os << ">";
    first = false;
  }
  if (first) os << "0";
  os << " [" << label_string(labels) << "]";
  return os.str();
}

bool approx_equal_up_to_phase(const StateVector& a, const StateVector& b,
                              double tol) {
  return max_phase_aligned_deviation(a, b) <= tol;
}

double max_phase_aligned_deviation(const StateVector& a,
                                   const StateVector& b) {
  if (a.labels != b.labels) {
    throw LabelError("register mismatch: \"" + label_string(a.labels) +
                     "\" vs \"" + label_string(b.labels) + "\"");
  }
  cplx ov{0.0, 0.0};
  for (std::size_t i = 0; i < a.dim(); ++i) {
    ov += std::conj(a.amps[i]) * b.amps[i];
  }
  const double mag = std::abs(ov);
  const cplx rot = (mag > 0.0) ? std::conj(ov) / mag : cplx{1.0, 0.0};
  double worst = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    worst = std::max(worst, std::abs(a.amps[i] - rot * b.amps[i]));
  }
  return worst;
}

SingleQubitOp::SingleQubitOp(std::array<cplx, 4> entries, bool expect_unitary)
    : m(entries), unitary(expect_unitary) {
  if (!unitary) return;
  // U^dag U == I
  const cplx c00 = std::conj(m[0]) * m[0] + std::conj(m[2]) * m[2];
  const cplx c01 = std::conj(m[0]) * m[1] + std::conj(m[2]) * m[3];
  const cplx c11 = std::conj(m[1]) * m[1] + std::conj(m[3]) * m[3];
  if (std::abs(c00 - 1.0) > kStructureTol || std::abs(c01) > kStructureTol ||
      std::abs(c11 - 1.0) > kStructureTol) {
    throw QmathError("operator declared unitary is not unitary");
  }
}

namespace gate {

SingleQubitOp identity() {
  return SingleQubitOp({cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{1, 0}});
}

SingleQubitOp pauli_x() {
  return SingleQubitOp({cplx{0, 0}, cplx{1, 0}, cplx{1, 0}, cplx{0, 0}});
}

SingleQubitOp pauli_y() {
  return SingleQubitOp({cplx{0, 0}, cplx{0, -1}, cplx{0, 1}, cplx{0, 0}});
}

SingleQubitOp pauli_z() {
  return SingleQubitOp({cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{-1, 0}});
}

SingleQubitOp hadamard() {
  return SingleQubitOp({cplx{kInvSqrt2, 0}, cplx{kInvSqrt2, 0},
                        cplx{kInvSqrt2, 0}, cplx{-kInvSqrt2, 0}});
}

SingleQubitOp rz(double theta) {
  const cplx lo = std::polar(1.0, -theta / 2.0);
  const cplx hi = std::polar(1.0, theta / 2.0);
  return SingleQubitOp({lo, cplx{0, 0}, cplx{0, 0}, hi});
}

SingleQubitOp ry(double theta) {
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  return SingleQubitOp({cplx{c, 0}, cplx{-s, 0}, cplx{s, 0}, cplx{c, 0}});
}

SingleQubitOp projector(const std::array<cplx, 2>& v) {
  return SingleQubitOp({v[0] * std::conj(v[0]), v[0] * std::conj(v[1]),
                        v[1] * std::conj(v[0]), v[1] * std::conj(v[1])},
                       false);
}

}  // namespace gate

StateVector tensor(const StateVector& a, const StateVector& b) {
  std::vector<QubitId> labels = a.labels;
  labels.insert(labels.end(), b.labels.begin(), b.labels.end());
  std::vector<cplx> amps(a.dim() * b.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    for (std::size_t j = 0; j < b.dim(); ++j) {
      amps[i * b.dim() + j] = a.amps[i] * b.amps[j];
    }
  }
  return StateVector(std::move(labels), std::move(amps));
}

StateVector apply_single(const StateVector& s, QubitId q,
                         const SingleQubitOp& op) {
  const std::size_t pos = s.position_checked(q);
  const std::size_t shift = s.num_qubits() - 1 - pos;
  std::vector<cplx> amps = s.amps;
  for (std::size_t j = 0; j < s.dim() / 2; ++j) {
    const std::size_t i0 = insert_bit(j, 0, shift);
    const std::size_t i1 = insert_bit(j, 1, shift);
    const cplx a0 = amps[i0];
    const cplx a1 = amps[i1];
    amps[i0] = op.m[0] * a0 + op.m[1] * a1;
    amps[i1] = op.m[2] * a0 + op.m[3] * a1;
  }
  return StateVector(s.labels, std::move(amps));
}

const char* to_string(Basis b) { return b == Basis::Z ? "z" : "x"; }

MeasureResult measure_in_basis(const StateVector& s, QubitId q,
                               const std::array<cplx, 2>& v0,
                               const std::array<cplx, 2>& v1,
                               const Selector& sel) {
  check_orthonormal(v0, v1);
  const std::size_t pos = s.position_checked(q);
  Projection p0 = project_out(s, pos, v0);

  int outcome;
  if (std::holds_alternative<Forced>(sel)) {
    outcome = std::get<Forced>(sel).outcome;
    if (outcome != 0 && outcome != 1) {
      throw QmathError("forced outcome must be 0 or 1");
    }
  } else {
    Rng* rng = std::get<Rng*>(sel);
    outcome = (rng->uniform() < p0.prob) ? 0 : 1;
  }

  Projection chosen =
      (outcome == 0) ? std::move(p0) : project_out(s, pos, v1);
  if (chosen.prob <= kProbFloor) {
    throw ImpossibleOutcomeError(
        std::string("outcome ") + std::to_string(outcome) + " on qubit '" +
        q + "' has zero probability");
  }
  return MeasureResult{outcome, chosen.prob,
                       collapse_from(std::move(chosen),
                                     labels_without(s.labels, pos))};
}

MeasureResult measure(const StateVector& s, QubitId q, Basis basis,
                      const Selector& sel) {
  const auto vs = basis_vectors(basis);
  return measure_in_basis(s, q, vs[0], vs[1], sel);
}

std::optional<MeasureResult> try_measure_outcome(const StateVector& s,
                                                 QubitId q, Basis basis,
                                                 int outcome) {
  const auto vs = basis_vectors(basis);
  const std::size_t pos = s.position_checked(q);
  Projection p = project_out(s, pos, vs[std::size_t(outcome)]);
  if (p.prob <= kProbFloor) return std::nullopt;
  return MeasureResult{outcome, p.prob,
                       collapse_from(std::move(p),
                                     labels_without(s.labels, pos))};
}

const char* to_string(BellOutcome o) {
  switch (o) {
    case BellOutcome::PsiPlus:
      return "Psi+";
    case BellOutcome::PsiMinus:
      return "Psi-";
    case BellOutcome::PhiPlus:
      return "Phi+";
    case BellOutcome::PhiMinus:
      return "Phi-";
  }
  return "?";
}

std::optional<BellOutcome> bell_from_string(const std::string& name) {
  for (BellOutcome o : kBellOutcomes) {
    if (name == to_string(o)) return o;
  }
  return std::nullopt;
}

BellResult measure_bell(const StateVector& s, QubitId q1, QubitId q2,
                        const Selector& sel) {
  const std::size_t k1 = s.position_checked(q1);
  const std::size_t k2 = s.position_checked(q2);
  if (k1 == k2) throw LabelError("Bell measurement needs two distinct qubits");

  std::array<Projection, 4> ps;
  for (std::size_t b = 0; b < 4; ++b) {
    ps[b] = project_bell(s, k1, k2, kBellOutcomes[b]);
  }

  std::size_t chosen;
  if (std::holds_alternative<Forced>(sel)) {
    const int o = std::get<Forced>(sel).outcome;
    if (o < 0 || o > 3) throw QmathError("forced Bell outcome must be 0..3");
    chosen = std::size_t(o);
  } else {
    Rng* rng = std::get<Rng*>(sel);
    const double u = rng->uniform();
    double acc = 0.0;
    chosen = 3;
    for (std::size_t b = 0; b < 4; ++b) {
      acc += ps[b].prob;
      if (u < acc) {
        chosen = b;
        break;
      }
    }
  }

  if (ps[chosen].prob <= kProbFloor) {
    throw ImpossibleOutcomeError(
        std::string("Bell outcome ") + to_string(kBellOutcomes[chosen]) +
        " has zero probability");
  }

  std::vector<QubitId> rest;
  for (std::size_t k = 0; k < s.num_qubits(); ++k) {
    if (k != k1 && k != k2) rest.push_back(s.labels[k]);
  }
  return BellResult{kBellOutcomes[chosen], ps[chosen].prob,
                    collapse_from(std::move(ps[chosen]), std::move(rest))};
}

std::optional<BellResult> try_bell_outcome(const StateVector& s, QubitId q1,
                                           QubitId q2, BellOutcome outcome) {
  const std::size_t k1 = s.position_checked(q1);
  const std::size_t k2 = s.position_checked(q2);
  if (k1 == k2) throw LabelError("Bell measurement needs two distinct qubits");
  Projection p = project_bell(s, k1, k2, outcome);
  if (p.prob <= kProbFloor) return std::nullopt;
  std::vector<QubitId> rest;
  for (std::size_t k = 0; k < s.num_qubits(); ++k) {
    if (k != k1 && k != k2) rest.push_back(s.labels[k]);
  }
  return BellResult{outcome, p.prob,
                    collapse_from(std::move(p), std::move(rest))};
}

DensityMatrix::DensityMatrix(std::vector<QubitId> labels_in,
                             std::vector<cplx> entries)
    : labels(std::move(labels_in)), m(std::move(entries)) {
  check_unique(labels);
  const std::size_t d = dim();
  if (m.size() != d * d) {
    throw QmathError("entry count does not match register width");
  }
  cplx tr{0.0, 0.0};
  for (std::size_t r = 0; r < d; ++r) {
    tr += m[r * d + r];
    for (std::size_t c = r; c < d; ++c) {
      if (std::abs(m[r * d + c] - std::conj(m[c * d + r])) > kStructureTol) {
        throw QmathError("density matrix is not hermitian");
      }
    }
  }
  if (std::abs(tr - 1.0) > kStructureTol) {
    throw QmathError("density matrix trace is not 1");
  }
}

double DensityMatrix::max_deviation(const DensityMatrix& other) const {
  if (labels != other.labels) {
    throw LabelError("register mismatch between density matrices");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    worst = std::max(worst, std::abs(m[i] - other.m[i]));
  }
  return worst;
}

DensityMatrix partial_trace(const StateVector& s,
                            const std::vector<QubitId>& keep) {
  if (keep.empty()) throw LabelError("partial trace must keep at least one qubit");
  check_unique(keep);
  const std::size_t n = s.num_qubits();
  std::vector<std::size_t> kpos(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    kpos[k] = s.position_checked(keep[k]);
  }
  std::vector<std::size_t> epos;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::find(kpos.begin(), kpos.end(), k) == kpos.end()) {
      epos.push_back(k);
    }
  }
  const std::size_t kd = std::size_t{1} << kpos.size();
  const std::size_t ed = std::size_t{1} << epos.size();

  auto full_index = [&](std::size_t r, std::size_t e) {
    std::size_t i = 0;
    for (std::size_t k = 0; k < kpos.size(); ++k) {
      if (bit_at(r, k, kpos.size())) i |= std::size_t{1} << (n - 1 - kpos[k]);
    }
    for (std::size_t k = 0; k < epos.size(); ++k) {
      if (bit_at(e, k, epos.size())) {
        i |= std::size_t{1} << (n - 1 - epos[k]);
      }
    }
    return i;
  };

  std::vector<cplx> rho(kd * kd, cplx{0.0, 0.0});
  for (std::size_t r = 0; r < kd; ++r) {
    for (std::size_t c = 0; c < kd; ++c) {
      cplx acc{0.0, 0.0};
      for (std::size_t e = 0; e < ed; ++e) {
        acc += s.amps[full_index(r, e)] * std::conj(s.amps[full_index(c, e)]);
      }
      rho[r * kd + c] = acc;
    }
  }
  return DensityMatrix(keep, std::move(rho));
}

double fidelity_pure(const StateVector& a, const StateVector& b) {
  std::vector<QubitId> la = a.labels;
  std::vector<QubitId> lb = b.labels;
  std::sort(la.begin(), la.end());
  std::sort(lb.begin(), lb.end());
  if (la != lb) {
    throw LabelError("fidelity needs states on the same qubit set");
  }
  const StateVector bp = b.permuted(a.labels);
  cplx ov{0.0, 0.0};
  for (std::size_t i = 0; i < a.dim(); ++i) {
    ov += std::conj(a.amps[i]) * bp.amps[i];
  }
  return std::norm(ov);
}

double state_overlap(const DensityMatrix& rho, const StateVector& psi) {
  std::vector<QubitId> lr = rho.labels;
  std::vector<QubitId> lp = psi.labels;
  std::sort(lr.begin(), lr.end());
  std::sort(lp.begin(), lp.end());
  if (lr != lp) {
    throw LabelError("overlap needs a state on the density matrix register");
  }
  const StateVector v = psi.permuted(rho.labels);
  const std::size_t d = rho.dim();
  cplx acc{0.0, 0.0};
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      acc += std::conj(v.amps[r]) * rho.at(r, c) * v.amps[c];
    }
  }
  return acc.real();
}

std::vector<double> hermitian_eigenvalues(std::vector<cplx> a,
                                          std::size_t dim) {
  if (a.size() != dim * dim) {
    throw QmathError("matrix size does not match dimension");
  }
  // Symmetrize away floating-point asymmetry.
  for (std::size_t p = 0; p < dim; ++p) {
    for (std::size_t q = p; q < dim; ++q) {
      const cplx avg = 0.5 * (a[p * dim + q] + std::conj(a[q * dim + p]));
      a[p * dim + q] = avg;
      a[q * dim + p] = std::conj(avg);
    }
  }

  double scale_sq = 1.0;
  for (const cplx& x : a) scale_sq += std::norm(x);

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off_sq = 0.0;
    for (std::size_t p = 0; p < dim; ++p) {
      for (std::size_t q = p + 1; q < dim; ++q) {
        off_sq += std::norm(a[p * dim + q]);
      }
    }
    if (off_sq <= 1e-32 * scale_sq) break;

    for (std::size_t p = 0; p < dim; ++p) {
      for (std::size_t q = p + 1; q < dim; ++q) {
        const cplx apq = a[p * dim + q];
        const double mag = std::abs(apq);
        if (mag < 1e-300) continue;
        const double app = a[p * dim + p].real();
        const double aqq = a[q * dim + q].real();
        const double tau = (aqq - app) / (2.0 * mag);
        const double sgn = (tau >= 0.0) ? 1.0 : -1.0;
        const double t = sgn / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const cplx s = (t * c) * (apq / mag);

        // A <- R^dag A R with R = [[c, s], [-conj(s), c]] in the (p,q) plane.
        for (std::size_t i = 0; i < dim; ++i) {
          const cplx aip = a[i * dim + p];
          const cplx aiq = a[i * dim + q];
          a[i * dim + p] = c * aip - std::conj(s) * aiq;
          a[i * dim + q] = s * aip + c * aiq;
        }
        for (std::size_t j = 0; j < dim; ++j) {
          const cplx apj = a[p * dim + j];
          const cplx aqj = a[q * dim + j];
          a[p * dim + j] = c * apj - s * aqj;
          a[q * dim + j] = std::conj(s) * apj + c * aqj;
        }
      }
    }
  }

  std::vector<double> evs(dim);
  for (std::size_t i = 0; i < dim; ++i) evs[i] = a[i * dim + i].real();
  std::sort(evs.begin(), evs.end());
  return evs;
}

double entanglement_entropy(const StateVector& s,
                            const std::vector<QubitId>& cut) {
  const DensityMatrix rho = partial_trace(s, cut);
  const std::vector<double> evs = hermitian_eigenvalues(rho.m, rho.dim());
  double entropy = 0.0;
  for (double p : evs) {
    if (p <= 1e-300) continue;  // clamp eigensolver noise at zero
    entropy -= p * std::log2(p);
  }
  return entropy;
}

}  // namespace hqis
