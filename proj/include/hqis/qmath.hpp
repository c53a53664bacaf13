#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hqis/rng.hpp"

namespace hqis {

using cplx = std::complex<double>;

// Qubits are identified by single-character labels ('S', 'A', 'B', ...).
using QubitId = char;

// Tolerance for exact-structure checks (unitarity, hermiticity, trace).
inline constexpr double kStructureTol = 1e-12;

// Outcomes with Born probability at or below this cannot be forced or
// conditioned on; they are treated as unreachable.
inline constexpr double kProbFloor = 1e-15;

struct QmathError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Register labeling problems: duplicate labels, unknown labels, register
// mismatches between two states.
struct LabelError : QmathError {
  using QmathError::QmathError;
};

// Raised when a forced measurement outcome has (numerically) zero
// probability in the given state.
struct ImpossibleOutcomeError : QmathError {
  using QmathError::QmathError;
};

// Pure state over an ordered register of labeled qubits.
//
// Index convention: labels[0] owns the most significant bit of the
// amplitude index. For labels {S,A} the amplitude of |1_S 0_A> sits at
// index 0b10. A register may be empty (dim 1), which is what remains after
// the last qubit has been measured away.
struct StateVector {
  std::vector<QubitId> labels;
  std::vector<cplx> amps;

  StateVector(std::vector<QubitId> labels_in, std::vector<cplx> amps_in);

  // Computational basis state |index> over the given labels.
  static StateVector basis(const std::string& labels_in, std::size_t index);

  std::size_t num_qubits() const { return labels.size(); }
  std::size_t dim() const { return amps.size(); }

  // Position of a label in the register, or -1 if absent.
  int position(QubitId q) const;
  // Same, but throws LabelError when absent.
  std::size_t position_checked(QubitId q) const;

  double norm_sq() const;
  StateVector normalized() const;

  // Same state re-expressed with the register in the given label order.
  // `order` must be a permutation of `labels`.
  StateVector permuted(const std::vector<QubitId>& order) const;

  std::string str() const;
};

// Equality of rays: |a> == e^{i phi} |b> for some phase, elementwise within
// tol after aligning b's global phase against a. Registers must match
// exactly.
bool approx_equal_up_to_phase(const StateVector& a, const StateVector& b,
                              double tol);

// Largest elementwise deviation |a_i - e^{i phi} b_i| at the phase phi that
// makes <a|b> real nonnegative. Insensitive to amplitude-magnitude ties,
// unlike anchoring on a largest amplitude.
double max_phase_aligned_deviation(const StateVector& a, const StateVector& b);

// 2x2 operator in row-major order. Unitarity is validated on construction
// unless the op is explicitly declared non-unitary (projectors used by
// tests); only unitary ops preserve the norm invariant of apply_single.
struct SingleQubitOp {
  std::array<cplx, 4> m;
  bool unitary;

  explicit SingleQubitOp(std::array<cplx, 4> entries, bool expect_unitary = true);
};

namespace gate {
SingleQubitOp identity();
SingleQubitOp pauli_x();
SingleQubitOp pauli_y();
SingleQubitOp pauli_z();
SingleQubitOp hadamard();
// Rz(t) = diag(e^{-it/2}, e^{+it/2}),  Ry(t) = [[cos t/2, -sin t/2],
//                                               [sin t/2,  cos t/2]]
SingleQubitOp rz(double theta);
SingleQubitOp ry(double theta);
// Rank-one projector |v><v| (non-unitary).
SingleQubitOp projector(const std::array<cplx, 2>& v);
}  // namespace gate

// Kronecker product; registers must be disjoint. a's labels stay most
// significant.
StateVector tensor(const StateVector& a, const StateVector& b);

// Apply a 2x2 operator to one labeled qubit.
StateVector apply_single(const StateVector& s, QubitId q,
                         const SingleQubitOp& op);

enum class Basis { Z, X };
const char* to_string(Basis b);

// Outcome encoding: Z basis 0 -> |0>, 1 -> |1>; X basis 0 -> |+>, 1 -> |->.

// Forces a specific measurement outcome (error if its probability is at or
// below kProbFloor).
struct Forced {
  int outcome;
};

// A measurement either samples its outcome from an Rng stream (Born rule)
// or is forced for branch enumeration.
using Selector = std::variant<Forced, Rng*>;

// Result of a single-qubit measurement. The measured qubit is removed from
// the register of `collapsed`, which is renormalized.
struct MeasureResult {
  int outcome;
  double prob;
  StateVector collapsed;
};

MeasureResult measure(const StateVector& s, QubitId q, Basis basis,
                      const Selector& sel);

// Measurement in an arbitrary orthonormal single-qubit basis {v0, v1};
// outcome k collapses onto v_k.
MeasureResult measure_in_basis(const StateVector& s, QubitId q,
                               const std::array<cplx, 2>& v0,
                               const std::array<cplx, 2>& v1,
                               const Selector& sel);

// Non-throwing outcome probe for branch enumeration: nullopt when the
// outcome probability is at or below kProbFloor.
std::optional<MeasureResult> try_measure_outcome(const StateVector& s,
                                                 QubitId q, Basis basis,
                                                 int outcome);

// Bell-basis outcomes for a qubit pair (q1, q2):
//   PsiPlus/PsiMinus = (|00> +/- |11>)/sqrt(2)
//   PhiPlus/PhiMinus = (|01> +/- |10>)/sqrt(2)
enum class BellOutcome { PsiPlus, PsiMinus, PhiPlus, PhiMinus };

inline constexpr std::array<BellOutcome, 4> kBellOutcomes = {
    BellOutcome::PsiPlus, BellOutcome::PsiMinus, BellOutcome::PhiPlus,
    BellOutcome::PhiMinus};

const char* to_string(BellOutcome o);
std::optional<BellOutcome> bell_from_string(const std::string& name);

struct BellResult {
  BellOutcome outcome;
  double prob;
  StateVector collapsed;
};

// Projective measurement of (q1, q2) in the Bell basis; both qubits are
// removed from the collapsed register.
BellResult measure_bell(const StateVector& s, QubitId q1, QubitId q2,
                        const Selector& sel);

std::optional<BellResult> try_bell_outcome(const StateVector& s, QubitId q1,
                                           QubitId q2, BellOutcome outcome);

// Mixed state over an ordered register, row-major dim x dim. Construction
// validates hermiticity and unit trace within kStructureTol.
struct DensityMatrix {
  std::vector<QubitId> labels;
  std::vector<cplx> m;

  DensityMatrix(std::vector<QubitId> labels_in, std::vector<cplx> entries);

  std::size_t num_qubits() const { return labels.size(); }
  std::size_t dim() const { return std::size_t{1} << labels.size(); }
  cplx at(std::size_t r, std::size_t c) const { return m[r * dim() + c]; }

  // Largest absolute entrywise difference; registers must match.
  double max_deviation(const DensityMatrix& other) const;
};

// Reduced state on `keep` (in the order given), tracing out the rest.
DensityMatrix partial_trace(const StateVector& s,
                            const std::vector<QubitId>& keep);

// |<a|b>|^2 for states on the same label set (order-insensitive).
double fidelity_pure(const StateVector& a, const StateVector& b);

// <psi|rho|psi> for a pure state on rho's register (order-insensitive).
double state_overlap(const DensityMatrix& rho, const StateVector& psi);

// Eigenvalues of a hermitian matrix (row-major dim x dim), ascending.
// Cyclic complex Jacobi iteration; intended for the small matrices that
// arise here (dim <= 16).
std::vector<double> hermitian_eigenvalues(std::vector<cplx> a,
                                          std::size_t dim);

// Von Neumann entropy, in bits, of the reduced state on `cut`.
double entanglement_entropy(const StateVector& s,
                            const std::vector<QubitId>& cut);

}  // namespace hqis
