#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "edc/exec.hpp"
#include "edc/fock.hpp"
#include "edc/model.hpp"

namespace edc {

// Fixed-step 4th-order integration of the master equation. The default scheme
// integrates in the interaction picture of each segment's (constant)
// Hamiltonian: the unitary part is exact and the integrator only resolves the
// slow dissipative flow. DirectRk4 is the plain reference scheme kept for
// cross-checks; both are bitwise-deterministic.
struct LindbladOptions {
  enum class Scheme { DirectRk4, InteractionRk4 };
  Scheme scheme = Scheme::InteractionRk4;
  int substeps = 4;  // RK4 steps per pulse segment
};

// Ordered product of exact segment propagators exp(-i H_k dt).
Matrix propagate_unitary(const ControlPulse& pulse, const HamiltonianGenerator& gen);
Matrix propagate_unitary(const ControlPulse& pulse, const SystemParams& p,
                         const HilbertDims& dims);

// d rho/dt = -i[H(t), rho] + sum_j r_j (L rho L+ - {L+L, rho}/2).
DensityState propagate_lindblad(const DensityState& state, const ControlPulse& pulse,
                                const SystemParams& p, const HilbertDims& dims,
                                const CollapseSet& collapse,
                                const LindbladOptions& opts = {});

// Propagates a batch of (not necessarily Hermitian) matrices through the same
// pulse. Columns are independent; under Exec::Par they are distributed over
// threads with bitwise-identical results to the serial path.
void propagate_lindblad_batch(std::vector<Matrix>& states, const ControlPulse& pulse,
                              const HamiltonianGenerator& gen,
                              const CollapseSet& collapse,
                              const LindbladOptions& opts, Exec exec);

// Projects out the given ancilla levels (default: the error flag |e>).
// Returns the unnormalized state and the kept-branch probability.
std::pair<DensityState, double> postselect_ancilla(const DensityState& state,
                                                   const std::vector<int>& discard = {kE});

// Projects the first cavity factor onto the even (or odd) Fock subspace.
std::pair<DensityState, double> postselect_parity(const DensityState& state, bool even);

// Two orthonormal full-space vectors spanning the logical qubit.
struct LogicalFrame {
  Vector v0, v1;
  SpaceLabel label;

  static LogicalFrame from_vectors(const Vector& v0, const Vector& v1,
                                   const SpaceLabel& label, double tol = 1e-12);

  Matrix op(int i, int j) const;  // |v_i><v_j|
  Matrix pauli(int k) const;      // k = 0..3 -> I, X, Y, Z embedded in full space
  // The four averaging states |0>, |1>, (|0>+|1>)/sqrt2, (|0>-i|1>)/sqrt2.
  std::array<Matrix, 4> cardinal_states() const;
};

struct PostselectPolicy {
  bool discard_e = false;
  std::optional<bool> require_even;  // parity projection on cavity A
  bool none() const { return !discard_e && !require_even.has_value(); }
};

// Linear map assembled from propagated basis inputs, stored as a vectorized
// superoperator (column-major vec). The input basis is either a logical frame
// (in_dim = 2) or the full standard basis (in_dim = space dimension).
struct ChannelMap {
  Matrix S;  // (dout^2) x (in_dim^2)
  int in_dim = 0;
  std::optional<LogicalFrame> frame;
  SpaceLabel out_label;
  bool trace_nonincreasing = false;

  int out_dim() const { return static_cast<int>(out_label.dim()); }
  Matrix apply(const Matrix& in) const;
  Matrix choi() const;
  double choi_floor() const;
  bool is_trace_preserving(double tol = 1e-8) const;
};

// Propagates a complete operator basis of the frame (or of the full space when
// no frame is given) and applies the post-selection policy to the outputs.
ChannelMap channel_from_pulse(const ControlPulse& pulse, const SystemParams& p,
                              const HilbertDims& dims, const CollapseSet& collapse,
                              const PostselectPolicy& policy,
                              const std::optional<LogicalFrame>& frame,
                              const LindbladOptions& opts = {}, Exec exec = Exec::Serial);

// E(rho) = U rho U+ as a full-basis channel.
ChannelMap unitary_channel(const Matrix& u, const SpaceLabel& label);

// Composition outer(inner(.)), both on full bases of the same space.
ChannelMap compose(const ChannelMap& outer, const ChannelMap& inner);

// Exact single-mode amplitude-damping semigroup exp(kappa t D[a]) as an
// n^2 x n^2 superoperator (Kraus sum over loss numbers).
Matrix cavity_damping_superop(int n, double kappa, double t);

// Pauli transfer matrix in the basis (I, X, Y, Z) of a logical frame.
struct PTM {
  Eigen::Matrix4d R = Eigen::Matrix4d::Identity();
};

// R_ij = Tr[P_i E(P_j)]/2 with input Paulis from the channel's frame and
// output Paulis from out_frame. Post-selected channels are renormalized by
// their average success probability over the frame before conversion.
PTM ptm_of(const ChannelMap& channel, const LogicalFrame& out_frame);
PTM ptm_of(const ChannelMap& channel);

// F_pro = Tr[R_ideal^T R_sim] / 4.
double process_fidelity(const PTM& sim, const PTM& ideal);

// Mean kept-branch probability over the frame's four cardinal states.
double success_probability(const ChannelMap& channel);

}  // namespace edc
