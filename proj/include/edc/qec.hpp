#pragma once

#include <optional>
#include <span>
#include <vector>

#include "edc/grape.hpp"

namespace edc {

// Lowest-order binomial code: even-parity code words (|0>+|4>)/sqrt2 and |2>,
// odd-parity error words |3> and |1>, mean photon number 2.
struct BinomialCode {
  int cavity_dim = 0;
  Vector word0, word1;  // code words, cavity-only vectors
  Vector err0, err1;    // single-loss images of word0, word1
  double nbar = 2.0;

  static BinomialCode standard(int cavity_dim);

  // Full-space frames with the ancilla pinned to a level.
  LogicalFrame code_frame(const HilbertDims& dims, int ancilla_level = kG) const;
  LogicalFrame error_frame(const HilbertDims& dims, int ancilla_level = kG) const;
  // Cavity-only frame (used by the cycle engine).
  LogicalFrame code_frame_cavity() const;
  LogicalFrame fock01_frame_cavity() const;
};

// Gate-set targets (ancilla starts and ends in |g>).
TargetIsometry hadamard_target(const BinomialCode& code, const HilbertDims& dims);
TargetIsometry t_gate_target(const BinomialCode& code, const HilbertDims& dims);
TargetIsometry encode_target(const BinomialCode& code, const HilbertDims& dims);
TargetIsometry decode_target(const BinomialCode& code, const HilbertDims& dims);
// QND parity map: even states keep the ancilla in |g>, odd states flag it
// (|f> for the two-photon g-f ancilla, |e> for the plain g-e ancilla).
TargetIsometry parity_map_target(const BinomialCode& code, const HilbertDims& dims,
                                 AncillaControl control = AncillaControl::TwoPhotonGF);
// Undoes the deterministic no-jump distortion exp(-kappa tau n/2) accumulated
// over a jump-free interval tau.
TargetIsometry recovery_target(const BinomialCode& code, const HilbertDims& dims,
                               double kappa, double tau);
// Maps the error words back onto the code words after a detected loss.
TargetIsometry error_recovery_target(const BinomialCode& code, const HilbertDims& dims);
// Ancilla-only pi rotation |g> -> flagged level (no cavity factor).
TargetIsometry ancilla_pi_target(AncillaControl control = AncillaControl::TwoPhotonGF);
// Controlled-phase between two binomial modes sharing one ancilla.
TargetIsometry cz_target(const BinomialCode& code_a, const BinomialCode& code_b,
                         const HilbertDims& dims);

// One QEC interval: n_pm parity measurements (wait t_w then measure, t_pm
// each), then one recovery step of duration t_qec. Durations in seconds.
struct CycleSchedule {
  int n_pm = 3;
  double t_w = 28e-6;
  double t_pm = 2e-6;
  double t_qec = 2e-6;

  double t_int() const { return n_pm * (t_w + t_pm) + t_qec; }
  void validate() const;
};

// Post-selection strategies.
//   EDA:  discard ancilla |e> outcomes; parity outcome conditions the recovery.
//   EDAB: additionally discard odd-parity branches; recover after n_pm
//         consecutive even outcomes.
//   EDB:  plain g-e ancilla, discard only odd-parity outcomes.
//   None: unencoded physical baseline.
enum class StrategyTag { EDA, EDAB, EDB, None };

struct DecayFit {
  double amplitude = 0;
  double t1 = 0;  // seconds
  double residual = 0;
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
};

struct LifetimeResult {
  std::vector<double> time_s;
  std::vector<double> fidelity;
  std::vector<double> success_prob;
  DecayFit fit;
};

struct CyclePulses {
  ControlPulse parity;
  ControlPulse qec_code;
  std::optional<ControlPulse> qec_error;  // required by EDA
};

struct CycleOptions {
  int n_cycles = 60;
  LindbladOptions integ{};
  Exec exec = Exec::Serial;
  // Replace each pulse by an instantaneous ideal unitary, keeping idle decay
  // over the operation window (isolates control error from decay).
  bool ideal_unitaries = false;
  bool fit = true;
};

// Process fidelity of the idling Fock{0,1} qubit, fitted to A exp(-t/T1)+1/4.
// Default grid: n_points points over [0, 6/kappa].
LifetimeResult physical_baseline(const SystemParams& p, const HilbertDims& dims,
                                 int n_points = 130, double t_max = 0);

// Evolves the encoded logical channel cycle by cycle at the channel level and
// records fidelity and cumulative success probability at cycle boundaries.
LifetimeResult run_cycles(StrategyTag strategy, const CycleSchedule& schedule,
                          const CyclePulses& pulses, const SystemParams& p,
                          const HilbertDims& dims, const CycleOptions& opts);

// Least squares for F(t) = A exp(-t/T1) + 0.25 with the floor fixed.
DecayFit fit_decay(std::span<const double> time_s, std::span<const double> fidelity);

// T1_logical / T1_physical.
double gain_breakeven(const LifetimeResult& logical, const LifetimeResult& physical);

// (1 - F_phys(t)) / (1 - F_log(t)), linearly interpolated on each grid.
double infidelity_ratio(const LifetimeResult& logical, const LifetimeResult& physical,
                        double t);

struct RatioPeak {
  double t = 0;
  double value = 0;
};
RatioPeak peak_infidelity_ratio(const LifetimeResult& logical,
                                const LifetimeResult& physical);

// Per-outcome maps on the cavity operator space induced by one pulse that
// starts with the ancilla in |g> and ends in a projective ancilla measurement.
struct OutcomeMaps {
  Matrix g, e, f;  // each n^2 x n^2
};
OutcomeMaps pulse_outcome_maps(const ControlPulse& pulse, const SystemParams& p,
                               const HilbertDims& dims, const LindbladOptions& opts,
                               Exec exec);

}  // namespace edc
