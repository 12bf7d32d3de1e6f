#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edc/fock.hpp"

namespace edc {

// How the ancilla is driven.
//   TwoPhotonGF: effective two-photon drive on the g-f manifold; the drive
//     quadratures enter quadratically with strength set by the anharmonicity.
//   DirectGE:    plain resonant Rabi drive on the g-e manifold (conventional
//     ancilla; used by the parity-only post-selection strategy).
//   LinearGF:    the g-f drive expressed directly in its effective coupling
//     components c_x sigma_gf_x + c_y sigma_gf_y. Used by the optimizer as
//     internal coordinates: c = -sqrt(2) (omega_x + i omega_y)^2 / (2 E_c)
//     maps them exactly onto two-photon quadratures.
enum class AncillaControl { TwoPhotonGF, DirectGE, LinearGF };

// Exact coordinate changes between the two-photon quadratures and the
// effective g-f coupling components.
std::pair<double, double> coupling_from_quadratures(double omega_x, double omega_y,
                                                    double e_c);
// Quadratures for a whole coupling waveform, with the square-root branch
// chosen continuously across segments.
void quadratures_from_coupling(const std::vector<double>& cx,
                               const std::vector<double>& cy, double e_c,
                               std::vector<double>& omega_x,
                               std::vector<double>& omega_y);

// Physical rates and couplings. Angular frequencies in rad/s, rates in 1/s.
struct SystemParams {
  double chi_e = 0;    // dispersive shift of |e>
  double chi_f = 0;    // dispersive shift of |f>
  double E_c = 0;      // ancilla anharmonicity
  double kappa = 0;    // cavity single-photon loss
  double kappa_e = 0;  // |e> -> |g> decay
  double kappa_f = 0;  // |f> -> |e> decay
  double chi_e_b = 0;  // second mode (two-mode problems)
  double chi_f_b = 0;
  double kappa_b = 0;
  double dephasing = 0;  // optional ancilla dephasing hook, default off
  AncillaControl control = AncillaControl::TwoPhotonGF;

  void validate() const;

  // chi_e/2pi = 1 MHz, chi_f = 2 chi_e, E_c/2pi = 400 MHz,
  // kappa = 1/(2 ms), kappa_e = 1/(40 us), kappa_f = 1/(20 us).
  static SystemParams paper();
  static SystemParams paper_two_mode();

  std::uint64_t hash() const;
};

// Canonical control channel names, in fixed order.
std::vector<std::string> channel_names(bool two_mode);
inline constexpr int kOmegaX = 0;   // ancilla drive quadrature x
inline constexpr int kOmegaY = 1;   // ancilla drive quadrature y
inline constexpr int kOmegaRx = 2;  // cavity drive quadrature x
inline constexpr int kOmegaRy = 3;  // cavity drive quadrature y
inline constexpr int kOmegaRx2 = 4;
inline constexpr int kOmegaRy2 = 5;

// Piecewise-constant multi-channel drive envelope. dt in seconds, amplitudes
// in rad/s. All channels have the same segment count.
struct ControlPulse {
  double dt = 4e-9;
  std::vector<std::string> names;
  std::vector<std::vector<double>> channels;  // [channel][segment]

  int segment_count() const {
    return channels.empty() ? 0 : static_cast<int>(channels[0].size());
  }
  double duration() const { return dt * segment_count(); }
  void validate(double amp_max = 0) const;

  static ControlPulse zeros(bool two_mode, double dt, int segments);
  // Zero drive of the given duration, coarse segmentation.
  static ControlPulse idle(double duration, double dt = 0.25e-6);
};

// Collapse operators with rates, on the full space.
struct CollapseSet {
  std::vector<std::pair<OperatorMatrix, double>> ops;  // (L, rate)
  std::size_t size() const { return ops.size(); }
};

// Effective g-f drive generated by the two-photon drive quadratures
// (omega_x, omega_y), on the ancilla factor:
//   sqrt(2)(oy^2 - ox^2)/(2 E_c) * sigma_gf_x - sqrt(2) ox oy / E_c * sigma_gf_y
OperatorMatrix ancilla_drive_hamiltonian(const SystemParams& p, double omega_x,
                                         double omega_y);

// Precomputes the constituent operators of the composite-control Hamiltonian
// on the full space so that per-segment assembly is a handful of axpys.
class HamiltonianGenerator {
 public:
  HamiltonianGenerator(const SystemParams& p, const HilbertDims& dims);

  int channel_count() const { return static_cast<int>(d_ops_.size()); }
  int dim() const { return static_cast<int>(drift_.rows()); }
  const HilbertDims& dims() const { return dims_; }
  const SystemParams& params() const { return params_; }

  // Full Hamiltonian for one segment's amplitudes (rad/s).
  Matrix build(std::span<const double> amps) const;
  // dH/d(amps[channel]) at the given amplitudes. The ancilla two-photon terms
  // are quadratic in (omega_x, omega_y), so these depend on the amplitudes.
  Matrix d_amp(std::span<const double> amps, int channel) const;

 private:
  SystemParams params_;
  HilbertDims dims_;
  Matrix drift_;
  Matrix sx_, sy_;                 // embedded ancilla drive axes
  std::vector<Matrix> d_ops_;      // per-channel linear operators (cavity drives)
};

// Dispersive drift + drives for one segment, ready for exponentiation.
OperatorMatrix composite_hamiltonian(const SystemParams& p, const HilbertDims& dims,
                                     std::span<const double> amps);

// sqrt-rate pairs: cavity loss, |e>->|g>, |f>->|e| cascade (plus second-mode
// loss and the dephasing hook when enabled). Zero-rate entries are omitted.
CollapseSet default_collapse_set(const SystemParams& p, const HilbertDims& dims);

// Pulse file round trip. Header carries dt (seconds), segment count, a params
// hash and the channel names; one row per segment in rad/s, 17 significant
// digits (exact decimal round trip).
void write_pulse(const ControlPulse& pulse, const std::string& path,
                 std::uint64_t params_hash);
struct LoadedPulse {
  ControlPulse pulse;
  std::uint64_t params_hash = 0;
};
LoadedPulse read_pulse(const std::string& path);

}  // namespace edc
