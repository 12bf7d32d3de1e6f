#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <string>
#include <vector>

#include "edc/errors.hpp"

namespace edc {

using Cx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

// Tensor factors of the composite Hilbert space, in canonical order.
enum class Factor : int { CavityA = 0, CavityB = 1, Ancilla = 2 };

std::string factor_name(Factor f);

// Ordered list of (factor, dimension) pairs identifying which product space a
// matrix lives on. Factors always appear in canonical order.
struct SpaceLabel {
  std::vector<std::pair<Factor, int>> factors;

  static SpaceLabel single(Factor f, int dim);

  int dim() const;
  bool has(Factor f) const;
  int dim_of(Factor f) const;
  std::string str() const;
  bool operator==(const SpaceLabel&) const = default;
};

// Dense complex square matrix tagged with the space it acts on.
struct OperatorMatrix {
  Matrix m;
  SpaceLabel label;
};

// Density matrix (trace may be < 1 on post-selected branches).
struct DensityState {
  Matrix rho;
  SpaceLabel label;

  double trace() const { return rho.trace().real(); }

  // Hermiticity / positivity / trace bounds. Throws NumericError.
  void validate(double herm_tol = 1e-10, double eig_floor = -1e-10,
                double trace_tol = 1e-10) const;
};

// Truncated-space dimensions. ancilla is always the 3-level {g,e,f} system.
// cavity_dim == 0 means "no cavity factor" (ancilla-only problems).
struct HilbertDims {
  int cavity_dim = 0;
  int cavity_dim_b = 0;
  static constexpr int ancilla_dim = 3;

  static HilbertDims single_mode(int n);             // n >= 6
  static HilbertDims two_mode(int na, int nb);       // na, nb >= 6
  static HilbertDims ancilla_only();

  bool two_mode_problem() const { return cavity_dim_b > 0; }
  SpaceLabel full_label() const;
  int total_dim() const;
};

// Ancilla levels.
inline constexpr int kG = 0;
inline constexpr int kE = 1;
inline constexpr int kF = 2;

Matrix kron(const Matrix& a, const Matrix& b);

// Ladder operator on the requested cavity factor: a|n> = sqrt(n)|n-1>.
OperatorMatrix annihilation(const HilbertDims& dims, Factor which = Factor::CavityA);

// Rank-1 projectors P_g, P_e, P_f on the 3-level ancilla.
std::array<OperatorMatrix, 3> ancilla_projectors();

// |to><from| on the ancilla.
OperatorMatrix ancilla_transition(int to, int from);

// Pauli x/y on the g-f (or g-e) submanifold; the remaining level is untouched.
OperatorMatrix sigma_gf_x();
OperatorMatrix sigma_gf_y();
OperatorMatrix sigma_ge_x();
OperatorMatrix sigma_ge_y();

// diag((-1)^n) on the cavity factor; +1 on even Fock states.
OperatorMatrix photon_parity(const HilbertDims& dims, Factor which = Factor::CavityA);

// Projector onto the even (or odd) Fock subspace of the cavity factor.
OperatorMatrix parity_projector(const HilbertDims& dims, bool even,
                                Factor which = Factor::CavityA);

// Kronecker product with factor labels merged in canonical order. The
// operands' factor sets must be disjoint and non-interleaving.
OperatorMatrix tensor(const OperatorMatrix& a, const OperatorMatrix& b);

// Extend an operator to the full space by identity on the missing factors.
OperatorMatrix embed(const OperatorMatrix& op, const SpaceLabel& full);

// Reduced state on the named factor; trace preserved.
DensityState partial_trace(const DensityState& s, Factor keep);

// Fock basis vector |n> on an N-dimensional cavity.
Vector fock(int dim, int n);

}  // namespace edc
