#include "edc/fock.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace edc {

std::string factor_name(Factor f) {
  switch (f) {
    case Factor::CavityA: return "cavity_a";
    case Factor::CavityB: return "cavity_b";
    case Factor::Ancilla: return "ancilla";
  }
  return "?";
}

SpaceLabel SpaceLabel::single(Factor f, int dim) {
  if (dim < 1) throw DimensionError("SpaceLabel: dimension must be >= 1");
  return SpaceLabel{{{f, dim}}};
}

int SpaceLabel::dim() const {
  int d = 1;
  for (auto& [f, n] : factors) d *= n;
  return d;
}

bool SpaceLabel::has(Factor f) const {
  return std::any_of(factors.begin(), factors.end(),
                     [&](auto& p) { return p.first == f; });
}

int SpaceLabel::dim_of(Factor f) const {
  for (auto& [g, n] : factors)
    if (g == f) return n;
  throw DimensionError("SpaceLabel: unknown factor " + factor_name(f));
}

std::string SpaceLabel::str() const {
  std::ostringstream os;
  for (size_t i = 0; i < factors.size(); ++i) {
    if (i) os << "*";
    os << factor_name(factors[i].first) << "[" << factors[i].second << "]";
  }
  return os.str();
}

void DensityState::validate(double herm_tol, double eig_floor,
                            double trace_tol) const {
  if (rho.rows() != rho.cols() || rho.rows() != label.dim())
    throw DimensionError("DensityState: matrix does not match label " + label.str());
  double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > herm_tol)
    throw NumericError("DensityState: not Hermitian, deviation " + std::to_string(herm));
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  if (lo < eig_floor)
    throw NumericError("DensityState: negative eigenvalue " + std::to_string(lo));
  if (trace() > 1.0 + trace_tol)
    throw NumericError("DensityState: trace exceeds 1: " + std::to_string(trace()));
}

HilbertDims HilbertDims::single_mode(int n) {
  if (n < 6)
    throw DimensionError("HilbertDims: cavity truncation must be >= 6 (code uses |4>)");
  HilbertDims d;
  d.cavity_dim = n;
  return d;
}

HilbertDims HilbertDims::two_mode(int na, int nb) {
  if (na < 6 || nb < 6)
    throw DimensionError("HilbertDims: cavity truncations must be >= 6");
  HilbertDims d;
  d.cavity_dim = na;
  d.cavity_dim_b = nb;
  return d;
}

HilbertDims HilbertDims::ancilla_only() { return HilbertDims{}; }

SpaceLabel HilbertDims::full_label() const {
  SpaceLabel l;
  if (cavity_dim > 0) l.factors.push_back({Factor::CavityA, cavity_dim});
  if (cavity_dim_b > 0) l.factors.push_back({Factor::CavityB, cavity_dim_b});
  l.factors.push_back({Factor::Ancilla, ancilla_dim});
  return l;
}

int HilbertDims::total_dim() const { return full_label().dim(); }

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

OperatorMatrix annihilation(const HilbertDims& dims, Factor which) {
  int n = (which == Factor::CavityA) ? dims.cavity_dim : dims.cavity_dim_b;
  if (n < 2) throw DimensionError("annihilation: cavity dimension must be >= 2");
  Matrix a = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(double(k));
  return {a, SpaceLabel::single(which, n)};
}

std::array<OperatorMatrix, 3> ancilla_projectors() {
  std::array<OperatorMatrix, 3> out;
  for (int k = 0; k < 3; ++k) {
    Matrix p = Matrix::Zero(3, 3);
    p(k, k) = 1.0;
    out[k] = {p, SpaceLabel::single(Factor::Ancilla, 3)};
  }
  return out;
}

OperatorMatrix ancilla_transition(int to, int from) {
  if (to < 0 || to > 2 || from < 0 || from > 2)
    throw DimensionError("ancilla_transition: level out of range");
  Matrix m = Matrix::Zero(3, 3);
  m(to, from) = 1.0;
  return {m, SpaceLabel::single(Factor::Ancilla, 3)};
}

OperatorMatrix sigma_gf_x() {
  Matrix m = Matrix::Zero(3, 3);
  m(kG, kF) = 1.0;
  m(kF, kG) = 1.0;
  return {m, SpaceLabel::single(Factor::Ancilla, 3)};
}

OperatorMatrix sigma_gf_y() {
  Matrix m = Matrix::Zero(3, 3);
  m(kG, kF) = Cx(0, -1);
  m(kF, kG) = Cx(0, 1);
  return {m, SpaceLabel::single(Factor::Ancilla, 3)};
}

OperatorMatrix sigma_ge_x() {
  Matrix m = Matrix::Zero(3, 3);
  m(kG, kE) = 1.0;
  m(kE, kG) = 1.0;
  return {m, SpaceLabel::single(Factor::Ancilla, 3)};
}

OperatorMatrix sigma_ge_y() {
  Matrix m = Matrix::Zero(3, 3);
  m(kG, kE) = Cx(0, -1);
  m(kE, kG) = Cx(0, 1);
  return {m, SpaceLabel::single(Factor::Ancilla, 3)};
}

OperatorMatrix photon_parity(const HilbertDims& dims, Factor which) {
  int n = (which == Factor::CavityA) ? dims.cavity_dim : dims.cavity_dim_b;
  if (n < 1) throw DimensionError("photon_parity: no such cavity factor");
  Matrix m = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) m(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
  return {m, SpaceLabel::single(which, n)};
}

OperatorMatrix parity_projector(const HilbertDims& dims, bool even, Factor which) {
  int n = (which == Factor::CavityA) ? dims.cavity_dim : dims.cavity_dim_b;
  if (n < 1) throw DimensionError("parity_projector: no such cavity factor");
  Matrix m = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k)
    if ((k % 2 == 0) == even) m(k, k) = 1.0;
  return {m, SpaceLabel::single(which, n)};
}

OperatorMatrix tensor(const OperatorMatrix& a, const OperatorMatrix& b) {
  for (auto& [f, n] : a.label.factors)
    if (b.label.has(f))
      throw DimensionError("tensor: repeated factor " + factor_name(f));
  // Canonical order: the operand with the lower-ranked factors goes first.
  const OperatorMatrix* lo = &a;
  const OperatorMatrix* hi = &b;
  if (static_cast<int>(a.label.factors.front().first) >
      static_cast<int>(b.label.factors.front().first))
    std::swap(lo, hi);
  if (static_cast<int>(lo->label.factors.back().first) >
      static_cast<int>(hi->label.factors.front().first))
    throw DimensionError("tensor: factor labels interleave; compose in factor order");
  SpaceLabel merged;
  merged.factors = lo->label.factors;
  merged.factors.insert(merged.factors.end(), hi->label.factors.begin(),
                        hi->label.factors.end());
  return {kron(lo->m, hi->m), merged};
}

OperatorMatrix embed(const OperatorMatrix& op, const SpaceLabel& full) {
  for (auto& [f, n] : op.label.factors) {
    if (!full.has(f))
      throw DimensionError("embed: full space lacks factor " + factor_name(f));
    if (full.dim_of(f) != n)
      throw DimensionError("embed: dimension mismatch on " + factor_name(f));
  }
  const int nf = static_cast<int>(full.factors.size());
  std::vector<int> dims(nf), in_op(nf, -1);
  for (int i = 0; i < nf; ++i) {
    dims[i] = full.factors[i].second;
    for (size_t j = 0; j < op.label.factors.size(); ++j)
      if (op.label.factors[j].first == full.factors[i].first)
        in_op[i] = static_cast<int>(j);
  }
  const int total = full.dim();
  const int opdim = op.label.dim();
  // strides of each op factor inside the op's own index
  std::vector<int> op_stride(op.label.factors.size(), 1);
  for (int j = static_cast<int>(op.label.factors.size()) - 2; j >= 0; --j)
    op_stride[j] = op_stride[j + 1] * op.label.factors[j + 1].second;

  Matrix out = Matrix::Zero(total, total);
  std::vector<int> ri(nf), ci(nf);
  for (int r = 0; r < total; ++r) {
    int t = r;
    for (int i = nf - 1; i >= 0; --i) { ri[i] = t % dims[i]; t /= dims[i]; }
    for (int c = 0; c < total; ++c) {
      t = c;
      for (int i = nf - 1; i >= 0; --i) { ci[i] = t % dims[i]; t /= dims[i]; }
      bool diag = true;
      int ro = 0, co = 0;
      for (int i = 0; i < nf; ++i) {
        if (in_op[i] < 0) {
          if (ri[i] != ci[i]) { diag = false; break; }
        } else {
          ro += ri[i] * op_stride[in_op[i]];
          co += ci[i] * op_stride[in_op[i]];
        }
      }
      if (diag) out(r, c) = op.m(ro, co);
    }
  }
  (void)opdim;
  return {out, full};
}

DensityState partial_trace(const DensityState& s, Factor keep) {
  if (!s.label.has(keep))
    throw DimensionError("partial_trace: unknown factor " + factor_name(keep));
  const int nf = static_cast<int>(s.label.factors.size());
  std::vector<int> dims(nf);
  int keep_idx = -1;
  for (int i = 0; i < nf; ++i) {
    dims[i] = s.label.factors[i].second;
    if (s.label.factors[i].first == keep) keep_idx = i;
  }
  const int dk = dims[keep_idx];
  const int total = s.label.dim();
  Matrix out = Matrix::Zero(dk, dk);
  std::vector<int> idx(nf);
  for (int r = 0; r < total; ++r) {
    int t = r;
    for (int i = nf - 1; i >= 0; --i) { idx[i] = t % dims[i]; t /= dims[i]; }
    std::vector<int> ridx = idx;
    for (int kc = 0; kc < dk; ++kc) {
      // column index equal to r except the kept factor set to kc
      int c = 0;
      for (int i = 0; i < nf; ++i) {
        int v = (i == keep_idx) ? kc : ridx[i];
        c = c * dims[i] + v;
      }
      out(ridx[keep_idx], kc) += s.rho(r, c);
    }
  }
  return {out, SpaceLabel::single(keep, dk)};
}

Vector fock(int dim, int n) {
  if (n < 0 || n >= dim) throw DimensionError("fock: level out of range");
  Vector v = Vector::Zero(dim);
  v(n) = 1.0;
  return v;
}

}  // namespace edc
