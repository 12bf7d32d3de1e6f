#include "edc/dynamics.hpp"

#include <cmath>

namespace edc {

namespace {

struct EigH {
  Matrix v;
  Eigen::VectorXd lambda;
};

EigH eigh(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success)
    throw NumericError("eigh: eigendecomposition failed");
  return {es.eigenvectors(), es.eigenvalues()};
}

Matrix segment_unitary(const EigH& e, double dt) {
  const Eigen::Index d = e.lambda.size();
  Vector ph(d);
  for (Eigen::Index a = 0; a < d; ++a)
    ph(a) = std::exp(Cx(0, -e.lambda(a) * dt));
  return e.v * ph.asDiagonal() * e.v.adjoint();
}

std::vector<double> segment_amps(const ControlPulse& pulse, int seg) {
  std::vector<double> a(pulse.channels.size());
  for (std::size_t c = 0; c < pulse.channels.size(); ++c)
    a[c] = pulse.channels[c][seg];
  return a;
}

// Direct RK4 right-hand side: -(K rho + rho K+) + sum_j r_j L rho L+ with
// K = iH + sum_j r_j L+L / 2.
struct DirectRhs {
  Matrix k;
  std::vector<Matrix> l;
  std::vector<double> r;

  void init(const Matrix& h, const CollapseSet& collapse) {
    const Eigen::Index d = h.rows();
    Matrix g = Matrix::Zero(d, d);
    l.clear();
    r.clear();
    for (auto& [op, rate] : collapse.ops) {
      l.push_back(op.m);
      r.push_back(rate);
      g += 0.5 * rate * (op.m.adjoint() * op.m);
    }
    k = Cx(0, 1) * h + g;
  }

  Matrix operator()(const Matrix& rho) const {
    Matrix out = -(k * rho) - (rho * k.adjoint());
    for (std::size_t j = 0; j < l.size(); ++j)
      out.noalias() += r[j] * (l[j] * rho * l[j].adjoint());
    return out;
  }
};

// Shared per-segment data for the interaction-picture scheme. Everything is
// expressed in the eigenbasis of the segment Hamiltonian; the dissipative flow
// is the only thing the RK4 steps have to resolve.
struct IpSegment {
  Matrix v;
  Eigen::VectorXd lambda;
  std::vector<Matrix> m;    // V+ L V
  std::vector<double> r;
  Matrix a;                 // sum_j r_j M+M / 2
  std::vector<Matrix> p;    // phase matrices at the 2*substeps+1 stage times
  Vector phase_end;         // exp(-i lambda dt)

  void init(const Matrix& h, const CollapseSet& collapse, double dt, int substeps) {
    EigH e = eigh(h);
    v = e.v;
    lambda = e.lambda;
    const Eigen::Index d = lambda.size();
    m.clear();
    r.clear();
    a = Matrix::Zero(d, d);
    for (auto& [op, rate] : collapse.ops) {
      m.push_back(v.adjoint() * op.m * v);
      r.push_back(rate);
      a += 0.5 * rate * (m.back().adjoint() * m.back());
    }
    const double h_sub = dt / substeps;
    p.resize(2 * substeps + 1);
    for (int s = 0; s <= 2 * substeps; ++s) {
      const double tau = 0.5 * h_sub * s;
      Vector u(d);
      for (Eigen::Index k = 0; k < d; ++k) u(k) = std::exp(Cx(0, lambda(k) * tau));
      p[s] = u * u.adjoint();  // P_ab = exp(i (lambda_a - lambda_b) tau)
    }
    phase_end = Vector(d);
    for (Eigen::Index k = 0; k < d; ++k)
      phase_end(k) = std::exp(Cx(0, -lambda(k) * dt));
  }

  Matrix rhs(const Matrix& rho, const Matrix& ph) const {
    Matrix w = ph.conjugate().cwiseProduct(rho);
    Matrix z = Matrix::Zero(rho.rows(), rho.cols());
    for (std::size_t j = 0; j < m.size(); ++j)
      z.noalias() += r[j] * (m[j] * w * m[j].adjoint());
    Matrix at = ph.cwiseProduct(a);
    return ph.cwiseProduct(z) - at * rho - rho * at;
  }

  // Advance one density-like matrix (given in the computational basis)
  // through the whole segment.
  void advance(Matrix& rho, double dt, int substeps) const {
    Matrix rt = v.adjoint() * rho * v;  // eigenbasis; IP frame coincides at tau=0
    const double h_sub = dt / substeps;
    for (int s = 0; s < substeps; ++s) {
      const Matrix& p0 = p[2 * s];
      const Matrix& pm = p[2 * s + 1];
      const Matrix& p1 = p[2 * s + 2];
      Matrix k1 = rhs(rt, p0);
      Matrix k2 = rhs(rt + 0.5 * h_sub * k1, pm);
      Matrix k3 = rhs(rt + 0.5 * h_sub * k2, pm);
      Matrix k4 = rhs(rt + h_sub * k3, p1);
      rt += (h_sub / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    // leave the interaction picture, then the eigenbasis
    rt = p.back().conjugate().cwiseProduct(rt);
    rho = v * rt * v.adjoint();
  }
};

void check_pulse_matches(const ControlPulse& pulse, const HamiltonianGenerator& gen) {
  if (static_cast<int>(pulse.channels.size()) != gen.channel_count())
    throw DimensionError("pulse channel count does not match the Hamiltonian model");
}

}  // namespace

Matrix propagate_unitary(const ControlPulse& pulse, const HamiltonianGenerator& gen) {
  check_pulse_matches(pulse, gen);
  const int d = gen.dim();
  Matrix u = Matrix::Identity(d, d);
  for (int s = 0; s < pulse.segment_count(); ++s) {
    Matrix h = gen.build(segment_amps(pulse, s));
    u = segment_unitary(eigh(h), pulse.dt) * u;
  }
  return u;
}

Matrix propagate_unitary(const ControlPulse& pulse, const SystemParams& p,
                         const HilbertDims& dims) {
  return propagate_unitary(pulse, HamiltonianGenerator(p, dims));
}

void propagate_lindblad_batch(std::vector<Matrix>& states, const ControlPulse& pulse,
                              const HamiltonianGenerator& gen,
                              const CollapseSet& collapse,
                              const LindbladOptions& opts, Exec exec) {
  check_pulse_matches(pulse, gen);
  if (opts.substeps < 1) throw NumericError("LindbladOptions: substeps must be >= 1");
  const auto n = static_cast<std::ptrdiff_t>(states.size());
  if (n == 0) return;

  if (opts.scheme == LindbladOptions::Scheme::InteractionRk4) {
    IpSegment seg;
    for (int s = 0; s < pulse.segment_count(); ++s) {
      seg.init(gen.build(segment_amps(pulse, s)), collapse, pulse.dt, opts.substeps);
      parallel_for(exec, n, [&](std::ptrdiff_t i) {
        seg.advance(states[i], pulse.dt, opts.substeps);
      });
    }
    return;
  }

  DirectRhs rhs;
  const double h = pulse.dt / opts.substeps;
  for (int s = 0; s < pulse.segment_count(); ++s) {
    rhs.init(gen.build(segment_amps(pulse, s)), collapse);
    parallel_for(exec, n, [&](std::ptrdiff_t i) {
      Matrix& rho = states[i];
      for (int k = 0; k < opts.substeps; ++k) {
        Matrix k1 = rhs(rho);
        Matrix k2 = rhs(rho + 0.5 * h * k1);
        Matrix k3 = rhs(rho + 0.5 * h * k2);
        Matrix k4 = rhs(rho + h * k3);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
    });
  }
}

DensityState propagate_lindblad(const DensityState& state, const ControlPulse& pulse,
                                const SystemParams& p, const HilbertDims& dims,
                                const CollapseSet& collapse,
                                const LindbladOptions& opts) {
  HamiltonianGenerator gen(p, dims);
  if (state.label != dims.full_label())
    throw DimensionError("propagate_lindblad: state is not on the model space");
  std::vector<Matrix> batch{state.rho};
  propagate_lindblad_batch(batch, pulse, gen, collapse, opts, Exec::Serial);
  return {batch[0], state.label};
}

std::pair<DensityState, double> postselect_ancilla(const DensityState& state,
                                                   const std::vector<int>& discard) {
  auto proj = ancilla_projectors();
  Matrix keep = Matrix::Identity(3, 3);
  for (int k : discard) {
    if (k < 0 || k > 2) throw DimensionError("postselect_ancilla: bad level");
    keep -= proj[k].m;
  }
  Matrix q = embed({keep, SpaceLabel::single(Factor::Ancilla, 3)}, state.label).m;
  DensityState out{q * state.rho * q, state.label};
  return {out, out.trace()};
}

std::pair<DensityState, double> postselect_parity(const DensityState& state, bool even) {
  const int n = state.label.dim_of(Factor::CavityA);
  HilbertDims d;
  d.cavity_dim = n;
  Matrix q = embed(parity_projector(d, even), state.label).m;
  DensityState out{q * state.rho * q, state.label};
  return {out, out.trace()};
}

LogicalFrame LogicalFrame::from_vectors(const Vector& v0, const Vector& v1,
                                        const SpaceLabel& label, double tol) {
  if (v0.size() != label.dim() || v1.size() != label.dim())
    throw DimensionError("LogicalFrame: vector dimension mismatch");
  if (std::abs(v0.norm() - 1.0) > tol || std::abs(v1.norm() - 1.0) > tol ||
      std::abs(v0.dot(v1)) > tol)
    throw NumericError("LogicalFrame: vectors are not orthonormal");
  return {v0, v1, label};
}

Matrix LogicalFrame::op(int i, int j) const {
  const Vector& a = i == 0 ? v0 : v1;
  const Vector& b = j == 0 ? v0 : v1;
  return a * b.adjoint();
}

Matrix LogicalFrame::pauli(int k) const {
  switch (k) {
    case 0: return op(0, 0) + op(1, 1);
    case 1: return op(0, 1) + op(1, 0);
    case 2: return Cx(0, -1) * op(0, 1) + Cx(0, 1) * op(1, 0);
    case 3: return op(0, 0) - op(1, 1);
  }
  throw DimensionError("LogicalFrame::pauli: index out of range");
}

std::array<Matrix, 4> LogicalFrame::cardinal_states() const {
  const Vector plus = (v0 + v1) / std::sqrt(2.0);
  const Vector minus_i = (v0 - Cx(0, 1) * v1) / std::sqrt(2.0);
  return {op(0, 0), op(1, 1), plus * plus.adjoint(), minus_i * minus_i.adjoint()};
}

Matrix ChannelMap::apply(const Matrix& in) const {
  if (in.rows() != in_dim || in.cols() != in_dim)
    throw DimensionError("ChannelMap::apply: input dimension mismatch");
  const int d = out_dim();
  Eigen::Map<const Vector> vin(in.data(), in.size());
  Vector vout = S * vin;
  return Eigen::Map<const Matrix>(vout.data(), d, d);
}

Matrix ChannelMap::choi() const {
  const int d = out_dim();
  Matrix j = Matrix::Zero(in_dim * d, in_dim * d);
  for (int r = 0; r < in_dim; ++r)
    for (int c = 0; c < in_dim; ++c) {
      Eigen::Map<const Matrix> block(S.col(r + c * in_dim).data(), d, d);
      j.block(r * d, c * d, d, d) = block;
    }
  return j;
}

double ChannelMap::choi_floor() const {
  Matrix j = choi();
  j = 0.5 * (j + j.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Matrix> es(j, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool ChannelMap::is_trace_preserving(double tol) const {
  for (int r = 0; r < in_dim; ++r)
    for (int c = 0; c < in_dim; ++c) {
      Cx tr = 0;
      const int d = out_dim();
      for (int k = 0; k < d; ++k) tr += S(k + k * d, r + c * in_dim);
      const Cx want = (r == c) ? Cx(1, 0) : Cx(0, 0);
      if (std::abs(tr - want) > tol) return false;
    }
  return true;
}

ChannelMap channel_from_pulse(const ControlPulse& pulse, const SystemParams& p,
                              const HilbertDims& dims, const CollapseSet& collapse,
                              const PostselectPolicy& policy,
                              const std::optional<LogicalFrame>& frame,
                              const LindbladOptions& opts, Exec exec) {
  HamiltonianGenerator gen(p, dims);
  const int d = gen.dim();
  const int k = frame ? 2 : d;

  std::vector<Matrix> basis;
  basis.reserve(static_cast<std::size_t>(k) * k);
  // column order matches vec indexing: (r, c) -> r + c*k
  for (int c = 0; c < k; ++c)
    for (int r = 0; r < k; ++r) {
      if (frame) {
        basis.push_back(frame->op(r, c));
      } else {
        Matrix e = Matrix::Zero(d, d);
        e(r, c) = 1.0;
        basis.push_back(e);
      }
    }

  if (pulse.segment_count() > 0)
    propagate_lindblad_batch(basis, pulse, gen, collapse, opts, exec);

  Matrix keep;
  if (!policy.none()) {
    keep = Matrix::Identity(d, d);
    if (policy.discard_e) {
      auto proj = ancilla_projectors();
      Matrix q = Matrix::Identity(3, 3) - proj[kE].m;
      keep = embed({q, SpaceLabel::single(Factor::Ancilla, 3)}, dims.full_label()).m * keep;
    }
    if (policy.require_even.has_value())
      keep = embed(parity_projector(dims, *policy.require_even), dims.full_label()).m * keep;
  }

  ChannelMap ch;
  ch.in_dim = k;
  ch.frame = frame;
  ch.out_label = dims.full_label();
  ch.trace_nonincreasing = !policy.none();
  ch.S.resize(d * d, k * k);
  for (int col = 0; col < k * k; ++col) {
    Matrix out = basis[col];
    if (!policy.none()) out = keep * out * keep.adjoint();
    ch.S.col(col) = Eigen::Map<const Vector>(out.data(), out.size());
  }
  return ch;
}

ChannelMap unitary_channel(const Matrix& u, const SpaceLabel& label) {
  const int d = static_cast<int>(u.rows());
  if (d != label.dim()) throw DimensionError("unitary_channel: dimension mismatch");
  ChannelMap ch;
  ch.in_dim = d;
  ch.out_label = label;
  ch.S = kron(u.conjugate(), u);
  ch.trace_nonincreasing = false;
  return ch;
}

ChannelMap compose(const ChannelMap& outer, const ChannelMap& inner) {
  if (outer.frame || inner.in_dim != inner.out_dim())
    throw DimensionError("compose: channels must act on full bases");
  if (outer.in_dim != inner.out_dim())
    throw DimensionError("compose: dimension mismatch");
  ChannelMap ch;
  ch.S = outer.S * inner.S;
  ch.in_dim = inner.in_dim;
  ch.frame = inner.frame;
  ch.out_label = outer.out_label;
  ch.trace_nonincreasing = outer.trace_nonincreasing || inner.trace_nonincreasing;
  return ch;
}

Matrix cavity_damping_superop(int n, double kappa, double t) {
  if (n < 1) throw DimensionError("cavity_damping_superop: bad dimension");
  const double gamma = 1.0 - std::exp(-kappa * t);
  Matrix s = Matrix::Zero(n * n, n * n);
  // Kraus operators A_k = sum_m sqrt(C(m,k) (1-gamma)^(m-k) gamma^k) |m-k><m|
  for (int k = 0; k < n; ++k) {
    Matrix a = Matrix::Zero(n, n);
    for (int m = k; m < n; ++m) {
      double logc = std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0);
      double w = std::exp(logc + (m - k) * std::log1p(-gamma) +
                          (k > 0 ? k * std::log(gamma) : 0.0));
      a(m - k, m) = std::sqrt(w);
    }
    s += kron(a.conjugate(), a);
  }
  return s;
}

PTM ptm_of(const ChannelMap& channel, const LogicalFrame& out_frame) {
  if (!channel.frame)
    throw DimensionError("ptm_of: channel has no logical input frame");
  if (out_frame.label.dim() != channel.out_dim())
    throw DimensionError("ptm_of: output frame dimension mismatch");

  // Input Paulis in frame coordinates.
  std::array<Eigen::Matrix2cd, 4> pin;
  pin[0] = Eigen::Matrix2cd::Identity();
  pin[1] << 0, 1, 1, 0;
  pin[2] << 0, Cx(0, -1), Cx(0, 1), 0;
  pin[3] << 1, 0, 0, -1;

  PTM out;
  for (int j = 0; j < 4; ++j) {
    Matrix image = channel.apply(pin[j]);
    for (int i = 0; i < 4; ++i)
      out.R(i, j) = 0.5 * (out_frame.pauli(i).adjoint() * image).trace().real();
  }
  if (channel.trace_nonincreasing) {
    const double sbar = success_probability(channel);
    if (sbar < 1e-12)
      throw NumericError("ptm_of: degenerate post-selected channel (zero success)");
    out.R /= sbar;
  }
  return out;
}

PTM ptm_of(const ChannelMap& channel) {
  if (!channel.frame)
    throw DimensionError("ptm_of: channel has no logical input frame");
  return ptm_of(channel, *channel.frame);
}

double process_fidelity(const PTM& sim, const PTM& ideal) {
  return (ideal.R.transpose() * sim.R).trace() / 4.0;
}

double success_probability(const ChannelMap& channel) {
  if (!channel.frame)
    throw DimensionError("success_probability: channel has no logical input frame");
  // frame-coordinate versions of the four cardinal states
  std::array<Eigen::Matrix2cd, 4> states;
  states[0] << 1, 0, 0, 0;
  states[1] << 0, 0, 0, 1;
  states[2] << 0.5, 0.5, 0.5, 0.5;
  states[3] << 0.5, Cx(0, 0.5), Cx(0, -0.5), 0.5;
  double mean = 0;
  for (auto& s : states) mean += channel.apply(s).trace().real();
  return mean / 4.0;
}

}  // namespace edc
