#include "edc/qec.hpp"

#include <algorithm>
#include <cmath>

namespace edc {

namespace {

Vector with_ancilla(const Vector& cav, int level) {
  Vector anc = Vector::Zero(3);
  anc(level) = 1.0;
  return kron(cav, anc);
}

Vector kron_vec(const Vector& a, const Vector& b) { return kron(a, b); }

// in_dim-2 channel over the cavity given its superoperator and a cavity frame.
ChannelMap cavity_channel(const Matrix& s_cav, const LogicalFrame& frame,
                          bool trace_nonincreasing) {
  const int n = static_cast<int>(frame.label.dim());
  ChannelMap ch;
  ch.in_dim = 2;
  ch.frame = frame;
  ch.out_label = frame.label;
  ch.trace_nonincreasing = trace_nonincreasing;
  ch.S.resize(n * n, 4);
  for (int c = 0; c < 2; ++c)
    for (int r = 0; r < 2; ++r) {
      Matrix op = frame.op(r, c);
      ch.S.col(r + 2 * c) = s_cav * Eigen::Map<const Vector>(op.data(), op.size());
    }
  return ch;
}

double interp_series(const std::vector<double>& xs, const std::vector<double>& ys,
                     double x) {
  if (xs.size() < 2) throw NumericError("interp: series too short");
  const double lo = xs.front(), hi = xs.back();
  if (x < lo - 1e-12 || x > hi + 1e-12)
    throw NumericError("interp: time outside the series grid");
  x = std::clamp(x, lo, hi);
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = std::min(xs.size() - 1, static_cast<std::size_t>(it - xs.begin()));
  if (i == 0) i = 1;
  const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] * (1 - w) + ys[i] * w;
}

Matrix matrix_power(const Matrix& m, int k) {
  Matrix out = Matrix::Identity(m.rows(), m.cols());
  for (int i = 0; i < k; ++i) out = m * out;
  return out;
}

OutcomeMaps ideal_outcome_maps(const TargetIsometry& target, const HilbertDims& dims,
                               double kappa, double duration) {
  const int n = dims.cavity_dim;
  Matrix u = complete_isometry(target);
  Matrix half = cavity_damping_superop(n, kappa, duration / 2.0);
  OutcomeMaps maps;
  for (int a = 0; a < 3; ++a) {
    Matrix k(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) k(i, j) = u(i * 3 + a, j * 3 + kG);
    Matrix m = half * kron(k.conjugate(), k) * half;
    (a == kG ? maps.g : a == kE ? maps.e : maps.f) = m;
  }
  return maps;
}

}  // namespace

BinomialCode BinomialCode::standard(int cavity_dim) {
  if (cavity_dim < 6)
    throw DimensionError("BinomialCode: cavity truncation must be >= 6");
  BinomialCode c;
  c.cavity_dim = cavity_dim;
  c.word0 = (fock(cavity_dim, 0) + fock(cavity_dim, 4)) / std::sqrt(2.0);
  c.word1 = fock(cavity_dim, 2);
  c.err0 = fock(cavity_dim, 3);
  c.err1 = fock(cavity_dim, 1);
  c.nbar = 2.0;
  return c;
}

LogicalFrame BinomialCode::code_frame(const HilbertDims& dims, int ancilla_level) const {
  if (dims.cavity_dim != cavity_dim)
    throw DimensionError("BinomialCode: dims mismatch");
  return LogicalFrame::from_vectors(with_ancilla(word0, ancilla_level),
                                    with_ancilla(word1, ancilla_level),
                                    dims.full_label());
}

LogicalFrame BinomialCode::error_frame(const HilbertDims& dims, int ancilla_level) const {
  return LogicalFrame::from_vectors(with_ancilla(err0, ancilla_level),
                                    with_ancilla(err1, ancilla_level),
                                    dims.full_label());
}

LogicalFrame BinomialCode::code_frame_cavity() const {
  return LogicalFrame::from_vectors(word0, word1,
                                    SpaceLabel::single(Factor::CavityA, cavity_dim));
}

LogicalFrame BinomialCode::fock01_frame_cavity() const {
  return LogicalFrame::from_vectors(fock(cavity_dim, 0), fock(cavity_dim, 1),
                                    SpaceLabel::single(Factor::CavityA, cavity_dim));
}

TargetIsometry hadamard_target(const BinomialCode& code, const HilbertDims& dims) {
  const double s = 1.0 / std::sqrt(2.0);
  TargetIsometry t;
  t.label = "H";
  t.space = dims.full_label();
  t.inputs = {with_ancilla(code.word0, kG), with_ancilla(code.word1, kG)};
  t.outputs = {with_ancilla(Vector(s * (code.word0 + code.word1)), kG),
               with_ancilla(Vector(s * (code.word0 - code.word1)), kG)};
  return t;
}

TargetIsometry t_gate_target(const BinomialCode& code, const HilbertDims& dims) {
  TargetIsometry t;
  t.label = "T";
  t.space = dims.full_label();
  t.inputs = {with_ancilla(code.word0, kG), with_ancilla(code.word1, kG)};
  t.outputs = {with_ancilla(code.word0, kG),
               std::exp(Cx(0, kPi / 4)) * with_ancilla(code.word1, kG)};
  return t;
}

TargetIsometry encode_target(const BinomialCode& code, const HilbertDims& dims) {
  TargetIsometry t;
  t.label = "Encode";
  t.space = dims.full_label();
  t.inputs = {with_ancilla(fock(code.cavity_dim, 0), kG),
              with_ancilla(fock(code.cavity_dim, 1), kG)};
  t.outputs = {with_ancilla(code.word0, kG), with_ancilla(code.word1, kG)};
  return t;
}

TargetIsometry decode_target(const BinomialCode& code, const HilbertDims& dims) {
  TargetIsometry t = encode_target(code, dims);
  t.label = "Decode";
  std::swap(t.inputs, t.outputs);
  return t;
}

TargetIsometry parity_map_target(const BinomialCode& code, const HilbertDims& dims,
                                 AncillaControl control) {
  const int flag = control == AncillaControl::TwoPhotonGF ? kF : kE;
  TargetIsometry t;
  t.label = "ParityMap";
  t.space = dims.full_label();
  t.inputs = {with_ancilla(code.word0, kG), with_ancilla(code.word1, kG),
              with_ancilla(code.err0, kG), with_ancilla(code.err1, kG)};
  t.outputs = {with_ancilla(code.word0, kG), with_ancilla(code.word1, kG),
               with_ancilla(code.err0, flag), with_ancilla(code.err1, flag)};
  return t;
}

TargetIsometry recovery_target(const BinomialCode& code, const HilbertDims& dims,
                               double kappa, double tau) {
  if (tau < 0) throw ConfigError("recovery_target: tau must be >= 0");
  TargetIsometry t;
  t.label = "QECRecovery";
  t.space = dims.full_label();
  for (const Vector* w : {&code.word0, &code.word1}) {
    Vector d = *w;
    for (int n = 0; n < code.cavity_dim; ++n) d(n) *= std::exp(-0.5 * kappa * tau * n);
    d.normalize();
    t.inputs.push_back(with_ancilla(d, kG));
    t.outputs.push_back(with_ancilla(*w, kG));
  }
  return t;
}

TargetIsometry error_recovery_target(const BinomialCode& code, const HilbertDims& dims) {
  TargetIsometry t;
  t.label = "QECRecoveryError";
  t.space = dims.full_label();
  t.inputs = {with_ancilla(code.err0, kG), with_ancilla(code.err1, kG)};
  t.outputs = {with_ancilla(code.word0, kG), with_ancilla(code.word1, kG)};
  return t;
}

TargetIsometry ancilla_pi_target(AncillaControl control) {
  TargetIsometry t;
  t.label = "AncillaPi";
  t.space = HilbertDims::ancilla_only().full_label();
  Vector g = Vector::Zero(3), x = Vector::Zero(3);
  g(kG) = 1.0;
  x(control == AncillaControl::TwoPhotonGF ? kF : kE) = 1.0;
  t.inputs = {g};
  t.outputs = {x};
  return t;
}

TargetIsometry cz_target(const BinomialCode& code_a, const BinomialCode& code_b,
                         const HilbertDims& dims) {
  if (!dims.two_mode_problem())
    throw DimensionError("cz_target: needs a two-mode space");
  TargetIsometry t;
  t.label = "CZ";
  t.space = dims.full_label();
  const std::array<const Vector*, 2> wa = {&code_a.word0, &code_a.word1};
  const std::array<const Vector*, 2> wb = {&code_b.word0, &code_b.word1};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Vector v = with_ancilla(kron_vec(*wa[i], *wb[j]), kG);
      t.inputs.push_back(v);
      t.outputs.push_back((i == 1 && j == 1) ? Vector(-v) : v);
    }
  return t;
}

void CycleSchedule::validate() const {
  if (n_pm < 1) throw ConfigError("CycleSchedule: n_pm must be >= 1");
  if (t_w < 0 || t_pm < 0 || t_qec < 0)
    throw ConfigError("CycleSchedule: durations must be >= 0");
}

OutcomeMaps pulse_outcome_maps(const ControlPulse& pulse, const SystemParams& p,
                               const HilbertDims& dims, const LindbladOptions& opts,
                               Exec exec) {
  if (dims.two_mode_problem())
    throw DimensionError("pulse_outcome_maps: single-mode only");
  const int n = dims.cavity_dim;
  HamiltonianGenerator gen(p, dims);
  CollapseSet collapse = default_collapse_set(p, dims);

  std::vector<Matrix> basis;
  basis.reserve(static_cast<std::size_t>(n) * n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) {
      Matrix full = Matrix::Zero(3 * n, 3 * n);
      full(r * 3 + kG, c * 3 + kG) = 1.0;
      basis.push_back(std::move(full));
    }
  if (pulse.segment_count() > 0)
    propagate_lindblad_batch(basis, pulse, gen, collapse, opts, exec);

  OutcomeMaps maps;
  for (Matrix* m : {&maps.g, &maps.e, &maps.f}) m->resize(n * n, n * n);
  for (int col = 0; col < n * n; ++col) {
    for (int a = 0; a < 3; ++a) {
      Matrix blk(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) blk(i, j) = basis[col](i * 3 + a, j * 3 + a);
      Matrix& dst = (a == kG) ? maps.g : (a == kE) ? maps.e : maps.f;
      dst.col(col) = Eigen::Map<const Vector>(blk.data(), blk.size());
    }
  }
  return maps;
}

LifetimeResult physical_baseline(const SystemParams& p, const HilbertDims& dims,
                                 int n_points, double t_max) {
  if (p.kappa <= 0) throw ConfigError("physical_baseline: kappa must be > 0");
  if (n_points < 4) throw ConfigError("physical_baseline: need at least 4 points");
  if (t_max <= 0) t_max = 6.0 / p.kappa;
  BinomialCode code = BinomialCode::standard(dims.cavity_dim);
  const LogicalFrame frame = code.fock01_frame_cavity();
  const PTM ideal;

  LifetimeResult out;
  for (int i = 0; i < n_points; ++i) {
    const double t = t_max * i / (n_points - 1);
    Matrix s = cavity_damping_superop(dims.cavity_dim, p.kappa, t);
    ChannelMap ch = cavity_channel(s, frame, false);
    out.time_s.push_back(t);
    out.fidelity.push_back(process_fidelity(ptm_of(ch), ideal));
    out.success_prob.push_back(1.0);
  }
  out.fit = fit_decay(out.time_s, out.fidelity);
  return out;
}

LifetimeResult run_cycles(StrategyTag strategy, const CycleSchedule& schedule,
                          const CyclePulses& pulses, const SystemParams& p,
                          const HilbertDims& dims, const CycleOptions& opts) {
  schedule.validate();
  if (strategy == StrategyTag::None) {
    return physical_baseline(p, dims, opts.n_cycles + 1,
                             schedule.t_int() * opts.n_cycles);
  }
  if (strategy == StrategyTag::EDA && schedule.n_pm != 1)
    throw ConfigError("run_cycles: EDA recovers after every parity check (n_pm = 1)");
  if (strategy == StrategyTag::EDB && p.control != AncillaControl::DirectGE)
    throw ConfigError("run_cycles: EDB requires the g-e ancilla model");
  if (strategy != StrategyTag::EDB && p.control != AncillaControl::TwoPhotonGF)
    throw ConfigError("run_cycles: EDA/EDAB require the two-photon g-f ancilla");

  const int n = dims.cavity_dim;
  BinomialCode code = BinomialCode::standard(n);
  const double tau = schedule.n_pm * (schedule.t_w + schedule.t_pm);

  OutcomeMaps par, rc, re;
  if (opts.ideal_unitaries) {
    par = ideal_outcome_maps(parity_map_target(code, dims, p.control), dims, p.kappa,
                             schedule.t_pm);
    rc = ideal_outcome_maps(recovery_target(code, dims, p.kappa, tau), dims, p.kappa,
                            schedule.t_qec);
    if (strategy == StrategyTag::EDA)
      re = ideal_outcome_maps(error_recovery_target(code, dims), dims, p.kappa,
                              schedule.t_qec);
  } else {
    par = pulse_outcome_maps(pulses.parity, p, dims, opts.integ, opts.exec);
    rc = pulse_outcome_maps(pulses.qec_code, p, dims, opts.integ, opts.exec);
    if (strategy == StrategyTag::EDA) {
      if (!pulses.qec_error)
        throw ConfigError("run_cycles: EDA requires the error-recovery pulse");
      re = pulse_outcome_maps(*pulses.qec_error, p, dims, opts.integ, opts.exec);
    }
  }

  const Matrix wait = cavity_damping_superop(n, p.kappa, schedule.t_w);
  Matrix cycle;
  switch (strategy) {
    case StrategyTag::EDA:
      // Recovery is conditioned on the parity outcome; |e> outcomes are
      // dropped, the rest are merged after the ancilla reset.
      cycle = ((rc.g + rc.f) * par.g + (re.g + re.f) * par.f) * wait;
      break;
    case StrategyTag::EDAB: {
      Matrix step = par.g * wait;
      cycle = (rc.g + rc.f) * matrix_power(step, schedule.n_pm);
      break;
    }
    case StrategyTag::EDB: {
      // Odd parity reads out as |e>; no ancilla post-selection is available,
      // so the recovery keeps every outcome.
      Matrix step = par.g * wait;
      cycle = (rc.g + rc.e + rc.f) * matrix_power(step, schedule.n_pm);
      break;
    }
    default:
      throw ConfigError("run_cycles: unsupported strategy");
  }

  const LogicalFrame frame = code.code_frame_cavity();
  const PTM ideal;
  std::array<Vector, 4> basis;
  for (int c = 0; c < 2; ++c)
    for (int r = 0; r < 2; ++r) {
      Matrix op = frame.op(r, c);
      basis[r + 2 * c] = Eigen::Map<const Vector>(op.data(), op.size());
    }

  LifetimeResult out;
  for (int k = 0; k <= opts.n_cycles; ++k) {
    ChannelMap ch;
    ch.in_dim = 2;
    ch.frame = frame;
    ch.out_label = frame.label;
    ch.trace_nonincreasing = true;
    ch.S.resize(n * n, 4);
    for (int b = 0; b < 4; ++b) ch.S.col(b) = basis[b];
    out.time_s.push_back(k * schedule.t_int());
    out.fidelity.push_back(process_fidelity(ptm_of(ch), ideal));
    out.success_prob.push_back(success_probability(ch));
    if (k < opts.n_cycles)
      for (auto& v : basis) v = cycle * v;
  }
  if (opts.fit) out.fit = fit_decay(out.time_s, out.fidelity);
  return out;
}

DecayFit fit_decay(std::span<const double> time_s, std::span<const double> fidelity) {
  const std::size_t n = time_s.size();
  if (n < 4 || fidelity.size() != n)
    throw NumericError("fit_decay: need at least 4 points");
  if (!(fidelity.front() - fidelity.back() > 1e-12))
    throw NumericError("fit_decay: series does not decrease");

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = fidelity[i] - 0.25;

  auto amplitude_for = [&](double t1) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::exp(-time_s[i] / t1);
      num += y[i] * e;
      den += e * e;
    }
    return den > 0 ? num / den : 0.0;
  };
  auto sse_for = [&](double t1) {
    const double a = amplitude_for(t1);
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - a * std::exp(-time_s[i] / t1);
      s += r * r;
    }
    return s;
  };

  const double t_scale = time_s.back();
  if (t_scale <= 0) throw NumericError("fit_decay: degenerate time grid");
  const int grid = 600;
  const double lo = std::log(t_scale * 1e-3), hi = std::log(t_scale * 1e3);
  int best = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double t1 = std::exp(lo + (hi - lo) * i / (grid - 1));
    const double s = sse_for(t1);
    if (s < best_sse) {
      best_sse = s;
      best = i;
    }
  }
  if (best == 0 || best == grid - 1)
    throw NumericError("fit_decay: no interior optimum, residual " +
                       std::to_string(std::sqrt(best_sse)));

  // golden-section refinement on the bracketing interval
  double a = std::exp(lo + (hi - lo) * (best - 1) / (grid - 1));
  double b = std::exp(lo + (hi - lo) * (best + 1) / (grid - 1));
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = sse_for(x1), f2 = sse_for(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-14 * t_scale; ++it) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - gr * (b - a);
      f1 = sse_for(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + gr * (b - a);
      f2 = sse_for(x2);
    }
  }
  DecayFit fit;
  fit.t1 = 0.5 * (a + b);
  fit.amplitude = amplitude_for(fit.t1);
  fit.residual = std::sqrt(sse_for(fit.t1));

  // Gauss-Newton covariance about the optimum.
  Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::exp(-time_s[i] / fit.t1);
    Eigen::Vector2d j(e, fit.amplitude * e * time_s[i] / (fit.t1 * fit.t1));
    jtj += j * j.transpose();
  }
  const double dof = static_cast<double>(n) - 2.0;
  const double sigma2 = dof > 0 ? fit.residual * fit.residual / dof : 0.0;
  fit.covariance = sigma2 * jtj.inverse();
  return fit;
}

double gain_breakeven(const LifetimeResult& logical, const LifetimeResult& physical) {
  if (logical.fit.t1 <= 0 || physical.fit.t1 <= 0)
    throw NumericError("gain_breakeven: both series must carry a fit");
  return logical.fit.t1 / physical.fit.t1;
}

double infidelity_ratio(const LifetimeResult& logical, const LifetimeResult& physical,
                        double t) {
  const double fl = interp_series(logical.time_s, logical.fidelity, t);
  const double fp = interp_series(physical.time_s, physical.fidelity, t);
  const double il = std::max(1.0 - fl, 0.0);
  const double ip = std::max(1.0 - fp, 0.0);
  if (il < 1e-15) {
    if (ip < 1e-15) return 1.0;
    throw NumericError("infidelity_ratio: logical infidelity vanishes at t");
  }
  return ip / il;
}

RatioPeak peak_infidelity_ratio(const LifetimeResult& logical,
                                const LifetimeResult& physical) {
  RatioPeak peak;
  for (std::size_t i = 1; i < logical.time_s.size(); ++i) {
    const double t = logical.time_s[i];
    if (t > physical.time_s.back() + 1e-12) break;
    const double r = infidelity_ratio(logical, physical, t);
    if (r > peak.value) {
      peak.value = r;
      peak.t = t;
    }
  }
  return peak;
}

}  // namespace edc
