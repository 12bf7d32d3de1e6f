#include "edc/grape.hpp"

#include <cmath>
#include <random>

namespace edc {

namespace {

void orthonormal_check(const std::vector<Vector>& vs, double tol, const char* what) {
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = i; j < vs.size(); ++j) {
      const Cx g = vs[i].dot(vs[j]);
      const Cx want = (i == j) ? Cx(1, 0) : Cx(0, 0);
      if (std::abs(g - want) > tol)
        throw NumericError(std::string(what) + ": vectors are not orthonormal");
    }
}

struct EigCache {
  Matrix v;
  Eigen::VectorXd lambda;
  Matrix u;  // exp(-i H dt)
};

EigCache eig_segment(const Matrix& h, double dt) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw NumericError("gradient: eigensolver failed");
  EigCache c{es.eigenvectors(), es.eigenvalues(), {}};
  const Eigen::Index d = c.lambda.size();
  Vector ph(d);
  for (Eigen::Index a = 0; a < d; ++a) ph(a) = std::exp(Cx(0, -c.lambda(a) * dt));
  c.u = c.v * ph.asDiagonal() * c.v.adjoint();
  return c;
}

double sinc(double x) {
  if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

// Gamma_ab = (exp(-i la dt) - exp(-i lb dt)) / (la - lb), continuous at la=lb.
Matrix frechet_weights(const Eigen::VectorXd& lambda, double dt) {
  const Eigen::Index d = lambda.size();
  Matrix g(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) {
      const double mu = 0.5 * (lambda(a) + lambda(b));
      const double delta = lambda(a) - lambda(b);
      g(a, b) = Cx(0, -dt) * std::exp(Cx(0, -mu * dt)) * sinc(0.5 * delta * dt);
    }
  return g;
}

std::vector<double> seg_amps(const ControlPulse& pulse, int s) {
  std::vector<double> a(pulse.channels.size());
  for (std::size_t c = 0; c < pulse.channels.size(); ++c) a[c] = pulse.channels[c][s];
  return a;
}

Matrix pack_columns(const std::vector<Vector>& vs) {
  Matrix m(vs[0].size(), vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) m.col(i) = vs[i];
  return m;
}

double smoothing_penalty(const ControlPulse& pulse, const OptimizerConfig& cfg) {
  if (cfg.smoothing_weight <= 0 || pulse.segment_count() < 2) return 0;
  double acc = 0;
  std::size_t n = 0;
  for (auto& ch : pulse.channels) {
    for (std::size_t i = 0; i + 1 < ch.size(); ++i) {
      const double d = ch[i + 1] - ch[i];
      acc += d * d;
    }
    n += ch.size();
  }
  return cfg.smoothing_weight * acc / (cfg.amp_max * cfg.amp_max * n);
}

void add_penalty_gradient(const ControlPulse& pulse, const OptimizerConfig& cfg,
                          std::vector<std::vector<double>>& grad) {
  if (cfg.smoothing_weight <= 0 || pulse.segment_count() < 2) return;
  std::size_t n = 0;
  for (auto& ch : pulse.channels) n += ch.size();
  const double scale = cfg.smoothing_weight / (cfg.amp_max * cfg.amp_max * n);
  for (std::size_t c = 0; c < pulse.channels.size(); ++c) {
    const auto& ch = pulse.channels[c];
    const int m = static_cast<int>(ch.size());
    for (int i = 0; i < m; ++i) {
      double d = 0;
      if (i + 1 < m) d += 2.0 * (ch[i] - ch[i + 1]);
      if (i > 0) d += 2.0 * (ch[i] - ch[i - 1]);
      grad[c][i] -= scale * d;  // objective subtracts the penalty
    }
  }
}

}  // namespace

void TargetIsometry::validate(double tol) const {
  if (inputs.empty() || inputs.size() != outputs.size())
    throw DimensionError("TargetIsometry: input/output cardinality mismatch");
  const int d = space.dim();
  for (auto& v : inputs)
    if (v.size() != d) throw DimensionError("TargetIsometry: input dimension mismatch");
  for (auto& v : outputs)
    if (v.size() != d) throw DimensionError("TargetIsometry: output dimension mismatch");
  orthonormal_check(inputs, tol, "TargetIsometry inputs");
  orthonormal_check(outputs, tol, "TargetIsometry outputs");
}

double OptimizerConfig::bound_for_channel(int channel) const {
  return channel >= kOmegaRx ? cavity_amp_max : amp_max;
}

void OptimizerConfig::validate() const {
  if (max_iterations <= 0 || amp_max <= 0 || cavity_amp_max <= 0 ||
      step_init_rel <= 0 || step_grow <= 1 || step_shrink <= 0 ||
      step_shrink >= 1 || init_scale < 0 || init_scale_ancilla < 0 ||
      leak_weight < 0 || leak_levels < 0)
    throw ConfigError("OptimizerConfig: fields must be positive");
  if (threshold < 0 || threshold >= 1)
    throw ConfigError("OptimizerConfig: threshold must lie in [0, 1)");
}

HilbertDims dims_from_label(const SpaceLabel& label) {
  HilbertDims d;
  if (label.has(Factor::CavityA)) d.cavity_dim = label.dim_of(Factor::CavityA);
  if (label.has(Factor::CavityB)) d.cavity_dim_b = label.dim_of(Factor::CavityB);
  if (!label.has(Factor::Ancilla))
    throw DimensionError("dims_from_label: space lacks the ancilla factor");
  return d;
}

namespace {

// Per-segment eigendecompositions run in parallel; the ordered propagator
// products that need them are cheap by comparison.
std::vector<EigCache> segment_eigs(const ControlPulse& pulse,
                                   const HamiltonianGenerator& gen, Exec exec) {
  std::vector<EigCache> eig(pulse.segment_count());
  parallel_for(exec, pulse.segment_count(), [&](std::ptrdiff_t s) {
    eig[s] = eig_segment(gen.build(seg_amps(pulse, static_cast<int>(s))), pulse.dt);
  });
  return eig;
}

double fidelity_from_eigs(const std::vector<EigCache>& eig,
                          const TargetIsometry& target) {
  Matrix f = pack_columns(target.inputs);
  for (auto& e : eig) f = e.u * f;
  Cx c = (pack_columns(target.outputs).adjoint() * f).trace();
  const double kk = target.k();
  return std::norm(c) / (kk * kk);
}

// Projector onto the top cavity Fock levels (truncation guard), or empty when
// the space has no cavity factor.
Matrix leak_projector(const SpaceLabel& space, int levels) {
  Matrix p;
  for (Factor f : {Factor::CavityA, Factor::CavityB}) {
    if (!space.has(f)) continue;
    const int n = space.dim_of(f);
    Matrix top = Matrix::Zero(n, n);
    for (int k = std::max(0, n - levels); k < n; ++k) top(k, k) = 1.0;
    Matrix full = embed({top, SpaceLabel::single(f, n)}, space).m;
    p = p.size() ? Matrix(p + full) : full;
  }
  return p;
}

struct SweepResult {
  double phi = 0;
  double leak = 0;  // mean guarded-level population along the trajectory
  std::vector<std::vector<double>> grad;  // of (phi - leak_weight * leak)
};

// Forward/backward sweeps shared by the fidelity and the leakage penalty;
// both gradients come from the same per-segment directional derivative of
// exp(-i H dt), contracted against different co-state overlaps.
SweepResult objective_sweep(const std::vector<EigCache>& eig,
                            const ControlPulse& pulse,
                            const HamiltonianGenerator& gen,
                            const TargetIsometry& target, const Matrix* p_top,
                            double leak_weight, bool want_grad, Exec exec) {
  const int m = pulse.segment_count();
  const int nch = gen.channel_count();
  const int kk = target.k();

  std::vector<Matrix> fwd(m + 1);  // fwd[s] = U_{s-1}..U_0 V
  fwd[0] = pack_columns(target.inputs);
  for (int s = 0; s < m; ++s) fwd[s + 1] = eig[s].u * fwd[s];

  SweepResult res;
  Cx c = (pack_columns(target.outputs).adjoint() * fwd[m]).trace();
  res.phi = std::norm(c) / (double(kk) * kk);

  const bool leak_on = p_top != nullptr && m > 0;
  if (leak_on) {
    double acc = 0;
    for (int s = 1; s <= m; ++s)
      acc += ((*p_top) * fwd[s]).cwiseAbs2().sum();
    res.leak = acc / (double(m) * kk);
  }
  if (!want_grad) return res;

  std::vector<Matrix> bwd(m + 1);  // bwd[s] = (U_{m-1}..U_s)+ T
  bwd[m] = pack_columns(target.outputs);
  for (int s = m - 1; s >= 0; --s) bwd[s] = eig[s].u.adjoint() * bwd[s + 1];

  // leakage co-states chi[s] = P fwd[s+1] + U_{s+1}+ chi[s+1]
  std::vector<Matrix> chi;
  if (leak_on) {
    chi.resize(m);
    chi[m - 1] = (*p_top) * fwd[m];
    for (int s = m - 2; s >= 0; --s)
      chi[s] = (*p_top) * fwd[s + 1] + eig[s + 1].u.adjoint() * chi[s + 1];
  }

  const Cx fid_scale = std::conj(c) * (2.0 / (double(kk) * kk));
  const double leak_scale = leak_on ? 2.0 * leak_weight / (double(m) * kk) : 0.0;

  res.grad.assign(nch, std::vector<double>(m, 0.0));
  parallel_for(exec, m, [&](std::ptrdiff_t s) {
    const Matrix gamma = frechet_weights(eig[s].lambda, pulse.dt);
    const Matrix q = eig[s].v.adjoint() * fwd[s];  // d x K
    Matrix w = fid_scale *
               (q * (eig[s].v.adjoint() * bwd[s + 1]).adjoint()).transpose();
    if (leak_on)
      w -= leak_scale *
           (q * (eig[s].v.adjoint() * chi[s]).adjoint()).transpose();
    const auto amps = seg_amps(pulse, s);
    for (int ch = 0; ch < nch; ++ch) {
      const Matrix dh = gen.d_amp(amps, ch);
      if (dh.isZero(0)) continue;
      const Matrix g = eig[s].v.adjoint() * dh * eig[s].v;
      res.grad[ch][s] = (gamma.cwiseProduct(g).cwiseProduct(w)).sum().real();
    }
  });
  return res;
}

}  // namespace

double gate_fidelity(const ControlPulse& pulse, const TargetIsometry& target,
                     const SystemParams& p) {
  target.validate();
  HamiltonianGenerator gen(p, dims_from_label(target.space));
  Matrix u = propagate_unitary(pulse, gen);
  Cx c = 0;
  for (int k = 0; k < target.k(); ++k) c += target.outputs[k].dot(u * target.inputs[k]);
  const double kk = target.k();
  return std::norm(c) / (kk * kk);
}

std::vector<std::vector<double>> gradient(const ControlPulse& pulse,
                                          const TargetIsometry& target,
                                          const SystemParams& p, Exec exec) {
  target.validate();
  const HilbertDims dims = dims_from_label(target.space);
  HamiltonianGenerator gen(p, dims);
  if (static_cast<int>(pulse.channels.size()) != gen.channel_count())
    throw DimensionError("gradient: pulse channel count mismatch");
  auto eig = segment_eigs(pulse, gen, exec);
  return objective_sweep(eig, pulse, gen, target, nullptr, 0.0, true, exec).grad;
}

namespace {

OptimizeResult optimize_impl(const TargetIsometry& target, const OptimizerConfig& cfg,
                             const SystemParams& p, double duration, double dt,
                             const ControlPulse* init, Exec exec) {
  cfg.validate();
  target.validate();
  const HilbertDims dims = dims_from_label(target.space);
  const bool two_mode = dims.two_mode_problem();
  const int segments = std::max(1, static_cast<int>(std::llround(duration / dt)));

  ControlPulse pulse;
  if (init) {
    pulse = *init;
  } else {
    pulse = ControlPulse::zeros(two_mode, dt, segments);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (std::size_t c = 0; c < pulse.channels.size(); ++c) {
      const double scale = static_cast<int>(c) >= kOmegaRx
                               ? cfg.init_scale * cfg.cavity_amp_max
                               : cfg.init_scale_ancilla * cfg.amp_max;
      for (auto& v : pulse.channels[c]) v = scale * uni(rng);
    }
  }

  auto clip = [&](ControlPulse& pl) {
    for (std::size_t c = 0; c < pl.channels.size(); ++c) {
      const double bound = cfg.bound_for_channel(static_cast<int>(c));
      for (auto& v : pl.channels[c]) v = std::clamp(v, -bound, bound);
    }
  };
  clip(pulse);

  const HamiltonianGenerator gen(p, dims);
  const Matrix p_top = leak_projector(target.space, cfg.leak_levels);
  const Matrix* guard =
      (cfg.leak_weight > 0 && p_top.size() > 0) ? &p_top : nullptr;

  OptimizeResult res;
  std::vector<EigCache> eig = segment_eigs(pulse, gen, exec);
  SweepResult cur =
      objective_sweep(eig, pulse, gen, target, guard, cfg.leak_weight, true, exec);
  add_penalty_gradient(pulse, cfg, cur.grad);
  double phi = cur.phi;
  double obj = phi - cfg.leak_weight * cur.leak - smoothing_penalty(pulse, cfg);
  if (phi >= cfg.threshold) {
    res.pulse = pulse;
    res.fidelity = phi;
    res.converged = true;
    return res;
  }

  auto grad = std::move(cur.grad);
  // Ascent direction: each channel is normalized by its own largest gradient
  // component, so one step size serves channels whose Hamiltonian sensitivity
  // differs by orders of magnitude (the quadratic ancilla drive versus the
  // linear cavity drive). eta is the largest per-sample move, in rad/s; it
  // doubles on improvement and halves on regression.
  auto direction = [](const std::vector<std::vector<double>>& g) {
    std::vector<std::vector<double>> d = g;
    for (auto& ch : d) {
      double mx = 0;
      for (double v : ch) mx = std::max(mx, std::abs(v));
      if (mx > 0)
        for (double& v : ch) v /= mx;
    }
    return d;
  };
  bool any = false;
  for (auto& ch : grad)
    for (double v : ch) any = any || v != 0;
  if (!any) {
    res.pulse = pulse;
    res.fidelity = phi;
    return res;
  }
  auto dir = direction(grad);
  double eta = cfg.step_init_rel * cfg.amp_max;
  const double eta_min = cfg.amp_max * 1e-14;

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    ControlPulse trial = pulse;
    for (std::size_t c = 0; c < trial.channels.size(); ++c)
      for (int s = 0; s < trial.segment_count(); ++s)
        trial.channels[c][s] += eta * dir[c][s];
    clip(trial);

    std::vector<EigCache> eig_t = segment_eigs(trial, gen, exec);
    SweepResult sw =
        objective_sweep(eig_t, trial, gen, target, guard, cfg.leak_weight, false, exec);
    const double obj_t =
        sw.phi - cfg.leak_weight * sw.leak - smoothing_penalty(trial, cfg);
    const bool accepted = obj_t > obj;
    if (accepted) {
      pulse = std::move(trial);
      phi = sw.phi;
      obj = obj_t;
      SweepResult full = objective_sweep(eig_t, pulse, gen, target, guard,
                                         cfg.leak_weight, true, exec);
      grad = std::move(full.grad);
      add_penalty_gradient(pulse, cfg, grad);
      dir = direction(grad);
      eta *= cfg.step_grow;
    } else {
      eta *= cfg.step_shrink;
    }
    res.log.push_back({iter, phi, obj, eta, accepted});
    if (phi >= cfg.threshold || eta < eta_min) break;
  }

  res.pulse = pulse;
  res.fidelity = phi;
  res.converged = phi >= cfg.threshold;
  return res;
}

}  // namespace

OptimizeResult optimize(const TargetIsometry& target, const OptimizerConfig& cfg,
                        const SystemParams& p, double duration, double dt,
                        const ControlPulse* init, Exec exec) {
  if (p.control != AncillaControl::TwoPhotonGF)
    return optimize_impl(target, cfg, p, duration, dt, init, exec);

  // The two-photon quadratures enter the Hamiltonian quadratically, which
  // leaves a gradient plateau around zero drive. The search therefore runs in
  // the effective coupling components (a linear channel with the same reach)
  // and converts back to quadratures exactly afterwards.
  SystemParams lin = p;
  lin.control = AncillaControl::LinearGF;
  OptimizerConfig lin_cfg = cfg;
  lin_cfg.amp_max = cfg.amp_max * cfg.amp_max / (2.0 * p.E_c);

  ControlPulse lin_init;
  if (init) {
    lin_init = *init;
    for (int s = 0; s < lin_init.segment_count(); ++s) {
      auto [cx, cy] = coupling_from_quadratures(init->channels[kOmegaX][s],
                                                init->channels[kOmegaY][s], p.E_c);
      lin_init.channels[kOmegaX][s] = cx;
      lin_init.channels[kOmegaY][s] = cy;
    }
  }
  OptimizeResult res =
      optimize_impl(target, lin_cfg, lin, duration, dt, init ? &lin_init : nullptr, exec);

  std::vector<double> ox, oy;
  quadratures_from_coupling(res.pulse.channels[kOmegaX], res.pulse.channels[kOmegaY],
                            p.E_c, ox, oy);
  res.pulse.channels[kOmegaX] = std::move(ox);
  res.pulse.channels[kOmegaY] = std::move(oy);
  res.fidelity = gate_fidelity(res.pulse, target, p);
  res.converged = res.fidelity >= cfg.threshold;
  return res;
}

OpenFigures evaluate_open(const ControlPulse& pulse, const SystemParams& p,
                          const HilbertDims& dims, const CollapseSet& collapse,
                          const LogicalFrame& in_frame, const LogicalFrame& out_frame,
                          const LindbladOptions& opts, Exec exec) {
  // One propagation serves both figures: the post-selection projector is
  // applied to the already-propagated basis images.
  ChannelMap raw = channel_from_pulse(pulse, p, dims, collapse, PostselectPolicy{},
                                      in_frame, opts, exec);
  const PTM ideal;  // frames encode the target, so the ideal map is I

  OpenFigures out;
  out.f_no_ps = process_fidelity(ptm_of(raw, out_frame), ideal);

  ChannelMap ps = raw;
  auto proj = ancilla_projectors();
  Matrix q = Matrix::Identity(3, 3) - proj[kE].m;
  Matrix keep = embed({q, SpaceLabel::single(Factor::Ancilla, 3)}, dims.full_label()).m;
  const int d = ps.out_dim();
  for (int col = 0; col < ps.S.cols(); ++col) {
    Eigen::Map<const Matrix> block(raw.S.col(col).data(), d, d);
    Matrix kept = keep * block * keep;
    ps.S.col(col) = Eigen::Map<const Vector>(kept.data(), kept.size());
  }
  ps.trace_nonincreasing = true;
  out.f_ps = process_fidelity(ptm_of(ps, out_frame), ideal);
  out.p_succ = success_probability(ps);
  return out;
}

Matrix complete_isometry(const TargetIsometry& target) {
  target.validate();
  const int d = target.space.dim();
  const int k = target.k();
  auto complete = [&](const std::vector<Vector>& vs) {
    Matrix basis(d, d);
    for (int i = 0; i < k; ++i) basis.col(i) = vs[i];
    int filled = k;
    for (int e = 0; e < d && filled < d; ++e) {
      Vector cand = Vector::Zero(d);
      cand(e) = 1.0;
      for (int j = 0; j < filled; ++j) cand -= basis.col(j).dot(cand) * basis.col(j);
      const double nrm = cand.norm();
      if (nrm > 1e-8) basis.col(filled++) = cand / nrm;
    }
    if (filled != d) throw NumericError("complete_isometry: basis completion failed");
    return basis;
  };
  Matrix bin = complete(target.inputs);
  Matrix bout = complete(target.outputs);
  return bout * bin.adjoint();
}

}  // namespace edc
