#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "edc/grape.hpp"
#include "edc/qec.hpp"

using namespace edc;

namespace {

constexpr double kTwoPi = 2.0 * kPi;

ControlPulse random_pulse(int segments, double scale, std::uint64_t seed,
                          double dt = 4e-9) {
  ControlPulse pulse = ControlPulse::zeros(false, dt, segments);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1, 1);
  for (auto& ch : pulse.channels)
    for (auto& v : ch) v = scale * kTwoPi * 40e6 * uni(rng);
  return pulse;
}

}  // namespace

TEST_CASE("fidelity is one when the target matches the propagated unitary") {
  SystemParams p = SystemParams::paper();
  HilbertDims dims = HilbertDims::single_mode(6);
  BinomialCode code = BinomialCode::standard(6);
  ControlPulse pulse = random_pulse(15, 0.2, 3);
  Matrix u = propagate_unitary(pulse, p, dims);
  TargetIsometry t;
  t.label = "probe";
  t.space = dims.full_label();
  t.inputs = {code.code_frame(dims).v0, code.code_frame(dims).v1};
  t.outputs = {u * t.inputs[0], u * t.inputs[1]};
  CHECK(gate_fidelity(pulse, t, p) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("one orthogonal target vector bounds the fidelity") {
  SystemParams p = SystemParams::paper();
  HilbertDims dims = HilbertDims::single_mode(6);
  ControlPulse pulse = random_pulse(15, 0.2, 4);
  Matrix u = propagate_unitary(pulse, p, dims);
  Vector i0 = kron(fock(6, 0), fock(3, kG));
  Vector i1 = kron(fock(6, 2), fock(3, kG));
  Vector out0 = u * i0;
  // choose the second target orthogonal to the actual image of i1
  Vector img1 = u * i1;
  Vector cand = u * kron(fock(6, 4), fock(3, kG));
  cand -= img1.dot(cand) * img1;
  cand -= out0.dot(cand) * out0;
  cand.normalize();
  TargetIsometry t;
  t.space = dims.full_label();
  t.inputs = {i0, i1};
  t.outputs = {out0, cand};
  const double phi = gate_fidelity(pulse, t, p);
  CHECK(phi <= 0.25 + 1e-9);  // ((K-1)/K)^2 with K = 2
}

TEST_CASE("fidelity formula agrees with a direct overlap sum") {
  SystemParams p = SystemParams::paper();
  HilbertDims dims = HilbertDims::single_mode(6);
  BinomialCode code = BinomialCode::standard(6);
  ControlPulse pulse = random_pulse(12, 0.25, 5);
  TargetIsometry t = hadamard_target(code, dims);
  Matrix u = propagate_unitary(pulse, p, dims);
  Cx overlap = t.outputs[0].dot(u * t.inputs[0]) + t.outputs[1].dot(u * t.inputs[1]);
  CHECK(gate_fidelity(pulse, t, p) ==
        doctest::Approx(std::norm(overlap) / 4.0).epsilon(1e-12));
}

TEST_CASE("gradient matches central finite differences") {
  SystemParams p = SystemParams::paper();
  HilbertDims dims = HilbertDims::single_mode(6);
  BinomialCode code = BinomialCode::standard(6);
  TargetIsometry target = hadamard_target(code, dims);
  std::mt19937_64 rng(17);
  for (int draw = 0; draw < 6; ++draw) {
    ControlPulse pulse = random_pulse(20, 0.1, 200 + draw);
    auto g = gradient(pulse, target, p);
    for (int probe = 0; probe < 4; ++probe) {
      const int c = static_cast<int>(rng() % pulse.channels.size());
      const int s = static_cast<int>(rng() % pulse.channels[0].size());
      const double h = 1e-6 * kTwoPi * 40e6;
      ControlPulse up = pulse, dn = pulse;
      up.channels[c][s] += h;
      dn.channels[c][s] -= h;
      const double fd =
          (gate_fidelity(up, target, p) - gate_fidelity(dn, target, p)) / (2 * h);
      const double scale = std::max(std::abs(fd), std::abs(g[c][s]));
      if (scale > 1e-14 * kTwoPi * 40e6)
        CHECK(std::abs(g[c][s] - fd) / scale < 1e-5);
    }
  }
}

TEST_CASE("gradient on a zero pulse is finite and matches differences") {
  SystemParams p = SystemParams::paper();
  HilbertDims dims = HilbertDims::single_mode(6);
  BinomialCode code = BinomialCode::standard(6);
  TargetIsometry target = hadamard_target(code, dims);
  ControlPulse pulse = ControlPulse::zeros(false, 4e-9, 20);
  auto g = gradient(pulse, target, p);
  const double h = 1e-5 * kTwoPi * 40e6;
  ControlPulse up = pulse, dn = pulse;
  up.channels[kOmegaRx][10] += h;
  dn.channels[kOmegaRx][10] -= h;
  const double fd =
      (gate_fidelity(up, target, p) - gate_fidelity(dn, target, p)) / (2 * h);
  CHECK(std::isfinite(g[kOmegaRx][10]));
  CHECK(g[kOmegaRx][10] == doctest::Approx(fd).epsilon(1e-4));
}

TEST_CASE("channels absent from the model have exactly zero gradient") {
  SystemParams p = SystemParams::paper();
  TargetIsometry target = ancilla_pi_target();
  ControlPulse pulse = random_pulse(20, 0.1, 9);
  auto g = gradient(pulse, target, p);
  for (int s = 0; s < 20; ++s) {
    CHECK(g[kOmegaRx][s] == 0.0);
    CHECK(g[kOmegaRy][s] == 0.0);
  }
  // the ancilla channels do act
  double mx = 0;
  for (int s = 0; s < 20; ++s) mx = std::max(mx, std::abs(g[kOmegaX][s]));
  CHECK(mx > 0);
}

TEST_CASE("zero threshold returns the initial pulse immediately") {
  SystemParams p = SystemParams::paper();
  OptimizerConfig cfg;
  cfg.threshold = 0;
  cfg.seed = 5;
  OptimizeResult res = optimize(ancilla_pi_target(), cfg, p, 0.8e-6, 4e-9);
  CHECK(res.converged);
  CHECK(res.log.empty());
  CHECK(res.pulse.segment_count() == 200);
}

TEST_CASE("optimizer improves the ancilla flip and respects the bound") {
  SystemParams p = SystemParams::paper();
  OptimizerConfig cfg;
  cfg.threshold = 0.99;
  cfg.max_iterations = 400;
  cfg.seed = 11;
  OptimizeResult res = optimize(ancilla_pi_target(), cfg, p, 0.8e-6, 8e-9);
  CHECK(res.fidelity > 0.99);
  CHECK(res.converged);
  for (auto& ch : res.pulse.channels)
    for (double v : ch) CHECK(std::abs(v) <= cfg.amp_max * (1 + 1e-12));

  // best-so-far fidelity is monotone over accepted iterations
  double best = 0;
  for (auto& rec : res.log) {
    if (rec.accepted) {
      CHECK(rec.fidelity >= best - 1e-12);
      best = std::max(best, rec.fidelity);
    }
  }
}

TEST_CASE("seed determinism reproduces the iteration log") {
  SystemParams p = SystemParams::paper();
  OptimizerConfig cfg;
  cfg.threshold = 0.9;
  cfg.max_iterations = 60;
  cfg.seed = 23;
  OptimizeResult a = optimize(ancilla_pi_target(), cfg, p, 0.4e-6, 8e-9);
  OptimizeResult b = optimize(ancilla_pi_target(), cfg, p, 0.4e-6, 8e-9);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].fidelity == b.log[i].fidelity);
    CHECK(a.log[i].step == b.log[i].step);
    CHECK(a.log[i].accepted == b.log[i].accepted);
  }
  for (std::size_t c = 0; c < a.pulse.channels.size(); ++c)
    for (std::size_t s = 0; s < a.pulse.channels[c].size(); ++s)
      CHECK(a.pulse.channels[c][s] == b.pulse.channels[c][s]);

  OptimizerConfig other = cfg;
  other.seed = 24;
  OptimizeResult cres = optimize(ancilla_pi_target(), other, p, 0.4e-6, 8e-9);
  bool same = a.pulse.channels == cres.pulse.channels;
  CHECK_FALSE(same);
}

TEST_CASE("open evaluation without loss collapses to the closed figures") {
  SystemParams p = SystemParams::paper();
  p.kappa = p.kappa_e = p.kappa_f = 0;
  HilbertDims dims = HilbertDims::single_mode(6);
  BinomialCode code = BinomialCode::standard(6);
  TargetIsometry target = hadamard_target(code, dims);
  ControlPulse pulse = random_pulse(20, 0.15, 41);
  LogicalFrame fin = code.code_frame(dims);
  LogicalFrame fout = LogicalFrame::from_vectors(target.outputs[0], target.outputs[1],
                                                 dims.full_label());
  OpenFigures fig = evaluate_open(pulse, p, dims, default_collapse_set(p, dims), fin,
                                  fout);
  CHECK(fig.p_succ == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fig.f_no_ps == doctest::Approx(fig.f_ps).epsilon(1e-9));
}

TEST_CASE("isometry completion is unitary and extends the target") {
  HilbertDims dims = HilbertDims::single_mode(6);
  BinomialCode code = BinomialCode::standard(6);
  TargetIsometry t = hadamard_target(code, dims);
  Matrix u = complete_isometry(t);
  CHECK((u.adjoint() * u - Matrix::Identity(18, 18)).cwiseAbs().maxCoeff() < 1e-12);
  for (int k = 0; k < t.k(); ++k)
    CHECK((u * t.inputs[k] - t.outputs[k]).norm() < 1e-12);
}

TEST_CASE("two-mode controlled-phase target drives a two-mode optimization") {
  SystemParams p = SystemParams::paper_two_mode();
  HilbertDims dims = HilbertDims::two_mode(6, 6);
  BinomialCode code = BinomialCode::standard(6);
  TargetIsometry cz = cz_target(code, code, dims);
  cz.validate();
  CHECK(cz.k() == 4);
  CHECK(cz.space.dim() == 108);
  // phase structure: only |1L 1L> flips sign
  CHECK((cz.outputs[3] + cz.inputs[3]).norm() < 1e-14);
  CHECK((cz.outputs[0] - cz.inputs[0]).norm() < 1e-14);

  ControlPulse pulse = ControlPulse::zeros(true, 8e-9, 50);
  CHECK(pulse.channels.size() == 6);
  auto g = gradient(pulse, cz, p);
  CHECK(g.size() == 6);

  // the exact zero pulse is a stationary point (photon-number selection rules),
  // so the optimizer returns it unchanged
  ControlPulse start = ControlPulse::zeros(true, 8e-9, 50);
  CHECK(gate_fidelity(start, cz, p) == doctest::Approx(0.25));
  OptimizerConfig cfg;
  cfg.max_iterations = 5;
  cfg.seed = 2;
  OptimizeResult r0 = optimize(cz, cfg, p, 0.4e-6, 8e-9, &start, Exec::Par);
  CHECK(r0.fidelity == doctest::Approx(0.25));

  // gradient machinery on a random two-mode pulse agrees with differences
  ControlPulse probe = pulse;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> uni(-1, 1);
  for (auto& ch : probe.channels)
    for (auto& v : ch) v = 0.05 * kTwoPi * 40e6 * uni(rng);
  auto gp = gradient(probe, cz, p, Exec::Par);
  const double h = 1e-6 * kTwoPi * 40e6;
  for (int c : {kOmegaX, kOmegaRx, kOmegaRx2}) {
    ControlPulse up = probe, dn = probe;
    up.channels[c][25] += h;
    dn.channels[c][25] -= h;
    const double fd = (gate_fidelity(up, cz, p) - gate_fidelity(dn, cz, p)) / (2 * h);
    const double scale = std::max({std::abs(fd), std::abs(gp[c][25]), 1e-16});
    CHECK(std::abs(gp[c][25] - fd) / scale < 5e-4);  // smoke-level FD tolerance
  }
}

TEST_CASE("target validation rejects bad isometries") {
  HilbertDims dims = HilbertDims::single_mode(6);
  TargetIsometry t;
  t.space = dims.full_label();
  t.inputs = {kron(fock(6, 0), fock(3, kG))};
  t.outputs = {};
  CHECK_THROWS_AS(t.validate(), DimensionError);
  t.outputs = {2.0 * kron(fock(6, 1), fock(3, kG))};
  CHECK_THROWS_AS(t.validate(), NumericError);
}
