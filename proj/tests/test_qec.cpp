#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "edc/qec.hpp"

using namespace edc;

TEST_CASE("binomial code invariants") {
  BinomialCode code = BinomialCode::standard(12);
  CHECK(code.word0.norm() == doctest::Approx(1.0));
  CHECK(code.word1.norm() == doctest::Approx(1.0));
  CHECK(std::abs(code.word0.dot(code.word1)) < 1e-14);

  HilbertDims dims = HilbertDims::single_mode(12);
  Matrix par = photon_parity(dims).m;
  CHECK((par * code.word0 - code.word0).norm() < 1e-14);   // even
  CHECK((par * code.word1 - code.word1).norm() < 1e-14);
  CHECK((par * code.err0 + code.err0).norm() < 1e-14);     // odd
  CHECK((par * code.err1 + code.err1).norm() < 1e-14);

  Matrix a = annihilation(dims).m;
  Matrix num = a.adjoint() * a;
  CHECK((code.word0.adjoint() * num * code.word0)(0).real() == doctest::Approx(2.0));
  CHECK((code.word1.adjoint() * num * code.word1)(0).real() == doctest::Approx(2.0));

  // photon loss maps the code words onto the labeled error words
  Vector l0 = a * code.word0;
  l0.normalize();
  CHECK((l0 - code.err0).norm() < 1e-14);
  CHECK_THROWS_AS(BinomialCode::standard(5), DimensionError);
}

TEST_CASE("cycle schedule arithmetic") {
  CycleSchedule s;
  s.n_pm = 3;
  s.t_w = 28e-6;
  s.t_pm = 2e-6;
  s.t_qec = 2e-6;
  CHECK(s.t_int() == doctest::Approx(92e-6));
  s.n_pm = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.n_pm = 1;
  s.t_w = -1;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("no-jump recovery target") {
  BinomialCode code = BinomialCode::standard(12);
  HilbertDims dims = HilbertDims::single_mode(12);
  const double kappa = 500.0;

  TargetIsometry id = recovery_target(code, dims, kappa, 0.0);
  for (int k = 0; k < 2; ++k)
    CHECK((id.inputs[k] - id.outputs[k]).norm() < 1e-14);

  const double tau = 90e-6;
  TargetIsometry t = recovery_target(code, dims, kappa, tau);
  // weight on |4> scales by exp(-2 kappa tau) relative to |0> before renormalizing
  const double ratio = std::abs(t.inputs[0](4 * 3 + kG)) / std::abs(t.inputs[0](0));
  CHECK(ratio == doctest::Approx(std::exp(-2.0 * kappa * tau)).epsilon(1e-12));

  // the completed unitary restores the code words exactly
  Matrix u = complete_isometry(t);
  for (int k = 0; k < 2; ++k)
    CHECK((u * t.inputs[k] - t.outputs[k]).norm() < 1e-12);
  CHECK_THROWS_AS(recovery_target(code, dims, kappa, -1.0), ConfigError);
}

TEST_CASE("physical baseline lifetime") {
  SystemParams p = SystemParams::paper();
  HilbertDims dims = HilbertDims::single_mode(12);
  LifetimeResult base = physical_baseline(p, dims);
  CHECK(base.fidelity.front() == doctest::Approx(1.0));
  CHECK(base.fit.t1 == doctest::Approx(3.35e-3).epsilon(0.02));

  SystemParams fast = p;
  fast.kappa *= 2;
  LifetimeResult half = physical_baseline(fast, dims);
  CHECK(half.fit.t1 == doctest::Approx(base.fit.t1 / 2).epsilon(0.02));
}

TEST_CASE("decay fit recovers synthetic curves") {
  std::vector<double> t, f;
  for (int i = 0; i <= 60; ++i) {
    t.push_back(i * 100e-6);
    f.push_back(0.75 * std::exp(-t.back() / 10e-3) + 0.25);
  }
  DecayFit fit = fit_decay(t, f);
  CHECK(fit.amplitude == doctest::Approx(0.75).epsilon(1e-3));
  CHECK(fit.t1 == doctest::Approx(10e-3).epsilon(1e-3));

  // 0.1% additive noise keeps T1 within 1%
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 1e-3);
  std::vector<double> fn = f;
  for (auto& v : fn) v += noise(rng);
  DecayFit noisy = fit_decay(t, fn);
  CHECK(noisy.t1 == doctest::Approx(10e-3).epsilon(0.01));
  CHECK(noisy.covariance(1, 1) > 0);
}

TEST_CASE("decay fit error paths") {
  std::vector<double> t = {0, 1e-3, 2e-3, 3e-3};
  std::vector<double> flat = {0.8, 0.8, 0.8, 0.8};
  CHECK_THROWS_AS(fit_decay(t, flat), NumericError);
  std::vector<double> tiny = {0, 1e-3};
  std::vector<double> fv = {1.0, 0.9};
  CHECK_THROWS_AS(fit_decay(tiny, fv), NumericError);
}

TEST_CASE("gain and infidelity ratio bookkeeping") {
  LifetimeResult a, b;
  for (int i = 0; i <= 20; ++i) {
    const double t = i * 1e-4;
    a.time_s.push_back(t);
    b.time_s.push_back(t);
    a.fidelity.push_back(0.75 * std::exp(-t / 5e-3) + 0.25);
    b.fidelity.push_back(0.75 * std::exp(-t / 5e-3) + 0.25);
  }
  a.fit = fit_decay(a.time_s, a.fidelity);
  b.fit = a.fit;
  CHECK(gain_breakeven(a, b) == doctest::Approx(1.0));
  CHECK(infidelity_ratio(a, b, 0.0) == doctest::Approx(1.0));
  CHECK(infidelity_ratio(a, b, 1.05e-3) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(infidelity_ratio(a, b, 1.0), NumericError);
}

TEST_CASE("ideal lossless cycles keep the logical qubit perfect") {
  SystemParams p = SystemParams::paper();
  p.kappa = 1e-9;  // effectively lossless but keeps the fit well-posed off
  p.kappa_e = p.kappa_f = 0;
  HilbertDims dims = HilbertDims::single_mode(12);
  CycleSchedule sched;
  sched.n_pm = 3;
  sched.t_w = 28e-6;
  CycleOptions opts;
  opts.n_cycles = 5;
  opts.ideal_unitaries = true;
  opts.fit = false;
  LifetimeResult res = run_cycles(StrategyTag::EDAB, sched, {}, p, dims, opts);
  for (double f : res.fidelity) CHECK(f == doctest::Approx(1.0).epsilon(1e-6));
  for (double s : res.success_prob) CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("ideal-operation cycles at physical rates behave like a protected qubit") {
  SystemParams p = SystemParams::paper();
  HilbertDims dims = HilbertDims::single_mode(12);
  CycleSchedule sched;  // 92 us interval
  CycleOptions opts;
  opts.n_cycles = 40;
  opts.ideal_unitaries = true;
  LifetimeResult eda_sched_res;
  {
    CycleSchedule eda = sched;
    eda.n_pm = 1;
    eda.t_w = sched.t_int() - sched.t_pm - sched.t_qec;
    eda_sched_res = run_cycles(StrategyTag::EDA, eda, {}, p, dims, opts);
  }
  LifetimeResult edab = run_cycles(StrategyTag::EDAB, sched, {}, p, dims, opts);
  LifetimeResult base = physical_baseline(p, dims);

  for (std::size_t i = 1; i < edab.success_prob.size(); ++i) {
    CHECK(edab.success_prob[i] <= edab.success_prob[i - 1] + 1e-12);
    CHECK(eda_sched_res.success_prob[i] <= eda_sched_res.success_prob[i - 1] + 1e-12);
  }
  for (double f : edab.fidelity) {
    CHECK(f <= 1.0 + 1e-9);
    CHECK(f >= 0.2);
  }
  CHECK(eda_sched_res.fit.t1 > base.fit.t1);  // protection beats the bare qubit
  CHECK(edab.fit.t1 > base.fit.t1);
}

TEST_CASE("strategy guards") {
  SystemParams p = SystemParams::paper();
  HilbertDims dims = HilbertDims::single_mode(12);
  CycleSchedule sched;
  CycleOptions opts;
  opts.n_cycles = 2;
  opts.ideal_unitaries = true;
  CHECK_THROWS_AS(run_cycles(StrategyTag::EDA, sched, {}, p, dims, opts), ConfigError);
  CHECK_THROWS_AS(run_cycles(StrategyTag::EDB, sched, {}, p, dims, opts), ConfigError);

  CycleSchedule eda = sched;
  eda.n_pm = 1;
  CyclePulses missing;
  missing.parity = ControlPulse::zeros(false, 4e-9, 1);
  missing.qec_code = ControlPulse::zeros(false, 4e-9, 1);
  CycleOptions real_opts;
  real_opts.n_cycles = 1;
  CHECK_THROWS_AS(run_cycles(StrategyTag::EDA, eda, missing, p, dims, real_opts),
                  ConfigError);
}

TEST_CASE("trivial pulse outcome maps") {
  SystemParams p = SystemParams::paper();
  HilbertDims dims = HilbertDims::single_mode(6);
  ControlPulse none = ControlPulse::zeros(false, 4e-9, 0);
  OutcomeMaps maps = pulse_outcome_maps(none, p, dims, {}, Exec::Serial);
  CHECK((maps.g - Matrix::Identity(36, 36)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(maps.e.cwiseAbs().maxCoeff() < 1e-14);
  CHECK(maps.f.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("none strategy reproduces the physical baseline") {
  SystemParams p = SystemParams::paper();
  HilbertDims dims = HilbertDims::single_mode(12);
  CycleSchedule sched;
  CycleOptions opts;
  opts.n_cycles = 30;
  LifetimeResult res = run_cycles(StrategyTag::None, sched, {}, p, dims, opts);
  CHECK(res.fit.t1 == doctest::Approx(3.35e-3).epsilon(0.05));
}
