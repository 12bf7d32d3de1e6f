#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "edc/budget.hpp"

using namespace edc;

TEST_CASE("simple gain") {
  CHECK(simple_gain(0.6, 1.27, 0.05) == doctest::Approx(1.1905136852).epsilon(1e-9));
  CHECK(simple_gain(0.6, 1.27, 0.004) == doctest::Approx(4.2091014995).epsilon(1e-9));
  // quartering eps_op doubles the gain
  CHECK(simple_gain(0.6, 1.27, 0.0125) ==
        doctest::Approx(2.0 * simple_gain(0.6, 1.27, 0.05)).epsilon(1e-12));
  CHECK_THROWS_AS(simple_gain(0.6, 1.27, 0.0), ConfigError);
  CHECK_THROWS_AS(simple_gain(0.6, 1.27, -1.0), ConfigError);
}

TEST_CASE("optimal interval") {
  const double aW = 1.27, kappa = 5e-4, eps = 0.05;
  const double tstar = optimal_interval(aW, kappa, eps);
  CHECK(tstar == doctest::Approx(396.837895066).epsilon(1e-9));
  auto rate = [&](double t) { return eps / t + aW * kappa * kappa * t; };
  CHECK(rate(tstar) == doctest::Approx(2 * kappa * std::sqrt(aW * eps)).epsilon(1e-12));
  CHECK(rate(2 * tstar) > rate(tstar));
  CHECK_THROWS_AS(optimal_interval(aW, 0.0, eps), ConfigError);
}

TEST_CASE("waiting error term") {
  CHECK(e_waiting(1.27, 5e-4, 0.0) == 0.0);
  CHECK(e_waiting(1.27, 5e-4, 60.0) ==
        doctest::Approx(4.0 * e_waiting(1.27, 5e-4, 30.0)).epsilon(1e-12));
  CHECK(e_waiting(1.27, 5e-4, 30.0) == doctest::Approx(2.8575e-4).epsilon(1e-9));
}

TEST_CASE("parity error term") {
  CHECK(e_parity(0.1, 1.0, 0.05, 0.025, 5e-4, 0.0) == 0.0);
  // no ancilla decay leaves only the cavity part
  CHECK(e_parity(0.1, 1.0, 0.05, 0.0, 5e-4, 2.0) ==
        doctest::Approx(1.0 * (5e-4 * 2.0) * (5e-4 * 2.0)).epsilon(1e-12));
  const double full = e_parity(0.1, 1.0, 0.05, 0.025, 5e-4, 2.0);
  const double anc = e_parity(0.1, 0.0, 0.05, 0.025, 5e-4, 2.0);
  const double cav = e_parity(0.0, 1.0, 0.05, 0.025, 5e-4, 2.0);
  CHECK(full == doctest::Approx(anc + cav).epsilon(1e-12));
}

TEST_CASE("qec error term") {
  CHECK(e_qec(0.5, 0.05, 0.025, 5e-4, 0.0, 2.0) == 0.0);
  // ancilla-free residual: nbar kappa t / 4
  CHECK(e_qec(0.5, 0.05, 0.0, 5e-4, 2.0, 2.0) == doctest::Approx(5e-4).epsilon(1e-12));
}

TEST_CASE("gain budget at the reference schedule") {
  BudgetParams p = BudgetParams::paper();
  CHECK(p.t_int() == doctest::Approx(92.0));
  const double g = gain_budget(p, BudgetStrategy::AB);
  CHECK(g == doctest::Approx(9.33).epsilon(0.05 / 9.33));

  // matches a hand-assembled evaluation exactly
  const double ew = e_waiting(p.alpha_w, p.kappa, p.t_w);
  const double epm = e_parity(p.alpha_pmq, p.alpha_pm, p.kappa_f, p.kappa_e, p.kappa, p.t_pm);
  const double eq = e_qec(p.alpha_qec, p.kappa_f, p.kappa_e, p.kappa, p.t_qec, p.nbar);
  const double kt = p.kappa * p.t_int();
  const double hand = p.alpha * kt / (p.n_pm * (ew + epm) + eq + kt * kt * kt);
  CHECK(g == doctest::Approx(hand).epsilon(1e-12));
}

TEST_CASE("gain budget error and monotonicity") {
  BudgetParams p = BudgetParams::paper();
  p.kappa = p.kappa_e = p.kappa_f = 0;
  CHECK_THROWS_AS(gain_budget(p), NumericError);

  BudgetParams base = BudgetParams::paper();
  const double g0 = gain_budget(base);
  for (double* term : {&base.alpha_pmq, &base.alpha_qec, &base.alpha_w}) {
    BudgetParams q = BudgetParams::paper();
    double* field = term == &base.alpha_pmq  ? &q.alpha_pmq
                    : term == &base.alpha_qec ? &q.alpha_qec
                                              : &q.alpha_w;
    *field *= 1.5;
    CHECK(gain_budget(q) < g0);
  }
}

TEST_CASE("maximize gain search") {
  BudgetParams p = BudgetParams::paper();
  GainSearchBounds single;
  single.t_w_min = single.t_w_max = 28.0;
  single.t_w_points = 1;
  single.n_pm_min = single.n_pm_max = 3;
  OptimalSchedule s = maximize_gain(p, BudgetStrategy::AB, single);
  CHECK(s.t_w == doctest::Approx(28.0));
  CHECK(s.n_pm == 3);
  CHECK(s.gain == doctest::Approx(gain_budget(p)).epsilon(1e-12));

  GainSearchBounds narrow = single;
  GainSearchBounds wide;
  OptimalSchedule best_narrow = maximize_gain(p, BudgetStrategy::AB, narrow);
  OptimalSchedule best_wide = maximize_gain(p, BudgetStrategy::AB, wide);
  CHECK(best_wide.gain >= best_narrow.gain);

  GainSearchBounds bad;
  bad.t_w_max = 0.01;
  CHECK_THROWS_AS(maximize_gain(p, BudgetStrategy::AB, bad), ConfigError);
}

TEST_CASE("maximized gain at the reference ancilla lifetime") {
  // Frozen from a direct grid evaluation of the budget formula; guards the
  // search plumbing rather than the formula itself.
  BudgetParams p = BudgetParams::paper();
  OptimalSchedule s = maximize_gain(p, BudgetStrategy::AB);
  CHECK(s.gain > gain_budget(p));  // the searched optimum beats the default
  CHECK(s.gain == doctest::Approx(10.2597).epsilon(1e-3));
  CHECK(s.n_pm == 5);

  // near the critical ancilla lifetime the searched optimum roughly doubles
  BudgetParams crit = p;
  crit.kappa_e = 1.0 / critical_lifetime(p.kappa);
  crit.kappa_f = 2.0 * crit.kappa_e;
  CHECK(maximize_gain(crit, BudgetStrategy::AB).gain ==
        doctest::Approx(20.52).epsilon(0.01));
}

TEST_CASE("critical lifetime") {
  CHECK(critical_lifetime(5e-4) == doctest::Approx(91.2299455).epsilon(1e-6));
  CHECK(critical_lifetime(8 * 5e-4) ==
        doctest::Approx(critical_lifetime(5e-4) / 4.0).epsilon(1e-12));
  CHECK(critical_lifetime(1.0) == doctest::Approx(1.0 / 1.74).epsilon(1e-12));
  CHECK_THROWS_AS(critical_lifetime(0.0), ConfigError);
}

TEST_CASE("saturation gain") {
  CHECK(saturation_gain(5e-4) == doctest::Approx(38.7019371).epsilon(1e-6));
  CHECK(saturation_gain(1.0) == doctest::Approx(1.0 / 7.6).epsilon(1e-12));
  CHECK(saturation_gain(2.5e-4) > saturation_gain(5e-4));
  CHECK_THROWS_AS(saturation_gain(0.0), ConfigError);
}

TEST_CASE("gain versus ancilla lifetime sweep shape") {
  BudgetParams p = BudgetParams::paper();
  std::vector<double> lifetimes;
  for (int i = 0; i < 25; ++i)
    lifetimes.push_back(5.0 * std::pow(2000.0 / 5.0, i / 24.0));
  auto serial = gain_vs_lifetime(p, lifetimes, {}, Exec::Serial);
  auto par = gain_vs_lifetime(p, lifetimes, {}, Exec::Par);
  REQUIRE(serial.size() == par.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].ab.gain == par[i].ab.gain);  // bitwise identical policies
    CHECK(serial[i].b.gain == par[i].b.gain);
  }

  const double crit = critical_lifetime(p.kappa);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    if (i > 0) CHECK(serial[i].ab.gain >= serial[i - 1].ab.gain - 1e-12);
    CHECK(serial[i].ab.gain >= serial[i].b.gain - 1e-12);
  }
  // concave beyond the critical lifetime
  for (std::size_t i = 1; i + 1 < serial.size(); ++i) {
    if (serial[i - 1].lifetime_us > crit) {
      const double d2 = serial[i + 1].ab.gain - 2 * serial[i].ab.gain +
                        serial[i - 1].ab.gain;
      CHECK(d2 < 1e-9);
    }
  }
}
