#include "edc/budget.hpp"

#include <cmath>

namespace edc {

void BudgetParams::validate() const {
  if (alpha <= 0 || alpha_w <= 0)
    throw ConfigError("BudgetParams: alpha and alpha_w must be > 0");
  if (alpha_pmq < 0 || alpha_pm < 0 || alpha_qec < 0 || alpha_pmq_b < 0 ||
      alpha_qec_b < 0 || nbar < 0)
    throw ConfigError("BudgetParams: coefficients must be >= 0");
  if (kappa < 0 || kappa_e < 0 || kappa_f < 0)
    throw ConfigError("BudgetParams: rates must be >= 0");
  if (t_w < 0 || t_pm < 0 || t_qec < 0 || n_pm < 1)
    throw ConfigError("BudgetParams: schedule fields out of range");
}

BudgetParams BudgetParams::paper() { return BudgetParams{}; }

double simple_gain(double alpha, double alpha_w, double eps_op) {
  if (eps_op <= 0) throw ConfigError("simple_gain: eps_op must be > 0");
  return alpha / (2.0 * std::sqrt(alpha_w * eps_op));
}

double optimal_interval(double alpha_w, double kappa, double eps_op) {
  if (alpha_w <= 0 || kappa <= 0 || eps_op <= 0)
    throw ConfigError("optimal_interval: inputs must be > 0");
  return std::sqrt(eps_op / (alpha_w * kappa * kappa));
}

double e_waiting(double alpha_w, double kappa, double t_w) {
  const double x = kappa * t_w;
  return alpha_w * x * x;
}

double e_parity(double alpha_pmq, double alpha_pm, double kappa_f, double kappa_e,
                double kappa, double t_pm) {
  const double x = kappa * t_pm;
  return alpha_pmq * kappa_f * kappa_e * t_pm * t_pm + alpha_pm * x * x;
}

double e_parity_b(double alpha_pmq_b, double alpha_pm, double kappa_e, double kappa,
                  double t_pm) {
  const double x = kappa * t_pm;
  return alpha_pmq_b * kappa_e * t_pm + alpha_pm * x * x;
}

double e_qec(double alpha_qec, double kappa_f, double kappa_e, double kappa,
             double t_qec, double nbar) {
  return (alpha_qec * kappa_f * kappa_e * t_qec * t_qec + nbar * kappa * t_qec) / 4.0;
}

double e_qec_b(double alpha_qec_b, double kappa_e, double kappa, double t_qec,
               double nbar) {
  return (alpha_qec_b * kappa_e * t_qec + nbar * kappa * t_qec) / 4.0;
}

double gain_budget(const BudgetParams& p, BudgetStrategy strategy) {
  p.validate();
  const double tint = p.t_int();
  double epm, eqec;
  if (strategy == BudgetStrategy::AB) {
    epm = e_parity(p.alpha_pmq, p.alpha_pm, p.kappa_f, p.kappa_e, p.kappa, p.t_pm);
    eqec = e_qec(p.alpha_qec, p.kappa_f, p.kappa_e, p.kappa, p.t_qec, p.nbar);
  } else {
    epm = e_parity_b(p.alpha_pmq_b, p.alpha_pm, p.kappa_e, p.kappa, p.t_pm);
    eqec = e_qec_b(p.alpha_qec_b, p.kappa_e, p.kappa, p.t_qec, p.nbar);
  }
  const double ew = e_waiting(p.alpha_w, p.kappa, p.t_w);
  const double kt = p.kappa * tint;
  const double den = p.n_pm * (ew + epm) + eqec + kt * kt * kt;
  if (den <= 0) throw NumericError("gain_budget: zero error denominator");
  return p.alpha * p.kappa * tint / den;
}

OptimalSchedule maximize_gain(const BudgetParams& p, BudgetStrategy strategy,
                              const GainSearchBounds& bounds) {
  if (bounds.t_w_min <= 0 || bounds.t_w_max < bounds.t_w_min ||
      bounds.t_w_points < 1 || bounds.n_pm_min < 1 ||
      bounds.n_pm_max < bounds.n_pm_min)
    throw ConfigError("maximize_gain: empty search domain");
  OptimalSchedule best;
  const double llo = std::log(bounds.t_w_min), lhi = std::log(bounds.t_w_max);
  for (int i = 0; i < bounds.t_w_points; ++i) {
    const double tw =
        bounds.t_w_points == 1
            ? bounds.t_w_min
            : std::exp(llo + (lhi - llo) * i / (bounds.t_w_points - 1));
    for (int npm = bounds.n_pm_min; npm <= bounds.n_pm_max; ++npm) {
      BudgetParams q = p;
      q.t_w = tw;
      q.n_pm = npm;
      const double g = gain_budget(q, strategy);
      if (g > best.gain) best = {tw, npm, g};
    }
  }
  return best;
}

double critical_lifetime(double kappa) {
  if (kappa <= 0) throw ConfigError("critical_lifetime: kappa must be > 0");
  return (1.0 / 1.74) / std::pow(kappa, 2.0 / 3.0);
}

double saturation_gain(double kappa) {
  if (kappa <= 0) throw ConfigError("saturation_gain: kappa must be > 0");
  const double kt = kappa;  // rates are already in 1/us
  return 1.0 / (3.8 * kt + 3.8 * std::pow(kt, 2.0 / 3.0));
}

std::vector<SweepPoint> gain_vs_lifetime(const BudgetParams& base,
                                         std::span<const double> lifetimes_us,
                                         const GainSearchBounds& bounds, Exec exec) {
  std::vector<SweepPoint> out(lifetimes_us.size());
  parallel_for(exec, static_cast<std::ptrdiff_t>(lifetimes_us.size()),
               [&](std::ptrdiff_t i) {
                 const double life = lifetimes_us[i];
                 if (life <= 0) throw ConfigError("gain_vs_lifetime: lifetime <= 0");
                 BudgetParams p = base;
                 p.kappa_e = 1.0 / life;
                 p.kappa_f = 2.0 / life;
                 out[i].lifetime_us = life;
                 out[i].ab = maximize_gain(p, BudgetStrategy::AB, bounds);
                 out[i].b = maximize_gain(p, BudgetStrategy::B, bounds);
               });
  return out;
}

}  // namespace edc
