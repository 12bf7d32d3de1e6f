#pragma once

#include <span>
#include <vector>

#include "edc/errors.hpp"
#include "edc/exec.hpp"

namespace edc {

// Closed-form error budget for one QEC interval. Everything here works in
// microsecond units: rates in 1/us, durations in us.
struct BudgetParams {
  double alpha = 0.6;     // physical-qubit lifetime / break-even ratio
  double alpha_w = 1.27;  // waiting-error coefficient of the binomial code
  // Coefficients of the parity and recovery error terms. They follow from the
  // mean level populations during the operations; the defaults are calibrated
  // against the simulated optimized pulses (see tools).
  double alpha_pmq = 0.066;
  double alpha_pm = 1.0;
  double alpha_qec = 0.497;
  // First-order variants for the parity-only post-selection strategy, where
  // ancilla decay during the operations goes undetected.
  double alpha_pmq_b = 0.5;
  double alpha_qec_b = 0.5;
  double nbar = 2.0;

  double kappa = 5e-4;     // cavity loss, 1/us
  double kappa_e = 0.025;  // |e> decay, 1/us
  double kappa_f = 0.05;   // |f> decay, 1/us

  double t_w = 28.0;  // us
  double t_pm = 2.0;
  double t_qec = 2.0;
  int n_pm = 3;

  double t_int() const { return n_pm * (t_w + t_pm) + t_qec; }
  void validate() const;
  static BudgetParams paper();
};

enum class BudgetStrategy { AB, B };

// G = alpha / (2 sqrt(alpha_w eps_op)).
double simple_gain(double alpha, double alpha_w, double eps_op);

// t* = sqrt(eps_op / (alpha_w kappa^2)); the rate eps/t + alpha_w kappa^2 t
// evaluated there equals 2 kappa sqrt(alpha_w eps_op).
double optimal_interval(double alpha_w, double kappa, double eps_op);

// E_W = alpha_w (kappa t_w)^2.
double e_waiting(double alpha_w, double kappa, double t_w);

// E_PM = alpha_pmq kappa_f kappa_e t^2 + alpha_pm (kappa t)^2.
double e_parity(double alpha_pmq, double alpha_pm, double kappa_f, double kappa_e,
                double kappa, double t_pm);

// Parity-only post-selection: first-order ancilla decay survives.
double e_parity_b(double alpha_pmq_b, double alpha_pm, double kappa_e, double kappa,
                  double t_pm);

// E_QEC = (alpha_qec kappa_f kappa_e t^2 + nbar kappa t) / 4.
double e_qec(double alpha_qec, double kappa_f, double kappa_e, double kappa,
             double t_qec, double nbar);

double e_qec_b(double alpha_qec_b, double kappa_e, double kappa, double t_qec,
               double nbar);

// G = alpha kappa t_int / (n_pm (E_W + E_PM) + E_QEC + (kappa t_int)^3).
double gain_budget(const BudgetParams& p, BudgetStrategy strategy = BudgetStrategy::AB);

struct OptimalSchedule {
  double t_w = 0;
  int n_pm = 0;
  double gain = 0;
};

struct GainSearchBounds {
  double t_w_min = 0.1;  // us
  double t_w_max = 200.0;
  int t_w_points = 200;  // log grid
  int n_pm_min = 1;
  int n_pm_max = 10;
};

// Deterministic grid search over (t_w, n_pm) at fixed pulse durations.
OptimalSchedule maximize_gain(const BudgetParams& p, BudgetStrategy strategy,
                              const GainSearchBounds& bounds = {});

// Ancilla lifetime at which the gain-vs-lifetime curve inflects:
// 1/kappa_e^C = (1/1.74) / kappa^(2/3) us.
double critical_lifetime(double kappa);

// Long-lifetime limit of the gain: 1 / (3.8 kt + 3.8 kt^(2/3)), kt = kappa*1us.
double saturation_gain(double kappa);

struct SweepPoint {
  double lifetime_us = 0;  // 1/kappa_e; kappa_f is tied to 2 kappa_e
  OptimalSchedule ab;
  OptimalSchedule b;
};

// Maximum gain versus ancilla lifetime for both strategies; points are
// independent and run in parallel under Exec::Par.
std::vector<SweepPoint> gain_vs_lifetime(const BudgetParams& base,
                                         std::span<const double> lifetimes_us,
                                         const GainSearchBounds& bounds = {},
                                         Exec exec = Exec::Serial);

}  // namespace edc
