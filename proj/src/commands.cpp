#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>

#include "edc/runconfig.hpp"

namespace edc {

namespace fs = std::filesystem;

namespace {

constexpr double kUs = 1e-6;

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir);
}

// Everything needed to optimize and score one named operation.
struct OperationSpec {
  std::string name;
  TargetIsometry target;
  double duration = 0;
  // Frame pairs for the open-system scorecard; empty when the operation has
  // no single-qubit transfer-matrix reading (ancilla-only, two-mode).
  struct Row {
    std::string row_name;
    LogicalFrame in;
    LogicalFrame out;
  };
  std::vector<Row> rows;
};

LogicalFrame frame_from_outputs(const TargetIsometry& t) {
  return LogicalFrame::from_vectors(t.outputs[0], t.outputs[1], t.space);
}

LogicalFrame frame_from_inputs(const TargetIsometry& t) {
  return LogicalFrame::from_vectors(t.inputs[0], t.inputs[1], t.space);
}

OperationSpec make_operation(const std::string& name, const RunConfig& cfg) {
  const HilbertDims& dims = cfg.dims;
  OperationSpec op;
  op.name = name;
  op.duration = cfg.pulse_duration;
  const bool gf = cfg.system.control == AncillaControl::TwoPhotonGF;
  if (name == "AncillaPi") {
    op.target = ancilla_pi_target(cfg.system.control);
    return op;
  }
  BinomialCode code = BinomialCode::standard(dims.cavity_dim);
  if (name == "H") {
    op.target = hadamard_target(code, dims);
    op.rows.push_back({"H", code.code_frame(dims), frame_from_outputs(op.target)});
  } else if (name == "T") {
    op.target = t_gate_target(code, dims);
    op.rows.push_back({"T", code.code_frame(dims), frame_from_outputs(op.target)});
  } else if (name == "Encode") {
    op.target = encode_target(code, dims);
    op.rows.push_back({"Encode", frame_from_inputs(op.target), code.code_frame(dims)});
  } else if (name == "Decode") {
    op.target = decode_target(code, dims);
    op.rows.push_back({"Decode", code.code_frame(dims), frame_from_outputs(op.target)});
  } else if (name == "Parity") {
    op.target = parity_map_target(code, dims, cfg.system.control);
    const int flag = gf ? kF : kE;
    op.rows.push_back({"Parity (code)", code.code_frame(dims), code.code_frame(dims)});
    op.rows.push_back(
        {"Parity (error)", code.error_frame(dims), code.error_frame(dims, flag)});
  } else if (name == "QECCode") {
    const double tau = cfg.schedule.n_pm * (cfg.schedule.t_w + cfg.schedule.t_pm);
    op.target = recovery_target(code, dims, cfg.system.kappa, tau);
    op.rows.push_back({"QEC (code)", frame_from_inputs(op.target), code.code_frame(dims)});
  } else if (name == "QECError") {
    op.target = error_recovery_target(code, dims);
    op.rows.push_back({"QEC (error)", code.error_frame(dims), code.code_frame(dims)});
  } else if (name == "CZ") {
    if (!dims.two_mode_problem())
      throw ConfigError("config: CZ target needs system.cavity_dim_b > 0");
    BinomialCode code_b = BinomialCode::standard(dims.cavity_dim_b);
    op.target = cz_target(code, code_b, dims);
    op.duration = cfg.cz_duration;
  } else {
    throw ConfigError("config: unknown target '" + name + "'");
  }
  return op;
}

std::string pulse_file_name(const std::string& target) {
  std::string s;
  for (char c : target) s += (c >= 'A' && c <= 'Z') ? char(c - 'A' + 'a') : c;
  if (s == "qeccode") s = "qec_code";
  if (s == "qecerror") s = "qec_error";
  if (s == "ancillapi") s = "ancilla_pi";
  return s + ".pulse";
}

ControlPulse load_checked_pulse(const std::string& dir, const std::string& target,
                                const SystemParams& params) {
  const std::string path = dir + "/" + pulse_file_name(target);
  if (!fs::exists(path))
    throw ConfigError("simulate: missing pulse file " + path +
                      " (run the optimize subcommand or pass --ideal-unitaries)");
  LoadedPulse lp = read_pulse(path);
  if (lp.params_hash != params.hash())
    throw ConfigError("simulate: pulse " + path +
                      " was optimized for different system parameters");
  return lp.pulse;
}

}  // namespace

int cmd_optimize(const RunConfig& cfg) {
  ensure_dir(cfg.output_dir);
  const std::string pulse_dir = cfg.pulse_dir;
  ensure_dir(pulse_dir);
  if (cfg.targets.empty())
    throw ConfigError("config: optimize needs a non-empty 'targets' list");

  ResultManifest manifest;
  manifest.config_hash = cfg.hash_hex;
  manifest.seed = cfg.seed;

  std::ofstream report(cfg.output_dir + "/gateset_report.csv");
  report << "operation,row,closed_fidelity,converged,f_no_ps,f_ps,p_succ,iterations\n";

  CollapseSet collapse = default_collapse_set(cfg.system, cfg.dims);
  LindbladOptions lop;
  lop.substeps = cfg.substeps;

  for (std::size_t idx = 0; idx < cfg.targets.size(); ++idx) {
    const double t0 = now_s();
    JobRecord job;
    job.name = "optimize:" + cfg.targets[idx];
    try {
      OperationSpec op = make_operation(cfg.targets[idx], cfg);
      OptimizerConfig ocfg = cfg.optimizer;
      ocfg.seed = cfg.seed + idx;  // independent deterministic seeds per job
      OptimizeResult res =
          optimize(op.target, ocfg, cfg.system, op.duration, cfg.pulse_dt, nullptr,
                   Exec::Par);
      const std::string path = pulse_dir + "/" + pulse_file_name(cfg.targets[idx]);
      write_pulse(res.pulse, path, cfg.system.hash());
      job.artifacts.push_back(path);

      if (op.rows.empty()) {
        report << cfg.targets[idx] << ",," << fmt(res.fidelity) << ","
               << (res.converged ? 1 : 0) << ",,,," << res.log.size() << "\n";
      } else {
        const HilbertDims dims = dims_from_label(op.target.space);
        for (auto& row : op.rows) {
          OpenFigures fig = evaluate_open(res.pulse, cfg.system, dims, collapse,
                                          row.in, row.out, lop, Exec::Par);
          report << cfg.targets[idx] << "," << row.row_name << ","
                 << fmt(res.fidelity) << "," << (res.converged ? 1 : 0) << ","
                 << fmt(fig.f_no_ps) << "," << fmt(fig.f_ps) << ","
                 << fmt(fig.p_succ) << "," << res.log.size() << "\n";
        }
      }
      job.status = "ok";
      job.detail = "closed fidelity " + fmt(res.fidelity);
    } catch (const std::exception& e) {
      job.status = "failed";
      job.detail = e.what();
    }
    job.wall_s = now_s() - t0;
    manifest.jobs.push_back(job);
  }
  manifest.jobs.push_back(
      {"report", "ok", 0.0, {cfg.output_dir + "/gateset_report.csv"}, ""});
  manifest.write(cfg.output_dir + "/manifest.json");
  std::cout << "optimize: wrote " << cfg.output_dir << "/manifest.json\n";
  return manifest.all_ok() ? 0 : 3;
}

int cmd_simulate(const RunConfig& cfg) {
  ensure_dir(cfg.output_dir);
  ResultManifest manifest;
  manifest.config_hash = cfg.hash_hex;
  manifest.seed = cfg.seed;

  std::vector<StrategyTag> strategies = cfg.strategies;
  if (strategies.empty()) strategies = {StrategyTag::EDA, StrategyTag::EDAB};

  const double t0 = now_s();
  LifetimeResult baseline = physical_baseline(cfg.system, cfg.dims);
  {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < baseline.time_s.size(); ++i)
      rows.push_back({baseline.time_s[i] / kUs, baseline.fidelity[i],
                      baseline.success_prob[i]});
    const std::string path = cfg.output_dir + "/physical_baseline.csv";
    write_csv(path, {"time_us", "fidelity", "success_prob"}, rows);
    manifest.jobs.push_back({"baseline", "ok", now_s() - t0, {path},
                             "T1 " + fmt(baseline.fit.t1 / kUs) + " us"});
  }

  std::vector<std::vector<double>> fit_rows;
  std::vector<std::string> fit_names;
  for (StrategyTag strategy : strategies) {
    const double ts = now_s();
    std::string name = strategy == StrategyTag::EDA    ? "eda"
                       : strategy == StrategyTag::EDAB ? "edab"
                       : strategy == StrategyTag::EDB  ? "edb"
                                                       : "none";
    JobRecord job;
    job.name = "simulate:" + name;
    try {
      CycleSchedule sched = cfg.schedule;
      if (strategy == StrategyTag::EDA) {
        // Same interval, one parity check then the conditional recovery.
        sched.n_pm = 1;
        sched.t_w = cfg.schedule.t_int() - cfg.schedule.t_pm - cfg.schedule.t_qec;
      }
      SystemParams params = cfg.system;
      CyclePulses pulses;
      if (!cfg.ideal_unitaries && strategy != StrategyTag::None) {
        std::string dir = cfg.pulse_dir;
        if (strategy == StrategyTag::EDB) {
          params.control = AncillaControl::DirectGE;
          dir += "_b";
        }
        pulses.parity = load_checked_pulse(dir, "Parity", params);
        pulses.qec_code = load_checked_pulse(dir, "QECCode", params);
        if (strategy == StrategyTag::EDA)
          pulses.qec_error = load_checked_pulse(dir, "QECError", params);
      } else if (strategy == StrategyTag::EDB) {
        params.control = AncillaControl::DirectGE;
      }
      CycleOptions opts;
      opts.n_cycles = cfg.n_cycles;
      opts.integ.substeps = cfg.substeps;
      opts.exec = Exec::Par;
      opts.ideal_unitaries = cfg.ideal_unitaries;
      LifetimeResult res = run_cycles(strategy, sched, pulses, params, cfg.dims, opts);

      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < res.time_s.size(); ++i)
        rows.push_back({res.time_s[i] / kUs, res.fidelity[i], res.success_prob[i]});
      const std::string path = cfg.output_dir + "/" + name + "_series.csv";
      write_csv(path, {"time_us", "fidelity", "success_prob"}, rows);
      job.artifacts.push_back(path);

      std::vector<std::vector<double>> ratio_rows;
      for (std::size_t i = 1; i < res.time_s.size(); ++i) {
        if (res.time_s[i] > baseline.time_s.back()) break;
        ratio_rows.push_back(
            {res.time_s[i] / kUs, infidelity_ratio(res, baseline, res.time_s[i])});
      }
      const std::string rpath = cfg.output_dir + "/" + name + "_infidelity_ratio.csv";
      write_csv(rpath, {"time_us", "ratio"}, ratio_rows);
      job.artifacts.push_back(rpath);

      RatioPeak peak = peak_infidelity_ratio(res, baseline);
      fit_names.push_back(name);
      fit_rows.push_back({res.fit.amplitude, res.fit.t1 / kUs,
                          std::sqrt(std::max(0.0, res.fit.covariance(1, 1))) / kUs,
                          res.fit.residual, gain_breakeven(res, baseline), peak.value,
                          peak.t / kUs});
      job.status = "ok";
      job.detail = "T1 " + fmt(res.fit.t1 / kUs) + " us";
    } catch (const std::exception& e) {
      job.status = "failed";
      job.detail = e.what();
    }
    job.wall_s = now_s() - ts;
    manifest.jobs.push_back(job);
  }

  {
    std::ofstream f(cfg.output_dir + "/fits.csv");
    f << "strategy,amplitude,t1_us,t1_stderr_us,residual,gain_breakeven,"
         "peak_infidelity_ratio,peak_t_us\n";
    for (std::size_t i = 0; i < fit_rows.size(); ++i) {
      f << fit_names[i];
      for (double v : fit_rows[i]) f << "," << fmt(v);
      f << "\n";
    }
    manifest.jobs.push_back({"fits", "ok", 0.0, {cfg.output_dir + "/fits.csv"}, ""});
  }
  manifest.write(cfg.output_dir + "/manifest.json");
  std::cout << "simulate: wrote " << cfg.output_dir << "/manifest.json\n";
  return manifest.all_ok() ? 0 : 3;
}

namespace {

// Splits the post-selected infidelity of one operation into its ancilla- and
// cavity-induced parts by switching off the other decay channels, and turns
// them into budget coefficients.
struct Calibration {
  double eps_coherent = 0, eps_ancilla = 0, eps_cavity = 0;
};

Calibration calibrate_operation(const ControlPulse& pulse, const RunConfig& cfg,
                                const LogicalFrame& fin, const LogicalFrame& fout) {
  LindbladOptions lop;
  lop.substeps = cfg.substeps;
  auto fid_ps = [&](SystemParams p) {
    CollapseSet set = default_collapse_set(p, cfg.dims);
    OpenFigures fig =
        evaluate_open(pulse, p, cfg.dims, set, fin, fout, lop, Exec::Par);
    return fig.f_ps;
  };
  SystemParams none = cfg.system, anc = cfg.system, cav = cfg.system;
  none.kappa = none.kappa_e = none.kappa_f = 0;
  anc.kappa = 0;
  cav.kappa_e = cav.kappa_f = 0;
  Calibration c;
  const double f0 = fid_ps(none);
  c.eps_coherent = 1.0 - f0;
  c.eps_ancilla = std::max(0.0, f0 - fid_ps(anc));
  c.eps_cavity = std::max(0.0, f0 - fid_ps(cav));
  return c;
}

}  // namespace

int cmd_budget(const RunConfig& cfg) {
  ensure_dir(cfg.output_dir);
  ResultManifest manifest;
  manifest.config_hash = cfg.hash_hex;
  manifest.seed = cfg.seed;
  const double t0 = now_s();

  const BudgetParams& b = cfg.budget;
  {
    const double ew = e_waiting(b.alpha_w, b.kappa, b.t_w);
    const double epm =
        e_parity(b.alpha_pmq, b.alpha_pm, b.kappa_f, b.kappa_e, b.kappa, b.t_pm);
    const double eq = e_qec(b.alpha_qec, b.kappa_f, b.kappa_e, b.kappa, b.t_qec, b.nbar);
    const std::string path = cfg.output_dir + "/budget_point.csv";
    write_csv(path,
              {"t_int_us", "gain_ab", "gain_b", "e_w", "e_pm", "e_qec", "n_pm"},
              {{b.t_int(), gain_budget(b, BudgetStrategy::AB),
                gain_budget(b, BudgetStrategy::B), ew, epm, eq, double(b.n_pm)}});
    manifest.jobs.push_back({"budget_point", "ok", 0.0, {path}, ""});
  }
  {
    const std::string path = cfg.output_dir + "/budget_summary.csv";
    write_csv(path,
              {"critical_lifetime_us", "saturation_gain", "simple_gain_eps5pct",
               "optimal_interval_us_eps5pct"},
              {{critical_lifetime(b.kappa), saturation_gain(b.kappa),
                simple_gain(b.alpha, b.alpha_w, 0.05),
                optimal_interval(b.alpha_w, b.kappa, 0.05)}});
    manifest.jobs.push_back({"budget_summary", "ok", 0.0, {path}, ""});
  }
  {
    std::vector<double> lifetimes;
    const auto& sw = cfg.lifetime_sweep;
    for (int i = 0; i < sw.points; ++i)
      lifetimes.push_back(sw.points == 1
                              ? sw.min_us
                              : sw.min_us * std::pow(sw.max_us / sw.min_us,
                                                     double(i) / (sw.points - 1)));
    auto pts = gain_vs_lifetime(b, lifetimes, {}, Exec::Par);
    std::vector<std::vector<double>> rows;
    for (auto& p : pts)
      rows.push_back({p.lifetime_us, p.ab.gain, p.ab.t_w, double(p.ab.n_pm), p.b.gain,
                      p.b.t_w, double(p.b.n_pm)});
    const std::string path = cfg.output_dir + "/gain_vs_lifetime.csv";
    write_csv(path,
              {"lifetime_us", "gain_ab", "t_w_ab_us", "n_pm_ab", "gain_b", "t_w_b_us",
               "n_pm_b"},
              rows);
    manifest.jobs.push_back({"gain_vs_lifetime", "ok", now_s() - t0, {path}, ""});
  }

  if (cfg.budget_calibrate) {
    JobRecord job;
    job.name = "calibrate";
    const double ts = now_s();
    try {
      BinomialCode code = BinomialCode::standard(cfg.dims.cavity_dim);
      ControlPulse parity = load_checked_pulse(cfg.pulse_dir, "Parity", cfg.system);
      ControlPulse qec = load_checked_pulse(cfg.pulse_dir, "QECCode", cfg.system);
      Calibration cp = calibrate_operation(parity, cfg, code.code_frame(cfg.dims),
                                           code.code_frame(cfg.dims));
      const double tau =
          cfg.schedule.n_pm * (cfg.schedule.t_w + cfg.schedule.t_pm);
      TargetIsometry rec = recovery_target(code, cfg.dims, cfg.system.kappa, tau);
      Calibration cq = calibrate_operation(
          qec, cfg, frame_from_inputs(rec), code.code_frame(cfg.dims));
      const double tpm_us = cfg.schedule.t_pm / kUs;
      const double tq_us = cfg.schedule.t_qec / kUs;
      const double kf = cfg.system.kappa_f * kUs, ke = cfg.system.kappa_e * kUs;
      const double k = cfg.system.kappa * kUs;
      std::vector<std::vector<double>> rows = {
          {cp.eps_coherent, cp.eps_ancilla, cp.eps_cavity,
           cp.eps_ancilla / (kf * ke * tpm_us * tpm_us),
           cp.eps_cavity / (k * tpm_us * k * tpm_us), 0},
          {cq.eps_coherent, cq.eps_ancilla, cq.eps_cavity,
           4.0 * cq.eps_ancilla / (kf * ke * tq_us * tq_us), 0, 1}};
      const std::string path = cfg.output_dir + "/budget_calibration.csv";
      write_csv(path,
                {"eps_coherent", "eps_ancilla", "eps_cavity", "alpha_anc",
                 "alpha_cav", "is_qec_row"},
                rows);
      job.artifacts.push_back(path);
      job.status = "ok";
    } catch (const std::exception& e) {
      job.status = "failed";
      job.detail = e.what();
    }
    job.wall_s = now_s() - ts;
    manifest.jobs.push_back(job);
  }

  manifest.write(cfg.output_dir + "/manifest.json");
  std::cout << "budget: wrote " << cfg.output_dir << "/manifest.json\n";
  return manifest.all_ok() ? 0 : 3;
}

int cmd_sweep(const RunConfig& cfg) {
  ensure_dir(cfg.output_dir);
  if (cfg.sweep.parameter.empty())
    throw ConfigError("config: sweep needs a 'sweep' block with 'parameter'");
  if (cfg.sweep.grid.empty()) throw ConfigError("config: sweep grid is empty");
  ResultManifest manifest;
  manifest.config_hash = cfg.hash_hex;
  manifest.seed = cfg.seed;
  const double t0 = now_s();

  std::vector<std::vector<double>> rows(cfg.sweep.grid.size());
  if (cfg.sweep.parameter == "ancilla_lifetime_us") {
    auto pts = gain_vs_lifetime(cfg.budget, cfg.sweep.grid, {}, Exec::Par);
    for (std::size_t i = 0; i < pts.size(); ++i)
      rows[i] = {pts[i].lifetime_us, pts[i].ab.gain, pts[i].ab.t_w,
                 double(pts[i].ab.n_pm), pts[i].b.gain, pts[i].b.t_w,
                 double(pts[i].b.n_pm)};
    write_csv(cfg.output_dir + "/sweep.csv",
              {"ancilla_lifetime_us", "gain_ab", "t_w_ab_us", "n_pm_ab", "gain_b",
               "t_w_b_us", "n_pm_b"},
              rows);
  } else if (cfg.sweep.parameter == "t_w_us" || cfg.sweep.parameter == "n_pm") {
    for (std::size_t i = 0; i < cfg.sweep.grid.size(); ++i) {
      BudgetParams p = cfg.budget;
      if (cfg.sweep.parameter == "t_w_us")
        p.t_w = cfg.sweep.grid[i];
      else
        p.n_pm = static_cast<int>(cfg.sweep.grid[i]);
      rows[i] = {cfg.sweep.grid[i], gain_budget(p, BudgetStrategy::AB),
                 gain_budget(p, BudgetStrategy::B), p.t_int()};
    }
    write_csv(cfg.output_dir + "/sweep.csv",
              {cfg.sweep.parameter, "gain_ab", "gain_b", "t_int_us"}, rows);
  } else {
    throw ConfigError("config: unknown sweep parameter '" + cfg.sweep.parameter + "'");
  }
  manifest.jobs.push_back(
      {"sweep:" + cfg.sweep.parameter, "ok", now_s() - t0,
       {cfg.output_dir + "/sweep.csv"}, std::to_string(cfg.sweep.grid.size()) + " points"});
  manifest.write(cfg.output_dir + "/manifest.json");
  std::cout << "sweep: wrote " << cfg.output_dir << "/manifest.json\n";
  return manifest.all_ok() ? 0 : 3;
}

namespace {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0;
  double tolerance = 0;
  std::string detail;
};

using CheckFn = std::function<CheckResult(double tol)>;

std::vector<std::pair<std::string, std::pair<double, CheckFn>>> verify_registry() {
  std::vector<std::pair<std::string, std::pair<double, CheckFn>>> reg;

  reg.push_back({"analytic_decay", {1e-6, [](double tol) {
    SystemParams p = SystemParams::paper();
    p.kappa_e = p.kappa_f = 0;
    HilbertDims dims = HilbertDims::single_mode(6);
    Vector v = kron(fock(6, 1), fock(3, kG));
    DensityState rho{v * v.adjoint(), dims.full_label()};
    DensityState out = propagate_lindblad(rho, ControlPulse::idle(100e-6), p, dims,
                                          default_collapse_set(p, dims));
    const double pop = out.rho(1 * 3 + kG, 1 * 3 + kG).real();
    const double want = std::exp(-0.05);
    return CheckResult{"analytic_decay", std::abs(pop - want) <= tol,
                       std::abs(pop - want), tol, "pop(1) vs exp(-kappa t)"};
  }}});

  reg.push_back({"cascade", {1e-6, [](double tol) {
    SystemParams p = SystemParams::paper();
    HilbertDims dims = HilbertDims::single_mode(6);
    Vector v = kron(fock(6, 0), fock(3, kF));
    DensityState rho{v * v.adjoint(), dims.full_label()};
    DensityState out = propagate_lindblad(rho, ControlPulse::idle(10e-6), p, dims,
                                          default_collapse_set(p, dims));
    const double t = 10e-6;
    const double pf = std::exp(-p.kappa_f * t);
    const double pe = p.kappa_f * (std::exp(-p.kappa_e * t) - std::exp(-p.kappa_f * t)) /
                      (p.kappa_f - p.kappa_e);
    const double pg = 1.0 - pf - pe;
    DensityState anc = partial_trace(out, Factor::Ancilla);
    double err = std::abs(anc.rho(kF, kF).real() - pf);
    err = std::max(err, std::abs(anc.rho(kE, kE).real() - pe));
    err = std::max(err, std::abs(anc.rho(kG, kG).real() - pg));
    return CheckResult{"cascade", err <= tol, err, tol, "three-level populations"};
  }}});

  reg.push_back({"amplitude_damping", {1e-8, [](double tol) {
    const int n = 6;
    const double kappa = 500.0, t = 200e-6;
    Matrix s = cavity_damping_superop(n, kappa, t);
    const double gamma = 1.0 - std::exp(-kappa * t);
    // textbook qubit Kraus pair on Fock {0,1}
    Matrix e0 = Matrix::Zero(n, n), e1 = Matrix::Zero(n, n);
    e0(0, 0) = 1;
    e0(1, 1) = std::sqrt(1 - gamma);
    e1(0, 1) = std::sqrt(gamma);
    double err = 0;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        Matrix in = Matrix::Zero(n, n);
        in(r, c) = 1;
        Vector vout = s * Eigen::Map<const Vector>(in.data(), in.size());
        Matrix out = Eigen::Map<const Matrix>(vout.data(), n, n);
        Matrix want = e0 * in * e0.adjoint() + e1 * in * e1.adjoint();
        err = std::max(err, (out - want).cwiseAbs().maxCoeff());
      }
    return CheckResult{"amplitude_damping", err <= tol, err, tol,
                       "channel vs Kraus form"};
  }}});

  reg.push_back({"fd_gradient", {1e-5, [](double tol) {
    SystemParams p = SystemParams::paper();
    BinomialCode code = BinomialCode::standard(6);
    HilbertDims dims = HilbertDims::single_mode(6);
    TargetIsometry target = hadamard_target(code, dims);
    ControlPulse pulse = ControlPulse::zeros(false, 4e-9, 20);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-1, 1);
    for (auto& ch : pulse.channels)
      for (auto& v : ch) v = 0.05 * 2 * kPi * 40e6 * uni(rng);
    auto g = gradient(pulse, target, p);
    double worst = 0;
    for (int trial = 0; trial < 6; ++trial) {
      int c = static_cast<int>(rng() % pulse.channels.size());
      int s = static_cast<int>(rng() % pulse.channels[0].size());
      const double h = 1e-6 * 2 * kPi * 40e6;
      ControlPulse up = pulse, dn = pulse;
      up.channels[c][s] += h;
      dn.channels[c][s] -= h;
      const double fd =
          (gate_fidelity(up, target, p) - gate_fidelity(dn, target, p)) / (2 * h);
      const double scale = std::max(std::abs(fd), 1e-12 / h);
      worst = std::max(worst, std::abs(g[c][s] - fd) / scale);
    }
    return CheckResult{"fd_gradient", worst <= tol, worst, tol,
                       "relative error vs central differences"};
  }}});

  reg.push_back({"cptp", {1e-8, [](double tol) {
    SystemParams p = SystemParams::paper();
    HilbertDims dims = HilbertDims::single_mode(6);
    ControlPulse pulse = ControlPulse::zeros(false, 0.05e-6, 40);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-1, 1);
    for (auto& ch : pulse.channels)
      for (auto& v : ch) v = 0.02 * 2 * kPi * 40e6 * uni(rng);
    ChannelMap ch = channel_from_pulse(pulse, p, dims, default_collapse_set(p, dims),
                                       PostselectPolicy{}, std::nullopt);
    const double floor = ch.choi_floor();
    const bool tp = ch.is_trace_preserving(1e-8);
    return CheckResult{"cptp", floor >= -tol && tp, floor, -tol,
                       tp ? "choi floor" : "trace condition violated"};
  }}});

  reg.push_back({"ptm_identity", {1e-10, [](double tol) {
    BinomialCode code = BinomialCode::standard(6);
    LogicalFrame frame = code.code_frame_cavity();
    const int n = 6;
    ChannelMap id;
    id.in_dim = 2;
    id.frame = frame;
    id.out_label = frame.label;
    id.S.resize(n * n, 4);
    for (int c = 0; c < 2; ++c)
      for (int r = 0; r < 2; ++r) {
        Matrix op = frame.op(r, c);
        id.S.col(r + 2 * c) = Eigen::Map<const Vector>(op.data(), op.size());
      }
    const double err_id = (ptm_of(id).R - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff();
    ChannelMap dep = id;
    for (int c = 0; c < 2; ++c)
      for (int r = 0; r < 2; ++r) {
        Matrix op = (r == c) ? Matrix(0.5 * (frame.op(0, 0) + frame.op(1, 1)))
                             : Matrix(Matrix::Zero(n, n));
        dep.S.col(r + 2 * c) = Eigen::Map<const Vector>(op.data(), op.size());
      }
    const double f_dep = process_fidelity(ptm_of(dep), PTM{});
    const double err = std::max(err_id, std::abs(f_dep - 0.25));
    return CheckResult{"ptm_identity", err <= tol, err, tol,
                       "identity -> I4, depolarization -> 1/4"};
  }}});

  reg.push_back({"budget_regression", {0.05, [](double tol) {
    BudgetParams b = BudgetParams::paper();
    double err = std::abs(gain_budget(b, BudgetStrategy::AB) - 9.33);
    bool pass = err <= tol;
    pass = pass && std::abs(critical_lifetime(b.kappa) - 91.0) <= 1.0;
    pass = pass && std::abs(saturation_gain(b.kappa) - 38.7) <= 1.0;
    const double g1 = simple_gain(0.6, 1.27, 0.05);
    pass = pass && g1 >= 1.0 && g1 <= 1.4;
    return CheckResult{"budget_regression", pass, err, tol,
                       "gain/critical-lifetime/saturation values"};
  }}});

  reg.push_back({"unitarity", {1e-10, [](double tol) {
    SystemParams p = SystemParams::paper();
    HilbertDims dims = HilbertDims::single_mode(6);
    ControlPulse pulse = ControlPulse::zeros(false, 4e-9, 50);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-1, 1);
    for (auto& ch : pulse.channels)
      for (auto& v : ch) v = 0.3 * 2 * kPi * 40e6 * uni(rng);
    Matrix u = propagate_unitary(pulse, p, dims);
    const double err =
        (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
    return CheckResult{"unitarity", err <= tol, err, tol, "U+U vs identity"};
  }}});

  return reg;
}

}  // namespace

int cmd_verify(const RunConfig& cfg) {
  ensure_dir(cfg.output_dir);
  ResultManifest manifest;
  manifest.config_hash = cfg.hash_hex;
  manifest.seed = cfg.seed;

  auto registry = verify_registry();
  std::vector<CheckResult> results;
  for (auto& [name, entry] : registry) {
    if (cfg.verify_checks_given) {
      bool wanted = false;
      for (auto& w : cfg.verify_checks) wanted = wanted || w == name;
      if (!wanted) continue;
    }
    double tol = entry.first;
    auto it = cfg.verify_tolerances.find(name);
    if (it != cfg.verify_tolerances.end()) tol = it->second;
    const double t0 = now_s();
    CheckResult r = entry.second(tol);
    const double wall = now_s() - t0;
    results.push_back(r);
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail
              << " (measured " << r.measured << ", tolerance " << r.tolerance << ")\n";
    manifest.jobs.push_back({"verify:" + r.name, r.pass ? "ok" : "failed", wall,
                             {}, r.detail});
  }
  if (cfg.verify_checks_given) {
    for (auto& w : cfg.verify_checks) {
      bool known = false;
      for (auto& [name, entry] : registry) known = known || name == w;
      if (!known) throw ConfigError("verify: unknown check '" + w + "'");
    }
  }

  std::ofstream f(cfg.output_dir + "/verify_report.csv");
  f << "check,pass,measured,tolerance\n";
  for (auto& r : results)
    f << r.name << "," << (r.pass ? 1 : 0) << "," << fmt(r.measured) << ","
      << fmt(r.tolerance) << "\n";
  manifest.write(cfg.output_dir + "/manifest.json");

  for (auto& r : results)
    if (!r.pass) return 4;
  return 0;
}

}  // namespace edc
