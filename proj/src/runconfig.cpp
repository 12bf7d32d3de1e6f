#include "edc/runconfig.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace edc {

namespace {

using nlohmann::json;

constexpr double kTwoPi = 2.0 * kPi;
constexpr double kUs = 1e-6;
constexpr double kMHz = 1e6;

double get_num(const json& j, const std::string& block, const std::string& key,
               std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError("config: missing field '" + key + "' in block '" + block + "'");
  }
  if (!j.at(key).is_number())
    throw ConfigError("config: field '" + block + "." + key + "' must be a number");
  return j.at(key).get<double>();
}

StrategyTag parse_strategy(const std::string& s) {
  if (s == "ED-A") return StrategyTag::EDA;
  if (s == "ED-AB") return StrategyTag::EDAB;
  if (s == "ED-B") return StrategyTag::EDB;
  if (s == "NONE") return StrategyTag::None;
  throw ConfigError("config: unknown strategy '" + s + "'");
}

}  // namespace

std::string config_hash_hex(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
  }
  const std::string canon = j.dump();  // sorted keys, no whitespace
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  return from_json_text(text);
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  RunConfig cfg;
  cfg.hash_hex = config_hash_hex(text);
  json j = json::parse(text);

  if (!j.contains("system"))
    throw ConfigError("config: missing block 'system'");
  {
    const json& s = j.at("system");
    int n = static_cast<int>(get_num(s, "system", "cavity_dim", 12));
    int nb = static_cast<int>(get_num(s, "system", "cavity_dim_b", 0));
    cfg.dims = nb > 0 ? HilbertDims::two_mode(n, nb) : HilbertDims::single_mode(n);
    cfg.system.chi_e = kTwoPi * kMHz * get_num(s, "system", "chi_e_2pi_MHz", 1.0);
    cfg.system.chi_f = kTwoPi * kMHz *
                       get_num(s, "system", "chi_f_2pi_MHz",
                               2.0 * get_num(s, "system", "chi_e_2pi_MHz", 1.0));
    cfg.system.E_c = kTwoPi * kMHz * get_num(s, "system", "E_c_2pi_MHz", 400.0);
    cfg.system.kappa = get_num(s, "system", "kappa_1_per_us", 5e-4) / kUs;
    cfg.system.kappa_e = get_num(s, "system", "kappa_e_1_per_us", 0.025) / kUs;
    cfg.system.kappa_f = get_num(s, "system", "kappa_f_1_per_us", 0.05) / kUs;
    cfg.system.dephasing = get_num(s, "system", "dephasing_1_per_us", 0.0) / kUs;
    if (nb > 0) {
      cfg.system.chi_e_b = kTwoPi * kMHz * get_num(s, "system", "chi_e_b_2pi_MHz", 1.0);
      cfg.system.chi_f_b = kTwoPi * kMHz * get_num(s, "system", "chi_f_b_2pi_MHz", 2.0);
      cfg.system.kappa_b = get_num(s, "system", "kappa_b_1_per_us", 5e-4) / kUs;
    }
    const std::string ctrl = s.value("ancilla_control", "gf_two_photon");
    if (ctrl == "gf_two_photon")
      cfg.system.control = AncillaControl::TwoPhotonGF;
    else if (ctrl == "ge_direct")
      cfg.system.control = AncillaControl::DirectGE;
    else
      throw ConfigError("config: system.ancilla_control must be gf_two_photon or ge_direct");
    cfg.system.validate();
  }

  if (j.contains("pulse")) {
    const json& s = j.at("pulse");
    cfg.pulse_dt = get_num(s, "pulse", "dt_us", 0.004) * kUs;
    cfg.pulse_duration = get_num(s, "pulse", "duration_us", 2.0) * kUs;
    cfg.cz_duration = get_num(s, "pulse", "cz_duration_us", 4.0) * kUs;
    cfg.optimizer.amp_max =
        kTwoPi * kMHz * get_num(s, "pulse", "amp_max_2pi_MHz", 40.0);
  }

  if (j.contains("optimizer")) {
    const json& s = j.at("optimizer");
    cfg.optimizer.max_iterations =
        static_cast<int>(get_num(s, "optimizer", "max_iterations", 4000));
    cfg.optimizer.threshold = get_num(s, "optimizer", "threshold", 0.999);
    cfg.optimizer.smoothing_weight = get_num(s, "optimizer", "smoothing_weight", 1e-6);
    cfg.optimizer.init_scale = get_num(s, "optimizer", "init_scale", 0.01);
    cfg.optimizer.init_scale_ancilla =
        get_num(s, "optimizer", "init_scale_ancilla", 0.05);
    cfg.optimizer.step_init_rel = get_num(s, "optimizer", "step_init_rel", 0.02);
    cfg.optimizer.cavity_amp_max =
        kTwoPi * kMHz * get_num(s, "optimizer", "cavity_amp_max_2pi_MHz", 8.0);
    cfg.optimizer.leak_weight = get_num(s, "optimizer", "leak_weight", 10.0);
    cfg.optimizer.leak_levels =
        static_cast<int>(get_num(s, "optimizer", "leak_levels", 3));
    cfg.optimizer.validate();
  }

  if (j.contains("targets")) {
    for (const auto& t : j.at("targets")) cfg.targets.push_back(t.get<std::string>());
  }

  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    cfg.schedule.n_pm = static_cast<int>(get_num(s, "schedule", "n_pm", 3));
    cfg.schedule.t_w = get_num(s, "schedule", "t_w_us", 28.0) * kUs;
    cfg.schedule.t_pm = get_num(s, "schedule", "t_pm_us", 2.0) * kUs;
    cfg.schedule.t_qec = get_num(s, "schedule", "t_qec_us", 2.0) * kUs;
    cfg.schedule.validate();
  }

  if (j.contains("simulate")) {
    const json& s = j.at("simulate");
    cfg.n_cycles = static_cast<int>(get_num(s, "simulate", "n_cycles", 60));
    cfg.substeps = static_cast<int>(get_num(s, "simulate", "substeps", 4));
    cfg.pulse_dir = s.value("pulse_dir", cfg.pulse_dir);
    if (s.contains("strategies"))
      for (const auto& t : s.at("strategies"))
        cfg.strategies.push_back(parse_strategy(t.get<std::string>()));
  }

  if (j.contains("budget")) {
    const json& s = j.at("budget");
    BudgetParams& b = cfg.budget;
    b.alpha = get_num(s, "budget", "alpha", b.alpha);
    b.alpha_w = get_num(s, "budget", "alpha_W", b.alpha_w);
    b.alpha_pmq = get_num(s, "budget", "alpha_PMQ", b.alpha_pmq);
    b.alpha_pm = get_num(s, "budget", "alpha_PM", b.alpha_pm);
    b.alpha_qec = get_num(s, "budget", "alpha_QEC", b.alpha_qec);
    b.alpha_pmq_b = get_num(s, "budget", "alpha_PMQ_B", b.alpha_pmq_b);
    b.alpha_qec_b = get_num(s, "budget", "alpha_QEC_B", b.alpha_qec_b);
    b.nbar = get_num(s, "budget", "nbar", b.nbar);
    b.kappa = get_num(s, "budget", "kappa_1_per_us", b.kappa);
    b.kappa_e = get_num(s, "budget", "kappa_e_1_per_us", b.kappa_e);
    b.kappa_f = get_num(s, "budget", "kappa_f_1_per_us", b.kappa_f);
    b.t_w = get_num(s, "budget", "t_w_us", b.t_w);
    b.t_pm = get_num(s, "budget", "t_pm_us", b.t_pm);
    b.t_qec = get_num(s, "budget", "t_qec_us", b.t_qec);
    b.n_pm = static_cast<int>(get_num(s, "budget", "n_pm", b.n_pm));
    b.validate();
    if (s.contains("lifetime_sweep_us")) {
      const json& w = s.at("lifetime_sweep_us");
      cfg.lifetime_sweep.min_us = get_num(w, "budget.lifetime_sweep_us", "min", 5.0);
      cfg.lifetime_sweep.max_us = get_num(w, "budget.lifetime_sweep_us", "max", 2000.0);
      cfg.lifetime_sweep.points =
          static_cast<int>(get_num(w, "budget.lifetime_sweep_us", "points", 25));
      if (cfg.lifetime_sweep.min_us <= 0 ||
          cfg.lifetime_sweep.max_us < cfg.lifetime_sweep.min_us ||
          cfg.lifetime_sweep.points < 1)
        throw ConfigError("config: invalid budget.lifetime_sweep_us grid");
    }
    cfg.budget_calibrate = s.value("calibrate", false);
  }

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    if (!s.contains("parameter"))
      throw ConfigError("config: missing field 'parameter' in block 'sweep'");
    cfg.sweep.parameter = s.at("parameter").get<std::string>();
    if (s.contains("grid")) {
      for (const auto& v : s.at("grid")) {
        if (!v.is_number()) throw ConfigError("config: sweep.grid must be numeric");
        cfg.sweep.grid.push_back(v.get<double>());
      }
    } else if (s.contains("min") && s.contains("max") && s.contains("points")) {
      const double mn = get_num(s, "sweep", "min");
      const double mx = get_num(s, "sweep", "max");
      const int np = static_cast<int>(get_num(s, "sweep", "points"));
      if (np < 1 || mx < mn || mn <= 0)
        throw ConfigError("config: invalid sweep grid bounds");
      for (int i = 0; i < np; ++i)
        cfg.sweep.grid.push_back(
            np == 1 ? mn : mn * std::pow(mx / mn, double(i) / (np - 1)));
    } else {
      throw ConfigError("config: sweep needs 'grid' or 'min'/'max'/'points'");
    }
  }

  if (j.contains("verify")) {
    const json& s = j.at("verify");
    if (s.contains("checks")) {
      cfg.verify_checks_given = true;
      for (const auto& c : s.at("checks"))
        cfg.verify_checks.push_back(c.get<std::string>());
    }
    if (s.contains("tolerances"))
      for (auto it = s.at("tolerances").begin(); it != s.at("tolerances").end(); ++it)
        cfg.verify_tolerances[it.key()] = it.value().get<double>();
  }

  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.optimizer.seed = cfg.seed;
  if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
  return cfg;
}

bool ResultManifest::all_ok() const {
  for (auto& r : jobs)
    if (r.status != "ok") return false;
  return true;
}

void ResultManifest::write(const std::string& path) const {
  json j;
  j["config_hash"] = config_hash;
  j["version"] = version;
  j["seed"] = seed;
  j["jobs"] = json::array();
  for (auto& r : jobs) {
    json rec;
    rec["name"] = r.name;
    rec["status"] = r.status;
    rec["wall_s"] = r.wall_s;
    rec["artifacts"] = r.artifacts;
    if (!r.detail.empty()) rec["detail"] = r.detail;
    j["jobs"].push_back(rec);
  }
  std::ofstream f(path);
  if (!f) throw ParseError("manifest: cannot open " + path);
  f << j.dump(2) << "\n";
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream f(path);
  if (!f) throw ParseError("write_csv: cannot open " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    f << (i ? "," : "") << header[i];
  f << "\n";
  char buf[64];
  for (auto& row : rows) {
    if (row.size() != header.size())
      throw ParseError("write_csv: row width mismatch in " + path);
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
      f << (i ? "," : "") << buf;
    }
    f << "\n";
  }
}

}  // namespace edc
