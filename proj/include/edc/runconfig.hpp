#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edc/budget.hpp"
#include "edc/grape.hpp"
#include "edc/qec.hpp"

namespace edc {

inline constexpr const char* kVersion = "0.1.0";

// Operator-facing run description. The file format is JSON with explicit unit
// suffixes in the key names (rates 1/us, durations us, frequencies 2pi MHz);
// parsing converts everything to the SI quantities the modules use.
struct RunConfig {
  SystemParams system;
  HilbertDims dims;
  double pulse_dt = 4e-9;            // seconds
  double pulse_duration = 2e-6;      // unary operations
  double cz_duration = 4e-6;
  OptimizerConfig optimizer;
  std::vector<std::string> targets;  // H, T, Encode, Decode, Parity, QECCode,
                                     // QECError, AncillaPi, CZ
  CycleSchedule schedule;
  std::vector<StrategyTag> strategies;
  int n_cycles = 60;
  int substeps = 4;
  std::string pulse_dir = "data/pulses";
  BudgetParams budget;
  struct LifetimeSweep {
    double min_us = 5.0;
    double max_us = 2000.0;
    int points = 25;
  } lifetime_sweep;
  bool budget_calibrate = false;
  struct Sweep {
    std::string parameter;          // ancilla_lifetime_us | t_w_us | n_pm
    std::vector<double> grid;
  } sweep;
  std::vector<std::string> verify_checks;            // empty -> all
  bool verify_checks_given = false;
  std::map<std::string, double> verify_tolerances;   // name -> override
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  int workers = 0;
  bool ideal_unitaries = false;

  std::string hash_hex;  // canonical config hash, filled by the loader

  static RunConfig from_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);
};

// Canonical hash of a JSON document: key order and whitespace never matter.
std::string config_hash_hex(const std::string& json_text);

struct JobRecord {
  std::string name;
  std::string status;  // ok | failed
  double wall_s = 0;
  std::vector<std::string> artifacts;
  std::string detail;
};

struct ResultManifest {
  std::string config_hash;
  std::string version = kVersion;
  std::uint64_t seed = 0;
  std::vector<JobRecord> jobs;

  bool all_ok() const;
  void write(const std::string& path) const;
};

// Comma-separated, header row, 17 significant digits.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Subcommand bodies; each writes its artifacts plus a manifest under
// cfg.output_dir and returns a process exit code (0 ok, 2 config error,
// 3 numeric failure, 4 check failure).
int cmd_optimize(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);
int cmd_budget(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg);
int cmd_verify(const RunConfig& cfg);

}  // namespace edc
