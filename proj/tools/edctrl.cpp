#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "edc/runconfig.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int workers = 0;
  bool ideal_unitaries = false;
};

int run(const std::string& cmd, const GlobalArgs& args) {
  using namespace edc;
  try {
    RunConfig cfg = RunConfig::from_file(args.config_path);
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    if (args.seed) {
      cfg.seed = *args.seed;
      cfg.optimizer.seed = *args.seed;
    }
    if (args.workers > 0) cfg.workers = args.workers;
    cfg.ideal_unitaries = args.ideal_unitaries;
#ifdef _OPENMP
    if (cfg.workers > 0) omp_set_num_threads(cfg.workers);
#endif
    if (cmd == "optimize") return cmd_optimize(cfg);
    if (cmd == "simulate") return cmd_simulate(cfg);
    if (cmd == "sweep") return cmd_sweep(cfg);
    if (cmd == "budget") return cmd_budget(cfg);
    if (cmd == "verify") return cmd_verify(cfg);
    std::cerr << "unknown subcommand " << cmd << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Error-detectable bosonic control toolkit"};
  app.require_subcommand(1);

  GlobalArgs args;
  const std::vector<std::string> cmds = {"optimize", "simulate", "sweep", "budget",
                                         "verify"};
  for (const auto& name : cmds) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config_path, "run configuration (JSON)")
        ->required();
    sub->add_option("--out", args.out_dir, "output directory override");
    sub->add_option("--seed", args.seed, "seed override");
    sub->add_option("--workers", args.workers, "worker thread cap");
    if (name == "simulate")
      sub->add_flag("--ideal-unitaries", args.ideal_unitaries,
                    "replace pulses by ideal instantaneous operations");
  }

  CLI11_PARSE(app, argc, argv);
  for (const auto& name : cmds)
    if (app.get_subcommand(name)->parsed()) return run(name, args);
  return 2;
}
