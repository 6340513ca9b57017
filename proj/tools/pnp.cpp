#include "pnp/config.hpp"
#include "pnp/errors.hpp"
#include "pnp/log.hpp"
#include "pnp/scenarios.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Multiscale Poisson-Nernst-Planck homogenization suite"};
  app.require_subcommand(1, 1);

  std::string config;
  std::string out;
  int threads = 1;
  bool allow_incompatible = false;

  const char* commands[][2] = {
      {"cell", "solve the cell problems and write the effective tensor"},
      {"homog", "run the homogenized model"},
      {"micro", "run the microscopic model on the perforated domain"},
      {"converge", "epsilon sweep against the homogenized model"},
      {"app-pnp-sweep", "nonlinear-diffusion regularization sweep"},
      {"check", "verify invariants of a stored run directory"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (default: output.dir of the config)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--allow-incompatible", allow_incompatible,
                  "accept data violating charge compatibility; Poisson solves are skipped");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const pnp::RunConfig cfg = pnp::load_config(config, allow_incompatible);
    if (cfg.allow_incompatible && cfg.compat_residual > 1e-9)
      pnp::log_info("compatibility residual " + pnp::format_double(cfg.compat_residual) +
                    " accepted; potential fixed at zero");
    return pnp::orchestrate(command, cfg, {out, threads});
  } catch (const pnp::Error& e) {
    pnp::log_error(e.what());
    return 2;
  } catch (const std::exception& e) {
    pnp::log_error(std::string("unexpected failure: ") + e.what());
    return 3;
  }
}
