// Command-line front end: transient runs, travelling-wave solves and
// re-certification of stored runs.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fibreflow/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Film flow down a vertical fibre: transient and travelling-wave solvers"};
  app.require_subcommand(1);

  fibreflow::PdeOptions pde;
  std::string pde_out;
  auto* pde_cmd = app.add_subcommand("pde", "integrate the transient model and write diagnostics");
  pde_cmd->add_option("--config", pde.config, "run config (JSON)")->required();
  pde_cmd->add_option("--out", pde_out, "output directory (overrides out_dir)");

  fibreflow::TwOptions tw;
  std::string tw_guess, tw_out;
  auto* tw_cmd = app.add_subcommand("tw", "solve for a periodic travelling wave");
  tw_cmd->add_option("--config", tw.config, "travelling-wave config (JSON)")->required();
  tw_cmd->add_option("--guess", tw_guess, "profile CSV (xi,H,U) used as the Newton guess");
  tw_cmd->add_flag("--resample", tw.resample, "interpolate a guess with a different N");
  tw_cmd->add_option("--out", tw_out, "profile CSV to write (overrides out)");

  std::string check_dir;
  auto* check_cmd = app.add_subcommand("check", "recompute and re-certify a stored run");
  check_cmd->add_option("--dir", check_dir, "directory written by 'pde'")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fibreflow::kExitConfig;
  }

  if (*pde_cmd) {
    if (!pde_out.empty()) pde.out_dir = pde_out;
    return fibreflow::cmd_pde(pde, std::cout);
  }
  if (*tw_cmd) {
    if (!tw_guess.empty()) tw.guess = tw_guess;
    if (!tw_out.empty()) tw.out = tw_out;
    return fibreflow::cmd_tw(tw, std::cout);
  }
  return fibreflow::cmd_check(check_dir, std::cout);
}
