#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cgs/io/commands.hpp"
#include "cgs/version.hpp"

int main(int argc, char** argv) {
  using namespace cgs::io;
  CLI::App app{"Complex gradient systems: verify, construct and normalize"};
  app.set_version_flag("--version", cgs::kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string json_path;
  CommandOptions opt;
  std::uint64_t seed = 0;
  int points = 0;
  double tol = 0.0;
  app.add_option("--json", json_path, "Write the JSON report to this path");
  auto* seed_opt = app.add_option("--seed", seed, "Sampling seed");
  auto* points_opt = app.add_option("--points", points, "Number of sample points")->check(CLI::PositiveNumber);
  auto* tol_opt = app.add_option("--tol", tol, "Residual tolerance")->check(CLI::PositiveNumber);

  std::string target;
  auto* verify = app.add_subcommand("verify", "Check the axioms and identities of a system");
  verify->add_option("system", target, "Gallery name or file path")->required();

  int grid = 0;
  double h = 0.0;
  double newton_tol = 0.0;
  auto* cauchy = app.add_subcommand("cauchy", "Build a system from CR initial data");
  cauchy->set_help_flag("--help", "Print this help message and exit");
  cauchy->add_option("system", target, "Gallery name or file path")->required();
  auto* grid_opt = cauchy->add_option("--grid", grid, "Points per query axis")->check(CLI::PositiveNumber);
  auto* h_opt = cauchy->add_option("--h", h, "Finite-difference step")->check(CLI::PositiveNumber);
  auto* newton_opt = cauchy->add_option("--newton-tol", newton_tol, "Newton tolerance")->check(CLI::PositiveNumber);

  int nf_grid = 0;
  auto* nform = app.add_subcommand("normal-form", "Normal form of a holomorphic abelian system");
  nform->add_option("system", target, "Gallery name or file path")->required();
  auto* nf_grid_opt = nform->add_option("--grid", nf_grid, "Points per slice axis")->check(CLI::PositiveNumber);
  nform->set_help_flag("--help", "Print this help message and exit");
  double nf_h = 0.0;
  auto* nf_h_opt = nform->add_option("--h", nf_h, "Finite-difference step")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list", "List the built-in systems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  if (*seed_opt) opt.seed = seed;
  if (*points_opt) opt.points = points;
  if (*tol_opt) opt.tol = tol;
  if (*grid_opt) opt.grid = grid;
  if (*nf_grid_opt) opt.grid = nf_grid;
  if (*h_opt) opt.h = h;
  if (*nf_h_opt) opt.h = nf_h;
  if (*newton_opt) opt.newton_tol = newton_tol;

  CommandResult r;
  if (*verify) {
    r = run_verify(target, opt);
  } else if (*cauchy) {
    r = run_cauchy(target, opt);
  } else if (*nform) {
    r = run_normal_form(target, opt);
  } else if (*list) {
    r = run_list();
  }

  if (r.exit_code == kExitInput) {
    std::cerr << "error: " << r.message << "\n";
    return kExitInput;
  }
  std::cout << r.summary;
  if (!r.message.empty()) std::cerr << r.message << "\n";
  if (!json_path.empty()) {
    std::ofstream out(json_path, std::ios::binary);
    if (!out || !(out << r.json)) {
      std::cerr << "error: cannot write '" << json_path << "'\n";
      return kExitInput;
    }
  }
  return r.exit_code;
}
