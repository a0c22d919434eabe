// Command line front end: pfto validate|run|sweep --config FILE [--out DIR] [--threads N]
#include "pfto/driver.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Phase-field topology optimization of two-material elastic structures"};
  app.require_subcommand(1, 1);

  pfto::CommandOptions opt;
  auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", opt.config_path, "config file")->required()->check(CLI::ExistingFile);
    auto* out = sub->add_option("--out", opt.out_dir, "output directory");
    if (needs_out) out->required();
    sub->add_option("--threads", opt.threads, "worker threads (runs are sequential)")->check(CLI::PositiveNumber);
  };
  auto* validate = app.add_subcommand("validate", "parse the config and check mesh and solver");
  auto* run = app.add_subcommand("run", "single minimization");
  auto* sweep = app.add_subcommand("sweep", "warm-started sweep over the [sweep] eps list");
  add_common(validate, false);
  add_common(run, true);
  add_common(sweep, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : pfto::kExitConfig;
  }

  if (validate->parsed()) return pfto::validate_command(opt, std::cerr);
  if (run->parsed()) return pfto::run_command(opt, std::cerr);
  return pfto::sweep_command(opt, std::cerr);
}
