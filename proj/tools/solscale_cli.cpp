#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "solscale/experiment.hpp"

// solscale <subcommand> --config <path> --out <dir> [--seed u64] [--radius r] [--tol x] [--threads k]
// Exit codes: 0 PASS, 1 FAIL, 2 INCONCLUSIVE (including exhausted budgets), 64 usage.
int main(int argc, char** argv) {
  CLI::App app{"Scaling-group experiments on Sol-type lattices and glued spaces"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::uint64_t seed = 0;
  double radius = 0.0, tol = 0.0;
  int threads = 1;
  std::vector<CLI::Option*> seed_opts, radius_opts, tol_opts, thread_opts;
  for (const auto& name : solscale::subcommands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    seed_opts.push_back(sub->add_option("--seed", seed, "random seed"));
    radius_opts.push_back(sub->add_option("--radius", radius, "boundary radius r")->check(CLI::NonNegativeNumber));
    tol_opts.push_back(sub->add_option("--tol", tol, "convergence tolerance")->check(CLI::PositiveNumber));
    thread_opts.push_back(sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return solscale::kExitUsage;
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  const auto idx = static_cast<std::size_t>(std::find(solscale::subcommands().begin(), solscale::subcommands().end(),
                                                      subcommand) - solscale::subcommands().begin());
  solscale::CliOverrides ov;
  if (seed_opts[idx]->count()) ov.seed = seed;
  if (radius_opts[idx]->count()) ov.radius = radius;
  if (tol_opts[idx]->count()) ov.tol = tol;
  if (thread_opts[idx]->count()) ov.threads = threads;

  std::string text;
  if (!config_path.empty()) {
    std::ifstream in(config_path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }

  try {
    const auto out = solscale::run_experiment(subcommand, text, out_dir, ov);
    std::cout << subcommand << ": " << out.status << "\n";
    for (const auto& f : out.files) std::cout << "  wrote " << f.string() << "\n";
    return out.exit_code;
  } catch (const solscale::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return solscale::kExitUsage;
  } catch (const solscale::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return solscale::kExitInconclusive;
  }
}
