#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "mcf/profile_io.hpp"
#include "mcf/report.hpp"

namespace {

struct Flag {
  const char* key;
  const char* help;
};

// Surface and solver options shared by every subcommand. Values are kept as
// strings so they go through the same parser as config files.
constexpr Flag kFlags[] = {
    {"builtin", "builtin shrinker: cylinder, sphere, circle or plane"},
    {"input", "profile file (overrides --builtin)"},
    {"k", "sphere dimension of a builtin cylinder"},
    {"n", "surface dimension"},
    {"amplitude", "normal perturbation amplitude"},
    {"wavenumber", "perturbation wavenumber"},
    {"resolution", "profile samples of a builtin surface"},
    {"R", "radius of the ball used for classification and certificates"},
    {"delta0", "lower bound on H"},
    {"C0", "upper bound on |A|"},
    {"lambda0", "entropy bound"},
    {"theta", "radius growth per iteration round"},
    {"rounds", "iteration rounds"},
    {"ds", "cap on the flow step"},
    {"s_max", "rescaled time budget"},
    {"cadence", "snapshot spacing in rescaled time"},
    {"out", "output directory"},
    {"seed", "random seed"},
    {"threads", "worker threads"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on self-shrinking hypersurfaces of revolution"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "key = value config file applied before flags");
  std::map<std::string, std::string> values;
  for (const Flag& f : kFlags) app.add_option("--" + std::string(f.key), values[f.key], f.help);

  const std::pair<mcf::Command, const char*> commands[] = {
      {mcf::Command::verify, "check the shrinker and operator identities"},
      {mcf::Command::entropy, "search for the entropy and its maximizing window"},
      {mcf::Command::flow, "run the rescaled flow and audit monotonicity"},
      {mcf::Command::classify, "classify the surface as a generalized cylinder"},
      {mcf::Command::gap, "perturb a cylinder and watch the flow"},
      {mcf::Command::bounds, "evaluate the Gaussian tail and gradient bounds"},
  };
  for (const auto& [cmd, help] : commands) app.add_subcommand(mcf::command_name(cmd), help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  mcf::RunConfig cfg;
  try {
    if (!config_path.empty()) mcf::read_config_file(config_path, cfg);
    for (const auto& [cmd, help] : commands)
      if (app.got_subcommand(mcf::command_name(cmd))) cfg.command = cmd;
    for (const Flag& f : kFlags) {
      if (app.count("--" + std::string(f.key)) == 0) continue;
      std::string flag = "--" + std::string(f.key);
      mcf::apply_setting(cfg, f.key, values[f.key], flag, 0, 1, static_cast<int>(flag.size()) + 2);
    }
    mcf::validate_config(cfg);
  } catch (const mcf::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const mcf::Rejection& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return 2;
  }
  mcf::RunResult r = mcf::run(cfg, std::cout);
  return r.status;
}
