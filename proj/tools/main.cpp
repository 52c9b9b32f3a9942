#include <deque>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "roughfbm/kernel.hpp"
#include "roughfbm/version.hpp"

using namespace rfbm::cli;

namespace {

struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

// Every config key becomes a flag of the same name.
ConfigFlags& add_config_flags(CLI::App* sub, std::deque<ConfigFlags>& store) {
  auto& flags = store.emplace_back();
  sub->add_option("--config", flags.config_file, "flat JSON config file; flags override its keys");
  for (const auto& key : config_keys())
    flags.options[key] = sub->add_option("--" + key, flags.values[key], "config key " + key);
  return flags;
}

RunConfig resolve(const ConfigFlags& flags) {
  RunConfig config = flags.config_file.empty() ? RunConfig{} : load_config_file(flags.config_file);
  nlohmann::json overrides = nlohmann::json::object();
  for (const auto& [key, option] : flags.options)
    if (option->count() > 0) overrides[key] = flag_value(key, flags.values.at(key));
  apply_json(config, overrides);
  validate(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rough paths above multidimensional fractional Brownian motion"};
  app.set_version_flag("--version", std::string(rfbm::kToolVersion));
  app.require_subcommand(1);
  std::deque<ConfigFlags> store;

  auto* kernel_check = app.add_subcommand("kernel-check", "covariance gate and kernel lemma sweeps");
  auto& kernel_flags = add_config_flags(kernel_check, store);

  auto* simulate = app.add_subcommand("simulate", "sample a path and write its rough path stack");
  auto& simulate_flags = add_config_flags(simulate, store);

  auto* verify = app.add_subcommand("verify", "Chen and shuffle identities on a stack");
  auto& verify_flags = add_config_flags(verify, store);
  std::string which = "both";
  std::string stack_file;
  verify->add_option("--which", which, "chen, shuffle or both")->check(CLI::IsMember({"chen", "shuffle", "both"}));
  verify->add_option("--stack", stack_file, "stack.json written by simulate; default rebuilds from the config");

  auto* scaling = app.add_subcommand("scaling", "second-moment scaling of one level");
  auto& scaling_flags = add_config_flags(scaling, store);

  auto* holder = app.add_subcommand("holder", "Hölder norm stability under refinement");
  auto& holder_flags = add_config_flags(holder, store);

  auto* ito = app.add_subcommand("ito", "Itô decomposition against the Stratonovich integral");
  auto& ito_flags = add_config_flags(ito, store);

  auto* enumerate = app.add_subcommand("enumerate", "print shuffles, compositions or valley orders as JSON");
  std::string what, tuple_a, tuple_b;
  int n = 0, k = 0, j = 0;
  enumerate->add_option("what", what, "shuffles, compositions or valleys")->required();
  enumerate->add_option("--a", tuple_a, "first tuple, e.g. 1,2");
  enumerate->add_option("--b", tuple_b, "second tuple");
  enumerate->add_option("--n", n, "level");
  enumerate->add_option("--k", k, "number of parts");
  enumerate->add_option("--j", j, "valley index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*kernel_check) return cmd_kernel_check(resolve(kernel_flags));
    if (*simulate) return cmd_simulate(resolve(simulate_flags));
    if (*verify) return cmd_verify(resolve(verify_flags), which, stack_file);
    if (*scaling) return cmd_scaling(resolve(scaling_flags));
    if (*holder) return cmd_holder(resolve(holder_flags));
    if (*ito) return cmd_ito(resolve(ito_flags));
    if (*enumerate) return cmd_enumerate(what, tuple_a, tuple_b, n, k, j);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return kExitGateFailure;
  }
  return kExitUsage;
}
