#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pmc/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Prescribed mean curvature gluing toolkit"};
  app.require_subcommand(1);
  std::string config;
  std::string out;
  for (const char* name : {"moments", "balance", "assemble", "validate"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON run configuration")->required();
    sub->add_option("--out", out, "directory for relative output paths");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  std::optional<std::filesystem::path> out_dir;
  if (!out.empty()) out_dir = out;
  return pmc::cli::run(command, config, out_dir, std::cerr);
}
