#ifndef SITREP_TOOLS_COMMANDS_H_
#define SITREP_TOOLS_COMMANDS_H_

#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"

namespace sitrep::cli {

// Result of one subcommand. `kind` selects the human-readable printer.
struct CommandOutput {
  std::string kind;
  nlohmann::json body;
  int exit_code = 0;
};

using Action = std::function<CommandOutput()>;

// Adds every subcommand to `app`. The chosen subcommand stores its work in
// `action`; nothing runs during parsing.
void RegisterCommands(CLI::App& app, Action& action);

}  // namespace sitrep::cli

#endif  // SITREP_TOOLS_COMMANDS_H_
