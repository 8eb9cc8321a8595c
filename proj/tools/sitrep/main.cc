#include <iostream>

#include "CLI11.hpp"
#include "commands.h"
#include "output.h"
#include "sitrep/error.h"

namespace {

// 0 success, 1 rejected input or configuration, 2 internal failure.
constexpr int kExitInput = 1;
constexpr int kExitInternal = 2;

int Fail(bool json, std::string_view error, const std::string& detail,
         const std::optional<std::string>& field = std::nullopt,
         const std::optional<std::size_t>& row = std::nullopt) {
  std::cerr << "sitrep: " << detail << '\n';
  if (json) {
    nlohmann::json body = {{"error", error}, {"detail", detail}};
    if (field) body["field"] = *field;
    if (row) body["row"] = *row;
    std::cout << body.dump(2) << '\n';
  }
  return error == "internal_error" ? kExitInternal : kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sitrep: county disaster-severity modelling, simulation and recourse"};
  app.require_subcommand(1);
  app.fallthrough();
  bool json = false;
  app.add_flag("--json", json, "Machine-readable JSON on stdout");
  sitrep::cli::Action action;
  sitrep::cli::RegisterCommands(app, action);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    const sitrep::cli::CommandOutput output = action();
    if (json) {
      sitrep::cli::PrintJson(output, std::cout);
    } else {
      sitrep::cli::PrintHuman(output, std::cout);
    }
    return output.exit_code;
  } catch (const sitrep::ValidationError& e) {
    return Fail(json, "validation_error", e.what(), e.field(), e.row());
  } catch (const sitrep::NotFoundError& e) {
    return Fail(json, "not_found", e.what());
  } catch (const sitrep::Error& e) {
    return Fail(json, "error", e.what());
  } catch (const std::exception& e) {
    return Fail(json, "internal_error", e.what());
  }
}
