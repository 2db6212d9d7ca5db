#pragma once

#include <CLI11.hpp>

#include "cli/report.hpp"

namespace chbu::cli {

// Adds every subcommand; the selected one fills `report` when it runs.
void register_commands(CLI::App& app, Report& report);

}  // namespace chbu::cli
