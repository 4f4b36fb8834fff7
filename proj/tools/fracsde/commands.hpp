#pragma once

#include "CLI11.hpp"

// One registration hook per subcommand. Each adds its flags to the app and
// installs a callback; all execution errors surface as the library's
// exception taxonomy, which main() maps onto the exit-code contract.

namespace cli_tool {

void register_cmd_fbm(CLI::App& app);
void register_cmd_frac(CLI::App& app);
void register_cmd_integrate(CLI::App& app);
void register_cmd_solve_linear(CLI::App& app);
void register_cmd_solve_quasilinear(CLI::App& app);
void register_cmd_solve_nonlinear(CLI::App& app);
void register_cmd_mc(CLI::App& app);
void register_cmd_convergence(CLI::App& app);

} // namespace cli_tool
