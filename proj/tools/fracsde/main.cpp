#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "commands.hpp"
#include "fracsde/errors.hpp"

// Exit codes are a stable contract: 0 success, 1 domain error (bad flags or
// parameters), 2 numerical failure (contraction, horizon, resolution,
// overflow), 3 I/O failure.

int main(int argc, char** argv) {
    CLI::App app{"fracsde: fractional Brownian drivers, Young and Wick-Ito integrals, "
                 "and Ito SDE solvers on top of them"};
    app.require_subcommand(1);

    cli_tool::register_cmd_fbm(app);
    cli_tool::register_cmd_frac(app);
    cli_tool::register_cmd_integrate(app);
    cli_tool::register_cmd_solve_linear(app);
    cli_tool::register_cmd_solve_quasilinear(app);
    cli_tool::register_cmd_solve_nonlinear(app);
    cli_tool::register_cmd_mc(app);
    cli_tool::register_cmd_convergence(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints the parser's own message to stderr
        const auto subs = app.get_subcommands();
        std::cerr << (subs.empty() ? app.help() : subs.front()->help());
        return 1;
    } catch (const fracsde::DomainError& e) {
        std::fprintf(stderr, "domain error: %s\n", e.what());
        return 1;
    } catch (const fracsde::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 3;
    } catch (const fracsde::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    }
    return 0;
}
