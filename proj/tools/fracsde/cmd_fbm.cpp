#include <memory>
#include <string>

#include "commands.hpp"
#include "common.hpp"

#include "fracsde/csv.hpp"
#include "fracsde/fbm.hpp"

namespace cli_tool {

namespace {

struct FbmOpts {
    RunConfig cfg;
    std::string method = "cholesky";
    CLI::App* cmd = nullptr;
};

void run_fbm(FbmOpts& o) {
    finalize_config(o.cmd, o.cfg);
    fracsde::FbmConfig fc{o.cfg.hurst, fracsde::TimeGrid(o.cfg.horizon, o.cfg.steps),
                          o.cfg.seed,
                          o.method == "circulant" ? fracsde::FbmMethod::circulant
                                                  : fracsde::FbmMethod::cholesky};
    fracsde::write_csv(o.cfg.out, fracsde::sample_fbm(fc));
}

} // namespace

void register_cmd_fbm(CLI::App& app) {
    auto o = std::make_shared<FbmOpts>();
    CLI::App* cmd = app.add_subcommand(
        "fbm", "Sample one fractional Brownian path and write it as CSV");
    add_grid_flags(cmd, o->cfg);
    cmd->add_option("--method", o->method, "Sampling scheme")
        ->check(CLI::IsMember({"cholesky", "circulant"}))
        ->capture_default_str();
    add_out_flag(cmd, o->cfg, true);
    o->cmd = cmd;
    cmd->callback([o] { run_fbm(*o); });
}

} // namespace cli_tool
