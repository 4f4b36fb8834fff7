#include <memory>
#include <string>

#include "commands.hpp"
#include "common.hpp"

#include "fracsde/csv.hpp"
#include "fracsde/frac_calc.hpp"

namespace cli_tool {

namespace {

struct FracOpts {
    std::string op;
    double alpha = 0.5;
    std::string in_file;
    std::string out_file;
};

void run_frac(FracOpts& o) {
    const fracsde::SampledPath f = fracsde::read_csv(o.in_file);
    const fracsde::FracOrder order(o.alpha);
    fracsde::SampledPath g = [&] {
        // Window endpoints are the path's own grid ends; undefined nodes come
        // back as NaN sentinels and stay NaN in the CSV.
        if (o.op == "ileft") return fracsde::frac_integral_left(f, order, 0.0);
        if (o.op == "dleft") return fracsde::weyl_derivative_left(f, order, 0.0);
        return fracsde::weyl_derivative_right(f, order, f.grid().horizon());
    }();
    fracsde::write_csv(o.out_file, g);
}

} // namespace

void register_cmd_frac(CLI::App& app) {
    auto o = std::make_shared<FracOpts>();
    CLI::App* cmd = app.add_subcommand(
        "frac", "Apply a fractional integral or Weyl derivative to a CSV path");
    cmd->add_option("op", o->op, "ileft = I^a_{0+}, dleft = D^a_{0+}, dright = D^a_{T-}")
        ->required()
        ->check(CLI::IsMember({"ileft", "dleft", "dright"}));
    cmd->add_option("--alpha", o->alpha, "Order in (0,1)")->required();
    cmd->add_option("--in", o->in_file, "Input CSV path")->required();
    cmd->add_option("--out", o->out_file, "Output CSV path")->required();
    cmd->callback([o] { run_frac(*o); });
}

} // namespace cli_tool
