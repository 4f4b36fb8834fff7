#include <cmath>
#include <memory>
#include <string>

#include "commands.hpp"
#include "common.hpp"

#include "fracsde/fbm.hpp"
#include "fracsde/integrators.hpp"
#include "fracsde/mc.hpp"

namespace cli_tool {

namespace {

struct McOpts {
    RunConfig cfg;
    std::string experiment;
    std::size_t samples = 10000;
    CLI::App* cmd = nullptr;
};

void emit_mc_report(const std::string& experiment, double mean, double std_error,
                    double target, bool pass, std::size_t n_used, std::size_t excluded,
                    const std::string& out) {
    JsonReport report;
    report.text("experiment", experiment);
    report.integer("samples", n_used);
    report.integer("excluded", excluded);
    report.number("mean", mean);
    report.number("stderr", std_error);
    report.number("target", target);
    report.boolean("pass", pass);
    emit_report(report, out);
}

void run_mc_cmd(McOpts& o) {
    finalize_config(o.cmd, o.cfg);
    const fracsde::TimeGrid grid(o.cfg.horizon, o.cfg.steps);
    const fracsde::Kernel kernel(o.cfg.hurst);
    const double beta = effective_beta(o.cfg);
    const double T = o.cfg.horizon;
    const double half_var = 0.5 * fracsde::kernel_double_integral(kernel, T);
    const fracsde::FbmMethod method = o.cfg.steps > 1024 ? fracsde::FbmMethod::circulant
                                                         : fracsde::FbmMethod::cholesky;
    const auto draw = [&](std::uint64_t seed) {
        return fracsde::sample_fbm({o.cfg.hurst, grid, seed, method});
    };
    const auto spec_of = [&](const fracsde::SampledPath& B) {
        return fracsde::IntegrandSpec{B, fracsde::MalliavinKernel(),
                                      fracsde::HolderExponent(beta)};
    };

    fracsde::McPlan plan;
    plan.n_samples = o.samples;
    plan.base_seed = o.cfg.seed;
    plan.estimator = o.experiment;
    plan.tolerance = fracsde::TolerancePolicy::sigma_band();

    if (o.experiment == "isometry") {
        // Variance of int_0^T 1 dB against the kernel double integral T^2H.
        const fracsde::IntegrandSpec ones{fracsde::SampledPath::from_function(
                                              grid, [](double) { return 1.0; }),
                                          fracsde::MalliavinKernel::zero(),
                                          fracsde::HolderExponent(beta)};
        const fracsde::VarianceResult r = fracsde::variance_check(plan, ones, kernel);
        emit_mc_report(o.experiment, r.sample_var, r.std_error, r.target, r.pass, r.n_used,
                       r.n_non_finite, o.cfg.out);
        return;
    }

    std::function<double(std::uint64_t)> estimator;
    if (o.experiment == "zero-mean-ito") {
        // int B delta-B = int B dB - T^2H / 2 pathwise; the midpoint sum
        // telescopes to B(T)^2 / 2, so the estimator has mean zero exactly
        // at every grid size.
        plan.target = 0.0;
        estimator = [=](std::uint64_t seed) {
            const fracsde::SampledPath B = draw(seed);
            return fracsde::young_riemann(spec_of(B), B, 0.0, T, fracsde::EvalPoint::mid) -
                   half_var;
        };
    } else if (o.experiment == "pathwise-mean") {
        plan.target = half_var;
        estimator = [=](std::uint64_t seed) {
            const fracsde::SampledPath B = draw(seed);
            return fracsde::young_riemann(spec_of(B), B, 0.0, T, fracsde::EvalPoint::mid);
        };
    } else { // lognormal-mean
        // Terminal value of the geometric equation dx = x dB, x(0) = 1, by
        // its explicit solution; E x(T) = 1.
        plan.target = 1.0;
        estimator = [=](std::uint64_t seed) {
            const fracsde::SampledPath B = draw(seed);
            return std::exp(B.values().back() - half_var);
        };
    }

    const fracsde::McResult r = fracsde::run_mc(plan, estimator);
    emit_mc_report(o.experiment, r.mean, r.std_error, r.target, r.pass, r.n_used,
                   r.n_non_finite, o.cfg.out);
}

} // namespace

void register_cmd_mc(CLI::App& app) {
    auto o = std::make_shared<McOpts>();
    CLI::App* cmd = app.add_subcommand(
        "mc", "Monte Carlo experiment over consecutive seeds, graded as JSON");
    cmd->add_option("--experiment", o->experiment,
                    "zero-mean-ito | pathwise-mean | isometry | lognormal-mean")
        ->required()
        ->check(CLI::IsMember(
            {"zero-mean-ito", "pathwise-mean", "isometry", "lognormal-mean"}));
    cmd->add_option("--samples", o->samples, "Sample count (at least 100)")
        ->capture_default_str();
    add_grid_flags(cmd, o->cfg);
    add_beta_flag(cmd, o->cfg);
    cmd->add_option("--out", o->cfg.out, "Also write the JSON report here");
    o->cmd = cmd;
    cmd->callback([o] { run_mc_cmd(*o); });
}

} // namespace cli_tool
