#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "commands.hpp"
#include "common.hpp"

#include "fracsde/csv.hpp"
#include "fracsde/errors.hpp"
#include "fracsde/fbm.hpp"
#include "fracsde/integrators.hpp"
#include "fracsde/linear_quasi.hpp"
#include "fracsde/picard.hpp"

namespace cli_tool {

namespace {

using fracsde::DomainError;
using fracsde::SampledPath;
using fracsde::TimeGrid;

struct ConvOpts {
    RunConfig cfg; // steps = coarsest level
    std::string experiment;
    int levels = 4;
    CLI::App* cmd = nullptr;
};

// Every coarse grid is the finest one thinned by a power of two, so all
// levels see the same realization of the driver restricted to nested nodes.
SampledPath decimate(const SampledPath& fine, std::size_t stride) {
    const TimeGrid coarse(fine.grid().horizon(), fine.grid().n_steps() / stride);
    std::vector<double> v(coarse.n_nodes());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fine[i * stride];
    return SampledPath(coarse, std::move(v));
}

// Trapezoid integral mapping y = 1 + int_0^t x ds, fixed point e^t. The
// mapping's difference bound is plain Lipschitz: kappa = 1, gamma = 1.
fracsde::ContractionProblem exp_ode_problem() {
    fracsde::ContractionProblem p;
    p.state_dim = 1;
    p.F0 = {1.0};
    p.kappa = 1.0;
    p.gamma = 1.0;
    p.beta = fracsde::HolderExponent(0.75);
    p.Delta = 1.0;
    p.apply_F = [](const TimeGrid& g, std::size_t upto, const fracsde::Trajectory& x) {
        fracsde::Trajectory y(x.size(), std::vector<double>(1, 0.0));
        y[0][0] = 1.0;
        double acc = 0.0;
        for (std::size_t i = 1; i <= upto; ++i) {
            acc += 0.5 * g.dt() * (x[i - 1][0] + x[i][0]);
            y[i][0] = 1.0 + acc;
        }
        return y;
    };
    return p;
}

double level_error(const ConvOpts& o, const SampledPath* fine_driver, std::size_t n_steps,
                   std::size_t stride) {
    const double T = o.cfg.horizon;
    const double beta = effective_beta(o.cfg);
    if (o.experiment == "picard-ode") {
        const fracsde::PicardReport r =
            fracsde::solve_fixed_point(exp_ode_problem(), TimeGrid(T, n_steps), 1e-12, 80);
        return std::fabs(r.solution.back()[0] - std::exp(T));
    }
    const SampledPath B = decimate(*fine_driver, stride);
    const fracsde::Kernel kernel(o.cfg.hurst);
    if (o.experiment == "young-methods") {
        const fracsde::IntegrandSpec spec{B, fracsde::MalliavinKernel(),
                                          fracsde::HolderExponent(beta)};
        const double riemann =
            fracsde::young_riemann(spec, B, 0.0, T, fracsde::EvalPoint::mid);
        const double fractional = fracsde::young_fractional(
            spec, B, 0.0, T, fracsde::default_frac_order(beta, beta));
        return std::fabs(fractional - riemann);
    }
    // linear-oracle: quasilinear pipeline against the explicit affine formula
    // on the same driver.
    fracsde::LinearCoeffs lin;
    lin.beta1 = [](double) { return 0.1; };
    lin.beta0 = [](double) { return 0.0; };
    lin.a1 = [](double) { return 0.5; };
    lin.a0 = [](double) { return 0.0; };
    lin.a1_constant = true;
    lin.a1_value = 0.5;
    fracsde::QuasilinearCoeffs qc;
    qc.a1 = lin.a1;
    qc.a1_constant = true;
    qc.a1_value = 0.5;
    qc.a0 = lin.a0;
    qc.b = [](double, double x) { return 0.1 * x; };
    const SampledPath explicit_x = fracsde::solve_linear_explicit(lin, 1.0, B, kernel);
    const SampledPath quasi_x = fracsde::solve_quasilinear(qc, 1.0, B, kernel);
    double worst = 0.0;
    for (std::size_t i = 0; i < explicit_x.size(); ++i)
        worst = std::max(worst, std::fabs(explicit_x[i] - quasi_x[i]));
    return worst;
}

void run_convergence(ConvOpts& o) {
    finalize_config(o.cmd, o.cfg);
    if (o.levels < 3)
        throw DomainError("convergence studies need at least 3 refinement levels");
    if (o.levels > 16) throw DomainError("more than 16 doublings would overflow the grid");
    if ((o.cfg.steps & (o.cfg.steps - 1)) != 0)
        throw DomainError("convergence studies need a power-of-two coarsest grid");

    const std::size_t finest = o.cfg.steps << (o.levels - 1);
    std::unique_ptr<SampledPath> fine_driver;
    if (o.experiment != "picard-ode") {
        fracsde::FbmConfig fc{o.cfg.hurst, TimeGrid(o.cfg.horizon, finest), o.cfg.seed,
                              finest > 1024 ? fracsde::FbmMethod::circulant
                                            : fracsde::FbmMethod::cholesky};
        fine_driver = std::make_unique<SampledPath>(fracsde::sample_fbm(fc));
    }

    // Levels are independent; fan them out, one worker per stripe.
    std::vector<double> errors(static_cast<std::size_t>(o.levels), 0.0);
    std::vector<std::exception_ptr> failures(errors.size());
    const unsigned workers =
        std::min<unsigned>(worker_count(), static_cast<unsigned>(o.levels));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t k = w; k < errors.size(); k += workers) {
                try {
                    const std::size_t n = o.cfg.steps << k;
                    errors[k] = level_error(o, fine_driver.get(), n,
                                            (finest / n));
                } catch (...) {
                    failures[k] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    // Least-squares slope of log error against log dt = the empirical order.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const auto n_levels = static_cast<double>(o.levels);
    for (int k = 0; k < o.levels; ++k) {
        const double dt = o.cfg.horizon / static_cast<double>(o.cfg.steps << k);
        const double x = std::log(dt);
        const double y = std::log(std::max(errors[static_cast<std::size_t>(k)], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double order = (n_levels * sxy - sx * sy) / (n_levels * sxx - sx * sx);

    std::string table = "# experiment " + o.experiment + "\nsteps,dt,error\n";
    for (int k = 0; k < o.levels; ++k) {
        const std::size_t n = o.cfg.steps << k;
        table += std::to_string(n) + "," + fmt17(o.cfg.horizon / static_cast<double>(n)) +
                 "," + fmt17(errors[static_cast<std::size_t>(k)]) + "\n";
    }
    table += "# fitted order " + fmt17(order) + "\n";

    std::fputs(table.c_str(), stdout);
    if (!o.cfg.out.empty()) {
        std::ofstream out(o.cfg.out, std::ios::binary);
        if (!out) throw fracsde::IoError("cannot open " + o.cfg.out + " for writing");
        out << table;
        if (!out) throw fracsde::IoError("failed writing " + o.cfg.out);
    }
}

} // namespace

void register_cmd_convergence(CLI::App& app) {
    auto o = std::make_shared<ConvOpts>();
    CLI::App* cmd = app.add_subcommand(
        "convergence",
        "Refinement study on doubling grids: error table and fitted order");
    cmd->add_option("--experiment", o->experiment,
                    "young-methods | linear-oracle | picard-ode")
        ->required()
        ->check(CLI::IsMember({"young-methods", "linear-oracle", "picard-ode"}));
    cmd->add_option("--levels", o->levels, "Number of doubling levels (at least 3)")
        ->capture_default_str();
    add_grid_flags(cmd, o->cfg);
    add_beta_flag(cmd, o->cfg);
    cmd->add_option("--out", o->cfg.out, "Also write the table here");
    o->cmd = cmd;
    cmd->callback([o] { run_convergence(*o); });
}

} // namespace cli_tool
