#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "commands.hpp"
#include "common.hpp"

#include "fracsde/char_system.hpp"
#include "fracsde/csv.hpp"
#include "fracsde/errors.hpp"
#include "fracsde/fbm.hpp"
#include "fracsde/linear_quasi.hpp"

namespace cli_tool {

namespace {

using fracsde::DomainError;
using fracsde::IoError;

// ---------------------------------------------------------------- linear --

struct LinearOpts {
    RunConfig cfg;
    double beta1 = 0.0;
    double beta0 = 0.0;
    double a1 = 0.0;
    double a0 = 0.0;
    double x0 = 1.0;
    CLI::App* cmd = nullptr;
};

void run_solve_linear(LinearOpts& o) {
    finalize_config(o.cmd, o.cfg);
    const fracsde::SampledPath B = fracsde::sample_fbm(driver_config(o.cfg));
    fracsde::LinearCoeffs lin;
    lin.beta1 = [v = o.beta1](double) { return v; };
    lin.beta0 = [v = o.beta0](double) { return v; };
    lin.a1 = [v = o.a1](double) { return v; };
    lin.a0 = [v = o.a0](double) { return v; };
    lin.a1_constant = true;
    lin.a1_value = o.a1;
    const fracsde::Kernel kernel(o.cfg.hurst);
    fracsde::write_csv(o.cfg.out, fracsde::solve_linear_explicit(lin, o.x0, B, kernel));
}

// ----------------------------------------------------------- quasilinear --

struct QuasiOpts {
    RunConfig cfg;
    std::string coeff_file;
    CLI::App* cmd = nullptr;
};

// Coefficient spec: {"constant": v} or {"poly": [c0, c1, ...]} with the
// polynomial in ascending powers of t. A missing key is the zero function.
std::function<double(double)> parse_coeff(const nlohmann::json& j, const char* name,
                                          bool* is_constant = nullptr,
                                          double* constant_value = nullptr) {
    if (is_constant != nullptr) *is_constant = false;
    if (!j.contains(name)) return [](double) { return 0.0; };
    const nlohmann::json& spec = j.at(name);
    if (spec.is_object() && spec.contains("constant")) {
        if (!spec.at("constant").is_number())
            throw DomainError(std::string("coefficient '") + name +
                              "': \"constant\" must be a number");
        const double v = spec.at("constant").get<double>();
        if (is_constant != nullptr) *is_constant = true;
        if (constant_value != nullptr) *constant_value = v;
        return [v](double) { return v; };
    }
    if (spec.is_object() && spec.contains("poly")) {
        const nlohmann::json& arr = spec.at("poly");
        if (!arr.is_array() || arr.empty())
            throw DomainError(std::string("coefficient '") + name +
                              "': \"poly\" must be a non-empty array");
        std::vector<double> c;
        for (const auto& e : arr) {
            if (!e.is_number())
                throw DomainError(std::string("coefficient '") + name +
                                  "': polynomial entries must be numbers");
            c.push_back(e.get<double>());
        }
        return [c](double t) {
            double acc = 0.0;
            for (std::size_t k = c.size(); k-- > 0;) acc = acc * t + c[k];
            return acc;
        };
    }
    throw DomainError(std::string("coefficient '") + name +
                      "' must be {\"constant\": v} or {\"poly\": [c0, c1, ...]}");
}

void run_solve_quasilinear(QuasiOpts& o) {
    finalize_config(o.cmd, o.cfg);
    std::ifstream in(o.coeff_file);
    if (!in) throw IoError("cannot open coefficient file " + o.coeff_file);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("coefficient file " + o.coeff_file + " is not valid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("eta") || !j.at("eta").is_number())
        throw DomainError("coefficient file needs a numeric \"eta\" initial value");
    const double eta = j.at("eta").get<double>();

    fracsde::QuasilinearCoeffs qc;
    bool a1_const = false;
    double a1_value = 0.0;
    qc.a1 = parse_coeff(j, "a1", &a1_const, &a1_value);
    qc.a1_constant = a1_const;
    qc.a1_value = a1_value;
    qc.a0 = parse_coeff(j, "a0");
    // Drift b(t, x) = b0(t) + b1(t) x, the affine-in-state shape the
    // constant/polynomial spec format can express.
    auto b0 = parse_coeff(j, "b0");
    auto b1 = parse_coeff(j, "b1");
    qc.b = [b0, b1](double t, double x) { return b0(t) + b1(t) * x; };

    const fracsde::SampledPath B = fracsde::sample_fbm(driver_config(o.cfg));
    const fracsde::Kernel kernel(o.cfg.hurst);
    fracsde::write_csv(o.cfg.out, fracsde::solve_quasilinear(qc, eta, B, kernel));
}

// ------------------------------------------------------------- nonlinear --

struct NonlinearOpts {
    RunConfig cfg;
    std::string coeff;
    double eta = 1.0;
    std::vector<double> times;
    double tol = 1e-8;
    int max_iter = 50;
    CLI::App* cmd = nullptr;
};

void run_solve_nonlinear(NonlinearOpts& o) {
    finalize_config(o.cmd, o.cfg);
    const fracsde::CoefficientSet coeffs = make_family(o.coeff);
    const fracsde::SampledPath B = fracsde::sample_fbm(driver_config(o.cfg));
    const fracsde::Kernel kernel(o.cfg.hurst);
    const fracsde::HolderExponent beta(effective_beta(o.cfg));

    const fracsde::ComposedSolution sol = fracsde::compose_solution(
        coeffs, o.eta, B, kernel, beta, o.times, o.tol, o.max_iter);

    // The rows are the requested times only, so this table is usually not a
    // uniform grid; it shares the path CSV syntax but not its readability by
    // the frac/integrate commands.
    std::ofstream out(o.cfg.out, std::ios::binary);
    if (!out) throw IoError("cannot open " + o.cfg.out + " for writing");
    out << "t,value\n";
    for (std::size_t i = 0; i < sol.times.size(); ++i)
        out << fmt17(sol.times[i]) << "," << fmt17(sol.values[i]) << "\n";
    if (!out) throw IoError("failed writing " + o.cfg.out);
    out.close();

    if (sol.horizon_hit) {
        std::string msg = "shift inversion stopped contracting at t = " +
                          fmt17(sol.failed_time) + " (a-priori contraction horizon " +
                          fmt17(sol.theoretical_horizon) + "); results up to t = " +
                          (sol.times.empty() ? std::string("none") : fmt17(sol.times.back())) +
                          " written to " + o.cfg.out;
        throw fracsde::HorizonExceededError(msg, sol.failed_time, 0.0);
    }
}

} // namespace

void register_cmd_solve_linear(CLI::App& app) {
    auto o = std::make_shared<LinearOpts>();
    CLI::App* cmd = app.add_subcommand(
        "solve-linear",
        "Solve dx = (beta1 x + beta0) dt + (a1 x + a0) dB by the explicit formula");
    cmd->add_option("--beta1", o->beta1, "Drift slope")->capture_default_str();
    cmd->add_option("--beta0", o->beta0, "Drift constant")->capture_default_str();
    cmd->add_option("--a1", o->a1, "Diffusion slope")->capture_default_str();
    cmd->add_option("--a0", o->a0, "Diffusion constant")->capture_default_str();
    cmd->add_option("--x0", o->x0, "Initial value")->capture_default_str();
    add_grid_flags(cmd, o->cfg);
    add_beta_flag(cmd, o->cfg);
    add_out_flag(cmd, o->cfg, true);
    o->cmd = cmd;
    cmd->callback([o] { run_solve_linear(*o); });
}

void register_cmd_solve_quasilinear(CLI::App& app) {
    auto o = std::make_shared<QuasiOpts>();
    CLI::App* cmd = app.add_subcommand(
        "solve-quasilinear",
        "Solve dx = b(t,x) dt + (a1(t) x + a0(t)) dB from a JSON coefficient file");
    cmd->add_option("--coeff-file", o->coeff_file,
                    "JSON: eta plus a1/a0/b0/b1 as {\"constant\": v} or {\"poly\": [...]}")
        ->required();
    add_grid_flags(cmd, o->cfg);
    add_beta_flag(cmd, o->cfg);
    add_out_flag(cmd, o->cfg, true);
    o->cmd = cmd;
    cmd->callback([o] { run_solve_quasilinear(*o); });
}

void register_cmd_solve_nonlinear(CLI::App& app) {
    auto o = std::make_shared<NonlinearOpts>();
    CLI::App* cmd = app.add_subcommand(
        "solve-nonlinear",
        "Solve dx = b(t,x) dt + sigma(t,x) dB for a named coefficient family");
    cmd->add_option("--coeff", o->coeff,
                    "Family: linear(bbar,abar) | sine | logistic(eps)")
        ->required();
    cmd->add_option("--eta", o->eta, "Initial value")->capture_default_str();
    cmd->add_option("--times", o->times, "Comma-separated output times (grid nodes)")
        ->required()
        ->delimiter(',');
    cmd->add_option("--tol", o->tol, "Inversion tolerance")->capture_default_str();
    cmd->add_option("--max-iter", o->max_iter, "Inversion iteration budget")
        ->capture_default_str();
    add_grid_flags(cmd, o->cfg);
    add_beta_flag(cmd, o->cfg);
    add_out_flag(cmd, o->cfg, true);
    o->cmd = cmd;
    cmd->callback([o] { run_solve_nonlinear(*o); });
}

} // namespace cli_tool
