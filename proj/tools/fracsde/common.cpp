#include "common.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "json.hpp"

#include "fracsde/errors.hpp"

namespace cli_tool {

using fracsde::DomainError;
using fracsde::IoError;

void add_grid_flags(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--hurst", cfg.hurst, "Hurst index of the driver, in (0.5, 1)")
        ->capture_default_str();
    cmd->add_option("--horizon", cfg.horizon, "Time horizon T")->capture_default_str();
    cmd->add_option("--steps", cfg.steps, "Grid steps (power of two recommended)")
        ->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "RNG seed; fixed seed = bit-identical output")
        ->capture_default_str();
    cmd->add_option("--config", cfg.config_file,
                    "JSON config file with the common keys; explicit flags win");
}

void add_beta_flag(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--beta", cfg.beta,
                    "Holder exponent in (0.5, hurst); default derives from hurst");
}

void add_out_flag(CLI::App* cmd, RunConfig& cfg, bool required) {
    CLI::Option* opt = cmd->add_option("--out", cfg.out, "Output file path");
    if (required) opt->required();
}

namespace {

bool flag_given(CLI::App* cmd, const std::string& name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError("config file " + path + " is not valid JSON: " + e.what());
    }
}

template <class T>
void merge_key(const nlohmann::json& j, CLI::App* cmd, const char* key, const char* flag,
               T& field) {
    if (!j.contains(key) || flag_given(cmd, flag)) return;
    // A key the command has no flag for is ignored: the same config file can
    // serve several commands.
    if (cmd->get_option_no_throw(flag) == nullptr) return;
    try {
        field = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw DomainError(std::string("config key '") + key + "' has the wrong type");
    }
}

} // namespace

void finalize_config(CLI::App* cmd, RunConfig& cfg) {
    if (!cfg.config_file.empty()) {
        nlohmann::json j = load_json_file(cfg.config_file);
        if (!j.is_object()) throw DomainError("config file must hold a JSON object");
        merge_key(j, cmd, "hurst", "--hurst", cfg.hurst);
        merge_key(j, cmd, "horizon", "--horizon", cfg.horizon);
        merge_key(j, cmd, "steps", "--steps", cfg.steps);
        merge_key(j, cmd, "seed", "--seed", cfg.seed);
        merge_key(j, cmd, "beta", "--beta", cfg.beta);
        merge_key(j, cmd, "out", "--out", cfg.out);
    }
    if (!(cfg.hurst > 0.5 && cfg.hurst < 1.0))
        throw DomainError("hurst must lie in (0.5, 1)");
    if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon))
        throw DomainError("horizon must be a positive finite time");
    if (cfg.steps < 1) throw DomainError("steps must be at least 1");
    if (cfg.beta != 0.0 && !(cfg.beta > 0.5 && cfg.beta < cfg.hurst))
        throw DomainError("beta must lie in (0.5, hurst)");
    if ((cfg.steps & (cfg.steps - 1)) != 0)
        std::fprintf(stderr,
                     "warning: --steps %zu is not a power of two; doubling grids keep "
                     "refinement studies comparable\n",
                     cfg.steps);
}

double effective_beta(const RunConfig& cfg) {
    if (cfg.beta != 0.0) return cfg.beta;
    return 0.5 + 0.8 * (cfg.hurst - 0.5);
}

fracsde::FbmConfig driver_config(const RunConfig& cfg) {
    fracsde::FbmConfig fc{cfg.hurst, fracsde::TimeGrid(cfg.horizon, cfg.steps), cfg.seed,
                          cfg.steps > 1024 ? fracsde::FbmMethod::circulant
                                           : fracsde::FbmMethod::cholesky};
    return fc;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

} // namespace

void JsonReport::key(const std::string& k) {
    if (!body_.empty()) body_ += ",";
    body_ += "\"" + json_escape(k) + "\":";
}

void JsonReport::number(const std::string& k, double v) {
    key(k);
    // JSON has no literals for non-finite values; report them as null rather
    // than emit a token no parser accepts.
    body_ += std::isfinite(v) ? fmt17(v) : "null";
}

void JsonReport::integer(const std::string& k, std::uint64_t v) {
    key(k);
    body_ += std::to_string(v);
}

void JsonReport::boolean(const std::string& k, bool v) {
    key(k);
    body_ += v ? "true" : "false";
}

void JsonReport::text(const std::string& k, const std::string& v) {
    key(k);
    body_ += "\"" + json_escape(v) + "\"";
}

std::string JsonReport::str() const { return "{" + body_ + "}\n"; }

void emit_report(const JsonReport& report, const std::string& path) {
    const std::string text = report.str();
    std::fputs(text.c_str(), stdout);
    if (path.empty()) return;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path);
}

namespace {

// "name" or "name(p1,p2,...)" -> name + parameter list.
std::pair<std::string, std::vector<double>> parse_family_spec(const std::string& spec) {
    const std::size_t open = spec.find('(');
    if (open == std::string::npos) return {spec, {}};
    if (spec.back() != ')')
        throw DomainError("coefficient family '" + spec + "' is missing ')'");
    std::string name = spec.substr(0, open);
    std::string args = spec.substr(open + 1, spec.size() - open - 2);
    std::vector<double> params;
    std::size_t pos = 0;
    while (pos <= args.size()) {
        std::size_t comma = args.find(',', pos);
        std::string tok = args.substr(pos, comma == std::string::npos ? comma : comma - pos);
        char* end = nullptr;
        double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0' || !std::isfinite(v))
            throw DomainError("bad parameter '" + tok + "' in family '" + spec + "'");
        params.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return {std::move(name), std::move(params)};
}

} // namespace

fracsde::CoefficientSet make_family(const std::string& spec) {
    auto [name, params] = parse_family_spec(spec);
    fracsde::CoefficientSet cs;
    if (name == "linear") {
        if (params.empty()) params = {0.1, 0.5};
        if (params.size() != 2)
            throw DomainError("family linear takes two parameters: linear(bbar,abar)");
        const double bbar = params[0], abar = params[1];
        cs.b = [bbar](double, double x) { return bbar * x; };
        cs.b_x = [bbar](double, double) { return bbar; };
        cs.sigma = [abar](double, double x) { return abar * x; };
        cs.sigma_x = [abar](double, double) { return abar; };
        cs.sigma_xx = [](double, double) { return 0.0; };
        // Any positive constant is valid when both coefficients vanish.
        cs.lipschitz_L = std::max({std::fabs(bbar), std::fabs(abar), 1e-6});
        return cs;
    }
    if (name == "sine") {
        if (!params.empty()) throw DomainError("family sine takes no parameters");
        cs.b = [](double, double x) { return std::cos(x); };
        cs.b_x = [](double, double x) { return -std::sin(x); };
        cs.sigma = [](double, double x) { return std::sin(x); };
        cs.sigma_x = [](double, double x) { return std::cos(x); };
        cs.sigma_xx = [](double, double x) { return -std::sin(x); };
        cs.lipschitz_L = 1.0;
        return cs;
    }
    if (name == "logistic") {
        if (params.empty()) params = {0.1};
        if (params.size() != 1)
            throw DomainError("family logistic takes one parameter: logistic(eps)");
        const double eps = params[0];
        cs.b = [](double, double x) { return x * (1.0 - x); };
        cs.b_x = [](double, double x) { return 1.0 - 2.0 * x; };
        cs.sigma = [eps](double, double x) { return eps * x; };
        cs.sigma_x = [eps](double, double) { return eps; };
        cs.sigma_xx = [](double, double) { return 0.0; };
        // Constants declared on |x| <= 1.5; see common.hpp.
        cs.lipschitz_L = std::max(2.0, std::fabs(eps));
        return cs;
    }
    throw DomainError("unknown coefficient family '" + name +
                      "'; available: linear(bbar,abar), sine, logistic(eps)");
}

unsigned worker_count() {
    const char* env = std::getenv("FRACSDE_THREADS");
    if (env != nullptr && *env != '\0') {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw DomainError("FRACSDE_THREADS must be a positive integer");
        return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

} // namespace cli_tool
