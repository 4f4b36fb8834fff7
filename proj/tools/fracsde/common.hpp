#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fracsde/char_system.hpp"
#include "fracsde/fbm.hpp"
#include "fracsde/time_grid.hpp"

// Shared plumbing of the command line tool: the common parameter block, its
// JSON config-file merge, numeric validation, and the flat JSON report
// writer. Policy decisions that the library leaves open (default Holder
// exponent, automatic sampling method, named coefficient families) live
// here, not in the library.

namespace cli_tool {

// Common parameter block. Every command registers the subset of these flags
// it actually consumes; a JSON config file may supply the same keys, with
// explicit flags winning.
struct RunConfig {
    double hurst = 0.75;
    double horizon = 1.0;
    std::size_t steps = 256;
    std::uint64_t seed = 0;
    double beta = 0.0; // 0 = derive from hurst, see effective_beta
    std::string out;
    std::string config_file;
};

// Registers --hurst --horizon --steps --seed --config on the subcommand.
void add_grid_flags(CLI::App* cmd, RunConfig& cfg);
void add_beta_flag(CLI::App* cmd, RunConfig& cfg);
void add_out_flag(CLI::App* cmd, RunConfig& cfg, bool required);

// Applies the config file (keys hurst, horizon, steps, seed, beta, out;
// flags given on the command line keep priority), then validates ranges:
// hurst in (0.5, 1), horizon positive, steps >= 1, beta in (0.5, hurst).
// Steps off a power of two only warns; refinement studies want doubling
// grids but nothing breaks without them.
void finalize_config(CLI::App* cmd, RunConfig& cfg);

// Explicit --beta, or the default 0.5 + 0.8 (hurst - 0.5): close enough to
// hurst for a strong Young rate, with a fixed relative safety margin.
double effective_beta(const RunConfig& cfg);

// Driver sampling config with the method picked by size: the circulant
// embedding wins past a few thousand steps, dense Cholesky below.
fracsde::FbmConfig driver_config(const RunConfig& cfg);

// %.17g, the shortest format that round-trips every double.
std::string fmt17(double v);

// Flat single-object JSON writer with insertion order and 17-significant-
// digit numbers. nlohmann would re-format numbers to shortest form, which
// breaks the fixed-width output contract, so reports are emitted by hand.
class JsonReport {
public:
    void number(const std::string& key, double v);
    void integer(const std::string& key, std::uint64_t v);
    void boolean(const std::string& key, bool v);
    void text(const std::string& key, const std::string& v);
    std::string str() const; // {"k":v,...} with a trailing newline

private:
    void key(const std::string& k);
    std::string body_;
};

// Writes the report to stdout and, when path is nonempty, to the file too.
void emit_report(const JsonReport& report, const std::string& path);

// Named coefficient families for solve-nonlinear. Accepted specs:
//   linear          = linear(0.1,0.5)   b = bbar x, sigma = abar x
//   linear(b,a)
//   sine                                sigma = sin x, b = cos x
//   logistic        = logistic(0.1)     b = x(1-x), sigma = eps x
//   logistic(eps)
// The logistic drift is only locally Lipschitz; its constants are declared
// for |x| <= 1.5 (L = max(2, eps)), which covers the unit-interval dynamics
// the family is meant for. Runs that push the state past that ball are
// outside the declared coefficient bounds.
fracsde::CoefficientSet make_family(const std::string& spec);

// FRACSDE_THREADS when set (positive integer, else DomainError), otherwise
// the hardware concurrency. Mirrors the Monte Carlo harness.
unsigned worker_count();

} // namespace cli_tool
