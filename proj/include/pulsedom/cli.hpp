#ifndef PULSEDOM_CLI_HPP
#define PULSEDOM_CLI_HPP

#include <string>
#include <vector>

#include "pulsedom/config.hpp"
#include "pulsedom/metrology.hpp"

namespace pulsedom::cli {

// Exit codes: 0 success, 2 config error, 3 numeric/consistency error,
// 4 oracle disagreement.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_numeric = 3;
inline constexpr int exit_oracle = 4;

struct CommandOptions {
    // wigner
    std::uint64_t wigner_pulse = 1;   // which kick the panels bracket
    double wigner_extent = 0.0;      // half-width of the (q,p) window; 0 = auto
    int wigner_points = 81;          // grid points per axis
    // fit
    std::string fit_input;           // qfi CSV to fit
    // sweep
    std::vector<SweepAxis> axes;
    std::vector<std::string> quantities = {"qfi"};
    // oracle
    int trajectories = 10000;
};

int run_validate(const RunConfig& cfg);
int run_evolve(const RunConfig& cfg);
int run_qfi(const RunConfig& cfg);
int run_squeeze(const RunConfig& cfg);
int run_wigner(const RunConfig& cfg, const CommandOptions& opts);
int run_fit(const RunConfig& cfg, const CommandOptions& opts);
int run_sweep(const RunConfig& cfg, const CommandOptions& opts);
int run_oracle(const RunConfig& cfg, const CommandOptions& opts);

int run(const std::string& subcommand, const RunConfig& cfg,
        const CommandOptions& opts = CommandOptions{});

/// Maps an in-flight exception to the documented exit code and prints the
/// message to stderr.
int exit_code_for_current_exception();

}  // namespace pulsedom::cli

#endif
