#ifndef PULSEDOM_CONFIG_HPP
#define PULSEDOM_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pulsedom/metrology.hpp"

namespace pulsedom {

/// Resolved run configuration. Defaults follow the reference parameter set:
/// kappa = 1e11 1/s, tau_p = 1e-10 s, omega_m = 0.5e6 rad/s, gamma_m = 100,
/// n_th = 100, theta = 1.
struct RunConfig {
    double omega_m = 0.5e6;
    std::string omega_m_unit = "rad_s";  // "rad_s" or "hz"
    double gamma_m = 100.0;
    double n_th = 100.0;
    std::optional<double> temperature_k;  // alternative way to set n_th
    double theta = 1.0;
    double k = 1.0;  // pulses per mechanical period, T0/tau
    std::uint64_t n_max = 1000;
    std::optional<double> kappa = 1e11;
    std::optional<double> tau_p = 1e-10;
    std::optional<double> cavity_length;
    std::uint64_t seed = 12345;
    double h_rel = 1e-5;
    std::string fit_window = "auto";  // "auto" or "n_lo:n_hi"
    std::string out_dir = ".";

    /// omega_m in rad/s after applying the unit mode.
    double omega_rad() const;
    /// n_th after resolving temperature_k if given.
    double occupation() const;
    SystemParams params() const;
    FitWindow fit_window_policy() const;

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
};

/// Parses a flat key=value file (UTF-8, '#' comments) and applies flag
/// overrides on top. Unknown keys are hard errors. An empty path yields the
/// default configuration.
RunConfig parse_config(const std::optional<std::string>& path,
                       const std::vector<std::pair<std::string, std::string>>& overrides = {});

}  // namespace pulsedom

#endif
