#ifndef PULSEDOM_METROLOGY_HPP
#define PULSEDOM_METROLOGY_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pulsedom/dynamics.hpp"

namespace pulsedom {

/// d v / d omega_m at pulse n, by Richardson-verified central differences on
/// the full pipeline. The pulse period tau stays fixed: it is set by the lab,
/// not by the unknown frequency.
struct SensitivityResult {
    Eigen::Vector3d value = Eigen::Vector3d::Zero();  // extrapolated
    Eigen::Vector3d coarse = Eigen::Vector3d::Zero(); // step h_rel
    Eigen::Vector3d fine = Eigen::Vector3d::Zero();   // step h_rel/2
    double discrepancy = 0.0;
};

SensitivityResult moment_sensitivity(const SystemParams& params, std::uint64_t n,
                                     double h_rel,
                                     double convergence_threshold = 0.5);

struct QfiRow {
    std::uint64_t n = 0;
    double F = 0.0;            // QFI for omega_m, (s/rad)^2
    double r = 0.0;            // squeezing strength
    std::optional<double> phi; // squeezing angle, radians
    double purity = 1.0;
};
using QfiTrajectory = std::vector<QfiRow>;

/// QFI, squeezing and purity for every n in 1..n_max, starting from the
/// thermal state. The mean derivative is zero: the model has no first moments.
QfiTrajectory qfi_vs_pulses(const SystemParams& params, std::uint64_t n_max,
                            double h_rel = 1e-5);

struct SqueezeRow {
    std::uint64_t n = 0;
    double r = 0.0;
    std::optional<double> phi;
};
std::vector<SqueezeRow> squeezing_trajectory(const SystemParams& params,
                                             std::uint64_t n_max);

/// Bures finite-difference QFI of the full kicked-dynamics family at pulse n,
/// with the frequency step chosen adaptively so the fidelity drop stays well
/// above roundoff. Independent of the closed-form QFI path.
BuresQfi qfi_bures_for_frequency(const SystemParams& params, std::uint64_t n,
                                 double h_rel_start = 1e-4);

/// QFI for the mass through omega = sqrt(k_m/M): F_M = k_m/(4 M^3) * F_omega.
double mass_qfi(double F_omega, double k_m, double mass);

struct FitWindow {
    bool automatic = true;  // n = 1 up to the first n with F >= 0.9 max(F)
    std::uint64_t n_lo = 0;
    std::uint64_t n_hi = 0;
};

struct FitResult {
    double alpha = 0.0;      // exponent of F ~ n^alpha
    double prefactor = 0.0;
    double r_squared = 0.0;
    std::uint64_t n_lo = 0;
    std::uint64_t n_hi = 0;
    bool low_confidence = false;  // r_squared < 0.9
};

/// Ordinary least squares of ln F against ln n over the rise window.
FitResult fit_scaling_exponent(const QfiTrajectory& traj,
                               FitWindow window = FitWindow{});

struct SweepAxis {
    std::string name;  // one of: k, theta, gamma_m, n_th, n_pulses
    std::vector<double> values;
};

struct SweepPoint {
    SystemParams params;
    std::uint64_t n_pulses = 0;
    std::map<std::string, double> axis_values;
    std::map<std::string, double> results;
    std::string error;  // empty on success
};

/// Cartesian sweep; per-point failures are recorded in-row and never abort.
/// quantities: subset of {"qfi", "squeezing", "alpha"}.
std::vector<SweepPoint> sweep(const SystemParams& base, std::uint64_t n_pulses,
                              const std::vector<SweepAxis>& axes,
                              const std::vector<std::string>& quantities,
                              double h_rel = 1e-5);

}  // namespace pulsedom

#endif
