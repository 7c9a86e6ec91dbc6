#ifndef PULSEDOM_DYNAMICS_HPP
#define PULSEDOM_DYNAMICS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pulsedom/gaussian.hpp"

namespace pulsedom {

/// Physical configuration of the kicked resonator.
/// omega_m is always stored in rad/s; tau is the pulse period in seconds.
struct SystemParams {
    double omega_m = 0.5e6;  // rad/s
    double gamma_m = 100.0;  // 1/s
    double n_th = 100.0;     // thermal occupation
    double theta = 1.0;      // kick strength, dimensionless
    double tau = 0.0;        // pulse period, s

    // Optional regime-check fields.
    std::optional<double> kappa;          // cavity decay, 1/s
    std::optional<double> tau_p;          // pulse duration, s
    std::optional<double> cavity_length;  // m

    double period() const { return 2.0 * constants::pi / omega_m; }
    /// k = T0/tau, pulses per mechanical period.
    double pulse_ratio() const { return period() / tau; }

    static SystemParams from_k(double omega_m, double gamma_m, double n_th,
                               double theta, double k) {
        SystemParams p;
        p.omega_m = omega_m;
        p.gamma_m = gamma_m;
        p.n_th = n_th;
        p.theta = theta;
        p.tau = 2.0 * constants::pi / (omega_m * k);
        return p;
    }
};

struct RegimeCheck {
    std::string condition;
    bool evaluated = false;
    bool satisfied = false;
    double margin = 0.0;  // ratio; smaller is safer, 1 is the boundary
};

/// Evaluates the delta-kick validity conditions. "much less" means the ratio
/// stays below `factor`; the default admits the reference parameter set,
/// whose widest ratio is 0.1. Never blocks simulation; missing fields are
/// reported as unevaluated.
std::vector<RegimeCheck> validate_regime(const SystemParams& params,
                                         double factor = 0.2);

/// Drift matrix of the moment ODE for effective frequency omega_m + A.
Eigen::Matrix3d drift_matrix(double omega_m, double gamma_m, double A);

/// (0, 0, (2 n_th + 1) gamma_m).
Eigen::Vector3d noise_vector(double n_th, double gamma_m);

/// exp(U t) for the 3x3 drift matrix (Pade scaling-and-squaring).
Eigen::Matrix3d expm3(const Eigen::Matrix3d& U, double t);

/// Affine map advancing a moment vector over one free-evolution interval:
/// v -> M v + v_inh.
struct PropagatorPair {
    Eigen::Matrix3d M = Eigen::Matrix3d::Identity();
    Eigen::Vector3d v_inh = Eigen::Vector3d::Zero();

    MomentVector apply(const MomentVector& v) const {
        return MomentVector::from(M * v.vec() + v_inh);
    }
};

/// Free evolution (A = 0) over time t. For gamma_m > 0 the inhomogeneous part
/// is U^-1 (M - I) N; for gamma_m = 0 the noise vector vanishes exactly.
PropagatorPair free_propagator(const SystemParams& params, double t);

/// Moment-space representation of the kick p -> p - 2 theta q. det = 1.
Eigen::Matrix3d kick_matrix(double theta);

/// One pulse cycle: kick at the start, then free flight tau.
MomentVector step(const MomentVector& v, const SystemParams& params);

/// State after n pulse cycles via the closed form
/// (M0 K)^n v0 + [I - (M0 K)^n](I - M0 K)^-1 v_inh, falling back to iterated
/// stepping when I - M0 K is ill-conditioned.
MomentVector stroboscopic(const MomentVector& v0, const SystemParams& params,
                          std::uint64_t n);

/// Runs both the closed form and the step iteration; throws ConsistencyError
/// if they disagree beyond rel_tol. Intended for tests and the oracle report.
MomentVector stroboscopic_checked(const MomentVector& v0, const SystemParams& params,
                                  std::uint64_t n, double rel_tol = 1e-6);

/// One pulse cycle together with its exact frequency derivative:
/// v -> G v + b and w -> G w + dG v + db for w = dv/domega_m, with tau held
/// fixed. dG comes from the Frechet derivative of the matrix exponential
/// (block-triangular trick), so the sensitivity recursion inherits the
/// stability of the base dynamics instead of the step-size pathologies of
/// finite differences near parabolic resonances.
struct CycleDerivative {
    Eigen::Matrix3d G = Eigen::Matrix3d::Identity();
    Eigen::Matrix3d dG = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    Eigen::Vector3d db = Eigen::Vector3d::Zero();
};
CycleDerivative cycle_with_frequency_derivative(const SystemParams& params);

/// Large-n limit of the pulse train. Divergence is a value, not an error.
struct SteadyResult {
    std::optional<MomentVector> moments;
    double spectral_radius = 0.0;
    bool diverges() const { return !moments.has_value(); }
};
SteadyResult steady_moments(const SystemParams& params);

double spectral_radius(const Eigen::Matrix3d& map);

/// Diffusion model of the Langevin oracle. HighTemperature uses 2 n_th gamma
/// (the paper's correlator); QuantumMatched uses (2 n_th + 1) gamma so the
/// ensemble moments satisfy the moment ODE exactly.
enum class NoiseModel { HighTemperature, QuantumMatched };

struct McMoments {
    MomentVector mean;
    MomentVector std_error;  // jackknife standard error per component
};

/// Stochastic-trajectory oracle for the moment dynamics. Per-trajectory
/// generators derive from (seed, index), so results are reproducible and
/// independent of thread scheduling.
McMoments monte_carlo_moments(const SystemParams& params, int n_pulses,
                              int trajectories, std::uint64_t seed,
                              NoiseModel model = NoiseModel::HighTemperature,
                              int min_steps_per_period = 10000);

}  // namespace pulsedom

#endif
