#ifndef PULSEDOM_GAUSSIAN_HPP
#define PULSEDOM_GAUSSIAN_HPP

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "pulsedom/errors.hpp"

namespace pulsedom {

namespace constants {
// CODATA / exact SI values.
inline constexpr double hbar = 1.054571817e-34;         // J s
inline constexpr double k_boltzmann = 1.380649e-23;     // J/K
inline constexpr double speed_of_light = 299792458.0;   // m/s
inline constexpr double pi = 3.14159265358979323846;
}  // namespace constants

/// Normalization of the 2x2 quadrature covariance matrix.
/// Moment: vacuum = diag(1/2, 1/2), the scale the moment ODE evolves in.
/// Qfi: vacuum = identity, required by the fidelity/QFI closed forms.
enum class Convention { Moment, Qfi };

/// Second moments (<q^2>, <(qp+pq)/2>, <p^2>) of the mechanical mode,
/// dimensionless, Moment convention.
struct MomentVector {
    double qq = 0.0;
    double qp = 0.0;
    double pp = 0.0;

    Eigen::Vector3d vec() const { return {qq, qp, pp}; }
    static MomentVector from(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }

    /// qq*pp - qp^2; must stay >= 1/4 for a physical state.
    double uncertainty_product() const { return qq * pp - qp * qp; }
    bool physical(double tol = 1e-10) const {
        return qq > 0.0 && pp > 0.0 && uncertainty_product() >= 0.25 - tol;
    }
};

struct CovarianceMatrix {
    double s11 = 0.5;
    double s12 = 0.0;
    double s22 = 0.5;
    Convention convention = Convention::Moment;

    double det() const { return s11 * s22 - s12 * s12; }
    bool positive_definite() const { return s11 > 0.0 && s22 > 0.0 && det() > 0.0; }
    Eigen::Matrix2d mat() const {
        Eigen::Matrix2d m;
        m << s11, s12, s12, s22;
        return m;
    }

    /// Conversion between conventions is an exact doubling/halving.
    CovarianceMatrix to(Convention target) const {
        if (target == convention) return *this;
        const double f = (target == Convention::Qfi) ? 2.0 : 0.5;
        return {s11 * f, s12 * f, s22 * f, target};
    }
};

/// Gaussian state: mean is identically (0,0) in this model; the field exists
/// so the displacement terms of the fidelity/QFI formulas stay testable.
/// The mean is expressed in the same scale as cov's convention.
struct GaussianSnapshot {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    CovarianceMatrix cov;
};

/// Squeezed-thermal decomposition of a single-mode Gaussian state.
/// phi is undefined (nullopt) for isotropic states (r = 0).
struct SqueezingDecomposition {
    double r = 0.0;
    std::optional<double> phi;  // radians, in (-pi/2, pi/2]
    double purity = 1.0;
};

/// Result of the Bures finite-difference QFI oracle.
struct BuresQfi {
    double value = 0.0;        // Richardson-extrapolated estimate
    double coarse = 0.0;       // estimate at step h
    double fine = 0.0;         // estimate at step h/2
    double discrepancy = 0.0;  // |fine - coarse| relative to |value|
};

MomentVector thermal_moments(double n_th);

/// Bose occupation 1/(exp(hbar*omega/(kB*T)) - 1).
double occupation_from_temperature(double temperature_k, double omega_m);
/// High-temperature expansion kB*T/(hbar*omega), for comparison.
double occupation_high_temperature(double temperature_k, double omega_m);

CovarianceMatrix moments_to_covariance(const MomentVector& v, Convention convention);

/// Tr(rho^2); convention-independent after normalization.
double purity(const CovarianceMatrix& cov);

/// Uhlmann fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)), in (0, 1].
double fidelity(const GaussianSnapshot& a, const GaussianSnapshot& b);

/// sqrt(2 (1 - fidelity)).
double bures_distance(const GaussianSnapshot& a, const GaussianSnapshot& b);

/// Single-mode Gaussian QFI closed form. cov and dcov must be in the Qfi
/// convention (vacuum = identity); mean_deriv is d<X>/dphi in the same scale.
double qfi_single_mode(const CovarianceMatrix& cov, const Eigen::Matrix2d& dcov,
                       const Eigen::Vector2d& mean_deriv);

/// Finite-difference QFI through the Bures distance, 8(1 - f)/h^2, with a
/// two-step Richardson check at h and h/2. Throws OracleError when the pair
/// does not converge (relative discrepancy above threshold).
BuresQfi qfi_bures_fd(const std::function<GaussianSnapshot(double)>& state_at,
                      double phi0, double h, double convergence_threshold = 0.1);

SqueezingDecomposition squeezing_decomposition(const CovarianceMatrix& cov);

/// Wigner function value at (q, p); cov interpreted in the Moment convention
/// (physical normalization, integrates to 1 over the plane).
double wigner(const CovarianceMatrix& cov, double q, double p);

}  // namespace pulsedom

#endif
