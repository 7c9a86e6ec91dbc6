#include "pulsedom/gaussian.hpp"

#include <cmath>
#include <limits>

namespace pulsedom {

namespace {

double wrap_half_pi(double angle) {
    // Squeezing direction is defined modulo pi; report in (-pi/2, pi/2].
    while (angle > constants::pi / 2) angle -= constants::pi;
    while (angle <= -constants::pi / 2) angle += constants::pi;
    return angle;
}

void require_positive_definite(const CovarianceMatrix& cov, const char* who) {
    if (!cov.positive_definite())
        throw std::domain_error(std::string(who) + ": covariance is not positive-definite");
}

}  // namespace

MomentVector thermal_moments(double n_th) {
    if (!std::isfinite(n_th) || n_th < 0.0)
        throw std::domain_error("thermal_moments: n_th must be finite and >= 0");
    return {n_th + 0.5, 0.0, n_th + 0.5};
}

double occupation_from_temperature(double temperature_k, double omega_m) {
    if (!(temperature_k > 0.0) || !std::isfinite(temperature_k))
        throw std::domain_error("occupation_from_temperature: T must be > 0");
    if (!(omega_m > 0.0))
        throw std::domain_error("occupation_from_temperature: omega_m must be > 0");
    const double x = constants::hbar * omega_m / (constants::k_boltzmann * temperature_k);
    return 1.0 / std::expm1(x);
}

double occupation_high_temperature(double temperature_k, double omega_m) {
    if (!(temperature_k > 0.0))
        throw std::domain_error("occupation_high_temperature: T must be > 0");
    if (!(omega_m > 0.0))
        throw std::domain_error("occupation_high_temperature: omega_m must be > 0");
    return constants::k_boltzmann * temperature_k / (constants::hbar * omega_m);
}

CovarianceMatrix moments_to_covariance(const MomentVector& v, Convention convention) {
    CovarianceMatrix cov{v.qq, v.qp, v.pp, Convention::Moment};
    return cov.to(convention);
}

double purity(const CovarianceMatrix& cov) {
    require_positive_definite(cov, "purity");
    const double d = cov.det();
    const double p = (cov.convention == Convention::Qfi) ? 1.0 / std::sqrt(d)
                                                         : 0.5 / std::sqrt(d);
    return p;
}

double fidelity(const GaussianSnapshot& a, const GaussianSnapshot& b) {
    require_positive_definite(a.cov, "fidelity");
    require_positive_definite(b.cov, "fidelity");
    const CovarianceMatrix s1 = a.cov.to(Convention::Qfi);
    const CovarianceMatrix s2 = b.cov.to(Convention::Qfi);
    // Means scale like sqrt of the covariance between conventions.
    const double ma = (a.cov.convention == Convention::Qfi) ? 1.0 : std::sqrt(2.0);
    const double mb = (b.cov.convention == Convention::Qfi) ? 1.0 : std::sqrt(2.0);
    const Eigen::Vector2d dx = ma * a.mean - mb * b.mean;

    const Eigen::Matrix2d sum = s1.mat() + s2.mat();
    const double det_sum = sum.determinant();
    if (!(det_sum > std::numeric_limits<double>::min()))
        throw NumericError("fidelity: singular covariance sum, det = " + std::to_string(det_sum));

    double lambda = (s1.det() - 1.0) * (s2.det() - 1.0);
    if (lambda < 0.0) {
        if (lambda < -1e-9)
            throw std::domain_error("fidelity: covariance below the pure-state determinant");
        lambda = 0.0;  // pure states land here through rounding
    }
    const double denom = std::sqrt(det_sum + lambda) - std::sqrt(lambda);
    // Transition probability (fidelity squared) of the Gaussian overlap.
    const double f2 =
        2.0 * std::exp(-0.5 * dx.dot(sum.inverse() * dx)) / denom;
    double f = std::sqrt(f2);
    if (f > 1.0) {
        if (f > 1.0 + 1e-9)
            throw ConsistencyError("fidelity exceeded 1: " + std::to_string(f));
        f = 1.0;
    }
    return f;
}

double bures_distance(const GaussianSnapshot& a, const GaussianSnapshot& b) {
    return std::sqrt(2.0 * (1.0 - fidelity(a, b)));
}

double qfi_single_mode(const CovarianceMatrix& cov, const Eigen::Matrix2d& dcov,
                       const Eigen::Vector2d& mean_deriv) {
    if (cov.convention != Convention::Qfi)
        throw std::domain_error("qfi_single_mode: covariance must be in the Qfi convention");
    require_positive_definite(cov, "qfi_single_mode");

    const Eigen::Matrix2d sigma = cov.mat();
    const double det = cov.det();
    const double p = 1.0 / std::sqrt(det);
    const Eigen::Matrix2d sigma_inv = sigma.inverse();
    const Eigen::Matrix2d g = sigma_inv * dcov;

    const double term_cov = (g * g).trace() / (2.0 * (1.0 + p * p));
    const double dp = -0.5 * p * g.trace();

    double term_purity = 0.0;
    if (std::abs(det - 1.0) < 1e-9) {
        // Pure-state limit: 2 P'^2 / (1 - P^4) is 0/0 along a pure family.
        if (std::abs(dp) > 1e-9)
            throw NumericError(
                "qfi_single_mode: purity derivative is not resolvable at the pure-state limit");
    } else {
        term_purity = 2.0 * dp * dp / (1.0 - p * p * p * p);
    }

    const double term_mean = mean_deriv.dot(sigma_inv * mean_deriv);
    double f = term_cov + term_purity + term_mean;
    const double scale =
        std::abs(term_cov) + std::abs(term_purity) + std::abs(term_mean);
    if (f < -1e-9 * (scale + 1.0))
        throw ConsistencyError("qfi_single_mode: negative QFI " + std::to_string(f));
    return std::max(f, 0.0);
}

BuresQfi qfi_bures_fd(const std::function<GaussianSnapshot(double)>& state_at,
                      double phi0, double h, double convergence_threshold) {
    if (!(h > 0.0)) throw std::domain_error("qfi_bures_fd: h must be > 0");

    const GaussianSnapshot base = state_at(phi0);
    const auto estimate = [&](double hh) {
        const double f = fidelity(base, state_at(phi0 + hh));
        return 8.0 * (1.0 - f) / (hh * hh);
    };

    BuresQfi out;
    out.coarse = estimate(h);
    out.fine = estimate(h / 2.0);
    out.value = 2.0 * out.fine - out.coarse;  // leading error in h is linear
    const double scale = std::max(std::abs(out.value), 1e-300);
    out.discrepancy = std::abs(out.fine - out.coarse) / scale;
    if (std::abs(out.fine - out.coarse) > convergence_threshold * scale &&
        std::abs(out.fine - out.coarse) > 1e-14)
        throw OracleError("qfi_bures_fd: Richardson pair did not converge (F(h) = " +
                          std::to_string(out.coarse) + ", F(h/2) = " +
                          std::to_string(out.fine) + ")");
    return out;
}

SqueezingDecomposition squeezing_decomposition(const CovarianceMatrix& cov) {
    require_positive_definite(cov, "squeezing_decomposition");
    const double s11 = cov.s11, s12 = cov.s12, s22 = cov.s22;
    const double gamma = (s22 - s11) * (s22 - s11) + 4.0 * s12 * s12;
    const double det = cov.det();

    SqueezingDecomposition out;
    out.r = 0.5 * std::asinh(0.5 * std::sqrt(gamma / det));
    out.purity = purity(cov);
    if (out.r <= 1e-12) {
        out.r = 0.0;
        return out;  // isotropic: angle undefined
    }

    double arg = 2.0 * s12 / std::sqrt(gamma);
    if (std::abs(arg) > 1.0) {
        if (std::abs(arg) - 1.0 > 1e-10)
            throw NumericError("squeezing_decomposition: arcsin argument " +
                               std::to_string(arg));
        arg = (arg > 0.0) ? 1.0 : -1.0;
    }

    double two_phi;
    if (std::abs(s11 - s22) < 1e-12 * std::max(s11, s22)) {
        // Tie: both strict branches degenerate; continuity fixes the angle.
        two_phi = (s12 > 0.0) ? -constants::pi / 2
                              : constants::pi / 2;
    } else if (s11 < s22) {
        two_phi = -std::asin(arg);
    } else {
        two_phi = constants::pi + std::asin(arg);
    }
    out.phi = wrap_half_pi(two_phi / 2.0);
    return out;
}

double wigner(const CovarianceMatrix& cov, double q, double p) {
    require_positive_definite(cov, "wigner");
    const CovarianceMatrix m = cov.to(Convention::Moment);
    const Eigen::Vector2d x{q, p};
    const double det = m.det();
    return std::exp(-0.5 * x.dot(m.mat().inverse() * x)) /
           (2.0 * constants::pi * std::sqrt(det));
}

}  // namespace pulsedom
