#include "pulsedom/dynamics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace pulsedom {

namespace {

// splitmix64; decorrelates per-trajectory seeds derived from (seed, index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Eigen::Matrix3d matrix_power(Eigen::Matrix3d base, std::uint64_t n) {
    Eigen::Matrix3d out = Eigen::Matrix3d::Identity();
    while (n > 0) {
        if (n & 1) out = out * base;
        base = base * base;
        n >>= 1;
    }
    return out;
}

struct CycleMap {
    Eigen::Matrix3d G;       // M0(tau) K(theta)
    Eigen::Vector3d v_inh;
};

CycleMap cycle_map(const SystemParams& params) {
    const PropagatorPair fp = free_propagator(params, params.tau);
    return {fp.M * kick_matrix(params.theta), fp.v_inh};
}

MomentVector iterate_cycles(const CycleMap& map, MomentVector v, std::uint64_t n) {
    Eigen::Vector3d x = v.vec();
    for (std::uint64_t i = 0; i < n; ++i) x = map.G * x + map.v_inh;
    return MomentVector::from(x);
}

MomentVector closed_form(const CycleMap& map, const MomentVector& v0, std::uint64_t n) {
    const Eigen::Matrix3d gn = matrix_power(map.G, n);
    if (map.v_inh.isZero(0.0)) return MomentVector::from(gn * v0.vec());
    const Eigen::Matrix3d im_g = Eigen::Matrix3d::Identity() - map.G;
    const Eigen::Vector3d w = im_g.fullPivLu().solve(map.v_inh);
    return MomentVector::from(gn * v0.vec() + w - gn * w);
}

bool closed_form_usable(const CycleMap& map) {
    if (map.v_inh.isZero(0.0)) return true;  // reduces to a plain power
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(Eigen::Matrix3d::Identity() - map.G);
    const double smin = svd.singularValues()(2);
    const double smax = svd.singularValues()(0);
    return smin > 0.0 && smax / smin < 1e10;
}

}  // namespace

std::vector<RegimeCheck> validate_regime(const SystemParams& params, double factor) {
    std::vector<RegimeCheck> checks;

    RegimeCheck i{"pulse period: 1/tau << kappa"};
    if (params.kappa && params.tau > 0.0) {
        i.evaluated = true;
        i.margin = 1.0 / (params.tau * *params.kappa);
        i.satisfied = i.margin < factor;
    }
    checks.push_back(i);

    RegimeCheck ii{"pulse bandwidth: 1/tau_p << kappa"};
    if (params.kappa && params.tau_p) {
        ii.evaluated = true;
        ii.margin = 1.0 / (*params.tau_p * *params.kappa);
        ii.satisfied = ii.margin < factor;
    }
    checks.push_back(ii);

    RegimeCheck iii{"frozen rotation: tau_p << 1/omega_m"};
    if (params.tau_p) {
        iii.evaluated = true;
        iii.margin = *params.tau_p * params.omega_m;
        iii.satisfied = iii.margin < factor;
    }
    checks.push_back(iii);

    RegimeCheck iv{"single cavity mode: 1/tau_p < c/(2L)"};
    if (params.tau_p && params.cavity_length) {
        iv.evaluated = true;
        iv.margin = 2.0 * *params.cavity_length /
                    (constants::speed_of_light * *params.tau_p);
        iv.satisfied = iv.margin < 1.0;  // strict inequality, not "much less"
    }
    checks.push_back(iv);

    return checks;
}

Eigen::Matrix3d drift_matrix(double omega_m, double gamma_m, double A) {
    const double omega_eff = omega_m + A;
    Eigen::Matrix3d u;
    u <<            0.0,  2.0 * omega_m,            0.0,
         -omega_eff,     -gamma_m,             omega_m,
                    0.0, -2.0 * omega_eff, -2.0 * gamma_m;
    return u;
}

Eigen::Vector3d noise_vector(double n_th, double gamma_m) {
    if (n_th < 0.0 || gamma_m < 0.0)
        throw std::domain_error("noise_vector: n_th and gamma_m must be >= 0");
    return {0.0, 0.0, (2.0 * n_th + 1.0) * gamma_m};
}

Eigen::Matrix3d expm3(const Eigen::Matrix3d& U, double t) {
    if (t < 0.0) throw std::domain_error("expm3: t must be >= 0");
    const Eigen::Matrix3d m = (U * t).exp();
    if (!m.allFinite()) throw NumericError("expm3: overflow in matrix exponential");
    return m;
}

PropagatorPair free_propagator(const SystemParams& params, double t) {
    const Eigen::Matrix3d u = drift_matrix(params.omega_m, params.gamma_m, 0.0);
    PropagatorPair out;
    out.M = expm3(u, t);
    if (params.gamma_m > 0.0) {
        const Eigen::Vector3d n = noise_vector(params.n_th, params.gamma_m);
        // integral of exp(U (t - t')) N dt' = U^-1 (M - I) N
        out.v_inh = u.fullPivLu().solve((out.M - Eigen::Matrix3d::Identity()) * n);
    }
    // gamma_m = 0: N vanishes, so v_inh is exactly zero.
    return out;
}

CycleDerivative cycle_with_frequency_derivative(const SystemParams& params) {
    const Eigen::Matrix3d u = drift_matrix(params.omega_m, params.gamma_m, 0.0);
    Eigen::Matrix3d du;  // d(drift)/d(omega_m) at A = 0
    du << 0.0, 2.0, 0.0,
         -1.0, 0.0, 1.0,
          0.0, -2.0, 0.0;

    // exp([[U, U'], [0, U]] t) = [[M, dM], [0, M]]: the upper-right block is
    // the Frechet derivative of the exponential along U'.
    Eigen::Matrix<double, 6, 6> block = Eigen::Matrix<double, 6, 6>::Zero();
    block.topLeftCorner<3, 3>() = u;
    block.topRightCorner<3, 3>() = du;
    block.bottomRightCorner<3, 3>() = u;
    const Eigen::Matrix<double, 6, 6> e = (block * params.tau).exp();
    if (!e.allFinite())
        throw NumericError("cycle_with_frequency_derivative: overflow in exponential");
    const Eigen::Matrix3d m = e.topLeftCorner<3, 3>();
    const Eigen::Matrix3d dm = e.topRightCorner<3, 3>();

    const Eigen::Matrix3d k = kick_matrix(params.theta);
    CycleDerivative out;
    out.G = m * k;
    out.dG = dm * k;
    if (params.gamma_m > 0.0) {
        const Eigen::Vector3d n = noise_vector(params.n_th, params.gamma_m);
        const auto lu = u.fullPivLu();
        out.b = lu.solve((m - Eigen::Matrix3d::Identity()) * n);
        // b = U^-1 (M - I) N, so db = U^-1 (dM N - dU b).
        out.db = lu.solve(dm * n - du * out.b);
    }
    return out;
}

Eigen::Matrix3d kick_matrix(double theta) {
    if (!std::isfinite(theta)) throw std::domain_error("kick_matrix: theta must be finite");
    Eigen::Matrix3d k;
    k <<               1.0,          0.0, 0.0,
            -2.0 * theta,            1.0, 0.0,
         4.0 * theta * theta, -4.0 * theta, 1.0;
    return k;
}

MomentVector step(const MomentVector& v, const SystemParams& params) {
    const CycleMap map = cycle_map(params);
    return MomentVector::from(map.G * v.vec() + map.v_inh);
}

MomentVector stroboscopic(const MomentVector& v0, const SystemParams& params,
                          std::uint64_t n) {
    if (n == 0) return v0;
    const CycleMap map = cycle_map(params);
    if (closed_form_usable(map)) return closed_form(map, v0, n);
    return iterate_cycles(map, v0, n);
}

MomentVector stroboscopic_checked(const MomentVector& v0, const SystemParams& params,
                                  std::uint64_t n, double rel_tol) {
    if (n == 0) return v0;
    const CycleMap map = cycle_map(params);
    if (!closed_form_usable(map)) return iterate_cycles(map, v0, n);
    const MomentVector closed = closed_form(map, v0, n);
    const MomentVector iterated = iterate_cycles(map, v0, n);
    const double scale = std::max(closed.vec().norm(), 1e-300);
    const double diff = (closed.vec() - iterated.vec()).norm() / scale;
    if (diff > rel_tol)
        throw ConsistencyError("stroboscopic: closed form and iteration disagree by " +
                               std::to_string(diff) + " relative at n = " +
                               std::to_string(n));
    return closed;
}

SteadyResult steady_moments(const SystemParams& params) {
    const CycleMap map = cycle_map(params);
    SteadyResult out;
    out.spectral_radius = spectral_radius(map.G);
    if (out.spectral_radius < 1.0) {
        const Eigen::Matrix3d im_g = Eigen::Matrix3d::Identity() - map.G;
        const auto lu = im_g.fullPivLu();
        Eigen::Vector3d s = lu.solve(map.v_inh);
        // Near resonance I - G is ill-conditioned and a single solve can lose
        // several digits; iterative refinement on the residual restores them.
        for (int pass = 0; pass < 3; ++pass) {
            const Eigen::Vector3d residual = map.v_inh - im_g * s;
            s += lu.solve(residual);
        }
        out.moments = MomentVector::from(s);
    }
    return out;
}

double spectral_radius(const Eigen::Matrix3d& map) {
    if (!map.allFinite()) throw std::domain_error("spectral_radius: non-finite matrix");
    const Eigen::EigenSolver<Eigen::Matrix3d> solver(map, /*computeEigenvectors=*/false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

McMoments monte_carlo_moments(const SystemParams& params, int n_pulses,
                              int trajectories, std::uint64_t seed,
                              NoiseModel model, int min_steps_per_period) {
    if (trajectories < 100)
        throw std::domain_error("monte_carlo_moments: need at least 100 trajectories");
    if (n_pulses < 0)
        throw std::domain_error("monte_carlo_moments: n_pulses must be >= 0");

    const double dt_max = params.period() / min_steps_per_period;
    const int steps = std::max(1, static_cast<int>(std::ceil(params.tau / dt_max)));
    const double dt = params.tau / steps;

    // Exact drift update over dt (rotation plus damping); the additive noise
    // increment rides on top. A naive explicit-Euler drift fails the
    // zero-noise energy-conservation check at this step size.
    Eigen::Matrix2d drift;
    drift << 0.0, params.omega_m, -params.omega_m, -params.gamma_m;
    const Eigen::Matrix2d r = (drift * dt).exp();

    const double diffusion = (model == NoiseModel::HighTemperature)
                                 ? 2.0 * params.n_th * params.gamma_m
                                 : (2.0 * params.n_th + 1.0) * params.gamma_m;
    const double noise_amp = std::sqrt(diffusion * dt);
    const double init_sigma = std::sqrt(params.n_th + 0.5);
    const double two_theta = 2.0 * params.theta;

    std::vector<std::array<double, 3>> samples(trajectories);
    std::atomic<bool> blew_up{false};

    const auto worker = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
            std::normal_distribution<double> normal;
            double q = init_sigma * normal(rng);
            double p = init_sigma * normal(rng);
            for (int pulse = 0; pulse < n_pulses; ++pulse) {
                p -= two_theta * q;
                for (int s = 0; s < steps; ++s) {
                    const double qn = r(0, 0) * q + r(0, 1) * p;
                    const double pn = r(1, 0) * q + r(1, 1) * p;
                    q = qn;
                    p = noise_amp > 0.0 ? pn + noise_amp * normal(rng) : pn;
                }
            }
            if (!std::isfinite(q) || !std::isfinite(p)) blew_up.store(true);
            samples[i] = {q * q, q * p, p * p};
        }
    };

    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    const int n_threads = std::clamp(hw, 1, 16);
    if (n_threads > 1 && trajectories >= 4 * n_threads) {
        std::vector<std::thread> pool;
        const int chunk = (trajectories + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            const int begin = t * chunk;
            const int end = std::min(trajectories, begin + chunk);
            if (begin < end) pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    } else {
        worker(0, trajectories);
    }
    if (blew_up.load())
        throw NumericError("monte_carlo_moments: trajectory integration blew up");

    // Compensated accumulation in index order: the reduction is independent
    // of how the trajectories were scheduled.
    std::array<double, 3> sum{}, comp{};
    for (const auto& s : samples) {
        for (int c = 0; c < 3; ++c) {
            const double y = s[c] - comp[c];
            const double t = sum[c] + y;
            comp[c] = (t - sum[c]) - y;
            sum[c] = t;
        }
    }
    const double inv_n = 1.0 / trajectories;
    const std::array<double, 3> mean{sum[0] * inv_n, sum[1] * inv_n, sum[2] * inv_n};

    // Jackknife standard error of the ensemble mean.
    std::array<double, 3> ss{};
    for (const auto& s : samples)
        for (int c = 0; c < 3; ++c) {
            const double d = s[c] - mean[c];
            ss[c] += d * d;
        }
    std::array<double, 3> se{};
    for (int c = 0; c < 3; ++c)
        se[c] = std::sqrt(ss[c] / (static_cast<double>(trajectories) * (trajectories - 1)));

    return {{mean[0], mean[1], mean[2]}, {se[0], se[1], se[2]}};
}

}  // namespace pulsedom
