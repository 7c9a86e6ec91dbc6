#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pulsedom/metrology.hpp"

using namespace pulsedom;

namespace {

GaussianSnapshot thermal_snapshot(double n_th) {
    GaussianSnapshot s;
    s.cov = moments_to_covariance(thermal_moments(n_th), Convention::Qfi);
    return s;
}

}  // namespace

TEST_CASE("thermal_moments") {
    const MomentVector vac = thermal_moments(0.0);
    CHECK(vac.qq == 0.5);
    CHECK(vac.qp == 0.0);
    CHECK(vac.pp == 0.5);

    const MomentVector hot = thermal_moments(100.0);
    CHECK(hot.qq == 100.5);
    CHECK(hot.pp == 100.5);

    CHECK(thermal_moments(1.5).qq == 2.0);

    CHECK_THROWS_AS(thermal_moments(-0.1), std::domain_error);
    CHECK_THROWS_AS(thermal_moments(std::nan("")), std::domain_error);
}

TEST_CASE("occupation_from_temperature") {
    // Pick T so hbar*omega/(kB*T) = 1.
    const double omega = 0.5e6;
    const double t_unit = constants::hbar * omega / constants::k_boltzmann;
    CHECK(occupation_from_temperature(t_unit, omega) ==
          doctest::Approx(1.0 / (std::exp(1.0) - 1.0)).epsilon(1e-12));

    // T -> 0 limit.
    CHECK(occupation_from_temperature(t_unit / 60.0, omega) < 1e-24);

    // High-temperature expansion at 300 K.
    const double exact = occupation_from_temperature(300.0, omega);
    const double approx = occupation_high_temperature(300.0, omega);
    CHECK(std::abs(exact - approx) / exact < 1e-4);

    CHECK_THROWS_AS(occupation_from_temperature(0.0, omega), std::domain_error);
    CHECK_THROWS_AS(occupation_from_temperature(-1.0, omega), std::domain_error);
}

TEST_CASE("moments_to_covariance conventions") {
    const CovarianceMatrix vac = moments_to_covariance(thermal_moments(0.0), Convention::Qfi);
    CHECK(vac.s11 == 1.0);
    CHECK(vac.s12 == 0.0);
    CHECK(vac.s22 == 1.0);

    const CovarianceMatrix hot = moments_to_covariance(thermal_moments(100.0), Convention::Qfi);
    CHECK(hot.s11 == 201.0);
    CHECK(hot.s22 == 201.0);

    const CovarianceMatrix kicked =
        moments_to_covariance({100.5, -201.0, 502.5}, Convention::Moment);
    CHECK(kicked.s11 == 100.5);
    CHECK(kicked.s12 == -201.0);
    CHECK(kicked.s22 == 502.5);

    // Round trip is bit-exact (doubling then halving).
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        const CovarianceMatrix c = oracles::random_covariance(rng);
        const CovarianceMatrix back = c.to(Convention::Qfi).to(Convention::Moment);
        CHECK(back.s11 == c.s11);
        CHECK(back.s12 == c.s12);
        CHECK(back.s22 == c.s22);
    }
}

TEST_CASE("purity") {
    CHECK(purity(moments_to_covariance(thermal_moments(0.0), Convention::Qfi)) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(purity(moments_to_covariance(thermal_moments(100.0), Convention::Moment)) ==
          doctest::Approx(1.0 / 201.0).epsilon(1e-12));

    // The kick preserves the determinant, so purity is unchanged.
    const MomentVector kicked =
        MomentVector::from(kick_matrix(1.0) * thermal_moments(100.0).vec());
    CHECK(purity(moments_to_covariance(kicked, Convention::Moment)) ==
          doctest::Approx(1.0 / 201.0).epsilon(1e-12));

    // Conventions agree.
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        const CovarianceMatrix c = oracles::random_covariance(rng);
        const double p = purity(c);
        CHECK(p == doctest::Approx(purity(c.to(Convention::Qfi))).epsilon(1e-12));
        CHECK(p > 0.0);
        CHECK(p <= 1.0 + 1e-12);
    }

    CHECK_THROWS_AS(purity(CovarianceMatrix{1.0, 2.0, 1.0, Convention::Moment}),
                    std::domain_error);
}

TEST_CASE("fidelity") {
    const GaussianSnapshot hot = thermal_snapshot(100.0);
    CHECK(fidelity(hot, hot) == doctest::Approx(1.0).epsilon(1e-12));

    // Vacuum vs thermal against the Fock-expansion oracle.
    const GaussianSnapshot vac = thermal_snapshot(0.0);
    const GaussianSnapshot th1 = thermal_snapshot(1.0);
    const double expected = oracles::fock_fidelity_vacuum_thermal(1.0);
    CHECK(expected == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(fidelity(vac, th1) == doctest::Approx(expected).epsilon(1e-12));

    // Continuity.
    const double f_near = fidelity(thermal_snapshot(100.0), thermal_snapshot(100.001));
    CHECK(f_near > 1.0 - 1e-6);
    CHECK(f_near < 1.0);

    // Symmetry on random valid pairs.
    std::mt19937_64 rng(13);
    for (int i = 0; i < 1000; ++i) {
        GaussianSnapshot a, b;
        a.cov = oracles::random_covariance(rng);
        b.cov = oracles::random_covariance(rng);
        const double fab = fidelity(a, b);
        const double fba = fidelity(b, a);
        CHECK(fab == doctest::Approx(fba).epsilon(1e-12));
        CHECK(fab > 0.0);
        CHECK(fab <= 1.0);
        CHECK(fidelity(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    }

    // Displacement term: two displaced vacua overlap like coherent states.
    GaussianSnapshot da = thermal_snapshot(0.0), db = thermal_snapshot(0.0);
    db.mean << 2.0, 0.0;  // qfi-convention quadrature offset
    // |<alpha|beta>| = exp(-|delta_qfi|^2/8) in this scale.
    CHECK(fidelity(da, db) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("bures_distance") {
    const GaussianSnapshot hot = thermal_snapshot(100.0);
    CHECK(bures_distance(hot, hot) == doctest::Approx(0.0).epsilon(1e-7));

    const double d = bures_distance(thermal_snapshot(0.0), thermal_snapshot(1.0));
    CHECK(d == doctest::Approx(std::sqrt(2.0 * (1.0 - 1.0 / std::sqrt(2.0)))).epsilon(1e-12));
    CHECK(d == doctest::Approx(0.76537).epsilon(1e-4));
}

TEST_CASE("qfi_single_mode") {
    const CovarianceMatrix hot = moments_to_covariance(thermal_moments(100.0), Convention::Qfi);

    SUBCASE("parameter-independent state") {
        CHECK(qfi_single_mode(hot, Eigen::Matrix2d::Zero(), Eigen::Vector2d::Zero()) == 0.0);
    }

    SUBCASE("thermal family matches the closed form and the Bures oracle") {
        const double n_th = 100.0, dn = 1.0;
        const Eigen::Matrix2d dcov = 2.0 * dn * Eigen::Matrix2d::Identity();
        const double f = qfi_single_mode(hot, dcov, Eigen::Vector2d::Zero());
        CHECK(f == doctest::Approx(oracles::thermal_qfi(n_th, dn)).epsilon(1e-10));

        const auto family = [](double phi) {
            GaussianSnapshot s;
            s.cov = moments_to_covariance(thermal_moments(phi), Convention::Qfi);
            return s;
        };
        // Step chosen so the fidelity drop sits well above roundoff while
        // h/n_th stays small enough for the quadratic Bures expansion.
        const BuresQfi oracle = qfi_bures_fd(family, n_th, 1.0);
        CHECK(std::abs(f - oracle.value) / f < 1e-4);
    }

    SUBCASE("pure displacement term") {
        const CovarianceMatrix vac = moments_to_covariance(thermal_moments(0.0), Convention::Qfi);
        const double f = qfi_single_mode(vac, Eigen::Matrix2d::Zero(), {1.0, 0.0});
        CHECK(f == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("convention is enforced") {
        const CovarianceMatrix wrong = moments_to_covariance(thermal_moments(1.0), Convention::Moment);
        CHECK_THROWS_AS(qfi_single_mode(wrong, Eigen::Matrix2d::Zero(), Eigen::Vector2d::Zero()),
                        std::domain_error);
    }

    SUBCASE("nonnegative on random families, agrees with the Bures oracle") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(0.5, 3.0);
        for (int i = 0; i < 20; ++i) {
            // Smooth one-parameter family: thermal occupation with a random slope.
            const double n0 = 10.0 * u(rng);
            const double slope = u(rng);
            const auto family = [&](double phi) {
                GaussianSnapshot s;
                s.cov = moments_to_covariance(thermal_moments(n0 + slope * phi),
                                              Convention::Qfi);
                return s;
            };
            const Eigen::Matrix2d dcov = 2.0 * slope * Eigen::Matrix2d::Identity();
            const CovarianceMatrix cov =
                moments_to_covariance(thermal_moments(n0), Convention::Qfi);
            const double f = qfi_single_mode(cov, dcov, Eigen::Vector2d::Zero());
            CHECK(f >= 0.0);
            const BuresQfi oracle = qfi_bures_fd(family, 0.0, 0.05 * n0 / slope);
            CHECK(std::abs(f - oracle.value) / f < 1e-3);
        }
    }
}

TEST_CASE("qfi_bures_fd") {
    SUBCASE("parameter-independent family") {
        const auto constant = [](double) {
            GaussianSnapshot s;
            s.cov = moments_to_covariance(thermal_moments(2.0), Convention::Qfi);
            return s;
        };
        const BuresQfi out = qfi_bures_fd(constant, 0.0, 1e-3);
        CHECK(out.value == doctest::Approx(0.0).epsilon(1e-10));
    }

    SUBCASE("end-to-end kicked family") {
        const SystemParams params = SystemParams::from_k(0.5e6, 100.0, 100.0, 1.0, 1.0);
        const std::uint64_t n = 10;
        const MomentVector v0 = thermal_moments(params.n_th);
        const auto family = [&](double omega) {
            SystemParams p = params;
            p.omega_m = omega;
            GaussianSnapshot s;
            s.cov = moments_to_covariance(stroboscopic(v0, p, n), Convention::Qfi);
            return s;
        };

        // Closed-form path for the same family.
        const auto dv = [&](double h) -> Eigen::Matrix2d {
            return (family(params.omega_m + h).cov.mat() -
                    family(params.omega_m - h).cov.mat()) /
                   (2.0 * h);
        };
        const double h = 1e-5 * params.omega_m;
        const Eigen::Matrix2d dcov = (4.0 * dv(h / 2.0) - dv(h)) / 3.0;
        const double closed =
            qfi_single_mode(family(params.omega_m).cov, dcov, Eigen::Vector2d::Zero());

        const BuresQfi oracle = qfi_bures_for_frequency(params, n);
        CHECK(std::abs(closed - oracle.value) / closed < 1e-3);
    }

    SUBCASE("rejects non-positive step") {
        CHECK_THROWS_AS(qfi_bures_fd([](double) { return GaussianSnapshot{}; }, 0.0, 0.0),
                        std::domain_error);
    }
}

TEST_CASE("squeezing_decomposition") {
    SUBCASE("thermal state is isotropic") {
        const auto sq = squeezing_decomposition(
            moments_to_covariance(thermal_moments(100.0), Convention::Moment));
        CHECK(sq.r == 0.0);
        CHECK(!sq.phi.has_value());
    }

    SUBCASE("first kick from thermal") {
        const auto sq = squeezing_decomposition(
            moments_to_covariance({100.5, -201.0, 502.5}, Convention::Moment));
        CHECK(sq.phi.has_value());
        CHECK(*sq.phi == doctest::Approx(constants::pi / 8.0).epsilon(1e-12));
        CHECK(sq.r == doctest::Approx(0.5 * std::asinh(2.0 * std::sqrt(2.0))).epsilon(1e-12));
        CHECK(sq.r == doctest::Approx(0.88137).epsilon(1e-4));
    }

    SUBCASE("pure squeezed vacuum") {
        const double r0 = 0.3;
        const CovarianceMatrix cov{0.5 * std::exp(-2.0 * r0), 0.0,
                                   0.5 * std::exp(2.0 * r0), Convention::Moment};
        const auto sq = squeezing_decomposition(cov);
        CHECK(sq.r == doctest::Approx(r0).epsilon(1e-12));
        REQUIRE(sq.phi.has_value());
        CHECK(*sq.phi == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("recovers rotation angle and strength on a grid") {
        for (const double r0 : {0.05, 0.4, 1.1}) {
            for (const double m : {0.5, 1.0, 20.0}) {
                for (int ia = -5; ia <= 5; ++ia) {
                    const double alpha = ia * constants::pi / 12.0;
                    Eigen::Matrix2d rot;
                    rot << std::cos(alpha), -std::sin(alpha), std::sin(alpha),
                        std::cos(alpha);
                    Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
                    d(0, 0) = m * std::exp(-2.0 * r0);
                    d(1, 1) = m * std::exp(2.0 * r0);
                    const Eigen::Matrix2d sigma = rot * d * rot.transpose();
                    const auto sq = squeezing_decomposition(
                        {sigma(0, 0), sigma(0, 1), sigma(1, 1), Convention::Moment});
                    CHECK(sq.r == doctest::Approx(r0).epsilon(1e-10));
                    REQUIRE(sq.phi.has_value());
                    // Angle is defined modulo pi.
                    double expect = alpha;
                    while (expect > constants::pi / 2) expect -= constants::pi;
                    while (expect <= -constants::pi / 2) expect += constants::pi;
                    CHECK(*sq.phi == doctest::Approx(expect).epsilon(1e-9));
                }
            }
        }
    }

    SUBCASE("scale invariance between conventions") {
        std::mt19937_64 rng(23);
        for (int i = 0; i < 50; ++i) {
            const CovarianceMatrix c = oracles::random_covariance(rng);
            const auto a = squeezing_decomposition(c);
            const auto b = squeezing_decomposition(c.to(Convention::Qfi));
            CHECK(a.r == doctest::Approx(b.r).epsilon(1e-12));
            if (a.phi && b.phi) CHECK(*a.phi == doctest::Approx(*b.phi).epsilon(1e-12));
        }
    }
}

TEST_CASE("wigner") {
    const CovarianceMatrix vac = moments_to_covariance(thermal_moments(0.0), Convention::Moment);
    CHECK(wigner(vac, 0.0, 0.0) == doctest::Approx(1.0 / constants::pi).epsilon(1e-12));

    const CovarianceMatrix hot = moments_to_covariance(thermal_moments(100.0), Convention::Moment);
    CHECK(wigner(hot, 0.0, 0.0) ==
          doctest::Approx(1.0 / (2.0 * constants::pi * 100.5)).epsilon(1e-12));

    SUBCASE("normalizes to 1 over an 8-sigma window") {
        std::mt19937_64 rng(29);
        for (int i = 0; i < 5; ++i) {
            const CovarianceMatrix c = oracles::random_covariance(rng);
            const double sigma_max = std::sqrt(std::max(c.s11, c.s22));
            const double total = oracles::integrate_2d(
                [&](double q, double p) { return wigner(c, q, p); }, -8.0 * sigma_max,
                8.0 * sigma_max);
            CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}
