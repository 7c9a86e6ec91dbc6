#include "pulsedom/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace pulsedom::cli {

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    const auto path = std::filesystem::path(cfg.out_dir) / name;
    std::ofstream out(path, std::ios::binary);  // binary keeps output byte-stable
    if (!out) throw ConfigError("cannot write to '" + path.string() + "'");
    out << "# " << cfg.to_json().dump() << "\n";
    std::cout << path.string() << "\n";
    return out;
}

std::string phi_cell(const std::optional<double>& phi) {
    return phi ? num(*phi) : "nan";
}

std::string phi_over_pi_cell(const std::optional<double>& phi) {
    return phi ? num(*phi / constants::pi) : "nan";
}

}  // namespace

int run_validate(const RunConfig& cfg) {
    const auto checks = validate_regime(cfg.params());
    bool all_ok = true;
    for (const auto& c : checks) {
        if (!c.evaluated) {
            std::cout << "UNEVALUATED  " << c.condition << " (missing fields)\n";
            continue;
        }
        std::cout << (c.satisfied ? "OK           " : "VIOLATED     ") << c.condition
                  << "  margin=" << num(c.margin) << "\n";
        all_ok = all_ok && c.satisfied;
    }
    // Regime checks advise, they never block simulation.
    return exit_ok;
}

int run_evolve(const RunConfig& cfg) {
    const SystemParams params = cfg.params();
    const PropagatorPair fp = free_propagator(params, params.tau);
    const Eigen::Matrix3d g = fp.M * kick_matrix(params.theta);

    auto out = open_output(cfg, "evolve.csv");
    out << "n,qq,qp,pp\n";
    Eigen::Vector3d v = thermal_moments(params.n_th).vec();
    out << "0," << num(v[0]) << "," << num(v[1]) << "," << num(v[2]) << "\n";
    for (std::uint64_t n = 1; n <= cfg.n_max; ++n) {
        v = g * v + fp.v_inh;
        out << n << "," << num(v[0]) << "," << num(v[1]) << "," << num(v[2]) << "\n";
    }
    return exit_ok;
}

int run_qfi(const RunConfig& cfg) {
    const QfiTrajectory traj = qfi_vs_pulses(cfg.params(), cfg.n_max, cfg.h_rel);
    auto out = open_output(cfg, "qfi.csv");
    out << "n,F,r,phi_rad,phi_over_pi,purity\n";
    for (const auto& row : traj)
        out << row.n << "," << num(row.F) << "," << num(row.r) << ","
            << phi_cell(row.phi) << "," << phi_over_pi_cell(row.phi) << ","
            << num(row.purity) << "\n";
    return exit_ok;
}

int run_squeeze(const RunConfig& cfg) {
    const auto rows = squeezing_trajectory(cfg.params(), cfg.n_max);
    auto out = open_output(cfg, "squeeze.csv");
    out << "n,r,phi_rad,phi_over_pi\n";
    for (const auto& row : rows)
        out << row.n << "," << num(row.r) << "," << phi_cell(row.phi) << ","
            << phi_over_pi_cell(row.phi) << "\n";
    return exit_ok;
}

int run_wigner(const RunConfig& cfg, const CommandOptions& opts) {
    if (opts.wigner_pulse < 1) throw ConfigError("wigner: pulse index must be >= 1");
    const SystemParams params = cfg.params();
    const MomentVector before =
        stroboscopic(thermal_moments(params.n_th), params, opts.wigner_pulse - 1);
    const MomentVector after =
        MomentVector::from(kick_matrix(params.theta) * before.vec());

    const CovarianceMatrix cov_before = moments_to_covariance(before, Convention::Moment);
    const CovarianceMatrix cov_after = moments_to_covariance(after, Convention::Moment);

    double extent = opts.wigner_extent;
    if (extent <= 0.0)
        extent = 4.0 * std::sqrt(std::max({before.qq, before.pp, after.qq, after.pp}));
    const int pts = std::max(opts.wigner_points, 3);

    auto out = open_output(cfg, "wigner.csv");
    out << "q,p,W_before,W_after\n";
    for (int i = 0; i < pts; ++i) {
        const double q = -extent + 2.0 * extent * i / (pts - 1);
        for (int j = 0; j < pts; ++j) {
            const double p = -extent + 2.0 * extent * j / (pts - 1);
            out << num(q) << "," << num(p) << "," << num(wigner(cov_before, q, p))
                << "," << num(wigner(cov_after, q, p)) << "\n";
        }
    }
    return exit_ok;
}

int run_fit(const RunConfig& cfg, const CommandOptions& opts) {
    if (opts.fit_input.empty()) throw ConfigError("fit: --input CSV required");
    std::ifstream in(opts.fit_input);
    if (!in) throw ConfigError("fit: cannot open '" + opts.fit_input + "'");

    QfiTrajectory traj;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line.rfind("n,F", 0) != 0)
                throw ConfigError("fit: '" + opts.fit_input + "' is not a qfi CSV");
            header_seen = true;
            continue;
        }
        std::istringstream ss(line);
        std::string cell;
        QfiRow row;
        std::getline(ss, cell, ',');
        row.n = std::stoull(cell);
        std::getline(ss, cell, ',');
        row.F = std::stod(cell);
        traj.push_back(row);
    }

    const FitResult fit = fit_scaling_exponent(traj, cfg.fit_window_policy());
    nlohmann::json j;
    j["config"] = cfg.to_json();
    j["alpha"] = fit.alpha;
    j["prefactor"] = fit.prefactor;
    j["r_squared"] = fit.r_squared;
    j["window"] = {{"n_lo", fit.n_lo}, {"n_hi", fit.n_hi}};
    j["low_confidence"] = fit.low_confidence;

    std::filesystem::create_directories(cfg.out_dir);
    const auto path = std::filesystem::path(cfg.out_dir) / "fit.json";
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << "\n";
    std::cout << path.string() << "\n";
    return exit_ok;
}

int run_sweep(const RunConfig& cfg, const CommandOptions& opts) {
    if (opts.axes.empty()) throw ConfigError("sweep: at least one --axis required");
    const auto points =
        sweep(cfg.params(), cfg.n_max, opts.axes, opts.quantities, cfg.h_rel);

    auto out = open_output(cfg, "sweep.csv");
    out << "point";
    for (const auto& axis : opts.axes) out << "," << axis.name;
    out << ",quantity,value,error\n";
    std::size_t index = 0;
    for (const auto& point : points) {
        for (const auto& q : opts.quantities) {
            out << index;
            for (const auto& axis : opts.axes)
                out << "," << num(point.axis_values.at(axis.name));
            out << "," << q << ",";
            const auto it = point.results.find(q);
            out << (it != point.results.end() ? num(it->second) : "nan");
            out << ",\"" << point.error << "\"\n";
        }
        ++index;
    }
    return exit_ok;
}

int run_oracle(const RunConfig& cfg, const CommandOptions& opts) {
    const SystemParams base = cfg.params();
    nlohmann::json report;
    report["config"] = cfg.to_json();
    bool ok = true;

    {
        // Langevin trajectories against the stroboscopic moment map.
        const int n_pulses = 10;
        const McMoments mc =
            monte_carlo_moments(base, n_pulses, opts.trajectories, cfg.seed);
        const MomentVector strobe =
            stroboscopic(thermal_moments(base.n_th), base, n_pulses);
        nlohmann::json rows = nlohmann::json::array();
        const double mc_vals[3] = {mc.mean.qq, mc.mean.qp, mc.mean.pp};
        const double se_vals[3] = {mc.std_error.qq, mc.std_error.qp, mc.std_error.pp};
        const double ref_vals[3] = {strobe.qq, strobe.qp, strobe.pp};
        const char* names[3] = {"qq", "qp", "pp"};
        for (int c = 0; c < 3; ++c) {
            const double z = std::abs(mc_vals[c] - ref_vals[c]) / se_vals[c];
            ok = ok && z <= 3.0;
            rows.push_back({{"component", names[c]},
                            {"monte_carlo", mc_vals[c]},
                            {"std_error", se_vals[c]},
                            {"stroboscopic", ref_vals[c]},
                            {"z", z},
                            {"pass", z <= 3.0}});
        }
        report["monte_carlo_vs_moments"] = rows;
    }

    {
        // Closed-form QFI against the Bures finite-difference route.
        nlohmann::json rows = nlohmann::json::array();
        for (const std::uint64_t n : {5ULL, 20ULL, 60ULL}) {
            // Exact forward sensitivity; the finite-difference route diverges
            // at resonant pulse ratios, which is what this check would flag.
            const double closed = qfi_vs_pulses(base, n, cfg.h_rel).back().F;
            const double bures = qfi_bures_for_frequency(base, n).value;
            const double rel =
                std::abs(closed - bures) / std::max(std::abs(closed), 1e-300);
            ok = ok && rel <= 1e-3;
            rows.push_back({{"n", n},
                            {"closed_form", closed},
                            {"bures_fd", bures},
                            {"relative_difference", rel},
                            {"pass", rel <= 1e-3}});
        }
        report["qfi_closed_form_vs_bures"] = rows;
    }

    report["all_pass"] = ok;
    std::filesystem::create_directories(cfg.out_dir);
    const auto path = std::filesystem::path(cfg.out_dir) / "oracle.json";
    std::ofstream out(path, std::ios::binary);
    out << report.dump(2) << "\n";
    std::cout << path.string() << "\n";
    return ok ? exit_ok : exit_oracle;
}

int run(const std::string& subcommand, const RunConfig& cfg, const CommandOptions& opts) {
    if (subcommand == "validate") return run_validate(cfg);
    if (subcommand == "evolve") return run_evolve(cfg);
    if (subcommand == "qfi") return run_qfi(cfg);
    if (subcommand == "squeeze") return run_squeeze(cfg);
    if (subcommand == "wigner") return run_wigner(cfg, opts);
    if (subcommand == "fit") return run_fit(cfg, opts);
    if (subcommand == "sweep") return run_sweep(cfg, opts);
    if (subcommand == "oracle") return run_oracle(cfg, opts);
    throw ConfigError("unknown subcommand '" + subcommand + "'");
}

int exit_code_for_current_exception() {
    try {
        throw;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const OracleError& e) {
        std::cerr << "oracle error: " << e.what() << "\n";
        return exit_oracle;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const FitError& e) {
        std::cerr << "fit error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    }
}

}  // namespace pulsedom::cli
