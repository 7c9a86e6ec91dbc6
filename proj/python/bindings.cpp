#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pulsedom/metrology.hpp"

namespace py = pybind11;
using namespace pulsedom;

namespace {

std::array<double, 3> as_array(const MomentVector& v) { return {v.qq, v.qp, v.pp}; }

MomentVector as_moments(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

CovarianceMatrix cov_from_moments(const std::array<double, 3>& v, const std::string& convention) {
    const Convention c = convention == "qfi" ? Convention::Qfi : Convention::Moment;
    return moments_to_covariance(as_moments(v), c);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Pulse-kicked optomechanical resonator: Gaussian moment dynamics, "
              "QFI and squeezing diagnostics";

    py::class_<SystemParams>(m, "SystemParams")
        .def(py::init([](double omega_m, double gamma_m, double n_th, double theta,
                         double k) {
                 return SystemParams::from_k(omega_m, gamma_m, n_th, theta, k);
             }),
             py::arg("omega_m") = 0.5e6, py::arg("gamma_m") = 100.0,
             py::arg("n_th") = 100.0, py::arg("theta") = 1.0, py::arg("k") = 1.0)
        .def_readwrite("omega_m", &SystemParams::omega_m)
        .def_readwrite("gamma_m", &SystemParams::gamma_m)
        .def_readwrite("n_th", &SystemParams::n_th)
        .def_readwrite("theta", &SystemParams::theta)
        .def_readwrite("tau", &SystemParams::tau)
        .def_property_readonly("k", &SystemParams::pulse_ratio);

    m.def("thermal_moments",
          [](double n_th) { return as_array(thermal_moments(n_th)); },
          py::arg("n_th"));

    m.def("occupation_from_temperature", &occupation_from_temperature,
          py::arg("temperature_k"), py::arg("omega_m"));

    m.def("stroboscopic",
          [](const std::array<double, 3>& v0, const SystemParams& p, std::uint64_t n) {
              return as_array(stroboscopic(as_moments(v0), p, n));
          },
          py::arg("v0"), py::arg("params"), py::arg("n"),
          "Moments after n kick-plus-free-flight cycles");

    m.def("step",
          [](const std::array<double, 3>& v, const SystemParams& p) {
              return as_array(step(as_moments(v), p));
          },
          py::arg("v"), py::arg("params"));

    m.def("purity",
          [](const std::array<double, 3>& v) {
              return purity(cov_from_moments(v, "moment"));
          },
          py::arg("moments"));

    m.def("squeezing",
          [](const std::array<double, 3>& v) {
              const auto sq = squeezing_decomposition(cov_from_moments(v, "moment"));
              return py::make_tuple(sq.r, sq.phi ? py::cast(*sq.phi) : py::none(),
                                    sq.purity);
          },
          py::arg("moments"), "Returns (r, phi_or_None, purity)");

    m.def("wigner",
          [](const std::array<double, 3>& v, double q, double p) {
              return wigner(cov_from_moments(v, "moment"), q, p);
          },
          py::arg("moments"), py::arg("q"), py::arg("p"));

    m.def("qfi_vs_pulses",
          [](const SystemParams& p, std::uint64_t n_max, double h_rel) {
              const auto traj = qfi_vs_pulses(p, n_max, h_rel);
              py::list rows;
              for (const auto& row : traj)
                  rows.append(py::dict(
                      py::arg("n") = row.n, py::arg("F") = row.F, py::arg("r") = row.r,
                      py::arg("phi") = row.phi ? py::cast(*row.phi) : py::none(),
                      py::arg("purity") = row.purity));
              return rows;
          },
          py::arg("params"), py::arg("n_max"), py::arg("h_rel") = 1e-5);

    m.def("fit_scaling_exponent",
          [](const std::vector<std::pair<std::uint64_t, double>>& rows) {
              QfiTrajectory traj;
              for (const auto& [n, f] : rows) traj.push_back({n, f, 0.0, std::nullopt, 1.0});
              const FitResult fit = fit_scaling_exponent(traj);
              return py::dict(py::arg("alpha") = fit.alpha,
                              py::arg("prefactor") = fit.prefactor,
                              py::arg("r_squared") = fit.r_squared,
                              py::arg("n_lo") = fit.n_lo, py::arg("n_hi") = fit.n_hi);
          },
          py::arg("rows"), "rows: list of (n, F) pairs");

    m.def("mass_qfi", &mass_qfi, py::arg("F_omega"), py::arg("k_m"), py::arg("mass"));

    m.def("monte_carlo_moments",
          [](const SystemParams& p, int n_pulses, int trajectories, std::uint64_t seed) {
              const McMoments mc = monte_carlo_moments(p, n_pulses, trajectories, seed);
              return py::make_tuple(as_array(mc.mean), as_array(mc.std_error));
          },
          py::arg("params"), py::arg("n_pulses"), py::arg("trajectories"),
          py::arg("seed"), "Returns (mean_moments, standard_errors)");
}
