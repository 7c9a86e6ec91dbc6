#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "pulsedom/cli.hpp"

namespace {

struct FlagValue {
    std::string value;
    bool set = false;
};

// One string-valued flag per config key; only flags the user actually passed
// become overrides, so file values survive unless explicitly overridden.
const std::vector<std::string> config_keys = {
    "omega_m",  "omega_m_unit", "gamma_m",       "n_th",      "temperature_k",
    "theta",    "k",            "n_max",         "kappa",     "tau_p",
    "cavity_length", "seed",    "h_rel",         "fit_window", "out_dir"};

std::vector<pulsedom::SweepAxis> parse_axes(const std::vector<std::string>& specs) {
    std::vector<pulsedom::SweepAxis> axes;
    for (const auto& spec : specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw pulsedom::ConfigError("--axis expects name=v1,v2,... got '" + spec + "'");
        pulsedom::SweepAxis axis;
        axis.name = spec.substr(0, eq);
        std::istringstream values(spec.substr(eq + 1));
        std::string cell;
        while (std::getline(values, cell, ',')) {
            try {
                axis.values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw pulsedom::ConfigError("--axis " + axis.name +
                                            ": malformed value '" + cell + "'");
            }
        }
        if (axis.values.empty())
            throw pulsedom::ConfigError("--axis " + axis.name + ": no values");
        axes.push_back(std::move(axis));
    }
    return axes;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pulse-kicked optomechanical resonator: moment dynamics, QFI and squeezing"};
    app.require_subcommand(1);

    std::string config_path;
    std::map<std::string, FlagValue> flags;

    std::vector<CLI::App*> subs;
    for (const char* name : {"validate", "evolve", "qfi", "squeeze", "wigner",
                             "fit", "sweep", "oracle"})
        subs.push_back(app.add_subcommand(name));

    std::uint64_t wigner_pulse = 1;
    double wigner_extent = 0.0;
    int wigner_points = 81;
    std::string fit_input;
    std::vector<std::string> axis_specs;
    std::vector<std::string> quantities = {"qfi"};
    int trajectories = 10000;

    for (auto* sub : subs) {
        sub->add_option("--config", config_path, "flat key=value config file");
        for (const auto& key : config_keys)
            sub->add_option("--" + key, flags[key].value);
        if (sub->get_name() == "wigner") {
            sub->add_option("--pulse", wigner_pulse, "kick index the panels bracket");
            sub->add_option("--window", wigner_extent, "half-width of the (q,p) grid");
            sub->add_option("--points", wigner_points, "grid points per axis");
        } else if (sub->get_name() == "fit") {
            sub->add_option("--input", fit_input, "qfi CSV to fit")->required();
        } else if (sub->get_name() == "sweep") {
            sub->add_option("--axis", axis_specs, "axis spec name=v1,v2,...");
            sub->add_option("--quantities", quantities, "qfi, squeezing, alpha");
        } else if (sub->get_name() == "oracle") {
            sub->add_option("--trajectories", trajectories, "Monte Carlo trajectories");
        }
    }

    CLI11_PARSE(app, argc, argv);
    CLI::App* sub = app.get_subcommands().front();

    try {
        std::vector<std::pair<std::string, std::string>> overrides;
        for (const auto& key : config_keys)
            if (sub->count("--" + key) > 0) overrides.emplace_back(key, flags[key].value);

        const auto path = config_path.empty() ? std::nullopt
                                              : std::optional<std::string>(config_path);
        const pulsedom::RunConfig cfg = pulsedom::parse_config(path, overrides);

        pulsedom::cli::CommandOptions opts;
        opts.wigner_pulse = wigner_pulse;
        opts.wigner_extent = wigner_extent;
        opts.wigner_points = wigner_points;
        opts.fit_input = fit_input;
        opts.axes = parse_axes(axis_specs);
        opts.quantities = quantities;
        opts.trajectories = trajectories;

        return pulsedom::cli::run(sub->get_name(), cfg, opts);
    } catch (...) {
        return pulsedom::cli::exit_code_for_current_exception();
    }
}
