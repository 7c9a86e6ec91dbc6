#include "pulsedom/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace pulsedom {

namespace {

const std::set<std::string> known_keys = {
    "omega_m",  "omega_m_unit", "gamma_m",       "n_th",      "temperature_k",
    "theta",    "k",            "n_max",         "kappa",     "tau_p",
    "cavity_length", "seed",    "h_rel",         "fit_window", "out_dir"};

double parse_double(const std::string& key, const std::string& value,
                    const std::string& where) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        if (!std::isfinite(d)) throw std::invalid_argument("non-finite");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("malformed numeric for key '" + key + "' (" + where +
                          "): '" + value + "'");
    }
}

std::uint64_t parse_uint(const std::string& key, const std::string& value,
                         const std::string& where) {
    const double d = parse_double(key, value, where);
    if (d < 0.0 || d != std::floor(d))
        throw ConfigError("key '" + key + "' (" + where +
                          ") must be a non-negative integer: '" + value + "'");
    return static_cast<std::uint64_t>(d);
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value,
               const std::string& where) {
    if (!known_keys.count(key))
        throw ConfigError("unknown configuration key '" + key + "' (" + where + ")");

    if (key == "omega_m") cfg.omega_m = parse_double(key, value, where);
    else if (key == "omega_m_unit") {
        if (value != "rad_s" && value != "hz")
            throw ConfigError("omega_m_unit (" + where + ") must be rad_s or hz, got '" +
                              value + "'");
        cfg.omega_m_unit = value;
    } else if (key == "gamma_m") cfg.gamma_m = parse_double(key, value, where);
    else if (key == "n_th") cfg.n_th = parse_double(key, value, where);
    else if (key == "temperature_k") cfg.temperature_k = parse_double(key, value, where);
    else if (key == "theta") cfg.theta = parse_double(key, value, where);
    else if (key == "k") cfg.k = parse_double(key, value, where);
    else if (key == "n_max") cfg.n_max = parse_uint(key, value, where);
    else if (key == "kappa") cfg.kappa = parse_double(key, value, where);
    else if (key == "tau_p") cfg.tau_p = parse_double(key, value, where);
    else if (key == "cavity_length") cfg.cavity_length = parse_double(key, value, where);
    else if (key == "seed") cfg.seed = parse_uint(key, value, where);
    else if (key == "h_rel") cfg.h_rel = parse_double(key, value, where);
    else if (key == "fit_window") cfg.fit_window = value;
    else if (key == "out_dir") cfg.out_dir = value;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

double RunConfig::omega_rad() const {
    return omega_m_unit == "hz" ? 2.0 * constants::pi * omega_m : omega_m;
}

double RunConfig::occupation() const {
    if (temperature_k) return occupation_from_temperature(*temperature_k, omega_rad());
    return n_th;
}

SystemParams RunConfig::params() const {
    if (!(k > 0.0)) throw ConfigError("k must be > 0");
    if (!(omega_rad() > 0.0)) throw ConfigError("omega_m must be > 0");
    SystemParams p = SystemParams::from_k(omega_rad(), gamma_m, occupation(), theta, k);
    p.kappa = kappa;
    p.tau_p = tau_p;
    p.cavity_length = cavity_length;
    return p;
}

FitWindow RunConfig::fit_window_policy() const {
    if (fit_window == "auto") return FitWindow{};
    const auto colon = fit_window.find(':');
    if (colon == std::string::npos)
        throw ConfigError("fit_window must be 'auto' or 'n_lo:n_hi', got '" +
                          fit_window + "'");
    FitWindow w;
    w.automatic = false;
    w.n_lo = parse_uint("fit_window", fit_window.substr(0, colon), "fit_window");
    w.n_hi = parse_uint("fit_window", fit_window.substr(colon + 1), "fit_window");
    if (w.n_lo == 0 || w.n_hi < w.n_lo)
        throw ConfigError("fit_window bounds must satisfy 1 <= n_lo <= n_hi");
    return w;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["artifact_version"] = "0.1.0";
    j["omega_m"] = omega_m;
    j["omega_m_unit"] = omega_m_unit;
    j["gamma_m"] = gamma_m;
    j["n_th"] = n_th;
    if (temperature_k) j["temperature_k"] = *temperature_k;
    j["theta"] = theta;
    j["k"] = k;
    j["n_max"] = n_max;
    if (kappa) j["kappa"] = *kappa;
    if (tau_p) j["tau_p"] = *tau_p;
    if (cavity_length) j["cavity_length"] = *cavity_length;
    j["seed"] = seed;
    j["h_rel"] = h_rel;
    j["fit_window"] = fit_window;
    j["out_dir"] = out_dir;
    j["resolved"] = {{"omega_m_rad_s", omega_rad()},
                     {"n_th", occupation()},
                     {"tau_s", params().tau}};
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig cfg;
    cfg.omega_m = j.at("omega_m").get<double>();
    cfg.omega_m_unit = j.at("omega_m_unit").get<std::string>();
    cfg.gamma_m = j.at("gamma_m").get<double>();
    cfg.n_th = j.at("n_th").get<double>();
    if (j.contains("temperature_k")) cfg.temperature_k = j["temperature_k"].get<double>();
    cfg.theta = j.at("theta").get<double>();
    cfg.k = j.at("k").get<double>();
    cfg.n_max = j.at("n_max").get<std::uint64_t>();
    cfg.kappa.reset();
    cfg.tau_p.reset();
    if (j.contains("kappa")) cfg.kappa = j["kappa"].get<double>();
    if (j.contains("tau_p")) cfg.tau_p = j["tau_p"].get<double>();
    if (j.contains("cavity_length")) cfg.cavity_length = j["cavity_length"].get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.h_rel = j.at("h_rel").get<double>();
    cfg.fit_window = j.at("fit_window").get<std::string>();
    cfg.out_dir = j.at("out_dir").get<std::string>();
    return cfg;
}

RunConfig parse_config(const std::optional<std::string>& path,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
    RunConfig cfg;
    bool file_set_nth = false, file_set_temp = false;

    if (path) {
        std::ifstream in(*path);
        if (!in) throw ConfigError("cannot open config file '" + *path + "'");
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            const std::string where = *path + ":" + std::to_string(line_no);
            if (eq == std::string::npos)
                throw ConfigError("expected key = value (" + where + "): '" + trimmed + "'");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            apply_key(cfg, key, value, where);
            if (key == "n_th") file_set_nth = true;
            if (key == "temperature_k") file_set_temp = true;
        }
        if (file_set_nth && file_set_temp)
            throw ConfigError("config file '" + *path +
                              "' sets both n_th and temperature_k; choose one");
    }

    for (const auto& [key, value] : overrides) {
        apply_key(cfg, key, value, "flag override");
        // A flag choosing one occupation source supersedes the other.
        if (key == "n_th") cfg.temperature_k.reset();
    }

    if (!(cfg.omega_m > 0.0)) throw ConfigError("omega_m must be > 0");
    if (!(cfg.k > 0.0)) throw ConfigError("k must be > 0");
    if (cfg.gamma_m < 0.0) throw ConfigError("gamma_m must be >= 0");
    if (cfg.n_th < 0.0) throw ConfigError("n_th must be >= 0");
    if (cfg.temperature_k && !(*cfg.temperature_k > 0.0))
        throw ConfigError("temperature_k must be > 0");
    if (!(cfg.h_rel > 1e-10 && cfg.h_rel < 1e-2))
        throw ConfigError("h_rel must lie in (1e-10, 1e-2)");
    if (cfg.n_max < 1) throw ConfigError("n_max must be >= 1");
    if (cfg.kappa && !(*cfg.kappa > 0.0)) throw ConfigError("kappa must be > 0");
    if (cfg.tau_p && !(*cfg.tau_p > 0.0)) throw ConfigError("tau_p must be > 0");
    if (cfg.cavity_length && !(*cfg.cavity_length > 0.0))
        throw ConfigError("cavity_length must be > 0");
    cfg.fit_window_policy();  // validates the window syntax eagerly
    return cfg;
}

}  // namespace pulsedom
