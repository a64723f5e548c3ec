#ifndef PVRISK_IRRADIANCE_HPP
#define PVRISK_IRRADIANCE_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pvrisk/errors.hpp"

namespace pvrisk {

constexpr double kSolarConstant = 1367.0; // W/m^2
constexpr double kTransmittance = 0.75;   // fixed clear-sky bulk transmittance
constexpr double kPi = 3.14159265358979323846;

/// Clear-sky irradiance on a tilted panel. Time is measured in days since
/// January 1, 00:00 local solar time; no leap years, clock time == solar time.
struct IrradianceConfig {
    enum class Mode { builtin, external } mode = Mode::builtin;
    double latitude_deg = 36.59; ///< panel site latitude
    double tilt_deg = 45.0;      ///< panel tilt from horizontal
    double azimuth_deg = 0.0;    ///< panel azimuth, 0 = equator-facing south
    /// external mode: (t_days, irradiance) knots, strictly increasing in t
    std::vector<std::pair<double, double>> table;
};

inline void validate(const IrradianceConfig& cfg) {
    if (cfg.mode == IrradianceConfig::Mode::builtin) {
        if (!(cfg.latitude_deg >= -90.0 && cfg.latitude_deg <= 90.0))
            throw validation_error("irradiance: latitude out of [-90, 90]");
        if (!(cfg.tilt_deg >= 0.0 && cfg.tilt_deg <= 90.0))
            throw validation_error("irradiance: tilt out of [0, 90]");
        return;
    }
    if (cfg.table.size() < 2)
        throw validation_error("irradiance: external table needs at least two knots");
    for (std::size_t i = 0; i < cfg.table.size(); ++i) {
        if (i > 0 && !(cfg.table[i].first > cfg.table[i - 1].first))
            throw validation_error("irradiance: external table times must be strictly increasing");
        if (!(cfg.table[i].second >= 0.0))
            throw validation_error("irradiance: external table values must be nonnegative");
    }
}

/// Panel-plane clear-sky irradiance [W/m^2] at time t [days]. Zero at night
/// and whenever the sun is behind the panel.
inline double irradiance(const IrradianceConfig& cfg, double t) {
    if (cfg.mode == IrradianceConfig::Mode::external) {
        if (cfg.table.empty() || t < cfg.table.front().first || t > cfg.table.back().first)
            throw validation_error("irradiance: external table does not cover t = " + std::to_string(t));
        auto it = std::lower_bound(cfg.table.begin(), cfg.table.end(), t,
                                   [](const std::pair<double, double>& kv, double v) { return kv.first < v; });
        if (it->first == t) return it->second;
        const auto hi = it;
        const auto lo = it - 1;
        const double w = (t - lo->first) / (hi->first - lo->first);
        return (1.0 - w) * lo->second + w * hi->second;
    }

    if (!(t >= 0.0))
        throw validation_error("irradiance: builtin model requires t >= 0");
    const double deg = kPi / 180.0;
    const int day_of_year = static_cast<int>(std::fmod(std::floor(t), 365.0)) + 1; // 1..365
    const double decl = 23.45 * deg * std::sin(2.0 * kPi * (284.0 + day_of_year) / 365.0);
    const double ecc = 1.0 + 0.033 * std::cos(2.0 * kPi * day_of_year / 365.0);
    const double hour = (t - std::floor(t)) * 24.0;
    const double omega = (hour - 12.0) * 15.0 * deg;

    const double lat = cfg.latitude_deg * deg;
    const double beta = cfg.tilt_deg * deg;
    const double gamma = cfg.azimuth_deg * deg;

    const double cos_zenith = std::sin(decl) * std::sin(lat) +
                              std::cos(decl) * std::cos(lat) * std::cos(omega);
    if (cos_zenith <= 0.0) return 0.0;

    const double cos_inc =
        std::sin(decl) * std::sin(lat) * std::cos(beta) -
        std::sin(decl) * std::cos(lat) * std::sin(beta) * std::cos(gamma) +
        std::cos(decl) * std::cos(lat) * std::cos(beta) * std::cos(omega) +
        std::cos(decl) * std::sin(lat) * std::sin(beta) * std::cos(gamma) * std::cos(omega) +
        std::cos(decl) * std::sin(beta) * std::sin(gamma) * std::sin(omega);
    if (cos_inc <= 0.0) return 0.0;

    return kSolarConstant * ecc * kTransmittance * cos_inc;
}

/// Conversion from panel irradiance and cloud-cover fraction to battery
/// charging rate: eps_area * I * (1 - f0 * x^f1).
struct InfluxParams {
    double eps_area = 0.001; ///< collection efficiency x area, energy per (W/m^2) per day
    double f0 = 0.81;
    double f1 = 1.9;
};

inline void validate(const InfluxParams& p) {
    if (!(p.eps_area > 0.0))
        throw validation_error("influx: eps_area must be positive");
    if (!(p.f0 >= 0.0 && p.f0 <= 1.0))
        throw validation_error("influx: f0 must lie in [0, 1]");
    if (!(p.f1 > 0.0))
        throw validation_error("influx: f1 must be positive");
}

inline double energy_influx(const InfluxParams& p, double irradiance_value, double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw validation_error("energy_influx: cloud cover x must lie in [0, 1]");
    if (!(irradiance_value >= 0.0))
        throw validation_error("energy_influx: irradiance must be nonnegative");
    return p.eps_area * irradiance_value * (1.0 - p.f0 * std::pow(x, p.f1));
}

} // namespace pvrisk

#endif
