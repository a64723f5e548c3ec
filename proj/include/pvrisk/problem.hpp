#ifndef PVRISK_PROBLEM_HPP
#define PVRISK_PROBLEM_HPP

#include "pvrisk/battery.hpp"
#include "pvrisk/cloud.hpp"
#include "pvrisk/errors.hpp"
#include "pvrisk/irradiance.hpp"
#include "pvrisk/orlicz.hpp"

namespace pvrisk {

/// Complete physical description of one control problem: weather model,
/// storage system, penalties, risk attitude and the seasonal anchor of the
/// optimization window.
struct ProblemSpec {
    CloudParams cloud;
    BatteryConfig battery;
    PenaltyWeights weights;
    TargetSchedule target;
    IrradianceConfig irr;
    InfluxParams influx;
    OrliczSpec orlicz;
    double eta = 0.1;     ///< raw uncertainty-aversion level
    double t_start = 0.0; ///< window start, days since January 1, 00:00

    /// The scheme sees (orlicz, eta) only through this combination.
    double eta_prime() const { return net_uncertainty_aversion(orlicz, eta); }
};

inline void validate(const ProblemSpec& s) {
    validate(s.cloud);
    validate(s.battery);
    validate(s.weights);
    validate(s.target, s.battery.discharge_cap);
    validate(s.irr);
    validate(s.influx);
    validate(s.orlicz);
    if (!(s.eta > 0.0)) throw validation_error("problem: eta must be positive");
    if (!(s.t_start >= 0.0)) throw validation_error("problem: t_start must be nonnegative");
}

} // namespace pvrisk

#endif
