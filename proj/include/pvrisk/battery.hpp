#ifndef PVRISK_BATTERY_HPP
#define PVRISK_BATTERY_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pvrisk/errors.hpp"

namespace pvrisk {

struct BatteryConfig {
    double capacity = 1.0;      ///< storage capacity, energy units
    double discharge_cap = 0.2; ///< maximum discharge rate U, energy per day
};

inline void validate(const BatteryConfig& b) {
    if (!(b.capacity > 0.0)) throw validation_error("battery: capacity must be positive");
    if (!(b.discharge_cap > 0.0)) throw validation_error("battery: discharge cap must be positive");
}

struct PenaltyWeights {
    double w1 = 0.1; ///< under-discharge (hydrogen shortfall) weight
    double w2 = 0.5; ///< empty-reservoir indicator weight
};

inline void validate(const PenaltyWeights& w) {
    if (!(w.w1 >= 0.0) || !(w.w2 >= 0.0))
        throw validation_error("penalty weights must be nonnegative");
}

/// Piecewise-constant demand target lambda(t). Entries are (start time, value);
/// the value holds from its start time until the next entry. Times are in
/// days on the same clock as the solver window.
struct TargetSchedule {
    std::vector<std::pair<double, double>> pieces{{0.0, 0.05}};

    double at(double t) const {
        double v = pieces.front().second;
        for (const auto& [t0, val] : pieces) {
            if (t0 <= t) v = val;
            else break;
        }
        return v;
    }
};

inline void validate(const TargetSchedule& s, double discharge_cap) {
    if (s.pieces.empty())
        throw validation_error("target schedule must have at least one piece");
    for (std::size_t i = 0; i < s.pieces.size(); ++i) {
        if (i > 0 && !(s.pieces[i].first > s.pieces[i - 1].first))
            throw validation_error("target schedule times must be strictly increasing");
        const double v = s.pieces[i].second;
        if (!(v >= 0.0 && v <= discharge_cap))
            throw validation_error("target schedule value " + std::to_string(v) +
                                   " outside [0, discharge cap]");
    }
}

struct ControlBounds {
    double lo = 0.0;
    double hi = 0.0;
};

/// Admissible discharge range at storage level y given charging rate f:
/// an empty reservoir cannot discharge, a full one must pass the influx on.
inline ControlBounds control_bounds(const BatteryConfig& b, double f, double y) {
    if (!(f >= 0.0)) throw validation_error("control_bounds: influx must be nonnegative");
    if (!(y >= 0.0 && y <= b.capacity))
        throw validation_error("control_bounds: y outside [0, capacity]");
    ControlBounds cb;
    if (y == 0.0) {
        cb.lo = 0.0;
        cb.hi = 0.0;
    } else if (y == b.capacity) {
        cb.lo = f;
        cb.hi = std::max(b.discharge_cap, f);
    } else {
        cb.lo = 0.0;
        cb.hi = b.discharge_cap;
    }
    return cb;
}

/// Running disutility of discharging at rate v with storage y:
/// quadratic demand shortfall, quadratic hydrogen shortfall, and a fixed
/// penalty while the reservoir sits exactly empty.
inline double disutility(double lambda_t, double v, double y, double discharge_cap,
                         const PenaltyWeights& w) {
    const double demand_gap = std::max(lambda_t - v, 0.0);
    const double hydrogen_gap = std::max(discharge_cap - v, 0.0);
    return 0.5 * demand_gap * demand_gap + 0.5 * w.w1 * hydrogen_gap * hydrogen_gap +
           (y == 0.0 ? w.w2 : 0.0);
}

struct RunningTermMin {
    double v_star = 0.0;
    double value = 0.0;
};

/// Exact minimizer of g(v) = -v * pprime + disutility(v) over [lo, hi].
///
/// g is convex, C^1 and piecewise quadratic with breakpoints at lambda_t and
/// discharge_cap; the minimum is attained at a per-piece stationary point or
/// at a breakpoint/box edge. Exact value ties resolve toward the largest v.
inline RunningTermMin minimize_running_term(double lo, double hi, double pprime,
                                            double lambda_t, double discharge_cap, double y,
                                            const PenaltyWeights& w) {
    if (!(lo <= hi))
        throw validation_error("minimize_running_term: empty control box [" +
                               std::to_string(lo) + ", " + std::to_string(hi) + "]");
    auto g = [&](double v) { return -v * pprime + disutility(lambda_t, v, y, discharge_cap, w); };

    double cand[6];
    int n = 0;
    cand[n++] = lo;
    cand[n++] = hi;
    auto add_clamped = [&](double v, double plo, double phi) {
        const double a = std::max(lo, plo);
        const double b = std::min(hi, phi);
        if (a > b) return;
        cand[n++] = std::clamp(v, a, b);
    };
    add_clamped(lambda_t, lo, hi);
    add_clamped(discharge_cap, lo, hi);
    // piece v <= lambda_t: slope -pprime - (lambda_t - v) - w1 (U - v)
    add_clamped((pprime + lambda_t + w.w1 * discharge_cap) / (1.0 + w.w1), lo, lambda_t);
    // piece lambda_t <= v <= U: slope -pprime - w1 (U - v)
    if (w.w1 > 0.0)
        add_clamped(discharge_cap + pprime / w.w1, lambda_t, discharge_cap);

    RunningTermMin best{cand[0], g(cand[0])};
    for (int i = 1; i < n; ++i) {
        const double val = g(cand[i]);
        if (val < best.value || (val == best.value && cand[i] > best.v_star)) {
            best.value = val;
            best.v_star = cand[i];
        }
    }
    return best;
}

} // namespace pvrisk

#endif
