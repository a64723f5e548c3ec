#ifndef PVRISK_MONTECARLO_HPP
#define PVRISK_MONTECARLO_HPP

#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "pvrisk/battery.hpp"
#include "pvrisk/errors.hpp"
#include "pvrisk/grid.hpp"
#include "pvrisk/io.hpp"
#include "pvrisk/problem.hpp"

namespace pvrisk {

struct SimConfig {
    long n_paths = 10000;
    double dt = 1e-3; ///< days
    std::uint64_t seed = 12345;
    enum class Distortion { none, phi_star } distortion = Distortion::none;
    enum class Policy { u_star, constant } policy = Policy::u_star;
    double v_const = 0.0; ///< constant-policy discharge request
    double x0 = 0.5;
    double y0 = 0.5;
    bool record_paths = false;
    long record_stride = 1;
};

inline void validate(const SimConfig& s, double capacity) {
    if (s.n_paths < 1) throw validation_error("sim: n_paths must be >= 1");
    if (!(s.dt > 0.0)) throw validation_error("sim: dt must be positive");
    if (!(s.x0 >= 0.0 && s.x0 <= 1.0)) throw validation_error("sim: x0 outside [0, 1]");
    if (!(s.y0 >= 0.0 && s.y0 <= capacity)) throw validation_error("sim: y0 outside [0, capacity]");
    if (s.record_stride < 1) throw validation_error("sim: record_stride must be >= 1");
}

/// Simulation output. Per-path scalars are always present; step-level traces
/// only when record_paths was set (they grow as paths x steps).
struct PathBundle {
    SimConfig cfg;
    double horizon = 0.0;
    long n_steps = 0;
    std::vector<double> objective;      ///< discounted accumulated disutility
    std::vector<double> final_x, final_y, final_discount;
    long clamp_events_x = 0;            ///< Euler steps clipped back into [0, 1]
    bool recorded = false;
    std::vector<long> trace_path;
    std::vector<double> trace_t, trace_x, trace_y, trace_u, trace_phi, trace_discount;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
} // namespace detail

/// Euler-Maruyama simulation of the cover/storage pair under a chosen
/// discharge policy and drift distortion. The discharge is clipped into the
/// admissible range at the current state; X is clamped to [0, 1] (clamp
/// events counted) and Y to [0, capacity], so the empty-reservoir penalty
/// fires on exact zeros. Each path derives its own generator from (seed,
/// path index), making results independent of scheduling order.
inline PathBundle simulate_paths(const ProblemSpec& spec, const SolutionFields* fields,
                                 double horizon, const SimConfig& cfg) {
    validate(spec);
    validate(cfg, spec.battery.capacity);
    if (!(horizon > 0.0)) throw validation_error("simulate_paths: horizon must be positive");
    const bool needs_fields = cfg.policy == SimConfig::Policy::u_star ||
                              cfg.distortion == SimConfig::Distortion::phi_star;
    if (needs_fields && fields == nullptr)
        throw validation_error("simulate_paths: this policy/distortion needs solved fields");
    if (fields != nullptr && fields->grid.capacity != spec.battery.capacity)
        throw validation_error("simulate_paths: fields were solved for a different capacity");

    const long n_steps = static_cast<long>(std::ceil(horizon / cfg.dt - 1e-12));
    const double eta_prime = spec.eta_prime();

    PathBundle out;
    out.cfg = cfg;
    out.horizon = horizon;
    out.n_steps = n_steps;
    out.objective.resize(cfg.n_paths);
    out.final_x.resize(cfg.n_paths);
    out.final_y.resize(cfg.n_paths);
    out.final_discount.resize(cfg.n_paths);
    out.recorded = cfg.record_paths;

    for (long p = 0; p < cfg.n_paths; ++p) {
        std::mt19937_64 rng(detail::splitmix64(cfg.seed ^ (0x5851f42d4c957f2dULL *
                                                            static_cast<std::uint64_t>(p + 1))));
        std::normal_distribution<double> gauss(0.0, 1.0);

        double x = cfg.x0, y = cfg.y0, discount = 1.0, acc = 0.0;
        for (long s = 0; s < n_steps; ++s) {
            const double t = spec.t_start + static_cast<double>(s) * cfg.dt;
            const double h = (s == n_steps - 1) ? horizon - static_cast<double>(s) * cfg.dt : cfg.dt;

            const double irr = irradiance(spec.irr, t);
            const double f = energy_influx(spec.influx, irr, x);
            const ControlBounds cb = control_bounds(spec.battery, f, y);
            double u = cfg.policy == SimConfig::Policy::u_star ? fields->u_at(t, x, y) : cfg.v_const;
            u = std::clamp(u, cb.lo, cb.hi);
            const double phi = cfg.distortion == SimConfig::Distortion::phi_star
                                   ? fields->phi_at(t, x, y)
                                   : 0.0;

            acc += discount * disutility(spec.target.at(t), u, y, spec.battery.discharge_cap,
                                         spec.weights) * h;

            if (cfg.record_paths && (s % cfg.record_stride) == 0) {
                out.trace_path.push_back(p);
                out.trace_t.push_back(t);
                out.trace_x.push_back(x);
                out.trace_y.push_back(y);
                out.trace_u.push_back(u);
                out.trace_phi.push_back(phi);
                out.trace_discount.push_back(discount);
            }

            const double sxx = spec.cloud.sigma * x * (1.0 - x);
            const double xn = x + (spec.cloud.r * (spec.cloud.a - x) + sxx * phi) * h +
                              sxx * std::sqrt(h) * gauss(rng);
            if (xn < 0.0) { x = 0.0; ++out.clamp_events_x; }
            else if (xn > 1.0) { x = 1.0; ++out.clamp_events_x; }
            else x = xn;

            const double yn = y + (f - u) * h;
            y = std::clamp(yn, 0.0, spec.battery.capacity);

            if (phi != 0.0) discount *= std::exp(-phi * phi / (2.0 * eta_prime) * h);
        }
        out.objective[p] = acc;
        out.final_x[p] = x;
        out.final_y[p] = y;
        out.final_discount[p] = discount;
    }
    return out;
}

struct ObjectiveEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Sample mean and standard error of the per-path discounted disutility.
inline ObjectiveEstimate estimate_objective(const PathBundle& bundle) {
    const std::size_t n = bundle.objective.size();
    if (n == 0) throw validation_error("estimate_objective: empty bundle");
    ObjectiveEstimate e;
    for (double v : bundle.objective) e.mean += v;
    e.mean /= static_cast<double>(n);
    if (n > 1) {
        double ss = 0.0;
        for (double v : bundle.objective) ss += (v - e.mean) * (v - e.mean);
        e.std_error = std::sqrt(ss / (static_cast<double>(n) - 1.0) / static_cast<double>(n));
    }
    return e;
}

/// Recorded traces as "path_id,t,x,y,u,phi,discount" rows.
inline void write_paths_csv(std::ostream& os, const PathBundle& b) {
    os << "path_id,t,x,y,u,phi,discount\n";
    for (std::size_t i = 0; i < b.trace_path.size(); ++i)
        os << b.trace_path[i] << ',' << format_sig9(b.trace_t[i]) << ','
           << format_sig9(b.trace_x[i]) << ',' << format_sig9(b.trace_y[i]) << ','
           << format_sig9(b.trace_u[i]) << ',' << format_sig9(b.trace_phi[i]) << ','
           << format_sig9(b.trace_discount[i]) << '\n';
}

} // namespace pvrisk

#endif
