#ifndef PVRISK_HJB_HPP
#define PVRISK_HJB_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pvrisk/battery.hpp"
#include "pvrisk/cir.hpp"
#include "pvrisk/errors.hpp"
#include "pvrisk/grid.hpp"
#include "pvrisk/problem.hpp"

namespace pvrisk {

/// One-sided differences in x at vertex (j, k). At the domain edges the
/// missing outward difference copies the inward one, which zeroes the second
/// difference there and keeps every downstream selection rule uniform.
inline std::pair<double, double> one_sided_diffs_x(const std::vector<double>& layer,
                                                   const Grid& g, int j, int k) {
    const double dx = g.dx();
    const double c = layer[g.idx(j, k)];
    double pl = 0.0, pr = 0.0;
    if (j > 0) pl = (c - layer[g.idx(j - 1, k)]) / dx;
    if (j < g.nx) pr = (layer[g.idx(j + 1, k)] - c) / dx;
    if (j == 0) pl = pr;
    if (j == g.nx) pr = pl;
    return {pl, pr};
}

inline std::pair<double, double> one_sided_diffs_y(const std::vector<double>& layer,
                                                   const Grid& g, int j, int k) {
    const double dy = g.dy();
    const double c = layer[g.idx(j, k)];
    double pd = 0.0, pu = 0.0;
    if (k > 0) pd = (c - layer[g.idx(j, k - 1)]) / dy;
    if (k < g.ny) pu = (layer[g.idx(j, k + 1)] - c) / dy;
    if (k == 0) pd = pu;
    if (k == g.ny) pu = pd;
    return {pd, pu};
}

struct GradientPick {
    double sq = 0.0;   ///< squared gradient entering the nonlinear term
    double signed_p = 0.0; ///< the selected signed gradient (0 in the cancellation case)
};

/// Godunov selection for the squared x-gradient: boundary one-sided values,
/// the smaller magnitude when the differences agree in sign and do not
/// straddle a kink, zero at a local minimum, the larger magnitude at a kink.
inline GradientPick godunov_gradient_sq(double pl, double pr, int j, int nx) {
    if (j == 0) return {pr * pr, pr};
    if (j == nx) return {pl * pl, pl};
    if (pl <= pr) {
        if (pl * pr >= 0.0) {
            const double m = std::abs(pl) <= std::abs(pr) ? pl : pr;
            return {m * m, m};
        }
        return {0.0, 0.0};
    }
    const double m = std::abs(pl) >= std::abs(pr) ? pl : pr;
    return {m * m, m};
}

/// Central variant: arithmetic mean of the one-sided differences in the
/// interior, one-sided values on the boundary columns.
inline GradientPick central_gradient_sq(double pl, double pr, int j, int nx) {
    if (j == 0) return {pr * pr, pr};
    if (j == nx) return {pl * pl, pl};
    const double m = 0.5 * (pl + pr);
    return {m * m, m};
}

inline GradientPick pick_gradient(GradientScheme s, double pl, double pr, int j, int nx) {
    return s == GradientScheme::godunov ? godunov_gradient_sq(pl, pr, j, nx)
                                        : central_gradient_sq(pl, pr, j, nx);
}

/// Largest explicit time step for which the linear part of the update is a
/// positive (monotone) combination of the next-layer values:
///   1 / max_j [ r |a - x_j| / dx + (sigma x_j (1 - x_j))^2 / dx^2
///               + (f_max + U) / dy ],
/// with f_max the largest charging rate over the window (attained at clear
/// sky). Returns the 1e12 sentinel when nothing constrains the step.
inline double monotone_dt_bound(const ProblemSpec& spec, const Grid& grid) {
    validate(grid);
    double irr_max = 0.0;
    {
        const long n = std::clamp<long>(std::lround(grid.horizon * 1440.0), 1000, 500000);
        for (long s = 0; s <= n; ++s) {
            const double t = spec.t_start + grid.horizon * static_cast<double>(s) / static_cast<double>(n);
            irr_max = std::max(irr_max, irradiance(spec.irr, t));
        }
    }
    const double f_max = spec.influx.eps_area * irr_max;
    const double y_term = (f_max + spec.battery.discharge_cap) / grid.dy();

    double worst = 0.0;
    for (int j = 0; j <= grid.nx; ++j) {
        const double x = grid.x(j);
        const double s = spec.cloud.sigma * x * (1.0 - x);
        const double term = spec.cloud.r * std::abs(spec.cloud.a - x) / grid.dx() +
                            s * s / (grid.dx() * grid.dx()) + y_term;
        worst = std::max(worst, term);
    }
    return worst > 0.0 ? 1.0 / worst : 1e12;
}

/// All intermediate quantities of one vertex update, for fine-grained tests.
struct VertexTerms {
    double pl = 0, pr = 0, pd = 0, pu = 0;
    double i1 = 0, i2 = 0, i3 = 0;
    double psi_new = 0;
    double v_star = 0;
    double phi_star = 0;
};

/// Explicit backward marching solver for the robustified storage control
/// problem. Marches the value from the zero terminal layer to t_start,
/// extracting the minimizing discharge and the worst-case distortion as it
/// goes.
class HjbSolver {
public:
    HjbSolver(const ProblemSpec& spec, const Grid& grid, const SchemeOptions& opts = {})
        : spec_(spec), grid_(grid), opts_(opts) {
        validate(spec_);
        validate(grid_);
        validate(opts_);
        if (grid_.capacity != spec_.battery.capacity)
            throw validation_error("hjb: grid capacity and battery capacity disagree");
        if (grid_.t_start != spec_.t_start)
            throw validation_error("hjb: grid t_start and problem t_start disagree");
        eta_prime_ = spec_.eta_prime();
        phi1_eta_ = derivatives_at_one(spec_.orlicz).first * spec_.eta;
        drift_.resize(grid_.nx + 1);
        sig2_.resize(grid_.nx + 1);
        for (int j = 0; j <= grid_.nx; ++j) {
            const double x = grid_.x(j);
            drift_[j] = spec_.cloud.r * (spec_.cloud.a - x);
            const double s = spec_.cloud.sigma * x * (1.0 - x);
            sig2_[j] = s * s;
        }
    }

    /// Terms of the update at one vertex given the next-time layer and the
    /// target-layer time t.
    VertexTerms vertex_terms(const std::vector<double>& next, double t, int j, int k) const {
        const double irr = irradiance(spec_.irr, t);
        return vertex_terms_with_irr(next, t, irr, j, k);
    }

    SolutionFields solve() const {
        SolutionFields out;
        out.grid = grid_;
        out.gradient = opts_.gradient;

        const long stride = std::max<long>(1, (grid_.nt + opts_.max_stored_slices - 2) /
                                                  (opts_.max_stored_slices - 1));
        const std::size_t nv = grid_.vertex_count();
        std::vector<double> next(nv, 0.0), cur(nv, 0.0), ucur(nv, 0.0), pcur(nv, 0.0);

        // descending order while marching; reversed before returning
        auto store = [&](long layer, const std::vector<double>& p, const std::vector<double>& u,
                         const std::vector<double>& ph) {
            out.layers.push_back(layer);
            out.times.push_back(grid_.t(layer));
            out.psi.push_back(p);
            out.u_star.push_back(u);
            out.phi_star.push_back(ph);
        };

        extract_policies(next, grid_.t(grid_.nt), ucur, pcur);
        store(grid_.nt, next, ucur, pcur);

        for (long i = grid_.nt - 1; i >= 0; --i) {
            step_layer(next, i, cur, ucur, pcur);
            if (i == 0 || (i % stride) == 0) store(i, cur, ucur, pcur);
            next.swap(cur);
        }

        std::reverse(out.layers.begin(), out.layers.end());
        std::reverse(out.times.begin(), out.times.end());
        std::reverse(out.psi.begin(), out.psi.end());
        std::reverse(out.u_star.begin(), out.u_star.end());
        std::reverse(out.phi_star.begin(), out.phi_star.end());
        return out;
    }

private:
    VertexTerms vertex_terms_with_irr(const std::vector<double>& next, double t, double irr,
                                      int j, int k) const {
        VertexTerms vt;
        const auto [pl, pr] = one_sided_diffs_x(next, grid_, j, k);
        const auto [pd, pu] = one_sided_diffs_y(next, grid_, j, k);
        vt.pl = pl; vt.pr = pr; vt.pd = pd; vt.pu = pu;

        const double x = grid_.x(j);
        const double y = grid_.y(k);
        const double psi_c = next[grid_.idx(j, k)];

        vt.i1 = drift_[j] * (spec_.cloud.a >= x ? pr : pl) +
                0.5 * sig2_[j] * (pr - pl) / grid_.dx();

        const double f = energy_influx(spec_.influx, irr, x);
        const ControlBounds cb = control_bounds(spec_.battery, f, y);
        const double pprime = (k == 0) ? pu : pd;
        const RunningTermMin m = minimize_running_term(cb.lo, cb.hi, pprime, spec_.target.at(t),
                                                       spec_.battery.discharge_cap, y, spec_.weights);
        vt.v_star = m.v_star;
        vt.i2 = f * (k < grid_.ny ? pu : pd) + m.value;

        const GradientPick gp = pick_gradient(opts_.gradient, pl, pr, j, grid_.nx);
        const double guard = psi_c + opts_.eps_guard;
        vt.i3 = eta_prime_ * sig2_[j] * gp.sq / (2.0 * guard);
        vt.phi_star = phi1_eta_ * spec_.cloud.sigma * x * (1.0 - x) * gp.signed_p / guard;
        vt.psi_new = psi_c + grid_.dt() * (vt.i1 + vt.i2 + vt.i3);
        return vt;
    }

    void step_layer(const std::vector<double>& next, long i, std::vector<double>& cur,
                    std::vector<double>& u_out, std::vector<double>& phi_out) const {
        const double t = grid_.t(i);
        const double irr = irradiance(spec_.irr, t);
        for (int j = 0; j <= grid_.nx; ++j) {
            for (int k = 0; k <= grid_.ny; ++k) {
                const VertexTerms vt = vertex_terms_with_irr(next, t, irr, j, k);
                if (!std::isfinite(vt.psi_new))
                    throw blowup_error("hjb: non-finite value at layer " + std::to_string(i) +
                                           ", vertex (" + std::to_string(j) + ", " + std::to_string(k) +
                                           "); the time step is too large for this grid",
                                       i, j, k);
                if (vt.psi_new < 0.0)
                    throw blowup_error("hjb: negative value " + format_full(vt.psi_new) +
                                           " at layer " + std::to_string(i) + ", vertex (" +
                                           std::to_string(j) + ", " + std::to_string(k) +
                                           "); reduce dt below the monotone bound",
                                       i, j, k);
                const std::size_t id = grid_.idx(j, k);
                cur[id] = vt.psi_new;
                u_out[id] = vt.v_star;
                phi_out[id] = vt.phi_star;
            }
        }
    }

    void extract_policies(const std::vector<double>& layer, double t,
                          std::vector<double>& u_out, std::vector<double>& phi_out) const {
        const double irr = irradiance(spec_.irr, t);
        for (int j = 0; j <= grid_.nx; ++j)
            for (int k = 0; k <= grid_.ny; ++k) {
                const VertexTerms vt = vertex_terms_with_irr(layer, t, irr, j, k);
                const std::size_t id = grid_.idx(j, k);
                u_out[id] = vt.v_star;
                phi_out[id] = vt.phi_star;
            }
    }

    ProblemSpec spec_;
    Grid grid_;
    SchemeOptions opts_;
    double eta_prime_ = 0.0;
    double phi1_eta_ = 0.0;
    std::vector<double> drift_, sig2_;
};

inline SolutionFields solve_hjb(const ProblemSpec& spec, const Grid& grid,
                                const SchemeOptions& opts = {}) {
    return HjbSolver(spec, grid, opts).solve();
}

/// Numeric solution of the square-root-diffusion benchmark with the same
/// marching scheme reduced to one state dimension (no control, zero running
/// cost). Terminal data exp(p x); copy extrapolation at x = x_max.
struct CirSolution {
    double x_max = 0.0;
    double horizon = 0.0;
    int nx = 0;
    long nt = 0;
    std::vector<std::vector<double>> psi; ///< layer-major, ascending time

    double x(int j) const { return j == nx ? x_max : j * (x_max / nx); }

    double value_at(double t, double xq) const {
        const double dtv = horizon / static_cast<double>(nt);
        const double ct = std::clamp(t, 0.0, horizon) / dtv;
        const long i = std::min(static_cast<long>(ct), nt - 1);
        const double wt = ct - static_cast<double>(i);
        const double dxv = x_max / nx;
        const double cx = std::clamp(xq, 0.0, x_max) / dxv;
        const int j = std::min(static_cast<int>(cx), nx - 1);
        const double wx = cx - j;
        auto lerp = [&](const std::vector<double>& l) {
            return (1.0 - wx) * l[j] + wx * l[j + 1];
        };
        return (1.0 - wt) * lerp(psi[i]) + wt * lerp(psi[i + 1]);
    }
};

inline double cir_monotone_dt_bound(const CIRParams& c, double x_max, int nx) {
    if (!(x_max > 0.0) || nx < 2)
        throw validation_error("cir bound: need x_max > 0 and nx >= 2");
    const double dx = x_max / nx;
    double worst = 0.0;
    for (int j = 0; j <= nx; ++j) {
        const double x = j == nx ? x_max : j * dx;
        worst = std::max(worst, std::abs(c.a - c.r * x) / dx +
                                    c.sigma * c.sigma * c.r * x / (dx * dx));
    }
    return worst > 0.0 ? 1.0 / worst : 1e12;
}

inline CirSolution solve_cir_numeric(const CIRParams& c, double x_max, int nx, long nt,
                                     GradientScheme scheme = GradientScheme::godunov,
                                     double eps_guard = 1e-10) {
    validate(c);
    if (!(x_max > 0.0)) throw validation_error("cir solve: x_max must be positive");
    if (nx < 2 || nt < 1) throw validation_error("cir solve: grid too small");
    if (static_cast<double>(nt + 1) * (nx + 1) > 2e8)
        throw validation_error("cir solve: grid too large to store");

    CirSolution sol;
    sol.x_max = x_max;
    sol.horizon = c.horizon;
    sol.nx = nx;
    sol.nt = nt;
    sol.psi.assign(nt + 1, std::vector<double>(nx + 1));

    const double dx = x_max / nx;
    const double dt = c.horizon / static_cast<double>(nt);
    for (int j = 0; j <= nx; ++j) sol.psi[nt][j] = std::exp(c.p * sol.x(j));

    for (long i = nt - 1; i >= 0; --i) {
        const std::vector<double>& next = sol.psi[i + 1];
        std::vector<double>& cur = sol.psi[i];
        for (int j = 0; j <= nx; ++j) {
            const double x = sol.x(j);
            double pl = 0.0, pr = 0.0;
            if (j > 0) pl = (next[j] - next[j - 1]) / dx;
            if (j < nx) pr = (next[j + 1] - next[j]) / dx;
            if (j == 0) pl = pr;
            if (j == nx) pr = pl;

            const double drift = c.a - c.r * x;
            const double diff2 = c.sigma * c.sigma * c.r * x;
            const double i1 = drift * (drift >= 0.0 ? pr : pl) + 0.5 * diff2 * (pr - pl) / dx;
            const GradientPick gp = pick_gradient(scheme, pl, pr, j, nx);
            const double i3 = c.eta_prime * diff2 * gp.sq / (2.0 * (next[j] + eps_guard));
            const double v = next[j] + dt * (i1 + i3);
            if (!std::isfinite(v) || v < 0.0)
                throw blowup_error("cir solve: scheme lost positivity at layer " +
                                       std::to_string(i) + ", j = " + std::to_string(j) +
                                       "; reduce dt",
                                   i, j, 0);
            cur[j] = v;
        }
    }
    return sol;
}

} // namespace pvrisk

#endif
