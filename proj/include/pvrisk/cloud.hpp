#ifndef PVRISK_CLOUD_HPP
#define PVRISK_CLOUD_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pvrisk/errors.hpp"
#include "pvrisk/io.hpp"
#include "pvrisk/quadrature.hpp"
#include "pvrisk/simplex.hpp"

namespace pvrisk {

/// Mean-reverting cloud-cover diffusion on [0, 1]:
///   dX = r (a - X) dt + sigma X (1 - X) dB.
struct CloudParams {
    double r = 0.580;     ///< reversion rate, 1/day
    double a = 0.766;     ///< long-run mean cover
    double sigma = 2.27;  ///< noise intensity
};

inline void validate(const CloudParams& p) {
    if (!(p.r > 0.0)) throw validation_error("cloud: reversion rate r must be positive");
    if (!(p.a > 0.0 && p.a < 1.0)) throw validation_error("cloud: mean level a must lie in (0, 1)");
    if (!(p.sigma > 0.0)) throw validation_error("cloud: sigma must be positive");
}

/// (drift, diffusion) of the cover SDE at state x.
inline std::pair<double, double> drift_diffusion(const CloudParams& p, double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw validation_error("drift_diffusion: x must lie in [0, 1]");
    return {p.r * (p.a - x), p.sigma * x * (1.0 - x)};
}

/// Cell-averaged density table on (0, 1): n equal cells, value[m] at center
/// (m + 1/2) / n. Two mass functionals coexist: fv_mass is the exact
/// finite-volume integral (what fk_transition conserves); trapezoid_mass
/// extends the table with zero endpoint values, matching the vanishing of the
/// stationary density at both boundaries.
struct DensityTable {
    std::vector<double> values;

    std::size_t cells() const { return values.size(); }
    double cell_width() const { return 1.0 / static_cast<double>(values.size()); }
    double center(std::size_t m) const { return (static_cast<double>(m) + 0.5) * cell_width(); }

    double fv_mass() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s * cell_width();
    }

    double trapezoid_mass() const {
        const double h = cell_width();
        double s = 0.0;
        for (std::size_t m = 0; m + 1 < values.size(); ++m)
            s += 0.5 * (values[m] + values[m + 1]) * h;
        s += 0.25 * h * (values.front() + values.back());
        return s;
    }

    double l1_distance(const DensityTable& other) const {
        if (other.values.size() != values.size())
            throw validation_error("l1_distance: tables have different resolutions");
        double s = 0.0;
        for (std::size_t m = 0; m < values.size(); ++m)
            s += std::abs(values[m] - other.values[m]);
        return s * cell_width();
    }

    double mass_on(double lo, double hi) const {
        double s = 0.0;
        for (std::size_t m = 0; m < values.size(); ++m) {
            const double c = center(m);
            if (c >= lo && c <= hi) s += values[m];
        }
        return s * cell_width();
    }

    /// Strict local maxima at interior cells.
    int interior_maxima() const {
        int n = 0;
        for (std::size_t m = 1; m + 1 < values.size(); ++m)
            if (values[m] > values[m - 1] && values[m] > values[m + 1]) ++n;
        return n;
    }
};

/// Stationary density of the cover SDE, evaluated in closed form:
///   p(x) proportional to exp(G(x)) / (sigma x (1-x))^2,
///   G(x) = integral from 1/2 to x of 2 r (a - y) / (sigma y (1-y))^2 dy,
/// normalized so the trapezoid-rule integral over (0, 1) is 1.
inline DensityTable stationary_pdf(const CloudParams& p, int n_cells) {
    validate(p);
    if (n_cells < 16)
        throw validation_error("stationary_pdf: n_cells must be at least 16");

    const double h = 1.0 / n_cells;
    auto integrand = [&](double y) {
        const double b = p.sigma * y * (1.0 - y);
        return 2.0 * p.r * (p.a - y) / (b * b);
    };

    // Cumulative exponent, marching outward from the anchor at x = 1/2.
    std::vector<double> G(n_cells, 0.0);
    std::vector<double> logp(n_cells);
    {
        // first center at or right of the anchor
        int first_right = 0;
        while (first_right < n_cells && (first_right + 0.5) * h < 0.5) ++first_right;
        double acc = integrate(integrand, 0.5, (first_right + 0.5) * h);
        G[first_right] = acc;
        for (int m = first_right + 1; m < n_cells; ++m) {
            acc += integrate(integrand, (m - 0.5) * h, (m + 0.5) * h);
            G[m] = acc;
        }
        acc = G[first_right] - integrate(integrand, (first_right - 0.5) * h, (first_right + 0.5) * h);
        for (int m = first_right - 1; m >= 0; --m) {
            G[m] = acc;
            if (m > 0) acc -= integrate(integrand, (m - 0.5) * h, (m + 0.5) * h);
        }
    }
    double log_max = -1e300;
    for (int m = 0; m < n_cells; ++m) {
        const double x = (m + 0.5) * h;
        const double b = p.sigma * x * (1.0 - x);
        logp[m] = G[m] - 2.0 * std::log(b);
        log_max = std::max(log_max, logp[m]);
    }

    DensityTable out;
    out.values.resize(n_cells);
    for (int m = 0; m < n_cells; ++m) out.values[m] = std::exp(logp[m] - log_max);

    const double total = out.trapezoid_mass();
    if (!(total > 0.0) || !std::isfinite(total))
        throw validation_error("stationary_pdf: density is not normalizable at this resolution");
    for (double& v : out.values) v /= total;

    const double hm = out.cell_width();
    const double fv = out.fv_mass();
    if (out.values.front() * hm > 0.999 * fv)
        throw validation_error("stationary_pdf: mass concentrates at the lower boundary x = 0 "
                               "beyond representable range");
    if (out.values.back() * hm > 0.999 * fv)
        throw validation_error("stationary_pdf: mass concentrates at the upper boundary x = 1 "
                               "beyond representable range");
    return out;
}

/// Bin-averaged densities of the piecewise-linear reconstruction of a table
/// (linear between cell centers, dropping to 0 at both domain endpoints, the
/// same reconstruction trapezoid_mass integrates). Useful when comparing a
/// cell-centered density against a histogram, whose bins carry averages.
inline DensityTable rebin_linear(const DensityTable& t, int n_bins) {
    if (t.cells() < 2) throw validation_error("rebin_linear: table too small");
    if (n_bins < 1) throw validation_error("rebin_linear: n_bins must be positive");
    const std::size_t n = t.cells();
    std::vector<double> xs(n + 2), ys(n + 2);
    xs[0] = 0.0; ys[0] = 0.0;
    for (std::size_t m = 0; m < n; ++m) { xs[m + 1] = t.center(m); ys[m + 1] = t.values[m]; }
    xs[n + 1] = 1.0; ys[n + 1] = 0.0;

    auto value_at = [&](std::size_t seg, double x) {
        const double w = (x - xs[seg]) / (xs[seg + 1] - xs[seg]);
        return (1.0 - w) * ys[seg] + w * ys[seg + 1];
    };

    DensityTable out;
    out.values.assign(n_bins, 0.0);
    const double hb = 1.0 / n_bins;
    std::size_t seg = 0;
    for (int k = 0; k < n_bins; ++k) {
        const double lo = k * hb;
        const double hi = (k + 1 == n_bins) ? 1.0 : (k + 1) * hb;
        double mass = 0.0, x = lo;
        while (x < hi) {
            while (seg + 2 < xs.size() && xs[seg + 1] <= x) ++seg;
            const double x2 = std::min(hi, xs[seg + 1]);
            mass += 0.5 * (value_at(seg, x) + value_at(seg, x2)) * (x2 - x);
            x = x2;
        }
        out.values[k] = mass / hb;
    }
    return out;
}

namespace detail {

/// Bernoulli function z / (e^z - 1), stable near 0 and for large |z|.
inline double bernoulli_b(double z) {
    if (std::abs(z) < 1e-5) return 1.0 - 0.5 * z + z * z / 12.0;
    const double e = std::expm1(z);
    if (std::isinf(e)) return 0.0;
    return z / e;
}

struct FkOperator {
    // Exponentially fitted (Scharfetter-Gummel) fluxes for
    //   dp/dt = -d/dx [ nu(x) p - Dc(x) dp/dx ],  nu = mu - Dc',
    // zero flux at both boundaries.
    std::vector<double> dcoef;   // Dc at interior faces
    std::vector<double> b_minus; // B(-Pe) at interior faces
    std::vector<double> b_plus;  // B(+Pe) at interior faces
    double h = 0.0;

    FkOperator(const CloudParams& p, std::size_t n) {
        h = 1.0 / static_cast<double>(n);
        dcoef.resize(n - 1);
        b_minus.resize(n - 1);
        b_plus.resize(n - 1);
        for (std::size_t f = 0; f + 1 < n; ++f) {
            const double x = (static_cast<double>(f) + 1.0) * h;
            const double s = p.sigma * x * (1.0 - x);
            const double dc = 0.5 * s * s;
            const double nu = p.r * (p.a - x) - p.sigma * p.sigma * x * (1.0 - x) * (1.0 - 2.0 * x);
            const double pe = nu * h / dc;
            dcoef[f] = dc;
            b_minus[f] = bernoulli_b(-pe);
            b_plus[f] = bernoulli_b(pe);
        }
    }

    double stable_dt() const {
        double worst = 0.0;
        const std::size_t n = dcoef.size() + 1;
        for (std::size_t m = 0; m < n; ++m) {
            double out = 0.0;
            if (m < dcoef.size()) out += dcoef[m] * b_minus[m];      // right face, outflow of p_m
            if (m > 0) out += dcoef[m - 1] * b_plus[m - 1];          // left face
            worst = std::max(worst, out / (h * h));
        }
        return worst > 0.0 ? 1.0 / worst : 1e12;
    }

    void step(std::vector<double>& p, std::vector<double>& scratch, double dt) const {
        const std::size_t n = p.size();
        scratch.assign(n, 0.0);
        for (std::size_t f = 0; f + 1 < n; ++f) {
            const double flux = dcoef[f] / h * (b_minus[f] * p[f] - b_plus[f] * p[f + 1]);
            scratch[f] -= flux / h;
            scratch[f + 1] += flux / h;
        }
        for (std::size_t m = 0; m < n; ++m) p[m] += dt * scratch[m];
    }
};

} // namespace detail

/// Largest explicit substep keeping the transition scheme positivity-preserving.
inline double fk_stable_dt(const CloudParams& p, int n_cells) {
    validate(p);
    if (n_cells < 2) throw validation_error("fk_stable_dt: n_cells must be at least 2");
    return detail::FkOperator(p, static_cast<std::size_t>(n_cells)).stable_dt();
}

/// Evolves an initial density for dt_total days with n_substeps explicit
/// conservative steps. Mass (finite-volume integral) is conserved exactly up
/// to roundoff; dt_total = 0 returns the input unchanged.
inline DensityTable fk_transition(const CloudParams& p, const DensityTable& p0,
                                  double dt_total, long n_substeps) {
    validate(p);
    if (p0.cells() < 2) throw validation_error("fk_transition: density table too small");
    if (!(dt_total >= 0.0)) throw validation_error("fk_transition: dt_total must be nonnegative");
    for (double v : p0.values)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw validation_error("fk_transition: initial density must be finite and nonnegative");
    if (std::abs(p0.fv_mass() - 1.0) > 1e-8)
        throw validation_error("fk_transition: initial density mass must be 1 within 1e-8");
    if (dt_total == 0.0) return p0;
    if (n_substeps < 1) throw validation_error("fk_transition: n_substeps must be >= 1");

    const detail::FkOperator op(p, p0.cells());
    const double bound = op.stable_dt();
    const double dt = dt_total / static_cast<double>(n_substeps);
    if (dt > bound) {
        const long required = static_cast<long>(std::ceil(dt_total / bound));
        throw stability_error("fk_transition: substep " + format_full(dt) +
                                  " exceeds the stability bound " + format_full(bound) +
                                  "; at least " + std::to_string(required) + " substeps required",
                              required);
    }
    DensityTable out = p0;
    std::vector<double> scratch;
    for (long s = 0; s < n_substeps; ++s) op.step(out.values, scratch, dt);
    return out;
}

/// Daily cloud-cover observations on consecutive calendar days.
struct CloudSeries {
    long start_day = 0;         ///< serial day (days since 1970-01-01) of the first sample
    std::vector<double> cover;  ///< daily values in [0, 1]
    std::string site;
};

/// Reads "date,cover" CSV. Lines starting with '#' are comments; a comment
/// containing "scale=okta10" declares tenths-of-okta input (0..10, divided by
/// 10 on ingestion), "scale=unit" (the default) declares [0, 1] input.
/// All malformed rows, range violations and calendar gaps are collected and
/// reported with their line numbers.
inline CloudSeries ingest_cloud_series(std::istream& in, const std::string& origin = "<stream>") {
    std::string line;
    long line_no = 0;
    bool okta10 = false;
    bool header_seen = false;
    std::vector<std::string> problems;
    CloudSeries series;
    long prev_day = 0;

    auto complain = [&](const std::string& what) {
        if (problems.size() < 20)
            problems.push_back(origin + ":" + std::to_string(line_no) + ": " + what);
        else if (problems.size() == 20)
            problems.push_back("... further problems suppressed");
    };

    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            if (t.find("scale=okta10") != std::string::npos) okta10 = true;
            else if (t.find("scale=unit") != std::string::npos) okta10 = false;
            else if (t.find("scale=") != std::string::npos)
                complain("unknown scale declaration '" + t + "'");
            continue;
        }
        if (!header_seen) {
            if (t != "date,cover") {
                complain("expected header 'date,cover', got '" + t + "'");
                break;
            }
            header_seen = true;
            continue;
        }
        const auto fields = split(t, ',');
        if (fields.size() != 2) {
            complain("expected 2 fields, got " + std::to_string(fields.size()));
            continue;
        }
        long day = 0;
        if (!parse_date(fields[0], day)) {
            complain("bad date '" + trim(fields[0]) + "'");
            continue;
        }
        double v = 0.0;
        if (!parse_double(fields[1], v)) {
            complain("bad cover value '" + trim(fields[1]) + "'");
            continue;
        }
        const double hi = okta10 ? 10.0 : 1.0;
        if (!(v >= 0.0 && v <= hi)) {
            complain("cover " + trim(fields[1]) + " outside [0, " + format_full(hi) + "]");
            continue;
        }
        if (okta10) v /= 10.0;
        if (series.cover.empty()) {
            series.start_day = day;
        } else if (day <= prev_day) {
            complain("date not strictly increasing");
            continue;
        } else if (day != prev_day + 1) {
            complain("calendar gap of " + std::to_string(day - prev_day - 1) + " day(s) before this row");
            continue;
        }
        prev_day = day;
        series.cover.push_back(v);
    }

    if (!header_seen && problems.empty())
        problems.push_back(origin + ": no 'date,cover' header found");
    if (!problems.empty()) {
        std::string msg = "cloud series rejected:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw validation_error(msg);
    }
    if (series.cover.size() < 2)
        throw validation_error(origin + ": need at least two daily observations");
    return series;
}

inline CloudSeries ingest_cloud_series_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open cloud series file '" + path + "'");
    return ingest_cloud_series(in, path);
}

struct FitOptions {
    int n_bins = 20;     ///< histogram resolution for start and end states
    int fk_cells = 60;   ///< transition-solver resolution (multiple of n_bins)
    int max_iter = 500;
    double rel_tol = 1e-4;
    double r_lo = 1e-3, r_hi = 50.0;
    double a_lo = 1e-3, a_hi = 0.999;
    double sigma_lo = 1e-3, sigma_hi = 20.0;
};

struct FitReport {
    CloudParams params;
    double residual = 0.0;
    int iterations = 0;
    bool simplex_converged = false;
    bool at_bound = false;
    bool converged = false; ///< simplex_converged and not at_bound
};

/// Least-squares fit of (r, a, sigma) to observed one-day transitions.
///
/// The day pairs are grouped by the start-state histogram bin; for every
/// populated start bin the empirical next-day distribution is compared with
/// the fk_transition prediction seeded from the within-bin start histogram.
/// Objective: sum over start bins of (pair count) x (squared L2 bin mismatch).
inline FitReport fit_transition_lsq(const CloudSeries& series, const CloudParams& init,
                                    const FitOptions& opt = {}) {
    if (series.cover.size() < 365)
        throw validation_error("fit_transition_lsq: need at least 365 daily observations, got " +
                               std::to_string(series.cover.size()));
    if (opt.n_bins < 2 || opt.fk_cells % opt.n_bins != 0)
        throw validation_error("fit_transition_lsq: fk_cells must be a positive multiple of n_bins");

    const int nb = opt.n_bins;
    const int nc = opt.fk_cells;
    const int cpb = nc / nb;
    const double hc = 1.0 / nc;

    auto bin_of = [&](double x, int n) { return std::min(static_cast<int>(x * n), n - 1); };

    std::vector<long> count(nb, 0);
    std::vector<std::vector<double>> emp(nb, std::vector<double>(nb, 0.0));
    std::vector<std::vector<double>> start_cells(nb, std::vector<double>(nc, 0.0));
    for (std::size_t i = 0; i + 1 < series.cover.size(); ++i) {
        const int s = bin_of(series.cover[i], nb);
        const int e = bin_of(series.cover[i + 1], nb);
        ++count[s];
        emp[s][e] += 1.0;
        start_cells[s][bin_of(series.cover[i], nc)] += 1.0;
    }
    for (int s = 0; s < nb; ++s) {
        if (count[s] == 0) continue;
        for (auto& v : emp[s]) v /= static_cast<double>(count[s]);
        for (auto& v : start_cells[s]) v /= static_cast<double>(count[s]) * hc;
    }

    auto clamp_params = [&](const std::vector<double>& x) {
        CloudParams p;
        p.r = std::clamp(x[0], opt.r_lo, opt.r_hi);
        p.a = std::clamp(x[1], opt.a_lo, opt.a_hi);
        p.sigma = std::clamp(x[2], opt.sigma_lo, opt.sigma_hi);
        return p;
    };

    auto objective = [&](const std::vector<double>& x) {
        const CloudParams p = clamp_params(x);
        const detail::FkOperator op(p, static_cast<std::size_t>(nc));
        const double bound = op.stable_dt();
        const long steps = std::max(1L, static_cast<long>(std::ceil(1.0 / bound)));
        const double dt = 1.0 / static_cast<double>(steps);
        double total = 0.0;
        std::vector<double> dens, scratch;
        for (int s = 0; s < nb; ++s) {
            if (count[s] == 0) continue;
            dens = start_cells[s];
            for (long k = 0; k < steps; ++k) op.step(dens, scratch, dt);
            double sse = 0.0;
            for (int e = 0; e < nb; ++e) {
                double mass = 0.0;
                for (int c = e * cpb; c < (e + 1) * cpb; ++c) mass += dens[c] * hc;
                const double d = emp[s][e] - mass;
                sse += d * d;
            }
            total += static_cast<double>(count[s]) * sse;
        }
        return total;
    };

    const SimplexResult sr = nelder_mead(objective, {init.r, init.a, init.sigma},
                                         opt.rel_tol, opt.max_iter);

    FitReport rep;
    rep.params = clamp_params(sr.x);
    rep.residual = sr.value;
    rep.iterations = sr.iterations;
    rep.simplex_converged = sr.converged;
    auto near = [](double v, double edge) { return std::abs(v - edge) <= 1e-3 * std::max(1.0, std::abs(edge)); };
    rep.at_bound = near(rep.params.r, opt.r_lo) || near(rep.params.r, opt.r_hi) ||
                   near(rep.params.a, opt.a_lo) || near(rep.params.a, opt.a_hi) ||
                   near(rep.params.sigma, opt.sigma_lo) || near(rep.params.sigma, opt.sigma_hi);
    rep.converged = rep.simplex_converged && !rep.at_bound;
    return rep;
}

} // namespace pvrisk

#endif
