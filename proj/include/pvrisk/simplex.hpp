#ifndef PVRISK_SIMPLEX_HPP
#define PVRISK_SIMPLEX_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace pvrisk {

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false; // relative simplex diameter fell below tolerance
};

/// Nelder-Mead downhill simplex with standard coefficients
/// (reflect 1, expand 2, contract 0.5, shrink 0.5).
///
/// Convergence: per-coordinate spread of the simplex relative to the best
/// vertex drops below rel_tol before max_iter iterations.
inline SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x0,
                                 double rel_tol = 1e-4,
                                 int max_iter = 500,
                                 double init_step_rel = 0.15) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> verts(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        double step = init_step_rel * std::abs(x0[i]);
        if (step == 0.0) step = init_step_rel;
        verts[i + 1][i] += step;
    }
    std::vector<double> fv(n + 1);
    for (std::size_t v = 0; v <= n; ++v) fv[v] = f(verts[v]);

    auto order = [&]() {
        std::vector<std::size_t> idx(n + 1);
        for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::vector<std::vector<double>> nv(n + 1);
        std::vector<double> nf(n + 1);
        for (std::size_t i = 0; i <= n; ++i) { nv[i] = verts[idx[i]]; nf[i] = fv[idx[i]]; }
        verts.swap(nv);
        fv.swap(nf);
    };
    auto diameter_ok = [&]() {
        for (std::size_t i = 0; i < n; ++i) {
            double lo = verts[0][i], hi = verts[0][i];
            for (std::size_t v = 1; v <= n; ++v) {
                lo = std::min(lo, verts[v][i]);
                hi = std::max(hi, verts[v][i]);
            }
            const double scale = std::max(std::abs(verts[0][i]), 1e-8);
            if ((hi - lo) / scale >= rel_tol) return false;
        }
        return true;
    };

    SimplexResult res;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        order();
        if (diameter_ok()) { res.converged = true; break; }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t i = 0; i < n; ++i) centroid[i] += verts[v][i] / double(n);

        auto blend = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t i = 0; i < n; ++i)
                p[i] = centroid[i] + coef * (centroid[i] - verts[n][i]);
            return p;
        };

        std::vector<double> xr = blend(1.0);
        const double fr = f(xr);
        if (fr < fv[0]) {
            std::vector<double> xe = blend(2.0);
            const double fe = f(xe);
            if (fe < fr) { verts[n] = xe; fv[n] = fe; }
            else         { verts[n] = xr; fv[n] = fr; }
        } else if (fr < fv[n - 1]) {
            verts[n] = xr; fv[n] = fr;
        } else {
            std::vector<double> xc = blend(fr < fv[n] ? 0.5 : -0.5);
            const double fc = f(xc);
            if (fc < std::min(fr, fv[n])) {
                verts[n] = xc; fv[n] = fc;
            } else {
                for (std::size_t v = 1; v <= n; ++v) {
                    for (std::size_t i = 0; i < n; ++i)
                        verts[v][i] = verts[0][i] + 0.5 * (verts[v][i] - verts[0][i]);
                    fv[v] = f(verts[v]);
                }
            }
        }
    }
    order();
    res.x = verts[0];
    res.value = fv[0];
    res.iterations = iter;
    return res;
}

} // namespace pvrisk

#endif
