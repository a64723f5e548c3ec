#ifndef PVRISK_GRID_HPP
#define PVRISK_GRID_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "pvrisk/errors.hpp"
#include "pvrisk/io.hpp"

namespace pvrisk {

/// Uniform lattice over [t_start, t_start + horizon] x [0, 1] x [0, capacity].
/// Boundary coordinates are produced exactly so that boundary-row logic can
/// compare with == instead of tolerances.
struct Grid {
    long nt = 1;
    int nx = 2;
    int ny = 2;
    double horizon = 1.0;   ///< days
    double capacity = 1.0;  ///< storage axis extent
    double t_start = 0.0;   ///< days since January 1, 00:00

    double dt() const { return horizon / static_cast<double>(nt); }
    double dx() const { return 1.0 / nx; }
    double dy() const { return capacity / ny; }

    double x(int j) const {
        if (j == 0) return 0.0;
        if (j == nx) return 1.0;
        return j * dx();
    }
    double y(int k) const {
        if (k == 0) return 0.0;
        if (k == ny) return capacity;
        return k * dy();
    }
    double t(long i) const {
        if (i == nt) return t_start + horizon;
        return t_start + static_cast<double>(i) * dt();
    }

    std::size_t vertex_count() const {
        return static_cast<std::size_t>(nx + 1) * static_cast<std::size_t>(ny + 1);
    }
    std::size_t idx(int j, int k) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(ny + 1) +
               static_cast<std::size_t>(k);
    }
};

inline void validate(const Grid& g) {
    if (g.nt < 1) throw validation_error("grid: need at least one time step");
    if (g.nx < 2 || g.ny < 2) throw validation_error("grid: need at least 2 cells per state axis");
    if (!(g.horizon > 0.0)) throw validation_error("grid: horizon must be positive");
    if (!(g.capacity > 0.0)) throw validation_error("grid: capacity must be positive");
}

enum class GradientScheme { godunov, central };

struct SchemeOptions {
    GradientScheme gradient = GradientScheme::godunov;
    double eps_guard = 1e-10;   ///< regularizer for the 1/psi nonlinearity
    int max_stored_slices = 601;///< time slices retained in SolutionFields
};

inline void validate(const SchemeOptions& o) {
    if (!(o.eps_guard > 0.0)) throw validation_error("scheme: eps_guard must be positive");
    if (o.max_stored_slices < 2) throw validation_error("scheme: need at least 2 stored slices");
}

/// Value and policy fields on stored time slices of the lattice. The solver
/// keeps only two live layers while marching; slices are retained at a fixed
/// stride (always including the initial and terminal layers), and lookups
/// between stored times interpolate trilinearly.
struct SolutionFields {
    Grid grid;
    GradientScheme gradient = GradientScheme::godunov;
    std::vector<long> layers;                ///< ascending stored layer indices
    std::vector<double> times;               ///< matching absolute times
    std::vector<std::vector<double>> psi;    ///< value, one flat (nx+1)(ny+1) array per slice
    std::vector<std::vector<double>> u_star; ///< optimal discharge
    std::vector<std::vector<double>> phi_star; ///< worst-case distortion

    std::size_t slice_count() const { return layers.size(); }

    std::size_t nearest_slice(double t) const {
        const auto it = std::lower_bound(times.begin(), times.end(), t);
        if (it == times.begin()) return 0;
        if (it == times.end()) return times.size() - 1;
        const std::size_t hi = static_cast<std::size_t>(it - times.begin());
        return (t - times[hi - 1] <= times[hi] - t) ? hi - 1 : hi;
    }

    double bilinear(const std::vector<double>& f, double x, double y) const {
        const double cx = std::clamp(x, 0.0, 1.0) / grid.dx();
        const double cy = std::clamp(y, 0.0, grid.capacity) / grid.dy();
        const int j = std::min(static_cast<int>(cx), grid.nx - 1);
        const int k = std::min(static_cast<int>(cy), grid.ny - 1);
        const double wx = cx - j, wy = cy - k;
        const double f00 = f[grid.idx(j, k)], f01 = f[grid.idx(j, k + 1)];
        const double f10 = f[grid.idx(j + 1, k)], f11 = f[grid.idx(j + 1, k + 1)];
        return (1.0 - wx) * ((1.0 - wy) * f00 + wy * f01) +
               wx * ((1.0 - wy) * f10 + wy * f11);
    }

    double trilinear(const std::vector<std::vector<double>>& field, double t, double x, double y) const {
        if (times.empty()) throw validation_error("solution fields: no stored slices");
        if (t <= times.front()) return bilinear(field.front(), x, y);
        if (t >= times.back()) return bilinear(field.back(), x, y);
        const auto it = std::upper_bound(times.begin(), times.end(), t);
        const std::size_t hi = static_cast<std::size_t>(it - times.begin());
        const std::size_t lo = hi - 1;
        const double w = (t - times[lo]) / (times[hi] - times[lo]);
        return (1.0 - w) * bilinear(field[lo], x, y) + w * bilinear(field[hi], x, y);
    }

    double psi_at(double t, double x, double y) const { return trilinear(psi, t, x, y); }
    double u_at(double t, double x, double y) const { return trilinear(u_star, t, x, y); }
    double phi_at(double t, double x, double y) const { return trilinear(phi_star, t, x, y); }

    double psi_min() const {
        double m = psi.front().front();
        for (const auto& s : psi) for (double v : s) m = std::min(m, v);
        return m;
    }
    double psi_max() const {
        double m = psi.front().front();
        for (const auto& s : psi) for (double v : s) m = std::max(m, v);
        return m;
    }

    /// One stored slice as "t,x,y,psi,u_star,phi_star" rows, 9 significant digits.
    void write_slice_csv(std::ostream& os, std::size_t slice) const {
        os << "t,x,y,psi,u_star,phi_star\n";
        const std::string ts = format_sig9(times[slice]);
        for (int j = 0; j <= grid.nx; ++j)
            for (int k = 0; k <= grid.ny; ++k) {
                const std::size_t id = grid.idx(j, k);
                os << ts << ',' << format_sig9(grid.x(j)) << ',' << format_sig9(grid.y(k)) << ','
                   << format_sig9(psi[slice][id]) << ',' << format_sig9(u_star[slice][id]) << ','
                   << format_sig9(phi_star[slice][id]) << '\n';
            }
    }
};

} // namespace pvrisk

#endif
