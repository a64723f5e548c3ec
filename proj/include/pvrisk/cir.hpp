#ifndef PVRISK_CIR_HPP
#define PVRISK_CIR_HPP

#include <cmath>
#include <string>

#include "pvrisk/errors.hpp"
#include "pvrisk/io.hpp"
#include "pvrisk/quadrature.hpp"

namespace pvrisk {

/// Square-root diffusion benchmark with exponential terminal data:
///   dX = (a - r X) dt + sigma sqrt(r X) dB,   value(T, x) = exp(p x).
/// The robustified value function is exp(alpha_t x + beta_t) in closed form,
/// which makes this the convergence oracle for the marching scheme.
struct CIRParams {
    double a = 1.0;
    double r = 1.0;
    double sigma = 0.2;
    double p = 0.1;        ///< terminal exponent
    double eta_prime = 0.5;///< net uncertainty aversion
    double horizon = 1.0;  ///< T
};

namespace detail {
inline double cir_accoef(const CIRParams& c) {
    return 0.5 * c.sigma * c.sigma * (1.0 + c.eta_prime);
}
} // namespace detail

inline void validate(const CIRParams& c) {
    if (!(c.a > 0.0)) throw validation_error("cir: a must be positive");
    if (!(c.r > 0.0)) throw validation_error("cir: r must be positive");
    if (!(c.sigma > 0.0)) throw validation_error("cir: sigma must be positive");
    if (!(c.eta_prime >= 0.0)) throw validation_error("cir: eta_prime must be nonnegative");
    if (!(c.horizon > 0.0)) throw validation_error("cir: horizon must be positive");
    if (c.p > 0.0) {
        const double A = detail::cir_accoef(c);
        if (1.0 / c.p < A) {
            // denominator A + (1/p - A) e^{r (T - t)} crosses zero at t*
            const double tau = std::log(A / (A - 1.0 / c.p)) / c.r;
            if (tau <= c.horizon)
                throw validation_error("cir: closed form is singular at t = " +
                                       format_full(c.horizon - tau) +
                                       " (denominator of alpha vanishes); reduce p, horizon "
                                       "or eta_prime");
        }
    }
}

/// Riccati solution alpha_t = 1 / (A + (1/p - A) e^{r (T - t)}), A = sigma^2 (1 + eta') / 2.
inline double cir_alpha(const CIRParams& c, double t) {
    if (c.p == 0.0) return 0.0;
    const double A = detail::cir_accoef(c);
    return 1.0 / (A + (1.0 / c.p - A) * std::exp(c.r * (c.horizon - t)));
}

/// d alpha / dt from the Riccati equation alpha' = r alpha - r A alpha^2.
inline double cir_alpha_dot(const CIRParams& c, double t) {
    const double al = cir_alpha(c, t);
    return c.r * al - c.r * detail::cir_accoef(c) * al * al;
}

/// beta_t = a * integral_t^T alpha_s ds (adaptive quadrature).
inline double cir_beta(const CIRParams& c, double t) {
    if (c.p == 0.0) return 0.0;
    return c.a * integrate([&](double s) { return cir_alpha(c, s); }, t, c.horizon, 1e-12);
}

inline double cir_exact_value(const CIRParams& c, double t, double x) {
    return std::exp(cir_alpha(c, t) * x + cir_beta(c, t));
}

/// Pointwise residual of the robustified backward equation at (t, x) using the
/// closed-form derivatives. Analytically zero; numerically at roundoff level.
inline double cir_hjb_residual(const CIRParams& c, double t, double x) {
    const double al = cir_alpha(c, t);
    const double psi = cir_exact_value(c, t, x);
    const double psi_t = (cir_alpha_dot(c, t) * x - c.a * al) * psi;
    const double psi_x = al * psi;
    const double psi_xx = al * al * psi;
    const double diff2 = c.sigma * c.sigma * c.r * x;
    return psi_t + (c.a - c.r * x) * psi_x + 0.5 * diff2 * psi_xx +
           c.eta_prime * diff2 * psi_x * psi_x / (2.0 * psi);
}

/// The same residual normalized by the magnitude of its constituent terms,
/// so the check is scale-free.
inline double cir_hjb_residual_relative(const CIRParams& c, double t, double x) {
    const double al = cir_alpha(c, t);
    const double psi = cir_exact_value(c, t, x);
    const double psi_x = al * psi;
    const double diff2 = c.sigma * c.sigma * c.r * x;
    const double scale = std::abs((cir_alpha_dot(c, t) * x - c.a * al) * psi) +
                         std::abs((c.a - c.r * x) * psi_x) +
                         std::abs(0.5 * diff2 * al * al * psi) +
                         std::abs(c.eta_prime * diff2 * psi_x * psi_x / (2.0 * psi));
    return std::abs(cir_hjb_residual(c, t, x)) / std::max(scale, 1e-300);
}

} // namespace pvrisk

#endif
