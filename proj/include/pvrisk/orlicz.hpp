#ifndef PVRISK_ORLICZ_HPP
#define PVRISK_ORLICZ_HPP

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pvrisk/errors.hpp"

namespace pvrisk {

/// Young function family used by the recursive risk functional.
/// All members are normalized: phi(0) = 0, phi(1) = 1, convex and
/// nondecreasing on [0, inf).
struct OrliczSpec {
    enum class Kind { identity, power, scaled_exponential, custom } kind = Kind::power;
    double p = 1.5;    ///< exponent, power kind (p > 1)
    double mu = 1.0;   ///< rate, scaled-exponential kind (mu > 0)
    double phi1 = 1.5; ///< phi'(1), custom kind
    double phi2 = 0.75;///< phi''(1), custom kind

    static OrliczSpec identity() {
        OrliczSpec s; s.kind = Kind::identity; return s;
    }
    static OrliczSpec power(double p) {
        OrliczSpec s; s.kind = Kind::power; s.p = p; return s;
    }
    static OrliczSpec scaled_exponential(double mu) {
        OrliczSpec s; s.kind = Kind::scaled_exponential; s.mu = mu; return s;
    }
    /// Derivative-only description; eval_phi rejects this kind.
    static OrliczSpec custom(double phi1, double phi2) {
        OrliczSpec s; s.kind = Kind::custom; s.phi1 = phi1; s.phi2 = phi2; return s;
    }
};

inline std::string orlicz_kind_name(const OrliczSpec& s) {
    switch (s.kind) {
        case OrliczSpec::Kind::identity: return "identity";
        case OrliczSpec::Kind::power: return "power";
        case OrliczSpec::Kind::scaled_exponential: return "scaled-exponential";
        default: return "custom";
    }
}

inline double eval_phi(const OrliczSpec& spec, double z) {
    if (!(z >= 0.0))
        throw validation_error("eval_phi: argument must be nonnegative, got " + std::to_string(z));
    switch (spec.kind) {
        case OrliczSpec::Kind::identity:
            return z;
        case OrliczSpec::Kind::power:
            return std::pow(z, spec.p);
        case OrliczSpec::Kind::scaled_exponential:
            return std::expm1(spec.mu * z) / std::expm1(spec.mu);
        default:
            throw validation_error("eval_phi: custom kind stores derivatives only and "
                                   "cannot be evaluated pointwise");
    }
}

/// (phi'(1), phi''(1)). Closed forms per kind; custom returns the stored pair.
inline std::pair<double, double> derivatives_at_one(const OrliczSpec& spec) {
    switch (spec.kind) {
        case OrliczSpec::Kind::identity:
            return {1.0, 0.0};
        case OrliczSpec::Kind::power:
            return {spec.p, spec.p * (spec.p - 1.0)};
        case OrliczSpec::Kind::scaled_exponential: {
            const double c = std::exp(spec.mu) / std::expm1(spec.mu);
            return {spec.mu * c, spec.mu * spec.mu * c};
        }
        default:
            return {spec.phi1, spec.phi2};
    }
}

/// Net uncertainty aversion (phi'(1)^2 * eta + phi''(1)) / phi'(1).
/// The marching scheme depends on (phi, eta) only through this number.
inline double net_uncertainty_aversion(const OrliczSpec& spec, double eta) {
    if (!(eta > 0.0))
        throw validation_error("net_uncertainty_aversion: eta must be positive");
    const auto [phi1, phi2] = derivatives_at_one(spec);
    return ((phi1 * phi1) * eta + phi2) / phi1;
}

/// Structural checks. Built-in kinds are probed on a sample grid for
/// normalization, monotonicity and convexity; custom checks the stored pair.
inline void validate(const OrliczSpec& spec) {
    if (spec.kind == OrliczSpec::Kind::power && !(spec.p > 1.0))
        throw validation_error("orlicz power kind requires exponent p > 1");
    if (spec.kind == OrliczSpec::Kind::scaled_exponential && !(spec.mu > 0.0))
        throw validation_error("orlicz scaled-exponential kind requires mu > 0");
    if (spec.kind == OrliczSpec::Kind::custom) {
        if (!(spec.phi1 > 0.0) || !(spec.phi2 >= 0.0))
            throw validation_error("orlicz custom kind requires phi'(1) > 0 and phi''(1) >= 0");
        return;
    }
    const int n = 400;
    const double h = 4.0 / n;
    double prev = eval_phi(spec, 0.0);
    if (std::abs(prev) > 1e-12)
        throw validation_error("orlicz kind violates phi(0) = 0");
    if (std::abs(eval_phi(spec, 1.0) - 1.0) > 1e-12)
        throw validation_error("orlicz kind violates phi(1) = 1");
    for (int i = 1; i <= n; ++i) {
        const double cur = eval_phi(spec, i * h);
        if (cur < prev - 1e-12)
            throw validation_error("orlicz kind is not nondecreasing");
        if (i >= 2) {
            const double prev2 = eval_phi(spec, (i - 2) * h);
            if (cur - 2.0 * prev + prev2 < -1e-10)
                throw validation_error("orlicz kind is not convex");
        }
        prev = cur;
    }
    const auto [phi1, phi2] = derivatives_at_one(spec);
    if (!(phi1 > 0.0) || !(phi2 >= 0.0))
        throw validation_error("orlicz kind has invalid derivatives at 1");
}

/// A finite distribution of strictly positive outcomes.
struct DiscreteDistribution {
    std::vector<double> outcomes;
    std::vector<double> probabilities;
};

/// Smallest h > 0 with E[phi(Z/h)] <= 1, by bisection on [min Z, max Z]
/// to relative tolerance 1e-10. Requires an evaluable (non-custom) kind.
inline double orlicz_norm_static(const OrliczSpec& spec, const DiscreteDistribution& dist) {
    if (spec.kind == OrliczSpec::Kind::custom)
        throw validation_error("orlicz_norm_static: custom kind cannot be evaluated");
    if (dist.outcomes.empty() || dist.outcomes.size() != dist.probabilities.size())
        throw validation_error("orlicz_norm_static: empty or ragged distribution");
    double psum = 0.0, zmin = dist.outcomes[0], zmax = dist.outcomes[0];
    for (std::size_t i = 0; i < dist.outcomes.size(); ++i) {
        if (!(dist.outcomes[i] > 0.0))
            throw validation_error("orlicz_norm_static: outcomes must be strictly positive");
        if (!(dist.probabilities[i] >= 0.0))
            throw validation_error("orlicz_norm_static: probabilities must be nonnegative");
        psum += dist.probabilities[i];
        zmin = std::min(zmin, dist.outcomes[i]);
        zmax = std::max(zmax, dist.outcomes[i]);
    }
    if (std::abs(psum - 1.0) > 1e-12)
        throw validation_error("orlicz_norm_static: probabilities sum to " + std::to_string(psum));

    auto mean_phi = [&](double h) {
        double acc = 0.0;
        for (std::size_t i = 0; i < dist.outcomes.size(); ++i)
            acc += dist.probabilities[i] * eval_phi(spec, dist.outcomes[i] / h);
        return acc;
    };

    if (zmin == zmax) return zmax;          // degenerate: phi(1) = 1 exactly
    if (mean_phi(zmin) <= 1.0) return zmin; // all mass at the minimum

    double lo = zmin, hi = zmax;            // mean_phi(lo) > 1 >= mean_phi(hi)
    while ((hi - lo) / hi > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (mean_phi(mid) <= 1.0) hi = mid; else lo = mid;
    }
    return hi;
}

} // namespace pvrisk

#endif
