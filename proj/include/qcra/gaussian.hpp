#pragma once

// Standard-normal kernels and the discretization of latent risk factors onto
// qubit grids.

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qcra/errors.hpp"

namespace qcra {

/// Standard normal CDF. Evaluated as 0.5 * erfc(-x / sqrt(2)); the libm erfc
/// is accurate to a few ulp, so the absolute error is well below 1e-15.
inline double std_normal_cdf(double x) {
    if (!std::isfinite(x)) {
        throw DomainError("std_normal_cdf: non-finite argument");
    }
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

inline double std_normal_pdf(double x) {
    constexpr double inv_sqrt_2pi = 0.3989422804014326779399461;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

namespace detail {

// Acklam's rational approximation (relative error ~1e-9), used only as the
// starting point for the Newton refinement below.
inline double ppf_initial_guess(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

} // namespace detail

/// Inverse of std_normal_cdf on (0,1). Newton steps from a rational initial
/// guess, falling back to bisection whenever a step leaves the bracket.
inline double std_normal_ppf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("std_normal_ppf: probability must lie in (0,1), got " +
                          std::to_string(p));
    }
    if (p == 0.5) {
        return 0.0;
    }
    double lo = -40.0;
    double hi = 40.0;
    double x = detail::ppf_initial_guess(p);
    for (int iter = 0; iter < 100; ++iter) {
        const double f = std_normal_cdf(x) - p;
        if (f < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        const double dens = std_normal_pdf(x);
        double next = dens > 0.0 ? x - f / dens : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) {
            return next;
        }
        x = next;
    }
    return x;
}

/// A truncated standard-normal factor discretized onto 2^n_z equally spaced
/// points z_i = slope * i + intercept.
struct FactorGrid {
    int n_z = 0;
    double z_min = 0.0;
    double z_max = 0.0;
    std::vector<double> values;
    std::vector<double> probs;

    std::size_t size() const { return values.size(); }
    double slope() const { return (z_max - z_min) / static_cast<double>(values.size() - 1); }
    double intercept() const { return z_min; }
    double midpoint() const { return 0.5 * (z_min + z_max); }
};

inline constexpr double kDefaultBoundSigmas = 3.0;

/// Discretizes N(mean, std^2) truncated to mean +- bound_sigmas*std. Each point
/// gets mass proportional to the density at that point, then the masses are
/// renormalized.
inline FactorGrid discretize_normal(int n_z, double mean = 0.0, double std_dev = 1.0,
                                    double bound_sigmas = kDefaultBoundSigmas) {
    if (n_z < 1) {
        throw DomainError("discretize_normal: need at least one qubit per factor");
    }
    if (n_z > 24) {
        throw DomainError("discretize_normal: too many qubits per factor");
    }
    if (!(std_dev > 0.0) || !(bound_sigmas > 0.0) || !std::isfinite(mean)) {
        throw DomainError("discretize_normal: std and bound_sigmas must be positive");
    }
    FactorGrid g;
    g.n_z = n_z;
    g.z_min = mean - bound_sigmas * std_dev;
    g.z_max = mean + bound_sigmas * std_dev;
    const std::size_t m = std::size_t{1} << n_z;
    g.values.resize(m);
    g.probs.resize(m);
    const double step = (g.z_max - g.z_min) / static_cast<double>(m - 1);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        g.values[i] = g.z_min + step * static_cast<double>(i);
        g.probs[i] = std_normal_pdf((g.values[i] - mean) / std_dev);
        total += g.probs[i];
    }
    // Symmetric grids: pin both mirror points to the same value so the
    // symmetry holds bit for bit.
    for (std::size_t i = 0; i < m / 2; ++i) {
        const double avg = 0.5 * (g.probs[i] + g.probs[m - 1 - i]);
        g.probs[i] = g.probs[m - 1 - i] = avg;
    }
    for (auto& p : g.probs) {
        p /= total;
    }
    return g;
}

/// Default probability given the combined factor value y = sum_i alpha_i z_i:
/// F((F^-1(p0) - sqrt(rho) * y) / sqrt(1 - rho)), kept strictly inside (0,1).
inline double conditional_pd_given_combined(double p0, double rho, double y) {
    if (!(rho >= 0.0 && rho < 1.0)) {
        throw DomainError("conditional_pd: rho must lie in [0,1)");
    }
    if (!std::isfinite(y)) {
        throw DomainError("conditional_pd: non-finite factor value");
    }
    const double arg = (std_normal_ppf(p0) - std::sqrt(rho) * y) / std::sqrt(1.0 - rho);
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    return std::clamp(std_normal_cdf(arg), lo, hi);
}

/// Conditional default probability under the multi-factor Gaussian model.
/// With a single factor of weight 1 this is the classic one-factor formula.
inline double conditional_pd(double p0, double rho, std::span<const double> alphas,
                             std::span<const double> z) {
    if (alphas.size() != z.size() || alphas.empty()) {
        throw DomainError("conditional_pd: alphas and z must have the same nonzero length");
    }
    double y = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        y += alphas[i] * z[i];
    }
    return conditional_pd_given_combined(p0, rho, y);
}

/// Rotation angle that prepares P(|1>) = p on a fresh qubit: 2 arcsin(sqrt p).
inline double probability_angle(double p) { return 2.0 * std::asin(std::sqrt(p)); }

} // namespace qcra
