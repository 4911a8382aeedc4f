// Fourier solvers for (omega d/dtheta + lambda s d/ds - shift) u = E.
//
// Mode (j, k) is divided by lambda j + 2 pi i omega k - shift. The Nyquist
// mode of an even grid is not resolved by the spectral derivative; it is set
// to zero in every solution.

#ifndef ISOCHRON_COHOMOLOGY_HPP
#define ISOCHRON_COHOMOLOGY_HPP

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <utility>

#include "error.hpp"
#include "fourier_taylor.hpp"

namespace isochron {

inline constexpr double default_obstruction_tol = 1e-9;
inline constexpr double resonance_floor = 1e-13;

struct CohomologySpec {
    double omega = 1;
    double lambda = -1;
    double shift = 0;
    /// (order j, mode 0) coefficient set to zero; its right-hand side must vanish.
    std::optional<std::pair<std::size_t, std::size_t>> pinned;
    double obstruction_tol = default_obstruction_tol;

    /// (omega d/dtheta + lambda s d/ds) u = E, pinning the (0,0) coefficient.
    static CohomologySpec family_one(double omega, double lambda)
    {
        return {omega, lambda, 0.0, std::pair<std::size_t, std::size_t>{0, 0}};
    }

    /// (omega d/dtheta + lambda s d/ds - lambda) u = E, pinning the (1,0) coefficient.
    static CohomologySpec family_two(double omega, double lambda)
    {
        return {omega, lambda, lambda, std::pair<std::size_t, std::size_t>{1, 0}};
    }
};

/// Solves (omega d/dtheta + c) u = e for one periodic coefficient. With
/// `pin_mean`, the mean of u is set to that value; the mode-0 equation
/// c * pin_mean = mean(e) must then hold to `obstruction_tol`.
inline PeriodicFunction solve_cohomology_order(const PeriodicFunction& e, double omega, double c,
                                               std::optional<double> pin_mean = std::nullopt,
                                               double obstruction_tol = default_obstruction_tol)
{
    const std::size_t n = e.size();
    auto modes = e.modes();
    for (std::size_t k = 0; k < modes.size(); ++k) {
        if (k == 0 && pin_mean) {
            const double gap = std::abs(modes[0].real() - c * *pin_mean);
            if (gap > obstruction_tol)
                throw obstruction_error("cohomology obstruction: |E_0 - c u_0| = " + std::to_string(gap), gap);
            modes[0] = *pin_mean;
            continue;
        }
        if (n % 2 == 0 && k == n / 2) {
            modes[k] = 0;
            continue;
        }
        const cplx div(c, two_pi * omega * static_cast<double>(k));
        if (std::abs(div) < resonance_floor)
            throw resonance_error("resonant divisor at mode " + std::to_string(k) +
                                  " (|divisor| = " + std::to_string(std::abs(div)) + ")");
        modes[k] /= div;
    }
    return PeriodicFunction::from_coeffs(detail::modes_to_coeffs(modes, n));
}

inline FourierTaylor solve_cohomology(const FourierTaylor& E, const CohomologySpec& spec)
{
    if (spec.pinned && spec.pinned->second != 0)
        throw contract_error("solve_cohomology: only mean (k = 0) coefficients can be pinned");
    std::vector<PeriodicFunction> u;
    u.reserve(E.degree() + 1);
    for (std::size_t j = 0; j <= E.degree(); ++j) {
        const double c = spec.lambda * static_cast<double>(j) - spec.shift;
        std::optional<double> pin;
        if (spec.pinned && spec.pinned->first == j) pin = 0.0;
        u.push_back(solve_cohomology_order(E[j], spec.omega, c, pin, spec.obstruction_tol));
    }
    return FourierTaylor(std::move(u));
}

/// Spectral application of (omega d/dtheta + lambda s d/ds - shift).
inline FourierTaylor apply_cohomology_operator(const FourierTaylor& u, const CohomologySpec& spec)
{
    return d_theta(u) * spec.omega + s_d_s(u) * spec.lambda - u * spec.shift;
}

/// Mean in theta of the order-j coefficient.
inline double average_theta(const FourierTaylor& E, std::size_t order)
{
    if (order > E.degree())
        throw contract_error("average_theta: order " + std::to_string(order) + " exceeds degree " +
                             std::to_string(E.degree()));
    return E[order].mean();
}

} // namespace isochron

#endif
