// Planar vector fields, adaptive integration and limit-cycle seeding.

#ifndef ISOCHRON_ODE_HPP
#define ISOCHRON_ODE_HPP

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "error.hpp"
#include "fourier_taylor.hpp"

namespace isochron {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

inline constexpr double default_ode_tol = 1e-12;

/// x' = f(x) in the plane. `series` applies f to a Fourier-Taylor pair.
struct PlanarField {
    std::function<Vec2(const Vec2&)> f;
    std::function<Mat2(const Vec2&)> jac;
    std::function<FTVec2(const FTVec2&)> series;
    std::map<std::string, double> parameters;

    Vec2 operator()(const Vec2& x) const { return f(x); }
};

/// Builds a field from a generic callable g(x, y) -> {f1, f2} that accepts
/// both doubles and FourierTaylor series.
template <class G>
PlanarField make_field(G g, std::function<Mat2(const Vec2&)> jac, std::map<std::string, double> parameters = {})
{
    PlanarField field;
    field.f = [g](const Vec2& x) {
        auto [a, b] = g(x[0], x[1]);
        return Vec2{a, b};
    };
    field.series = [g](const FTVec2& x) {
        auto [a, b] = g(x[0], x[1]);
        return FTVec2{std::move(a), std::move(b)};
    };
    field.jac = std::move(jac);
    field.parameters = std::move(parameters);
    return field;
}

namespace detail {

template <std::size_t N>
using OdeState = std::array<double, N>;

template <std::size_t N, class Sys>
OdeState<N> flow(const Sys& sys, OdeState<N> x, double t, double tol)
{
    namespace odeint = boost::numeric::odeint;
    if (t == 0) return x;
    auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_fehlberg78<OdeState<N>>());
    try {
        odeint::integrate_adaptive(stepper, sys, x, 0.0, t, t / 64);
    } catch (const std::exception& e) {
        throw numerical_error(std::string("integrate: ") + e.what());
    }
    for (double v : x)
        if (!std::isfinite(v)) throw numerical_error("integrate: solution is not finite");
    return x;
}

/// (x, U, int tr DX) with U' = DX U.
inline auto variational_system(const PlanarField& field)
{
    return [&field](const OdeState<7>& z, OdeState<7>& dz, double) {
        const Vec2 x{z[0], z[1]};
        const Vec2 v = field.f(x);
        const Mat2 J = field.jac(x);
        dz[0] = v[0];
        dz[1] = v[1];
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) dz[2 + 2 * i + j] = J[i][0] * z[2 + j] + J[i][1] * z[4 + j];
        dz[6] = J[0][0] + J[1][1];
    };
}

} // namespace detail

inline Vec2 integrate(const PlanarField& field, const Vec2& x0, double t, double tol = default_ode_tol)
{
    if (!(tol > 0)) throw contract_error("integrate: tol must be positive");
    auto sys = [&field](const detail::OdeState<2>& x, detail::OdeState<2>& dx, double) { dx = field.f(x); };
    return detail::flow<2>(sys, x0, t, tol);
}

struct VariationalFlow {
    Vec2 x;
    Mat2 U;
    double trace_integral; // int_0^t tr DX(x(t')) dt'
};

inline VariationalFlow integrate_variational(const PlanarField& field, const Vec2& x0, double t,
                                             double tol = default_ode_tol)
{
    if (!(tol > 0)) throw contract_error("integrate: tol must be positive");
    detail::OdeState<7> z{x0[0], x0[1], 1, 0, 0, 1, 0};
    z = detail::flow<7>(detail::variational_system(field), z, t, tol);
    return {{z[0], z[1]}, {{{z[2], z[3]}, {z[4], z[5]}}}, z[6]};
}

struct CycleSeed {
    Vec2 point_on_cycle{};
    double period = 0;
    Mat2 monodromy{};
    double floquet_lambda0 = 0;
    Vec2 k1_at_0{};
    double trivial_multiplier = 1;
    double stable_multiplier = 0;
    /// |F| of the return-map Newton iterations.
    std::vector<double> newton_errors;

    double omega0() const { return 1.0 / period; }
};

struct CycleOptions {
    double tol = default_ode_tol;
    std::size_t max_newton = 30;
    double newton_tol = 1e-12;
    double max_time = 1e3;
};

namespace detail {

/// Marches from x until it crosses {x2 = 0, x1 > 0} with the given direction
/// (+1 upward, -1 downward, 0 either). Returns (time, point, direction).
inline std::tuple<double, Vec2, int> next_crossing(const PlanarField& field, Vec2 x, int direction,
                                                   const CycleOptions& opts)
{
    namespace odeint = boost::numeric::odeint;
    auto sys = [&field](const OdeState<2>& z, OdeState<2>& dz, double) { dz = field.f(z); };
    auto stepper = odeint::make_controlled(opts.tol, opts.tol, odeint::runge_kutta_fehlberg78<OdeState<2>>());
    double t = 0, dt = 1e-3;
    OdeState<2> z = x;
    // crossings count only once the orbit has left a neighbourhood of the section
    bool left = std::abs(z[1]) > 1e-6;
    while (t < opts.max_time) {
        OdeState<2> prev = z;
        const double t_prev = t;
        std::size_t tries = 0;
        while (stepper.try_step(sys, z, t, dt) == odeint::fail) {
            if (++tries > 500) throw numerical_error("find_cycle: step size underflow");
        }
        const double h = t - t_prev;
        if (!left) {
            left = std::abs(z[1]) > 1e-6;
            continue;
        }
        const bool up = prev[1] < 0 && z[1] >= 0;
        const bool down = prev[1] > 0 && z[1] <= 0;
        if (!(up || down)) continue;
        const int dir = up ? 1 : -1;
        if (direction != 0 && dir != direction) continue;
        // regula falsi on the sub-step length (Illinois variant)
        double a = 0, b = h, ya = prev[1], yb = z[1];
        OdeState<2> zc = z;
        double tc = b;
        for (int it = 0; it < 100 && std::abs(b - a) > 1e-15 * (1 + t); ++it) {
            tc = (a * yb - b * ya) / (yb - ya);
            zc = flow<2>(sys, prev, tc, opts.tol);
            if (zc[1] == 0) break;
            if ((zc[1] > 0) == (yb > 0)) {
                b = tc;
                yb = zc[1];
                ya *= 0.5;
            } else {
                a = tc;
                ya = zc[1];
                yb *= 0.5;
            }
        }
        if (zc[0] > 0) return {t_prev + tc, Vec2{zc[0], zc[1]}, dir};
    }
    throw numerical_error("find_cycle: no crossing of the section {x2 = 0, x1 > 0} found");
}

inline Vec2 stable_eigenvector(const Mat2& U, double mu)
{
    const double r0 = std::hypot(U[0][0] - mu, U[0][1]);
    const double r1 = std::hypot(U[1][0], U[1][1] - mu);
    Vec2 v = r0 >= r1 ? Vec2{-U[0][1], U[0][0] - mu} : Vec2{U[1][1] - mu, -U[1][0]};
    const double nv = std::hypot(v[0], v[1]);
    return {v[0] / nv, v[1] / nv};
}

} // namespace detail

/// Locates an attracting limit cycle through the section {x2 = 0, x1 > 0} by
/// Newton on the return map in (x1, T), and returns its Floquet data.
inline CycleSeed find_cycle(const PlanarField& field, const Vec2& guess, const CycleOptions& opts = {})
{
    auto [t1, p1, dir] = detail::next_crossing(field, guess, 0, opts);
    auto [T, p2, dir2] = detail::next_crossing(field, p1, dir, opts);
    (void)t1;
    (void)dir2;
    double x1 = p2[0];

    CycleSeed seed;
    bool converged = false;
    for (std::size_t it = 0; it < opts.max_newton; ++it) {
        auto vf = integrate_variational(field, {x1, 0.0}, T, opts.tol);
        const Vec2 F{vf.x[0] - x1, vf.x[1]};
        seed.newton_errors.push_back(std::hypot(F[0], F[1]));
        const Vec2 fx = field.f(vf.x);
        // columns: d/dx1 and d/dT
        const double a = vf.U[0][0] - 1, b = fx[0], c = vf.U[1][0], d = fx[1];
        const double det = a * d - b * c;
        if (det == 0 || !std::isfinite(det)) throw numerical_error("find_cycle: singular return-map Jacobian");
        const double dx = (d * F[0] - b * F[1]) / det;
        const double dT = (a * F[1] - c * F[0]) / det;
        x1 -= dx;
        T -= dT;
        if (!(T > 0)) throw numerical_error("find_cycle: period became non-positive");
        if (std::abs(dx) < opts.newton_tol && std::abs(dT) < opts.newton_tol * std::max(1.0, T)) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw convergence_error("find_cycle: return-map Newton did not converge in " + std::to_string(opts.max_newton) +
                                " iterations");

    const Vec2 v0 = field.f({x1, 0.0});
    if (std::hypot(v0[0], v0[1]) < 1e-8) throw numerical_error("find_cycle: converged to an equilibrium, not a cycle");
    auto vf = integrate_variational(field, {x1, 0.0}, T, opts.tol);
    seed.point_on_cycle = {x1, 0.0};
    seed.period = T;
    seed.monodromy = vf.U;
    const double tr = vf.U[0][0] + vf.U[1][1];
    const double det = vf.U[0][0] * vf.U[1][1] - vf.U[0][1] * vf.U[1][0];
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
    const double m1 = tr / 2 + disc, m2 = tr / 2 - disc;
    seed.trivial_multiplier = std::abs(m1 - 1) < std::abs(m2 - 1) ? m1 : m2;
    // the product of the multipliers is exp(int tr DX); the trivial one is 1 on the exact cycle
    seed.stable_multiplier = std::exp(vf.trace_integral);
    seed.floquet_lambda0 = vf.trace_integral / T;
    if (!(seed.floquet_lambda0 < 0)) throw numerical_error("find_cycle: the cycle is not attracting");
    seed.k1_at_0 = detail::stable_eigenvector(vf.U, seed.stable_multiplier);
    return seed;
}

/// K(theta, s) = K0(theta) + K1(theta) b0 s with K0 the cycle sampled at
/// theta T and K1(theta) = U(theta T) K1(0) e^{-lambda0 theta T}, scaled to
/// unit RMS length.
inline Parameterization seed_parameterization(const PlanarField& field, const CycleSeed& seed, std::size_t n_theta,
                                              double b0 = 1.0, double tol = default_ode_tol)
{
    detail::require_grid(n_theta);
    if (!(seed.period > 0)) throw contract_error("seed_parameterization: invalid seed");
    const double lam = seed.floquet_lambda0;
    auto sys = [&field, lam](const detail::OdeState<4>& z, detail::OdeState<4>& dz, double) {
        const Vec2 x{z[0], z[1]};
        const Vec2 v = field.f(x);
        const Mat2 J = field.jac(x);
        dz[0] = v[0];
        dz[1] = v[1];
        dz[2] = (J[0][0] - lam) * z[2] + J[0][1] * z[3];
        dz[3] = J[1][0] * z[2] + (J[1][1] - lam) * z[3];
    };
    std::array<std::vector<double>, 2> k0, k1;
    for (auto& v : k0) v.resize(n_theta);
    for (auto& v : k1) v.resize(n_theta);
    detail::OdeState<4> z{seed.point_on_cycle[0], seed.point_on_cycle[1], seed.k1_at_0[0], seed.k1_at_0[1]};
    const double dt = seed.period / static_cast<double>(n_theta);
    double norm2 = 0;
    for (std::size_t i = 0; i < n_theta; ++i) {
        if (i > 0) z = detail::flow<4>(sys, z, dt, tol);
        for (std::size_t c = 0; c < 2; ++c) {
            k0[c][i] = z[c];
            k1[c][i] = z[2 + c];
        }
        norm2 += z[2] * z[2] + z[3] * z[3];
    }
    const double scale = 1.0 / std::sqrt(norm2 / static_cast<double>(n_theta));
    FTVec2 parts;
    for (std::size_t c = 0; c < 2; ++c) {
        for (double& v : k1[c]) v *= scale;
        parts[c] = FourierTaylor({PeriodicFunction::from_samples(k0[c]), PeriodicFunction::from_samples(k1[c])});
    }
    Parameterization K{TorusMapFT({0, 0}, std::move(parts)), seed.omega0(), lam, b0};
    K.validate();
    return K;
}

/// X o K - (omega d/dtheta + lambda s d/ds) K for K in the scaled variable.
inline FTVec2 unperturbed_residual(const PlanarField& field, const TorusMapFT& K, double omega, double lambda)
{
    auto XK = field.series(K.parts());
    FTVec2 E;
    for (std::size_t c = 0; c < 2; ++c) {
        auto lhs = d_theta(K.part(c)) * omega + s_d_s(K.part(c)) * lambda;
        if (K.winding()[c] != 0) lhs = lhs + omega * K.winding()[c];
        E[c] = XK[c].truncated(K.degree()) - lhs;
    }
    return E;
}

} // namespace isochron

#endif
