// Problem definitions: the delayed van der Pol oscillator and a polar
// normal-form benchmark with an exact parameterization.

#ifndef ISOCHRON_MODELS_HPP
#define ISOCHRON_MODELS_HPP

#include <cmath>
#include <functional>
#include <string>

#include "composition.hpp"
#include "ode.hpp"

namespace isochron {

enum class DelayKind { constant, exponential };

inline std::string to_string(DelayKind k) { return k == DelayKind::constant ? "constant" : "exp"; }

inline DelayKind parse_delay_kind(const std::string& s)
{
    if (s == "constant") return DelayKind::constant;
    if (s == "exp" || s == "exponential") return DelayKind::exponential;
    throw contract_error("unknown delay kind '" + s + "' (expected constant or exp)");
}

/// x' = X0(x) + eps P(x, x(t - r(x)), eps).
struct SDDEModel {
    std::string name;
    PlanarField field;
    std::function<Vec2(const Vec2& x, const Vec2& xd, double eps)> perturbation;
    std::function<Mat2(const Vec2& x, const Vec2& xd, double eps)> dP_dx;
    std::function<Mat2(const Vec2& x, const Vec2& xd, double eps)> dP_dxd;
    /// P applied to Fourier-Taylor pairs.
    std::function<FTVec2(const FTVec2& x, const FTVec2& xd, double eps)> perturbation_series;
    DelayFunction delay;
    double epsilon = 0;

    Vec2 P(const Vec2& x, const Vec2& xd) const { return perturbation(x, xd, epsilon); }
    FTVec2 P(const FTVec2& x, const FTVec2& xd) const { return perturbation_series(x, xd, epsilon); }
    double r(const Vec2& x) const { return delay(x[delay.component]); }
};

inline DelayFunction make_delay(DelayKind kind, double c, double gamma)
{
    if (kind == DelayKind::constant)
        return {[c](double, std::span<double> out) {
                    std::fill(out.begin(), out.end(), 0.0);
                    out[0] = c;
                },
                0, c};
    return {[c, gamma](double x, std::span<double> out) {
                double v = c * std::exp(gamma * x);
                for (double& o : out) {
                    o = v;
                    v *= gamma;
                }
            },
            0, std::nullopt};
}

inline PlanarField van_der_pol(double mu)
{
    return make_field(
        [mu](const auto& x, const auto& y) {
            using T = std::decay_t<decltype(x)>;
            return std::array<T, 2>{y, mu * (1.0 - x * x) * y - x};
        },
        [mu](const Vec2& v) {
            return Mat2{{{0.0, 1.0}, {-2.0 * mu * v[0] * v[1] - 1.0, mu * (1.0 - v[0] * v[0])}}};
        },
        {{"mu", mu}});
}

/// x' = y, y' = mu (1 - x^2) y - x + eps x(t - r(x)), with r = c or c e^{gamma x}.
inline SDDEModel vdp_sdde(double mu, double epsilon, DelayKind kind, double c = 0.006, double gamma = 2.0)
{
    if (!(mu > 0)) throw contract_error("vdp_sdde: mu must be positive");
    if (!(epsilon >= 0)) throw contract_error("vdp_sdde: epsilon must be non-negative");
    if (!(c > 0)) throw contract_error("vdp_sdde: delay constant c must be positive");
    if (!std::isfinite(gamma)) throw contract_error("vdp_sdde: gamma must be finite");
    SDDEModel m;
    m.name = "van_der_pol";
    m.field = van_der_pol(mu);
    m.field.parameters["epsilon"] = epsilon;
    m.field.parameters["delay_c"] = c;
    m.field.parameters["delay_gamma"] = kind == DelayKind::constant ? 0.0 : gamma;
    m.perturbation = [](const Vec2&, const Vec2& xd, double) { return Vec2{0.0, xd[0]}; };
    m.dP_dx = [](const Vec2&, const Vec2&, double) { return Mat2{}; };
    m.dP_dxd = [](const Vec2&, const Vec2&, double) { return Mat2{{{0.0, 0.0}, {1.0, 0.0}}}; };
    m.perturbation_series = [](const FTVec2&, const FTVec2& xd, double) {
        return FTVec2{FourierTaylor::zero(xd[0].n_theta(), xd[0].degree()), xd[0]};
    };
    m.delay = make_delay(kind, c, gamma);
    m.epsilon = epsilon;
    return m;
}

struct Benchmark {
    SDDEModel model;
    Parameterization exact_K;
};

/// Polar normal form r' = lambda0 (r - 1), phi' = 2 pi omega0, with exact
/// K(theta, s) = (1 + s)(cos 2 pi theta, sin 2 pi theta) and eps = 0.
inline Benchmark normal_form_benchmark(double omega0, double lambda0, std::size_t n_theta = 64,
                                       std::size_t degree = 1)
{
    if (!(omega0 > 0) || !(lambda0 < 0)) throw contract_error("normal_form_benchmark: need omega0 > 0 > lambda0");
    const double w = two_pi * omega0;
    Benchmark b;
    b.model.name = "normal_form";
    b.model.field = make_field(
        [omega0, lambda0, w](const auto& x, const auto& y) {
            using T = std::decay_t<decltype(x)>;
            using std::pow;
            const T g = lambda0 * (1.0 - pow(x * x + y * y, -0.5));
            return std::array<T, 2>{g * x - w * y, g * y + w * x};
        },
        [lambda0, w](const Vec2& v) {
            const double r2 = v[0] * v[0] + v[1] * v[1];
            const double r = std::sqrt(r2);
            const double g = lambda0 * (1.0 - 1.0 / r);
            const double h = lambda0 / (r2 * r); // d g / d x_i = h x_i
            return Mat2{{{g + h * v[0] * v[0], h * v[0] * v[1] - w}, {h * v[0] * v[1] + w, g + h * v[1] * v[1]}}};
        },
        {{"omega0", omega0}, {"lambda0", lambda0}});
    b.model.perturbation = [](const Vec2&, const Vec2&, double) { return Vec2{0.0, 0.0}; };
    b.model.dP_dx = [](const Vec2&, const Vec2&, double) { return Mat2{}; };
    b.model.dP_dxd = [](const Vec2&, const Vec2&, double) { return Mat2{}; };
    b.model.perturbation_series = [](const FTVec2& x, const FTVec2&, double) {
        return FTVec2{FourierTaylor::zero(x[0].n_theta(), x[0].degree()),
                      FourierTaylor::zero(x[0].n_theta(), x[0].degree())};
    };
    b.model.delay = make_delay(DelayKind::constant, 0.006, 0.0);
    b.model.epsilon = 0;

    auto c = PeriodicFunction::sample(n_theta, [](double t) { return std::cos(two_pi * t); });
    auto s = PeriodicFunction::sample(n_theta, [](double t) { return std::sin(two_pi * t); });
    std::vector<PeriodicFunction> k1(degree + 1, PeriodicFunction::zero(n_theta)), k2 = k1;
    k1[0] = c;
    k2[0] = s;
    if (degree >= 1) {
        k1[1] = c;
        k2[1] = s;
    }
    b.exact_K = {TorusMapFT({0, 0}, {FourierTaylor(k1), FourierTaylor(k2)}), omega0, lambda0, 1.0};
    return b;
}

} // namespace isochron

#endif
