// Solvers for K (quasi-Newton) and for the perturbed W order by order
// (fixed point), with normalization, scaling and stopping logic.

#ifndef ISOCHRON_SOLVER_HPP
#define ISOCHRON_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cohomology.hpp"
#include "composition.hpp"
#include "models.hpp"
#include "ode.hpp"

namespace isochron {

struct SolverConfig {
    std::size_t n_theta = 1024;
    std::size_t degree = 16;
    double scale_b0 = 1.0;
    double scale_b = 1.0;
    double tol_residual = 1e-10;
    double tol_correction = 1e-10;
    std::size_t max_iter = 100;
    double normalization_rho = 1.0;
    double normalization_a = 0.5;
    /// Consecutive residual increases tolerated before aborting.
    std::size_t divergence_patience = 5;
    double scaling_safety = 0.95;
    bool two_pass_scaling = true;
    CompositionOptions composition{};
    double det_floor = default_det_floor;
    /// Newton corrections keep the modes |k| <= filter_fraction n_theta.
    double filter_fraction = 1.0 / 3.0;
    /// Perturbed orders keep iterating after the stopping test while the
    /// corrections still halve, so they end at round-off.
    bool polish = true;

    void validate() const
    {
        detail::require_grid(n_theta);
        if (!(tol_residual > 0) || !(tol_correction > 0)) throw contract_error("solver tolerances must be positive");
        if (max_iter < 1) throw contract_error("solver needs max_iter >= 1");
        if (!(scale_b0 > 0) || !(scale_b > 0)) throw contract_error("scaling factors must be positive");
        if (normalization_rho == 0 || !std::isfinite(normalization_rho))
            throw contract_error("normalization rho must be finite and nonzero");
        if (!(scaling_safety > 0 && scaling_safety <= 1)) throw contract_error("scaling safety must lie in (0, 1]");
        if (divergence_patience < 1) throw contract_error("divergence patience must be >= 1");
        if (!(filter_fraction > 0 && filter_fraction <= 0.5)) throw contract_error("filter fraction must lie in (0, 1/2]");
    }

    std::size_t filter_kmax(std::size_t n) const
    {
        return static_cast<std::size_t>(filter_fraction * static_cast<double>(n));
    }
};

struct SolveReport {
    std::size_t iterations = 0;
    /// residual_history[j]: invariance residual 2-norms of order j per iteration.
    std::vector<std::vector<double>> residual_history;
    /// correction_history[j]: correction norms of order j per iteration.
    std::vector<std::vector<double>> correction_history;
    double omega = 0;
    double lambda = 0;
    double b = 1;
    /// Final invariance residual per order.
    std::vector<double> order_residuals;
    /// Scaling factor admissible when truncating at each order.
    std::vector<double> scaling_per_order;
    /// Last ratio of consecutive corrections per order.
    std::vector<double> contraction_ratio;
    double min_det = std::numeric_limits<double>::infinity();
    bool converged = false;

    void ensure_order(std::size_t j)
    {
        if (residual_history.size() <= j) residual_history.resize(j + 1);
        if (correction_history.size() <= j) correction_history.resize(j + 1);
        if (contraction_ratio.size() <= j) contraction_ratio.resize(j + 1, 0.0);
    }

    void merge(const SolveReport& r)
    {
        iterations += r.iterations;
        for (std::size_t j = 0; j < r.residual_history.size(); ++j) {
            ensure_order(j);
            residual_history[j].insert(residual_history[j].end(), r.residual_history[j].begin(),
                                       r.residual_history[j].end());
            correction_history[j].insert(correction_history[j].end(), r.correction_history[j].begin(),
                                         r.correction_history[j].end());
            if (r.contraction_ratio[j] != 0) contraction_ratio[j] = r.contraction_ratio[j];
        }
        min_det = std::min(min_det, r.min_det);
    }
};

/// 2-norm of the complex Fourier coefficients of order j of a pair.
inline double order_norm(const FTVec2& E, std::size_t j)
{
    const double a = E[0].coeff_or_zero(j).l2_norm();
    const double b = E[1].coeff_or_zero(j).l2_norm();
    return std::hypot(a, b);
}

inline double total_norm(const FTVec2& E)
{
    double s = 0;
    for (std::size_t j = 0; j <= std::max(E[0].degree(), E[1].degree()); ++j) s += std::pow(order_norm(E, j), 2);
    return std::sqrt(s);
}

namespace detail {

inline double min_abs_det(const FTMat2& A)
{
    const std::size_t n = A[0][0].n_theta();
    double m = std::numeric_limits<double>::infinity();
    const auto a = A[0][0][0].samples(), b = A[0][1][0].samples(), c = A[1][0][0].samples(),
               d = A[1][1][0].samples();
    for (std::size_t i = 0; i < n; ++i) m = std::min(m, std::abs(a[i] * d[i] - b[i] * c[i]));
    return m;
}

/// Tracks consecutive residual increases.
struct DivergenceGuard {
    std::size_t patience;
    std::size_t rises = 0;
    double last = std::numeric_limits<double>::infinity();

    void check(double r, const std::string& where)
    {
        if (!std::isfinite(r)) throw convergence_error(where + ": residual is not finite");
        rises = r > last ? rises + 1 : 0;
        last = r;
        if (rises >= patience)
            throw convergence_error(where + ": residual increased for " + std::to_string(rises) +
                                    " consecutive iterations; try a smaller epsilon or a larger n_theta");
    }
};

inline FourierTaylor low_pass(const FourierTaylor& x, std::size_t kmax)
{
    std::vector<PeriodicFunction> c;
    for (std::size_t j = 0; j <= x.degree(); ++j) c.push_back(isochron::low_pass(x[j], kmax));
    return FourierTaylor(std::move(c));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Unperturbed problem

namespace detail {

/// Quasi-Newton iteration at fixed degree; returns the final residual.
inline FTVec2 quasi_newton(const PlanarField& field, TorusMapFT& K, double& omega, double& lambda,
                           const SolverConfig& cfg, std::vector<double>& residuals, std::vector<double>& corrections,
                           SolveReport& rep)
{
    const std::size_t d = K.degree();
    DivergenceGuard guard{cfg.divergence_patience};
    FTVec2 E = unperturbed_residual(field, K, omega, lambda);
    for (std::size_t it = 0;; ++it) {
        const double r = total_norm(E);
        residuals.push_back(r);
        if (r <= cfg.tol_residual) return E;
        if (it >= cfg.max_iter)
            throw convergence_error("solve_unperturbed: no convergence at degree " + std::to_string(d) + " after " +
                                    std::to_string(cfg.max_iter) + " iterations (residual " + std::to_string(r) +
                                    ")");
        guard.check(r, "solve_unperturbed");

        FTMat2 DK;
        for (std::size_t c = 0; c < 2; ++c) {
            DK[c][0] = d_theta(K.part(c));
            if (K.winding()[c] != 0) DK[c][0] = DK[c][0] + static_cast<double>(K.winding()[c]);
            DK[c][1] = d_s(K.part(c));
        }
        rep.min_det = std::min(rep.min_det, min_abs_det(DK));
        FTVec2 Et = ft_linear_solve(DK, E, cfg.det_floor);
        const double sigma = Et[0][0].mean();
        const double eta = Et[1][1].mean();
        Et[0][0] += -sigma;
        Et[1][1] += -eta;
        const FTVec2 S{solve_cohomology(Et[0], CohomologySpec::family_one(omega, lambda)),
                       solve_cohomology(Et[1], CohomologySpec::family_two(omega, lambda))};
        double corr = std::max(std::abs(sigma), std::abs(eta));
        FTVec2 parts = K.parts();
        for (std::size_t c = 0; c < 2; ++c) {
            auto dK = low_pass(ft_mul(DK[c][0], S[0], d) + ft_mul(DK[c][1], S[1], d), cfg.filter_kmax(K.n_theta()));
            corr = std::max(corr, dK.max_sup_norm());
            parts[c] = parts[c] + dK;
        }
        K = TorusMapFT(K.winding(), std::move(parts));
        omega += sigma;
        lambda += eta;
        corrections.push_back(corr);
        ++rep.iterations;
        E = unperturbed_residual(field, K, omega, lambda);
        if (corr <= cfg.tol_correction) {
            residuals.push_back(total_norm(E));
            return E;
        }
    }
}

} // namespace detail

/// Quasi-Newton iteration for X o K = (omega0 d/dtheta + lambda0 s d/ds) K.
/// The degree is raised one order at a time from the seed's degree to
/// cfg.degree; residual_history[d] holds the iterations at degree d.
inline std::pair<Parameterization, SolveReport> solve_unperturbed(const PlanarField& field,
                                                                  const Parameterization& seed,
                                                                  const SolverConfig& cfg)
{
    cfg.validate();
    seed.validate();
    if (seed.map.degree() < 1) throw contract_error("solve_unperturbed: seed degree must be >= 1");
    if (!field.series) throw contract_error("solve_unperturbed: field has no series evaluation");
    const std::size_t d = std::max(cfg.degree, seed.map.degree());
    TorusMapFT K = seed.scaled_map();
    const std::size_t kmax = cfg.filter_kmax(K.n_theta());
    K = TorusMapFT(K.winding(), {detail::low_pass(K.part(0), kmax), detail::low_pass(K.part(1), kmax)});
    double omega = seed.omega, lambda = seed.lambda;

    SolveReport rep;
    rep.ensure_order(d);
    FTVec2 E;
    for (std::size_t deg = seed.map.degree(); deg <= d; ++deg) {
        K = K.truncated(deg);
        E = detail::quasi_newton(field, K, omega, lambda, cfg, rep.residual_history[deg], rep.correction_history[deg],
                                 rep);
    }
    rep.converged = true;
    for (std::size_t j = 0; j <= d; ++j) rep.order_residuals.push_back(order_norm(E, j));
    rep.omega = omega;
    rep.lambda = lambda;
    rep.b = seed.scale_b;
    Parameterization out{K.rescaled(seed.scale_b, 1.0), omega, lambda, seed.scale_b};
    return {std::move(out), std::move(rep)};
}

/// Seeds and solves the unperturbed problem from a point near the cycle.
inline std::pair<Parameterization, SolveReport> compute_unperturbed(const PlanarField& field, const Vec2& guess,
                                                                    const SolverConfig& cfg)
{
    auto seed = find_cycle(field, guess);
    auto K0 = seed_parameterization(field, seed, cfg.n_theta, cfg.scale_b0);
    return solve_unperturbed(field, K0, cfg);
}

// ---------------------------------------------------------------------------
// Perturbed problem

/// Upper bound b = safety min{s*, s~*} with p(s*) = 1 for p(s) = sum_j n_j s^j.
/// Returns 1 when neither polynomial has a term of order >= 1.
inline double choose_scaling(std::span<const double> w2_norms, std::span<const double> w2_tilde_norms,
                             double safety = 0.95)
{
    auto root = [](std::span<const double> c) {
        if (c.empty()) return std::numeric_limits<double>::infinity();
        if (!(c[0] < 1)) throw contract_error("choose_scaling: order-0 norm " + std::to_string(c[0]) + " is not < 1");
        bool any = false;
        for (std::size_t j = 1; j < c.size(); ++j) any = any || c[j] > 0;
        if (!any) return std::numeric_limits<double>::infinity();
        auto p = [&](double s) {
            double v = 0;
            for (std::size_t j = c.size(); j-- > 0;) v = v * s + c[j];
            return v;
        };
        double lo = 0, hi = 1;
        while (p(hi) < 1) hi *= 2;
        while (hi - lo > 1e-12 * hi) {
            const double mid = 0.5 * (lo + hi);
            (p(mid) < 1 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    const double s = std::min(root(w2_norms), root(w2_tilde_norms));
    if (!std::isfinite(s)) return 1.0;
    return safety * s;
}

inline double choose_scaling(std::span<const double> w2_norms, double safety = 0.95)
{
    return choose_scaling(w2_norms, std::span<const double>{}, safety);
}

/// Pieces of the invariance equation at a given W (in the scaled variable).
struct InvarianceTerms {
    KWComposition KW;
    TorusMapFT W_tilde;
    FTVec2 KW_tilde;
    FTVec2 epsY; // eps (DK o W)^{-1} P(K o W, K o W~)
    double min_det = 0;
};

/// LHS - RHS of the invariance equation, order by order.
inline FTVec2 invariance_defect(const TorusMapFT& W, double omega, double lambda, double omega0, double lambda0,
                                const FTVec2& epsY)
{
    FTVec2 R;
    for (std::size_t c = 0; c < 2; ++c) {
        auto lhs = d_theta(W.part(c)) * omega + s_d_s(W.part(c)) * lambda;
        lhs[0] += omega * W.winding()[c];
        R[c] = lhs - epsY[c].truncated(W.degree());
    }
    R[0][0] += -omega0;
    R[1] = R[1] - W.part(1) * lambda0;
    return R;
}

/// Fixed-point solver for W of a perturbed model, order by order. The W it
/// works with is in the scaled variable (coefficients W^j b^j).
class PerturbedSolver {
public:
    PerturbedSolver(const SDDEModel& model, const Parameterization& K, const SolverConfig& cfg)
        : model_(model), K_(K), cfg_(cfg), kc_(K, cfg.composition), ktc_(K, cfg.composition), delay_(kc_, model.delay)
    {
        cfg.validate();
        K.validate();
        if (K.map.n_theta() != cfg.n_theta)
            throw contract_error("perturbed solve: K has n_theta = " + std::to_string(K.map.n_theta()) +
                                 ", config asks for " + std::to_string(cfg.n_theta));
        if (!model.perturbation_series) throw contract_error("perturbed solve: model has no series perturbation");
    }

    const Parameterization& K() const { return K_; }
    const SolverConfig& config() const { return cfg_; }

    InvarianceTerms terms(const TorusMapFT& W, double omega, double lambda)
    {
        InvarianceTerms t;
        t.KW = kc_.compose(W, true);
        t.W_tilde = delay_(W, omega, lambda);
        t.KW_tilde = ktc_.compose(t.W_tilde, false).value;
        auto P = model_.P(t.KW.value, t.KW_tilde);
        FTMat2 DK{{{t.KW.d_theta[0], t.KW.d_s[0]}, {t.KW.d_theta[1], t.KW.d_s[1]}}};
        t.min_det = detail::min_abs_det(DK);
        auto Y = ft_linear_solve(DK, P, cfg_.det_floor);
        t.epsY = {Y[0] * model_.epsilon, Y[1] * model_.epsilon};
        return t;
    }

    struct Order0 {
        PeriodicFunction W1hat, W2hat;
        double omega;
        SolveReport report;
    };

    /// W0 = (theta, 0) + W0hat and omega.
    Order0 order0()
    {
        const std::size_t n = cfg_.n_theta;
        const double omega0 = K_.omega, lambda0 = K_.lambda;
        Order0 out{PeriodicFunction::zero(n), PeriodicFunction::zero(n), omega0, {}};
        auto& rep = out.report;
        rep.ensure_order(0);
        auto W_of = [&] { return TorusMapFT({1, 0}, {FourierTaylor({out.W1hat}), FourierTaylor({out.W2hat})}); };
        InvarianceTerms t;
        auto eval = [&] {
            const auto W = W_of();
            t = terms(W, out.omega, lambda0);
            rep.min_det = std::min(rep.min_det, t.min_det);
            return order_norm(invariance_defect(W, out.omega, lambda0, omega0, lambda0, t.epsY), 0);
        };
        auto update = [&] {
            const auto& eta1 = t.epsY[0][0];
            const auto& eta2 = t.epsY[1][0];
            const double alpha = eta1.mean();
            const double omega = omega0 + alpha;
            auto W1 = solve_cohomology_order(eta1 - alpha, omega, 0.0, 0.0);
            auto W2 = solve_cohomology_order(eta2, omega, -lambda0);
            const double corr =
                std::max({(W1 - out.W1hat).sup_norm(), (W2 - out.W2hat).sup_norm(), std::abs(omega - out.omega)});
            out.W1hat = std::move(W1);
            out.W2hat = std::move(W2);
            out.omega = omega;
            return corr;
        };
        rep.converged = fixed_point(rep, 0, "order 0", eval, update);
        if (!rep.converged)
            throw convergence_error("order 0: no convergence after " + std::to_string(cfg_.max_iter) + " iterations");
        rep.omega = out.omega;
        rep.lambda = lambda0;
        rep.order_residuals = {rep.residual_history[0].back()};
        // the order-0 base points of K o W and K o W~ are fixed from here on
        const std::size_t orders = cfg_.degree + 2;
        kc_.set_min_orders(orders);
        ktc_.set_min_orders(orders);
        delay_.set_min_orders(orders);
        return out;
    }

    struct OrderN {
        PeriodicFunction W1, W2;
        double lambda;
        SolveReport report;
    };

    /// Order n >= 1 given orders 0..n-1 of W (scaled variable, degree n - 1).
    /// For n = 1, lambda is solved for and mean(W2^1) is pinned to rho b.
    OrderN order_n(const TorusMapFT& lower, double omega, double lambda, std::size_t n, double b)
    {
        if (n < 1) throw contract_error("order_n: n must be >= 1");
        if (lower.degree() + 1 != n) throw contract_error("order_n: lower orders must have degree n - 1");
        const std::size_t N = cfg_.n_theta;
        const double lambda0 = K_.lambda, omega0 = K_.omega;
        const double pin = cfg_.normalization_rho * b;
        OrderN out{PeriodicFunction::zero(N), n == 1 ? PeriodicFunction::constant(N, pin) : PeriodicFunction::zero(N),
                   n == 1 ? lambda0 : lambda, {}};
        auto& rep = out.report;
        rep.ensure_order(n);
        auto assemble = [&]() {
            TorusMapFT W = lower.truncated(n);
            W.part(0)[n] = out.W1;
            W.part(1)[n] = out.W2;
            return W;
        };
        InvarianceTerms t;
        auto eval = [&] {
            const TorusMapFT W = assemble();
            t = terms(W, omega, out.lambda);
            rep.min_det = std::min(rep.min_det, t.min_det);
            return order_norm(invariance_defect(W, omega, out.lambda, omega0, lambda0, t.epsY), n);
        };
        auto update = [&] {
            const auto& eta1 = t.epsY[0][n];
            const auto& eta2 = t.epsY[1][n];
            double lam = out.lambda;
            std::optional<double> pin_mean;
            if (n == 1) {
                lam = lambda0 + eta2.mean() / pin;
                pin_mean = pin;
            }
            const double nl = static_cast<double>(n) * lam;
            auto W1 = solve_cohomology_order(eta1, omega, nl);
            auto W2 = solve_cohomology_order(eta2, omega, nl - lambda0, pin_mean);
            const double corr =
                std::max({(W1 - out.W1).sup_norm(), (W2 - out.W2).sup_norm(), std::abs(lam - out.lambda)});
            out.W1 = std::move(W1);
            out.W2 = std::move(W2);
            out.lambda = lam;
            return corr;
        };
        rep.converged = fixed_point(rep, n, "order " + std::to_string(n), eval, update);
        if (!rep.converged)
            throw convergence_error("order " + std::to_string(n) + ": no convergence after " +
                                    std::to_string(cfg_.max_iter) + " iterations");
        rep.omega = omega;
        rep.lambda = out.lambda;
        return out;
    }

    /// Orders 1..degree on top of order 0 with scale b. Returns W in the scaled variable.
    std::pair<TorusMapFT, double> higher_orders(const Order0& o0, double b, SolveReport& rep)
    {
        const std::size_t n = cfg_.n_theta;
        TorusMapFT W({1, 0}, {FourierTaylor({o0.W1hat}), FourierTaylor({o0.W2hat})});
        double lambda = K_.lambda;
        for (std::size_t j = 1; j <= cfg_.degree; ++j) {
            auto o = order_n(W, o0.omega, lambda, j, b);
            rep.merge(o.report);
            lambda = o.lambda;
            W = W.truncated(j);
            W.part(0)[j] = std::move(o.W1);
            W.part(1)[j] = std::move(o.W2);
        }
        (void)n;
        return {std::move(W), lambda};
    }

    struct Solution {
        Parameterization W; // unscaled coefficients, scale_b = b
        TorusMapFT W_tilde; // unscaled
        SolveReport report;
    };

    /// Order 0, then orders 1..degree; with two-pass scaling the higher orders
    /// are solved once with cfg.scale_b to estimate growth and again with the
    /// chosen b.
    Solution solve()
    {
        auto o0 = order0();
        SolveReport rep = o0.report;
        double b = cfg_.scale_b;
        auto first = higher_orders(o0, b, rep);
        TorusMapFT W = std::move(first.first);
        double lambda = first.second;
        std::vector<double> w2n, w2tn;
        auto measure = [&](const TorusMapFT& Ws, double bs) {
            auto Wu = Ws.rescaled(bs, 1.0);
            auto Wt = delay_(Ws, o0.omega, lambda).rescaled(bs, 1.0);
            w2n.clear();
            w2tn.clear();
            for (std::size_t j = 0; j <= cfg_.degree; ++j) {
                w2n.push_back(Wu.part(1)[j].sup_norm());
                w2tn.push_back(Wt.part(1)[j].sup_norm());
            }
            return Wt;
        };
        auto Wt = measure(W, b);
        std::vector<double> per_order;
        for (std::size_t j = 1; j <= cfg_.degree; ++j)
            per_order.push_back(choose_scaling(std::span<const double>(w2n.data(), j + 1),
                                               std::span<const double>(w2tn.data(), j + 1), cfg_.scaling_safety));
        if (cfg_.two_pass_scaling && cfg_.degree >= 1) {
            const double b2 = per_order.back();
            SolveReport rep2 = o0.report;
            auto second = higher_orders(o0, b2, rep2);
            W = std::move(second.first);
            lambda = second.second;
            b = b2;
            rep2.iterations += rep.iterations - o0.report.iterations;
            rep = std::move(rep2);
            Wt = measure(W, b);
        }
        rep.scaling_per_order = per_order;
        rep.omega = o0.omega;
        rep.lambda = lambda;
        rep.b = b;
        auto t = terms(W, o0.omega, lambda);
        auto R = invariance_defect(W, o0.omega, lambda, K_.omega, K_.lambda, t.epsY);
        rep.order_residuals.clear();
        for (std::size_t j = 0; j <= cfg_.degree; ++j) rep.order_residuals.push_back(order_norm(R, j));
        rep.converged = true;
        return {Parameterization{W.rescaled(b, 1.0), o0.omega, lambda, b}, std::move(Wt), std::move(rep)};
    }

private:
    /// Drives eval (residual at the current iterate) and update (next
    /// iterate, returns the correction norm) until the stopping test holds.
    template <class Eval, class Update>
    bool fixed_point(SolveReport& rep, std::size_t j, const std::string& where, Eval eval, Update update)
    {
        detail::DivergenceGuard guard{cfg_.divergence_patience};
        auto& res = rep.residual_history[j];
        auto& cor = rep.correction_history[j];
        bool met = false;
        for (std::size_t it = 0;; ++it) {
            const double r = eval();
            res.push_back(r);
            if (r == 0 || (r <= cfg_.tol_residual && !cfg_.polish)) return true;
            met = met || r <= cfg_.tol_residual;
            if (it >= cfg_.max_iter) return met;
            if (!met) guard.check(r, where);
            const double corr = update();
            if (!std::isfinite(corr)) throw convergence_error(where + ": correction is not finite");
            if (!cor.empty() && cor.back() > cfg_.tol_correction) rep.contraction_ratio[j] = corr / cor.back();
            const double prev = cor.empty() ? std::numeric_limits<double>::infinity() : cor.back();
            cor.push_back(corr);
            rep.iterations = it + 1;
            met = met || corr <= cfg_.tol_correction;
            if (met && (!cfg_.polish || corr == 0 || corr > 0.5 * prev)) {
                res.push_back(eval());
                return true;
            }
        }
    }

    SDDEModel model_;
    Parameterization K_;
    SolverConfig cfg_;
    KComposer kc_;
    KComposer ktc_;
    DelayComposer delay_;
};

/// Order-0 problem: W0hat = (W1hat, W2hat) and omega.
inline PerturbedSolver::Order0 solve_perturbed_order0(const SDDEModel& model, const Parameterization& K,
                                                      const SolverConfig& cfg)
{
    PerturbedSolver s(model, K, cfg);
    return s.order0();
}

/// Order n >= 1 given W up to order n - 1 (unscaled coefficients, omega and
/// lambda in `lower`); the returned coefficients are unscaled.
inline PerturbedSolver::OrderN solve_perturbed_orderN(const SDDEModel& model, const Parameterization& K,
                                                      const Parameterization& lower, std::size_t n,
                                                      const SolverConfig& cfg)
{
    PerturbedSolver s(model, K, cfg);
    const double b = lower.scale_b;
    auto o = s.order_n(lower.scaled_map(), lower.omega, lower.lambda, n, b);
    const double f = std::pow(b, -static_cast<double>(n));
    o.W1 *= f;
    o.W2 *= f;
    return o;
}

inline PerturbedSolver::Solution solve_perturbed(const SDDEModel& model, const Parameterization& K,
                                                 const SolverConfig& cfg)
{
    PerturbedSolver s(model, K, cfg);
    return s.solve();
}

/// Order-n invariance residual 2-norm of W (recomputed from scratch).
inline double invariance_residual(const SDDEModel& model, const Parameterization& K, const Parameterization& W,
                                  std::size_t order, const CompositionOptions& opts = {})
{
    if (order > W.map.degree()) throw contract_error("invariance_residual: order exceeds the degree of W");
    SolverConfig cfg;
    cfg.n_theta = W.map.n_theta();
    cfg.degree = W.map.degree();
    cfg.composition = opts;
    PerturbedSolver s(model, K, cfg);
    const auto Ws = W.scaled_map();
    auto t = s.terms(Ws, W.omega, W.lambda);
    return order_norm(invariance_defect(Ws, W.omega, W.lambda, K.omega, K.lambda, t.epsY), order);
}

/// All per-order invariance residuals of W.
inline std::vector<double> invariance_residuals(const SDDEModel& model, const Parameterization& K,
                                                const Parameterization& W, const CompositionOptions& opts = {})
{
    SolverConfig cfg;
    cfg.n_theta = W.map.n_theta();
    cfg.degree = W.map.degree();
    cfg.composition = opts;
    PerturbedSolver s(model, K, cfg);
    const auto Ws = W.scaled_map();
    auto t = s.terms(Ws, W.omega, W.lambda);
    auto R = invariance_defect(Ws, W.omega, W.lambda, K.omega, K.lambda, t.epsY);
    std::vector<double> out;
    for (std::size_t j = 0; j <= Ws.degree(); ++j) out.push_back(order_norm(R, j));
    return out;
}

/// (nc1, nc2): int_0^1 d/dtheta W1_init(theta, 0) W1(theta, 0) dtheta and
/// int_0^1 d/ds W2(theta, 0) dtheta, for unscaled coefficients.
inline std::pair<double, double> normalization_check(const Parameterization& W, const Parameterization& W_initial)
{
    if (W.map.degree() < 1) throw contract_error("normalization_check: W must have degree >= 1");
    const auto& h = W.map.part(0)[0];
    const auto& g = W_initial.map.part(0)[0];
    const double w = W.map.winding()[0], wi = W_initial.map.winding()[0];
    // (wi + g')(w theta + h), with int g' theta = g(0) - mean(g)
    const double nc1 = wi * (w * 0.5 + h.mean()) + w * (g(0.0) - g.mean()) + (differentiate(g) * h).mean();
    const double nc2 = W.map.part(1)[1].mean();
    return {nc1, nc2};
}

/// || K^j - (K o W)^j || (sup norm over both components) for j <= degree of W.
inline std::vector<double> deviation_norms(const Parameterization& K, const Parameterization& W,
                                           const CompositionOptions& opts = {})
{
    auto KW = compose_K_with_W(K, W.map, opts);
    std::vector<double> out;
    for (std::size_t j = 0; j <= W.map.degree(); ++j) {
        double m = 0;
        for (std::size_t c = 0; c < 2; ++c)
            m = std::max(m, (K.map.part(c).coeff_or_zero(j) - KW.value[c][j]).sup_norm());
        out.push_back(m);
    }
    return out;
}

} // namespace isochron

#endif
