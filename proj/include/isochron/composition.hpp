// Composition of periodic functions and Fourier-Taylor maps with
// Fourier-Taylor arguments, evaluated independently at every grid point.
//
// Two interchangeable paths:
//   table: derivative values S^(l)(q0) combined with the chain-rule table
//          a_ij = (a'_{i-1,j} + a_{i-1,j-1} q') / (i-1);
//   ad:    Taylor jets S^(l)(q0)/l! from the Fourier modes, combined with
//          powers of h = q - q0 by Horner.

#ifndef ISOCHRON_COMPOSITION_HPP
#define ISOCHRON_COMPOSITION_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "fourier_taylor.hpp"
#include "parallel.hpp"

namespace isochron {

enum class CompositionMode { table, ad };

struct CompositionOptions {
    CompositionMode mode = CompositionMode::ad;
    /// Trailing Fourier modes below this fraction of the largest one are
    /// dropped before derivatives are formed. 0 keeps every mode.
    double trim_rel = 1e-15;
};

// ---------------------------------------------------------------------------
// Scalar polynomial helpers (coefficient vectors, truncated at a fixed degree)

namespace detail {

using Poly = std::vector<double>;

// out = a * b truncated to out.size() - 1
inline void poly_mul(const double* a, const double* b, double* out, std::size_t len)
{
    for (std::size_t r = len; r-- > 0;) {
        double acc = 0;
        for (std::size_t i = 0; i <= r; ++i) acc += a[i] * b[r - i];
        out[r] = acc;
    }
}

} // namespace detail

/// Full-storage version of the composition table, exposing every cell
/// a_ij(s), 1 <= j <= i <= k+1 (1-based as in the recurrence).
class CompositionTable {
public:
    CompositionTable(std::span<const double> q)
        : k_(q.size() - 1)
    {
        if (q.empty()) throw contract_error("CompositionTable needs a polynomial");
        dq_.assign(k_ + 1, 0.0);
        for (std::size_t r = 0; r < k_; ++r) dq_[r] = static_cast<double>(r + 1) * q[r + 1];
        cells_.assign((k_ + 1) * (k_ + 1), {});
        cell_ref(1, 1) = detail::Poly(k_ + 1, 0.0);
        cell_ref(1, 1)[0] = 1.0;
        for (std::size_t i = 2; i <= k_ + 1; ++i) {
            const std::size_t deg = k_ + 1 - i;
            cell_ref(i, 1) = detail::Poly(deg + 1, 0.0);
            for (std::size_t j = 2; j <= i; ++j) {
                detail::Poly a(deg + 1, 0.0);
                if (j <= i - 1) {
                    const auto& up = cell(i - 1, j);
                    for (std::size_t r = 0; r <= deg && r + 1 < up.size(); ++r)
                        a[r] += static_cast<double>(r + 1) * up[r + 1];
                }
                const auto& diag = cell(i - 1, j - 1);
                for (std::size_t r = 0; r <= deg; ++r) {
                    double acc = 0;
                    for (std::size_t t = 0; t <= r && t < diag.size(); ++t) acc += diag[t] * dq_[r - t];
                    a[r] += acc;
                }
                for (auto& v : a) v /= static_cast<double>(i - 1);
                cell_ref(i, j) = std::move(a);
            }
        }
    }

    std::size_t degree() const { return k_; }
    const detail::Poly& cell(std::size_t i, std::size_t j) const { return cells_.at((i - 1) * (k_ + 1) + (j - 1)); }
    std::span<const double> dq() const { return dq_; }

private:
    detail::Poly& cell_ref(std::size_t i, std::size_t j) { return cells_.at((i - 1) * (k_ + 1) + (j - 1)); }

    std::size_t k_;
    detail::Poly dq_;
    std::vector<detail::Poly> cells_;
};

namespace detail {

// One cell of the recurrence: a[r] <- (r+1) a[r+1] + (diag * dq)_r, scaled,
// for r <= deg; a[deg+1] holds the previous row's top coefficient.
inline void table_cell(double* a, const double* diag, const double* dq, double inv, std::size_t deg)
{
    for (std::size_t r = 0; r <= deg; ++r) {
        double acc = static_cast<double>(r + 1) * a[r + 1];
        for (std::size_t t = 0; t <= r; ++t) acc += diag[t] * dq[r - t];
        a[r] = acc * inv;
    }
}

template <std::size_t D>
void table_cell_fixed(double* a, const double* diag, const double* dq, double inv)
{
#pragma GCC unroll 16
    for (std::size_t r = 0; r <= D; ++r) {
        double acc = static_cast<double>(r + 1) * a[r + 1];
#pragma GCC unroll 16
        for (std::size_t t = 0; t <= r; ++t) acc += diag[t] * dq[r - t];
        a[r] = acc * inv;
    }
}

inline constexpr std::size_t small_cells = 16;

using CellKernel = void (*)(double*, const double*, const double*, double);

inline constexpr auto cell_kernels = []<std::size_t... D>(std::index_sequence<D...>) {
    return std::array<CellKernel, sizeof...(D)>{&table_cell_fixed<D>...};
}(std::make_index_sequence<small_cells>{});

/// weights[r * (k+1) + l] = a_{r+1,l+1}(0): p_r = sum_l weights(r,l) S^(l)(q0).
/// Rows are built in place with j descending; row i keeps degree k+1-i and
/// reads slot deg+1 of row i-1.
inline void table_weights(std::span<const double> q, std::vector<double>& weights, std::vector<double>& work)
{
    const std::size_t k = q.size() - 1;
    const std::size_t w = k + 1;
    weights.assign(w * w, 0.0);
    weights[0] = 1.0;
    if (k == 0) return;
    // work holds cells a_{i,j}, j = 1..i, each with w slots; dq in the last slot block
    work.assign((w + 1) * w, 0.0);
    double* dq = work.data() + w * w;
    for (std::size_t r = 0; r < k; ++r) dq[r] = static_cast<double>(r + 1) * q[r + 1];
    auto cellp = [&](std::size_t j) { return work.data() + (j - 1) * w; };
    // row 2: a_{2,1} = 0, a_{2,2} = dq
    std::copy(dq, dq + k, cellp(2));
    weights[1 * w + 1] = cellp(2)[0];
    // slot 1 (a_{i,1} = 0 for i >= 2) and slot i (a_{i-1,i} = 0) stay zero
    for (std::size_t i = 3; i <= k + 1; ++i) {
        const std::size_t deg = k + 1 - i;
        const double inv = 1.0 / static_cast<double>(i - 1);
        for (std::size_t j = i; j >= 2; --j) {
            double* a = cellp(j);
            const double* diag = cellp(j - 1);
            if (deg < small_cells)
                cell_kernels[deg](a, diag, dq, inv);
            else
                table_cell(a, diag, dq, inv, deg);
            weights[(i - 1) * w + (j - 1)] = a[0];
        }
    }
}

} // namespace detail

/// Coefficients of S(q(s)) to degree k = q.size()-1, given derivs[l] = S^(l)(q0).
inline std::vector<double> compose_table(std::span<const double> derivs, std::span<const double> q)
{
    if (q.empty()) throw contract_error("compose_table: empty polynomial");
    if (derivs.size() != q.size())
        throw contract_error("compose_table: expected " + std::to_string(q.size()) + " derivatives, got " +
                             std::to_string(derivs.size()));
    thread_local std::vector<double> weights, work;
    detail::table_weights(q, weights, work);
    const std::size_t w = q.size();
    std::vector<double> p(w);
    const double* wt = weights.data();
    for (std::size_t r = 0; r < w; ++r) {
        double acc = 0;
        for (std::size_t l = 0; l <= r; ++l) acc += wt[r * w + l] * derivs[l];
        p[r] = acc;
    }
    return p;
}

// ---------------------------------------------------------------------------
// Jets of periodic functions at arbitrary base points

namespace detail {

/// Fourier data of a periodic function prepared for off-grid evaluation:
/// S(x) = mean + nyq cos(pi n x) + 2 Re sum_{k=1}^{M} m_k e^{2 pi i k x}.
struct ModeList {
    double mean = 0;
    double nyq = 0;
    std::size_t n = 0;
    std::vector<cplx> m; // index k-1
};

inline ModeList mode_list(const PeriodicFunction& f, double trim_rel)
{
    ModeList out;
    out.n = f.size();
    auto modes = f.modes();
    out.mean = modes[0].real();
    std::size_t top = effective_bandwidth(f, trim_rel > 0 ? trim_rel : 0.0);
    if (trim_rel <= 0) top = modes.size() - 1;
    const bool even = f.size() % 2 == 0;
    const std::size_t regular = last_regular_mode(f.size());
    if (even && top == f.size() / 2) out.nyq = modes[top].real();
    for (std::size_t k = 1; k <= std::min(top, regular); ++k) out.m.push_back(modes[k]);
    return out;
}

/// Fills out[l], l < L, with S^(l)(x) (derivs) or S^(l)(x)/l! (jets).
/// The Nyquist term only contributes to the value.
inline void mode_jets(const ModeList& f, double x, std::span<const cplx> zpow, bool taylor, double* out,
                      std::size_t L, std::vector<cplx>& w)
{
    const std::size_t M = f.m.size();
    w.resize(M);
    double v = 0;
    for (std::size_t k = 0; k < M; ++k) {
        w[k] = f.m[k] * zpow[k];
        v += w[k].real();
    }
    out[0] = f.mean + 2 * v + f.nyq * std::cos(std::numbers::pi * static_cast<double>(f.n) * x);
    for (std::size_t l = 1; l < L; ++l) {
        const double scale = taylor ? 1.0 / static_cast<double>(l) : 1.0;
        double acc = 0;
        for (std::size_t k = 0; k < M; ++k) {
            const double fk = two_pi * static_cast<double>(k + 1) * scale;
            w[k] = cplx(-w[k].imag() * fk, w[k].real() * fk); // times i 2 pi k (/l)
            acc += w[k].real();
        }
        out[l] = 2 * acc;
    }
}

inline void fill_powers(double x, std::size_t M, std::vector<cplx>& zpow)
{
    zpow.resize(M);
    if (M == 0) return;
    const cplx z = std::polar(1.0, two_pi * (x - std::floor(x)));
    zpow[0] = z;
    for (std::size_t k = 1; k < M; ++k) {
        // refresh from the exact value periodically to bound drift
        zpow[k] = (k % 64 == 63) ? std::polar(1.0, two_pi * (x - std::floor(x)) * static_cast<double>(k + 1))
                                 : zpow[k - 1] * z;
    }
}

} // namespace detail

/// Derivative data of a family of periodic functions at a set of base points.
/// In ad mode entries are Taylor jets S^(l)/l!, in table mode raw derivatives.
class JetBlock {
public:
    JetBlock() = default;

    JetBlock(const std::vector<PeriodicFunction>& fs, std::vector<double> base, std::size_t orders,
             const CompositionOptions& opts)
        : base_(std::move(base)), nf_(fs.size()), orders_(orders), mode_(opts.mode)
    {
        std::vector<detail::ModeList> lists;
        std::size_t M = 0;
        for (const auto& f : fs) {
            lists.push_back(detail::mode_list(f, opts.trim_rel));
            M = std::max(M, lists.back().m.size());
        }
        const std::size_t np = base_.size();
        data_.assign(nf_ * np * orders_, 0.0);
        const bool taylor = mode_ == CompositionMode::ad;
        parallel_for(np, [&](std::size_t i) {
            std::vector<cplx> zpow, w;
            detail::fill_powers(base_[i], M, zpow);
            for (std::size_t f = 0; f < nf_; ++f)
                detail::mode_jets(lists[f], base_[i], zpow, taylor, &data_[(f * np + i) * orders_], orders_, w);
        });
    }

    bool matches(std::span<const double> base, std::size_t orders, CompositionMode mode) const
    {
        return mode == mode_ && orders <= orders_ && base.size() == base_.size() &&
               std::equal(base.begin(), base.end(), base_.begin());
    }

    const double* at(std::size_t f, std::size_t i) const { return &data_[(f * base_.size() + i) * orders_]; }
    std::size_t orders() const { return orders_; }
    std::size_t functions() const { return nf_; }
    CompositionMode mode() const { return mode_; }

private:
    std::vector<double> base_;
    std::size_t nf_ = 0;
    std::size_t orders_ = 0;
    CompositionMode mode_ = CompositionMode::ad;
    std::vector<double> data_;
};

/// Reuses jets while the functions and base points are bitwise unchanged.
class JetCache {
public:
    explicit JetCache(std::size_t capacity = 2)
        : slots_(capacity)
    {
    }

    /// Jets are computed with at least `min_orders` orders so later, longer
    /// requests at the same base points can reuse them.
    void set_min_orders(std::size_t orders) { min_orders_ = orders; }

    const JetBlock& get(const std::vector<PeriodicFunction>& fs, const std::vector<double>& base, std::size_t orders,
                        const CompositionOptions& opts)
    {
        for (auto& slot : slots_)
            if (slot.jets.functions() == fs.size() && slot.jets.matches(base, orders, opts.mode) &&
                same_functions(slot.coeffs, fs))
                return slot.jets;
        auto& slot = slots_[next_];
        next_ = (next_ + 1) % slots_.size();
        slot.coeffs.clear();
        for (const auto& f : fs) slot.coeffs.emplace_back(f.coeffs().begin(), f.coeffs().end());
        slot.jets = JetBlock(fs, base, std::max(orders, min_orders_), opts);
        return slot.jets;
    }

private:
    struct Slot {
        std::vector<std::vector<double>> coeffs;
        JetBlock jets;
    };

    static bool same_functions(const std::vector<std::vector<double>>& stored, const std::vector<PeriodicFunction>& fs)
    {
        for (std::size_t f = 0; f < fs.size(); ++f) {
            auto c = fs[f].coeffs();
            if (c.size() != stored[f].size() || !std::equal(c.begin(), c.end(), stored[f].begin())) return false;
        }
        return true;
    }

    std::vector<Slot> slots_;
    std::size_t next_ = 0;
    std::size_t min_orders_ = 0;
};

namespace detail {

/// Per-point workspace combining jets with the argument polynomial.
struct PointComposer {
    std::size_t k = 0; // output degree
    CompositionMode mode = CompositionMode::ad;
    std::vector<double> powers;  // ad: H_l = h^l, (k+1) x (k+1)
    std::vector<double> weights; // table
    std::vector<double> work;

    void prepare(std::span<const double> q)
    {
        k = q.size() - 1;
        const std::size_t w = k + 1;
        if (mode == CompositionMode::table) {
            table_weights(q, weights, work);
            return;
        }
        powers.assign(w * w, 0.0);
        powers[0] = 1.0;
        std::vector<double> h(w, 0.0);
        for (std::size_t r = 1; r < w; ++r) h[r] = q[r];
        for (std::size_t l = 1; l < w; ++l) {
            const double* prev = &powers[(l - 1) * w];
            double* cur = &powers[l * w];
            for (std::size_t r = l; r < w; ++r) {
                double acc = 0;
                for (std::size_t t = 1; t <= r - (l - 1); ++t) acc += h[t] * prev[r - t];
                cur[r] = acc;
            }
        }
    }

    /// out = S(q(s)) from jets[0..k] (shift = 0) or S'(q(s)) from jets[1..k+1] (shift = 1).
    void apply(const double* jets, std::size_t shift, double* out) const
    {
        const std::size_t w = k + 1;
        if (mode == CompositionMode::table) {
            for (std::size_t r = 0; r < w; ++r) {
                double acc = 0;
                for (std::size_t l = 0; l <= r; ++l) acc += weights[r * w + l] * jets[l + shift];
                out[r] = acc;
            }
            return;
        }
        std::fill(out, out + w, 0.0);
        for (std::size_t l = 0; l < w; ++l) {
            // Taylor jets of S' are (l+1) T_{l+1}
            const double c = shift ? static_cast<double>(l + 1) * jets[l + 1] : jets[l];
            const double* H = &powers[l * w];
            for (std::size_t r = l; r < w; ++r) out[r] += c * H[r];
        }
    }
};

inline std::vector<double> point_poly(const FourierTaylor& x, std::size_t i, std::size_t k)
{
    std::vector<double> p(k + 1, 0.0);
    for (std::size_t r = 0; r <= std::min(k, x.degree()); ++r) p[r] = x[r].samples()[i];
    return p;
}

inline FourierTaylor series_from_samples(std::vector<std::vector<double>>& cols)
{
    std::vector<PeriodicFunction> c;
    c.reserve(cols.size());
    for (auto& col : cols) c.push_back(PeriodicFunction::from_samples(std::move(col)));
    return FourierTaylor(std::move(c));
}

} // namespace detail

/// S(theta + arg0(theta) + argHigher(theta, s)) as a series of the degree of argHigher.
inline FourierTaylor compose_periodic_with_torus_arg(const PeriodicFunction& S, const PeriodicFunction& arg0,
                                                     const FourierTaylor& argHigher,
                                                     const CompositionOptions& opts = {}, JetCache* cache = nullptr)
{
    S.check_same_grid(arg0);
    if (argHigher.n_theta() != S.size()) throw contract_error("compose: grid mismatch");
    if (argHigher[0].sup_norm() != 0.0)
        throw contract_error("compose_periodic_with_torus_arg: argHigher must have zero order-0 coefficient");
    const std::size_t n = S.size();
    const std::size_t k = argHigher.degree();
    std::vector<double> base(n);
    for (std::size_t i = 0; i < n; ++i) base[i] = static_cast<double>(i) / static_cast<double>(n) + arg0.samples()[i];
    std::optional<JetBlock> local;
    const JetBlock* jp = nullptr;
    if (cache) {
        jp = &cache->get({S}, base, k + 1, opts);
    } else {
        local.emplace(std::vector<PeriodicFunction>{S}, base, k + 1, opts);
        jp = &*local;
    }
    const JetBlock& jets = *jp;
    std::vector<std::vector<double>> cols(k + 1, std::vector<double>(n));
    parallel_for(n, [&](std::size_t i) {
        detail::PointComposer pc;
        pc.mode = opts.mode;
        auto q = detail::point_poly(argHigher, i, k);
        q[0] = base[i];
        pc.prepare(q);
        std::vector<double> out(k + 1);
        pc.apply(jets.at(0, i), 0, out.data());
        for (std::size_t r = 0; r <= k; ++r) cols[r][i] = out[r];
    });
    return detail::series_from_samples(cols);
}

// ---------------------------------------------------------------------------
// K o W

/// Value and Jacobian columns of K composed with a torus map.
struct KWComposition {
    FTVec2 value;   // K o W
    FTVec2 d_theta; // (dK/dtheta) o W
    FTVec2 d_s;     // (dK/ds) o W
};

/// Composes a fixed K with torus maps, caching the Fourier jets of the K^j
/// at the most recently used base points.
class KComposer {
public:
    KComposer(const Parameterization& K, const CompositionOptions& opts = {})
        : K_(K), opts_(opts)
    {
        const std::size_t m = K.map.degree();
        for (std::size_t c = 0; c < 2; ++c)
            for (std::size_t j = 0; j <= m; ++j) fs_.push_back(K.map.part(c).coeff_or_zero(j));
    }

    const Parameterization& K() const { return K_; }
    const CompositionOptions& options() const { return opts_; }
    void set_min_orders(std::size_t orders) { cache_.set_min_orders(orders); }

    KWComposition compose(const TorusMapFT& W, bool with_jacobian = true)
    {
        const std::size_t n = W.n_theta();
        if (n != K_.map.n_theta()) throw contract_error("compose_K_with_W: grid mismatch");
        const std::size_t k = W.degree();
        const std::size_t m = K_.map.degree();
        const auto& W1 = W.part(0);
        const auto& W2 = W.part(1);

        const double w2max = W2[0].sup_norm();
        if (w2max > K_.scale_b)
            throw range_error("K o W: |W_2| = " + std::to_string(w2max) + " leaves the domain of K (radius " +
                                  std::to_string(K_.scale_b) + ")",
                              w2max);

        auto base = W.order0_samples(0);
        const std::size_t orders = k + 2;
        const JetBlock& jets = cache_.get(fs_, base, orders, opts_);

        const std::size_t w = k + 1;
        std::array<std::vector<std::vector<double>>, 2> val, dth, dsv;
        for (std::size_t c = 0; c < 2; ++c) {
            val[c].assign(w, std::vector<double>(n));
            if (with_jacobian) {
                dth[c].assign(w, std::vector<double>(n));
                dsv[c].assign(w, std::vector<double>(n));
            }
        }

        parallel_for(n, [&](std::size_t i) {
            detail::PointComposer pc;
            pc.mode = opts_.mode;
            auto q = detail::point_poly(W1, i, k);
            q[0] = base[i];
            pc.prepare(q);
            auto w2 = detail::point_poly(W2, i, k);
            std::vector<double> C((m + 1) * w), D((m + 1) * w), acc(w), tmp(w), dacc(w);
            for (std::size_t c = 0; c < 2; ++c) {
                for (std::size_t j = 0; j <= m; ++j) {
                    pc.apply(jets.at(c * (m + 1) + j, i), 0, &C[j * w]);
                    if (with_jacobian) pc.apply(jets.at(c * (m + 1) + j, i), 1, &D[j * w]);
                }
                horner(C, m, w2, acc, tmp);
                for (std::size_t r = 0; r < w; ++r) val[c][r][i] = acc[r];
                if (!with_jacobian) continue;
                horner(D, m, w2, acc, tmp);
                for (std::size_t r = 0; r < w; ++r) dth[c][r][i] = acc[r];
                // sum_j j C_j w2^{j-1}
                std::fill(dacc.begin(), dacc.end(), 0.0);
                for (std::size_t j = m; j >= 1; --j) {
                    detail::poly_mul(dacc.data(), w2.data(), tmp.data(), w);
                    for (std::size_t r = 0; r < w; ++r) dacc[r] = tmp[r] + static_cast<double>(j) * C[j * w + r];
                }
                for (std::size_t r = 0; r < w; ++r) dsv[c][r][i] = dacc[r];
            }
        });

        KWComposition out;
        for (std::size_t c = 0; c < 2; ++c) {
            out.value[c] = detail::series_from_samples(val[c]);
            if (with_jacobian) {
                out.d_theta[c] = detail::series_from_samples(dth[c]);
                out.d_s[c] = detail::series_from_samples(dsv[c]);
            }
        }
        return out;
    }

private:
    static void horner(const std::vector<double>& C, std::size_t m, const std::vector<double>& w2,
                       std::vector<double>& acc, std::vector<double>& tmp)
    {
        const std::size_t w = acc.size();
        std::copy(C.begin() + static_cast<std::ptrdiff_t>(m * w), C.begin() + static_cast<std::ptrdiff_t>((m + 1) * w),
                  acc.begin());
        for (std::size_t j = m; j-- > 0;) {
            detail::poly_mul(acc.data(), w2.data(), tmp.data(), w);
            for (std::size_t r = 0; r < w; ++r) acc[r] = tmp[r] + C[j * w + r];
        }
    }

    Parameterization K_;
    CompositionOptions opts_;
    std::vector<PeriodicFunction> fs_;
    JetCache cache_;
};

inline KWComposition compose_K_with_W(const Parameterization& K, const TorusMapFT& W,
                                      const CompositionOptions& opts = {})
{
    KComposer composer(K, opts);
    return composer.compose(W);
}

// ---------------------------------------------------------------------------
// Delayed argument

/// A scalar delay r(x_c) of one state component, with derivative callbacks.
struct DelayFunction {
    /// Fills out[l] = d^l r / dx^l at x for l < out.size().
    std::function<void(double, std::span<double>)> derivatives;
    std::size_t component = 0;
    /// Set when r is constant; enables the exact shift-and-rescale path.
    std::optional<double> constant;

    double operator()(double x) const
    {
        double v = 0;
        derivatives(x, std::span<double>(&v, 1));
        return v;
    }
};

/// W~(theta, s) = W(theta - omega beta, s e^{-lambda beta}) for constant delay beta.
inline TorusMapFT delayed_argument_constant(const TorusMapFT& W, double omega, double lambda, double beta)
{
    const double d = -omega * beta;
    const double g = std::exp(-lambda * beta);
    FTVec2 parts;
    for (std::size_t c = 0; c < 2; ++c) {
        std::vector<PeriodicFunction> cs;
        double f = 1;
        for (std::size_t j = 0; j <= W.part(c).degree(); ++j, f *= g) cs.push_back(shift(W.part(c)[j], d) * f);
        parts[c] = FourierTaylor(std::move(cs));
    }
    // the winding term of the shifted angle contributes w * d to the periodic part
    for (std::size_t c = 0; c < 2; ++c) parts[c][0] += W.winding()[c] * d;
    return {W.winding(), std::move(parts)};
}

/// R(theta, s) = r(x(theta, s)) for a series x, by the composition table per grid point.
inline FourierTaylor compose_scalar(const DelayFunction& r, const FourierTaylor& x, const CompositionOptions& opts = {})
{
    const std::size_t n = x.n_theta();
    const std::size_t k = x.degree();
    std::vector<std::vector<double>> cols(k + 1, std::vector<double>(n));
    parallel_for(n, [&](std::size_t i) {
        auto q = detail::point_poly(x, i, k);
        std::vector<double> d(k + 2);
        r.derivatives(q[0], d);
        detail::PointComposer pc;
        pc.mode = opts.mode;
        if (pc.mode == CompositionMode::ad) {
            double fact = 1;
            for (std::size_t l = 1; l <= k; ++l) {
                fact *= static_cast<double>(l);
                d[l] /= fact;
            }
        }
        pc.prepare(q);
        std::vector<double> out(k + 1);
        pc.apply(d.data(), 0, out.data());
        for (std::size_t r2 = 0; r2 <= k; ++r2) cols[r2][i] = out[r2];
    });
    return detail::series_from_samples(cols);
}

/// Builds W~ = W(theta - omega r(K o W), s e^{-lambda r(K o W)}) in the
/// variable of W, caching jets of the coefficients W^j at the shifted angles.
class DelayComposer {
public:
    DelayComposer(KComposer& K, DelayFunction r)
        : K_(K), r_(std::move(r))
    {
    }

    void set_min_orders(std::size_t orders)
    {
        min_orders_ = orders;
        for (auto& c : caches_) c.set_min_orders(orders);
    }

    TorusMapFT operator()(const TorusMapFT& W, double omega, double lambda)
    {
        if (r_.constant) return delayed_argument_constant(W, omega, lambda, *r_.constant);
        const std::size_t n = W.n_theta();
        const std::size_t k = W.degree();
        const auto& opts = K_.options();

        auto KW = K_.compose(W, false);
        auto R = compose_scalar(r_, KW.value[r_.component], opts);
        auto delta = R * (-omega);
        auto g = ft_exp(R * (-lambda));

        PeriodicFunction delta0 = delta[0];
        FourierTaylor higher = delta;
        higher[0] = PeriodicFunction::zero(n);

        std::vector<PeriodicFunction> sg_c(k + 1, PeriodicFunction::zero(n));
        for (std::size_t j = 1; j <= k; ++j) sg_c[j] = g[j - 1];
        FourierTaylor sg(std::move(sg_c));

        while (caches_.size() < 2 * (k + 1)) {
            caches_.emplace_back(2);
            caches_.back().set_min_orders(min_orders_);
        }
        FTVec2 parts;
        for (std::size_t c = 0; c < 2; ++c) {
            auto coeff = [&](std::size_t j) {
                return compose_periodic_with_torus_arg(W.part(c).coeff_or_zero(j), delta0, higher, opts,
                                                       &caches_[c * (k + 1) + j]);
            };
            // Horner in s g over the composed coefficients W^j(theta + delta)
            FourierTaylor acc = coeff(k);
            for (std::size_t j = k; j-- > 0;) acc = ft_mul(acc, sg, k) + coeff(j);
            if (W.winding()[c] != 0) acc = acc + delta * static_cast<double>(W.winding()[c]);
            parts[c] = std::move(acc);
        }
        return {W.winding(), std::move(parts)};
    }

private:
    KComposer& K_;
    DelayFunction r_;
    std::vector<JetCache> caches_;
    std::size_t min_orders_ = 0;
};

inline TorusMapFT delayed_argument(const TorusMapFT& W, double omega, double lambda, KComposer& K,
                                   const DelayFunction& r)
{
    DelayComposer d(K, r);
    return d(W, omega, lambda);
}

/// Convenience overload: W and K as parameterizations; W~ is returned in the
/// scaled variable of W.
inline TorusMapFT delayed_argument(const Parameterization& W, const Parameterization& K, const DelayFunction& r,
                                   const CompositionOptions& opts = {})
{
    KComposer composer(K, opts);
    return delayed_argument(W.scaled_map(), W.omega, W.lambda, composer, r);
}

} // namespace isochron

#endif
