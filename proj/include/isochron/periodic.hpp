// Real 1-periodic functions on a uniform grid theta_k = k/n.
//
// A PeriodicFunction carries both its grid samples and its real Fourier
// coefficients. Coefficients use the sequential layout
//
//   n even: (a_0, a_{n/2}, a_1, b_1, a_2, b_2, ..., a_{n/2-1}, b_{n/2-1})
//   n odd:  (a_0, a_1, b_1, ..., a_{(n-1)/2}, b_{(n-1)/2})
//
// so that S(theta) = a_0/2 + a_{n/2}/2 cos(pi n theta)
//                    + sum_k a_k cos(2 pi k theta) + b_k sin(2 pi k theta).
// The complex coefficients are S^_k = (a_k - i b_k)/2, S^_0 = a_0/2.

#ifndef ISOCHRON_PERIODIC_HPP
#define ISOCHRON_PERIODIC_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "fft.hpp"

namespace isochron {

using cplx = std::complex<double>;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

namespace detail {

inline void require_grid(std::size_t n)
{
    if (n < 2) throw contract_error("periodic grid needs at least 2 points, got " + std::to_string(n));
}

// Largest retained non-Nyquist mode index.
inline std::size_t last_regular_mode(std::size_t n) { return (n % 2 == 0) ? n / 2 - 1 : (n - 1) / 2; }

inline std::size_t a_index(std::size_t k, std::size_t n) { return (n % 2 == 0) ? 2 * k : 2 * k - 1; }
inline std::size_t b_index(std::size_t k, std::size_t n) { return a_index(k, n) + 1; }

/// Half spectrum S^_0..S^_{n/2} from the sequential real layout.
inline std::vector<cplx> coeffs_to_modes(std::span<const double> c)
{
    const std::size_t n = c.size();
    std::vector<cplx> m(n / 2 + 1);
    m[0] = c[0] / 2;
    for (std::size_t k = 1; k <= last_regular_mode(n); ++k)
        m[k] = cplx(c[a_index(k, n)], -c[b_index(k, n)]) / 2.0;
    if (n % 2 == 0) m[n / 2] = c[1] / 2;
    return m;
}

inline std::vector<double> modes_to_coeffs(std::span<const cplx> m, std::size_t n)
{
    std::vector<double> c(n);
    c[0] = 2 * m[0].real();
    for (std::size_t k = 1; k <= last_regular_mode(n); ++k) {
        c[a_index(k, n)] = 2 * m[k].real();
        c[b_index(k, n)] = -2 * m[k].imag();
    }
    if (n % 2 == 0) c[1] = 2 * m[n / 2].real();
    return c;
}

} // namespace detail

/// Real Fourier coefficients of grid samples (FFT, normalized by 1/n).
inline std::vector<double> dft_forward(std::span<const double> samples)
{
    const std::size_t n = samples.size();
    detail::require_grid(n);
    std::vector<cplx> spec(n / 2 + 1);
    detail::fft_for(n).forward(samples, spec);
    for (auto& z : spec) z /= static_cast<double>(n);
    return detail::modes_to_coeffs(spec, n);
}

/// Grid samples from real Fourier coefficients.
inline std::vector<double> dft_inverse(std::span<const double> coeffs)
{
    const std::size_t n = coeffs.size();
    detail::require_grid(n);
    auto modes = detail::coeffs_to_modes(coeffs);
    std::vector<double> out(n);
    detail::fft_for(n).inverse(modes, out);
    return out;
}

class PeriodicFunction {
public:
    PeriodicFunction() = default;

    static PeriodicFunction from_samples(std::vector<double> samples)
    {
        PeriodicFunction f;
        f.coeffs_ = dft_forward(samples);
        f.samples_ = std::move(samples);
        return f;
    }

    static PeriodicFunction from_coeffs(std::vector<double> coeffs)
    {
        PeriodicFunction f;
        f.samples_ = dft_inverse(coeffs);
        f.coeffs_ = std::move(coeffs);
        return f;
    }

    static PeriodicFunction zero(std::size_t n)
    {
        detail::require_grid(n);
        PeriodicFunction f;
        f.samples_.assign(n, 0.0);
        f.coeffs_.assign(n, 0.0);
        return f;
    }

    static PeriodicFunction constant(std::size_t n, double value)
    {
        auto f = zero(n);
        std::fill(f.samples_.begin(), f.samples_.end(), value);
        f.coeffs_[0] = 2 * value;
        return f;
    }

    /// Samples fn(theta_k) on the uniform grid.
    template <class Fn>
    static PeriodicFunction sample(std::size_t n, Fn&& fn)
    {
        detail::require_grid(n);
        std::vector<double> s(n);
        for (std::size_t k = 0; k < n; ++k) s[k] = fn(static_cast<double>(k) / static_cast<double>(n));
        return from_samples(std::move(s));
    }

    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    std::span<const double> samples() const { return samples_; }
    std::span<const double> coeffs() const { return coeffs_; }

    double mean() const { return coeffs_[0] / 2; }

    /// Complex coefficient S^_k for 0 <= k <= n/2.
    cplx mode(std::size_t k) const
    {
        const std::size_t n = size();
        if (k == 0) return coeffs_[0] / 2;
        if (n % 2 == 0 && k == n / 2) return coeffs_[1] / 2;
        if (k > detail::last_regular_mode(n)) throw contract_error("mode index out of range");
        return cplx(coeffs_[detail::a_index(k, n)], -coeffs_[detail::b_index(k, n)]) / 2.0;
    }

    std::vector<cplx> modes() const { return detail::coeffs_to_modes(coeffs_); }

    /// Direct trigonometric-series evaluation at an arbitrary angle.
    double operator()(double theta) const;

    double sup_norm() const
    {
        double m = 0;
        for (double v : samples_) m = std::max(m, std::abs(v));
        return m;
    }

    /// 2-norm of the complex coefficient vector (equals the grid RMS).
    double l2_norm() const
    {
        double acc = 0;
        for (double v : samples_) acc += v * v;
        return std::sqrt(acc / static_cast<double>(size()));
    }

    PeriodicFunction& operator+=(const PeriodicFunction& g)
    {
        check_same_grid(g);
        for (std::size_t i = 0; i < size(); ++i) {
            samples_[i] += g.samples_[i];
            coeffs_[i] += g.coeffs_[i];
        }
        return *this;
    }

    PeriodicFunction& operator-=(const PeriodicFunction& g)
    {
        check_same_grid(g);
        for (std::size_t i = 0; i < size(); ++i) {
            samples_[i] -= g.samples_[i];
            coeffs_[i] -= g.coeffs_[i];
        }
        return *this;
    }

    PeriodicFunction& operator*=(double c)
    {
        for (std::size_t i = 0; i < size(); ++i) {
            samples_[i] *= c;
            coeffs_[i] *= c;
        }
        return *this;
    }

    PeriodicFunction& operator+=(double c)
    {
        for (auto& v : samples_) v += c;
        coeffs_[0] += 2 * c;
        return *this;
    }

    void check_same_grid(const PeriodicFunction& g) const
    {
        if (g.size() != size())
            throw contract_error("grid mismatch: " + std::to_string(size()) + " vs " + std::to_string(g.size()));
    }

private:
    std::vector<double> samples_;
    std::vector<double> coeffs_;
};

inline PeriodicFunction operator+(PeriodicFunction f, const PeriodicFunction& g) { return f += g; }
inline PeriodicFunction operator-(PeriodicFunction f, const PeriodicFunction& g) { return f -= g; }
inline PeriodicFunction operator*(PeriodicFunction f, double c) { return f *= c; }
inline PeriodicFunction operator*(double c, PeriodicFunction f) { return f *= c; }
inline PeriodicFunction operator-(PeriodicFunction f) { return f *= -1.0; }
inline PeriodicFunction operator+(PeriodicFunction f, double c) { return f += c; }
inline PeriodicFunction operator-(PeriodicFunction f, double c) { return f += -c; }

namespace detail {

/// Samples on the 2n grid of the zero-padded spectrum of f.
inline std::vector<double> padded_samples(const PeriodicFunction& f)
{
    const std::size_t n = f.size();
    const std::size_t m = 2 * n;
    std::vector<cplx> spec(m / 2 + 1, cplx(0, 0));
    auto modes = f.modes();
    for (std::size_t k = 0; k <= last_regular_mode(n); ++k) spec[k] = modes[k];
    if (n % 2 == 0) spec[n / 2] = modes[n / 2] / 2.0; // split the cosine between +-n/2
    std::vector<double> out(m);
    fft_for(m).inverse(spec, out);
    return out;
}

/// Truncates 2n-grid samples back to the n-mode representation.
inline PeriodicFunction from_padded_samples(std::span<const double> padded, std::size_t n)
{
    const std::size_t m = padded.size();
    std::vector<cplx> spec(m / 2 + 1);
    fft_for(m).forward(padded, spec);
    std::vector<cplx> modes(n / 2 + 1);
    for (std::size_t k = 0; k <= last_regular_mode(n); ++k) modes[k] = spec[k] / static_cast<double>(m);
    if (n % 2 == 0) modes[n / 2] = 2.0 * spec[n / 2].real() / static_cast<double>(m);
    return PeriodicFunction::from_coeffs(modes_to_coeffs(modes, n));
}

} // namespace detail

/// Product evaluated on a zero-padded 2n grid and truncated back to n modes.
inline PeriodicFunction operator*(const PeriodicFunction& f, const PeriodicFunction& g)
{
    f.check_same_grid(g);
    auto pf = detail::padded_samples(f);
    auto pg = detail::padded_samples(g);
    for (std::size_t i = 0; i < pf.size(); ++i) pf[i] *= pg[i];
    return detail::from_padded_samples(pf, f.size());
}

/// Grid-pointwise map (collocation): samples -> fn(samples).
template <class Fn>
PeriodicFunction map_samples(const PeriodicFunction& f, Fn&& fn)
{
    std::vector<double> s(f.samples().begin(), f.samples().end());
    for (auto& v : s) v = fn(v);
    return PeriodicFunction::from_samples(std::move(s));
}

/// Spectral derivative d/dtheta; the Nyquist mode of the result is zero.
inline PeriodicFunction differentiate(const PeriodicFunction& f)
{
    const std::size_t n = f.size();
    std::vector<double> c(n, 0.0);
    auto src = f.coeffs();
    for (std::size_t k = 1; k <= detail::last_regular_mode(n); ++k) {
        const double w = two_pi * static_cast<double>(k);
        c[detail::a_index(k, n)] = w * src[detail::b_index(k, n)];
        c[detail::b_index(k, n)] = -w * src[detail::a_index(k, n)];
    }
    return PeriodicFunction::from_coeffs(std::move(c));
}

/// Mean-zero antiderivative of the mean-zero part of f.
inline PeriodicFunction antiderivative(const PeriodicFunction& f)
{
    const std::size_t n = f.size();
    std::vector<double> c(n, 0.0);
    auto src = f.coeffs();
    for (std::size_t k = 1; k <= detail::last_regular_mode(n); ++k) {
        const double w = two_pi * static_cast<double>(k);
        c[detail::a_index(k, n)] = -src[detail::b_index(k, n)] / w;
        c[detail::b_index(k, n)] = src[detail::a_index(k, n)] / w;
    }
    return PeriodicFunction::from_coeffs(std::move(c));
}

/// theta -> f(theta + delta), exact on the retained modes.
inline PeriodicFunction shift(const PeriodicFunction& f, double delta)
{
    const std::size_t n = f.size();
    auto modes = f.modes();
    for (std::size_t k = 1; k <= detail::last_regular_mode(n); ++k)
        modes[k] *= std::polar(1.0, two_pi * static_cast<double>(k) * delta);
    if (n % 2 == 0) modes[n / 2] *= std::cos(std::numbers::pi * static_cast<double>(n) * delta);
    return PeriodicFunction::from_coeffs(detail::modes_to_coeffs(modes, n));
}

namespace detail {

// sum_{k>=1} c_k z^k by Horner, with c_k = S^_k doubled (a_k - i b_k).
inline double horner_eval(std::span<const double> coeffs, double theta)
{
    const std::size_t n = coeffs.size();
    double x = theta - std::floor(theta);
    const cplx z = std::polar(1.0, two_pi * x);
    const std::size_t top = last_regular_mode(n);
    cplx acc(0, 0);
    if (n % 2 == 0 && n >= 2) acc = cplx(coeffs[1] / 2, 0); // Nyquist as k = n/2
    const std::size_t first = (n % 2 == 0) ? n / 2 : top;
    if (n % 2 == 0) {
        for (std::size_t k = first - 1; k >= 1; --k)
            acc = acc * z + cplx(coeffs[a_index(k, n)], -coeffs[b_index(k, n)]);
    } else {
        for (std::size_t k = top; k >= 1; --k)
            acc = acc * z + cplx(coeffs[a_index(k, n)], -coeffs[b_index(k, n)]);
    }
    return coeffs[0] / 2 + (acc * z).real();
}

} // namespace detail

inline double PeriodicFunction::operator()(double theta) const { return detail::horner_eval(coeffs_, theta); }

/// Evaluates f at arbitrary angles by direct summation, O(n p).
inline std::vector<double> eval_nonuniform(const PeriodicFunction& f, std::span<const double> points)
{
    std::vector<double> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = f(points[i]);
    return out;
}

/// Weighted l1 seminorm sum_k ((n-k)^order + k^order)|S^_k| over nonconstant modes.
inline double weighted_norm(const PeriodicFunction& f, unsigned order)
{
    const std::size_t n = f.size();
    const double nn = static_cast<double>(n);
    auto c = f.coeffs();
    double acc = 0;
    if (n % 2 == 0) acc += std::pow(nn / 2, order) * std::abs(c[1]);
    for (std::size_t k = 1; k <= detail::last_regular_mode(n); ++k) {
        const double kk = static_cast<double>(k);
        acc += 0.5 * (std::pow(nn - kk, order) + std::pow(kk, order)) *
               std::hypot(c[detail::a_index(k, n)], c[detail::b_index(k, n)]);
    }
    return acc;
}

/// |S^_k|^2 for k = 0..n/2.
inline std::vector<double> power_spectrum(const PeriodicFunction& f)
{
    auto m = f.modes();
    std::vector<double> p(m.size());
    for (std::size_t k = 0; k < m.size(); ++k) p[k] = std::norm(m[k]);
    return p;
}

/// Keeps the modes |k| <= kmax and zeroes the rest (including Nyquist).
inline PeriodicFunction low_pass(const PeriodicFunction& f, std::size_t kmax)
{
    const std::size_t n = f.size();
    std::vector<double> c(f.coeffs().begin(), f.coeffs().end());
    if (n % 2 == 0 && kmax < n / 2) c[1] = 0;
    for (std::size_t k = kmax + 1; k <= detail::last_regular_mode(n); ++k) {
        c[detail::a_index(k, n)] = 0;
        c[detail::b_index(k, n)] = 0;
    }
    return PeriodicFunction::from_coeffs(std::move(c));
}

/// Zeroes the trailing modes whose magnitude is below rel_tol times the
/// largest one. Interior modes are never touched.
inline PeriodicFunction trimmed(const PeriodicFunction& f, double rel_tol)
{
    if (rel_tol <= 0) return f;
    auto m = f.modes();
    double peak = 0;
    for (const auto& z : m) peak = std::max(peak, std::abs(z));
    std::size_t keep = 0;
    for (std::size_t k = 0; k < m.size(); ++k)
        if (std::abs(m[k]) > rel_tol * peak) keep = k;
    if (keep + 1 == m.size()) return f;
    for (std::size_t k = keep + 1; k < m.size(); ++k) m[k] = 0;
    return PeriodicFunction::from_coeffs(detail::modes_to_coeffs(m, f.size()));
}

/// Index of the highest mode whose magnitude exceeds rel_tol times the peak.
inline std::size_t effective_bandwidth(const PeriodicFunction& f, double rel_tol)
{
    auto m = f.modes();
    double peak = 0;
    for (const auto& z : m) peak = std::max(peak, std::abs(z));
    std::size_t keep = 0;
    for (std::size_t k = 0; k < m.size(); ++k)
        if (std::abs(m[k]) > rel_tol * peak) keep = k;
    return keep;
}

/// Littlewood-Paley regularity diagnostic. Fits
///   log || (d/dt)^eta exp(-t sqrt(-Laplacian)) f ||_inf  ~  (alpha - eta) log t
/// over t_grid by least squares and returns the estimate of alpha.
inline double holder_estimate(const PeriodicFunction& f, unsigned eta, std::span<const double> t_grid)
{
    if (t_grid.size() < 2) throw contract_error("holder_estimate needs at least two t values");
    const std::size_t n = f.size();
    auto modes = f.modes();
    double energy = 0;
    for (std::size_t k = 1; k < modes.size(); ++k) energy += std::abs(modes[k]);
    if (energy == 0) throw regularity_error("holder_estimate: constant function has no defined regularity");

    std::vector<double> xs, ys;
    for (double t : t_grid) {
        if (t <= 0) throw contract_error("holder_estimate: t values must be positive");
        std::vector<cplx> m(modes.size(), cplx(0, 0));
        for (std::size_t k = 1; k < modes.size(); ++k) {
            const double w = two_pi * static_cast<double>(k);
            m[k] = modes[k] * std::pow(-w, static_cast<double>(eta)) * std::exp(-w * t);
        }
        std::vector<double> s(n);
        detail::fft_for(n).inverse(m, s);
        double sup = 0;
        for (double v : s) sup = std::max(sup, std::abs(v));
        xs.push_back(std::log(t));
        ys.push_back(std::log(sup));
    }
    const double nx = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / nx;
        my += ys[i] / nx;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return static_cast<double>(eta) + sxy / sxx;
}

// Text format: "PF v1 n_theta=<n>" followed by n coefficients, one per line.
inline void write_pf(std::ostream& os, const PeriodicFunction& f)
{
    os << "PF v1 n_theta=" << f.size() << '\n';
    os << std::setprecision(17);
    for (double c : f.coeffs()) os << c << '\n';
}

namespace detail {

inline std::string next_content_line(std::istream& is)
{
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        return line;
    }
    throw parse_error("unexpected end of input");
}

inline std::size_t parse_key_size(const std::string& line, const std::string& key)
{
    auto pos = line.find(key + "=");
    if (pos == std::string::npos) throw parse_error("missing '" + key + "' in header: " + line);
    return static_cast<std::size_t>(std::stoull(line.substr(pos + key.size() + 1)));
}

inline double parse_double(const std::string& text)
{
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw parse_error("not a number: " + text);
    }
    return v;
}

} // namespace detail

inline PeriodicFunction read_pf(std::istream& is)
{
    auto header = detail::next_content_line(is);
    if (header.rfind("PF v1", 0) != 0) throw parse_error("expected 'PF v1' header, got: " + header);
    const std::size_t n = detail::parse_key_size(header, "n_theta");
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = detail::parse_double(detail::next_content_line(is));
    return PeriodicFunction::from_coeffs(std::move(c));
}

} // namespace isochron

#endif
