// Truncated power series in s with periodic coefficients:
//   x(theta, s) = sum_{j=0}^{degree} x_j(theta) s^j.

#ifndef ISOCHRON_FOURIER_TAYLOR_HPP
#define ISOCHRON_FOURIER_TAYLOR_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "periodic.hpp"

namespace isochron {

class FourierTaylor {
public:
    FourierTaylor() = default;

    explicit FourierTaylor(std::vector<PeriodicFunction> coeffs)
        : c_(std::move(coeffs))
    {
        if (c_.empty()) throw contract_error("FourierTaylor needs at least one coefficient");
        for (const auto& f : c_) c_.front().check_same_grid(f);
    }

    static FourierTaylor zero(std::size_t n_theta, std::size_t degree)
    {
        return FourierTaylor(std::vector<PeriodicFunction>(degree + 1, PeriodicFunction::zero(n_theta)));
    }

    static FourierTaylor constant(std::size_t n_theta, std::size_t degree, double value)
    {
        auto x = zero(n_theta, degree);
        x.c_[0] = PeriodicFunction::constant(n_theta, value);
        return x;
    }

    /// The series s (requires degree >= 1).
    static FourierTaylor variable(std::size_t n_theta, std::size_t degree)
    {
        if (degree < 1) throw contract_error("the series s needs degree >= 1");
        auto x = zero(n_theta, degree);
        x.c_[1] = PeriodicFunction::constant(n_theta, 1.0);
        return x;
    }

    std::size_t degree() const { return c_.size() - 1; }
    std::size_t n_theta() const { return c_.front().size(); }

    const PeriodicFunction& operator[](std::size_t j) const { return c_.at(j); }
    PeriodicFunction& operator[](std::size_t j) { return c_.at(j); }
    const std::vector<PeriodicFunction>& coeffs() const { return c_; }

    /// Coefficient j, or zero when j exceeds the degree.
    PeriodicFunction coeff_or_zero(std::size_t j) const
    {
        return j < c_.size() ? c_[j] : PeriodicFunction::zero(n_theta());
    }

    FourierTaylor truncated(std::size_t degree) const
    {
        std::vector<PeriodicFunction> c(degree + 1, PeriodicFunction::zero(n_theta()));
        for (std::size_t j = 0; j <= std::min(degree, this->degree()); ++j) c[j] = c_[j];
        return FourierTaylor(std::move(c));
    }

    /// Horner evaluation in s of the trigonometric coefficients at theta.
    double operator()(double theta, double s) const
    {
        double acc = 0;
        for (std::size_t j = c_.size(); j-- > 0;) acc = acc * s + c_[j](theta);
        return acc;
    }

    /// Largest sup norm over all coefficients.
    double max_sup_norm() const
    {
        double m = 0;
        for (const auto& f : c_) m = std::max(m, f.sup_norm());
        return m;
    }

    void check_same_grid(const FourierTaylor& y) const
    {
        if (y.n_theta() != n_theta())
            throw contract_error("grid mismatch: " + std::to_string(n_theta()) + " vs " +
                                 std::to_string(y.n_theta()));
    }

private:
    std::vector<PeriodicFunction> c_;
};

inline FourierTaylor ft_add(const FourierTaylor& x, const FourierTaylor& y)
{
    x.check_same_grid(y);
    const std::size_t d = std::max(x.degree(), y.degree());
    std::vector<PeriodicFunction> c;
    c.reserve(d + 1);
    for (std::size_t j = 0; j <= d; ++j) c.push_back(x.coeff_or_zero(j) + y.coeff_or_zero(j));
    return FourierTaylor(std::move(c));
}

inline FourierTaylor ft_sub(const FourierTaylor& x, const FourierTaylor& y)
{
    x.check_same_grid(y);
    const std::size_t d = std::max(x.degree(), y.degree());
    std::vector<PeriodicFunction> c;
    c.reserve(d + 1);
    for (std::size_t j = 0; j <= d; ++j) c.push_back(x.coeff_or_zero(j) - y.coeff_or_zero(j));
    return FourierTaylor(std::move(c));
}

inline FourierTaylor ft_scale(const FourierTaylor& x, double a)
{
    std::vector<PeriodicFunction> c;
    c.reserve(x.degree() + 1);
    for (const auto& f : x.coeffs()) c.push_back(f * a);
    return FourierTaylor(std::move(c));
}

/// Multiplies every coefficient by the periodic function g (dealiased).
inline FourierTaylor ft_scale(const FourierTaylor& x, const PeriodicFunction& g)
{
    std::vector<PeriodicFunction> c;
    c.reserve(x.degree() + 1);
    for (const auto& f : x.coeffs()) c.push_back(f * g);
    return FourierTaylor(std::move(c));
}

namespace detail {

using Padded = std::vector<double>;

inline std::vector<Padded> pad_all(const FourierTaylor& x)
{
    std::vector<Padded> p;
    p.reserve(x.degree() + 1);
    for (const auto& f : x.coeffs()) p.push_back(padded_samples(f));
    return p;
}

inline void axpy_product(Padded& acc, double a, const Padded& u, const Padded& v)
{
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += a * u[i] * v[i];
}

} // namespace detail

/// Cauchy product truncated at `cap` (default: the larger input degree).
inline FourierTaylor ft_mul(const FourierTaylor& x, const FourierTaylor& y,
                            std::size_t cap = std::numeric_limits<std::size_t>::max())
{
    x.check_same_grid(y);
    if (cap == std::numeric_limits<std::size_t>::max()) cap = std::max(x.degree(), y.degree());
    const std::size_t n = x.n_theta();
    auto px = detail::pad_all(x);
    auto py = detail::pad_all(y);
    std::vector<PeriodicFunction> c;
    c.reserve(cap + 1);
    for (std::size_t j = 0; j <= cap; ++j) {
        detail::Padded acc(2 * n, 0.0);
        for (std::size_t i = 0; i <= std::min(j, x.degree()); ++i)
            if (j - i <= y.degree()) detail::axpy_product(acc, 1.0, px[i], py[j - i]);
        c.push_back(detail::from_padded_samples(acc, n));
    }
    return FourierTaylor(std::move(c));
}

inline FourierTaylor operator+(const FourierTaylor& x, const FourierTaylor& y) { return ft_add(x, y); }
inline FourierTaylor operator-(const FourierTaylor& x, const FourierTaylor& y) { return ft_sub(x, y); }
inline FourierTaylor operator*(const FourierTaylor& x, const FourierTaylor& y) { return ft_mul(x, y); }
inline FourierTaylor operator*(const FourierTaylor& x, double a) { return ft_scale(x, a); }
inline FourierTaylor operator*(double a, const FourierTaylor& x) { return ft_scale(x, a); }
inline FourierTaylor operator/(const FourierTaylor& x, double a) { return ft_scale(x, 1.0 / a); }
inline FourierTaylor operator-(const FourierTaylor& x) { return ft_scale(x, -1.0); }

inline FourierTaylor operator+(FourierTaylor x, double a)
{
    x[0] += a;
    return x;
}
inline FourierTaylor operator+(double a, FourierTaylor x) { return std::move(x) + a; }
inline FourierTaylor operator-(FourierTaylor x, double a) { return std::move(x) + (-a); }
inline FourierTaylor operator-(double a, const FourierTaylor& x) { return (-x) + a; }

/// exp of a series: E_0 = exp(P_0), E_j = (1/j) sum_{k<j} (j-k) P_{j-k} E_k.
inline FourierTaylor ft_exp(const FourierTaylor& p)
{
    const std::size_t n = p.n_theta();
    const std::size_t d = p.degree();
    auto pp = detail::pad_all(p);
    std::vector<PeriodicFunction> e;
    std::vector<detail::Padded> pe;
    e.push_back(map_samples(p[0], [](double v) { return std::exp(v); }));
    pe.push_back(detail::padded_samples(e[0]));
    for (std::size_t j = 1; j <= d; ++j) {
        detail::Padded acc(2 * n, 0.0);
        for (std::size_t k = 0; k < j; ++k)
            detail::axpy_product(acc, static_cast<double>(j - k) / static_cast<double>(j), pp[j - k], pe[k]);
        e.push_back(detail::from_padded_samples(acc, n));
        pe.push_back(detail::padded_samples(e.back()));
    }
    return FourierTaylor(std::move(e));
}

/// Simultaneous sin and cos of a series.
inline std::pair<FourierTaylor, FourierTaylor> ft_sin_cos(const FourierTaylor& q)
{
    const std::size_t n = q.n_theta();
    const std::size_t d = q.degree();
    auto pq = detail::pad_all(q);
    std::vector<PeriodicFunction> s, c;
    std::vector<detail::Padded> ps, pc;
    s.push_back(map_samples(q[0], [](double v) { return std::sin(v); }));
    c.push_back(map_samples(q[0], [](double v) { return std::cos(v); }));
    ps.push_back(detail::padded_samples(s[0]));
    pc.push_back(detail::padded_samples(c[0]));
    for (std::size_t j = 1; j <= d; ++j) {
        detail::Padded as(2 * n, 0.0), ac(2 * n, 0.0);
        for (std::size_t k = 0; k < j; ++k) {
            const double w = static_cast<double>(j - k) / static_cast<double>(j);
            detail::axpy_product(as, w, pq[j - k], pc[k]);
            detail::axpy_product(ac, -w, pq[j - k], ps[k]);
        }
        s.push_back(detail::from_padded_samples(as, n));
        c.push_back(detail::from_padded_samples(ac, n));
        ps.push_back(detail::padded_samples(s.back()));
        pc.push_back(detail::padded_samples(c.back()));
    }
    return {FourierTaylor(std::move(s)), FourierTaylor(std::move(c))};
}

/// x^a for a series whose order-0 coefficient is positive on the grid:
/// j x_0 y_j = sum_{k=1}^{j} (a k - (j - k)) x_k y_{j-k}.
inline FourierTaylor ft_pow(const FourierTaylor& x, double a)
{
    const std::size_t n = x.n_theta();
    const std::size_t d = x.degree();
    for (double v : x[0].samples())
        if (v <= 0) throw contract_error("ft_pow needs a positive order-0 coefficient");
    auto px = detail::pad_all(x);
    const auto inv0 = map_samples(x[0], [](double v) { return 1.0 / v; });
    std::vector<PeriodicFunction> y;
    std::vector<detail::Padded> py;
    y.push_back(map_samples(x[0], [a](double v) { return std::pow(v, a); }));
    py.push_back(detail::padded_samples(y[0]));
    for (std::size_t j = 1; j <= d; ++j) {
        detail::Padded acc(2 * n, 0.0);
        for (std::size_t k = 1; k <= j; ++k) {
            const double w = (a * static_cast<double>(k) - static_cast<double>(j - k)) / static_cast<double>(j);
            detail::axpy_product(acc, w, px[k], py[j - k]);
        }
        y.push_back(detail::from_padded_samples(acc, n) * inv0);
        py.push_back(detail::padded_samples(y.back()));
    }
    return FourierTaylor(std::move(y));
}

/// 1/x for a series with nonvanishing order-0 coefficient.
inline FourierTaylor ft_reciprocal(const FourierTaylor& x)
{
    const std::size_t n = x.n_theta();
    for (double v : x[0].samples())
        if (v == 0) throw contract_error("ft_reciprocal: order-0 coefficient vanishes on the grid");
    auto px = detail::pad_all(x);
    const auto inv0 = map_samples(x[0], [](double v) { return 1.0 / v; });
    std::vector<PeriodicFunction> y{inv0};
    std::vector<detail::Padded> py{detail::padded_samples(inv0)};
    for (std::size_t j = 1; j <= x.degree(); ++j) {
        detail::Padded acc(2 * n, 0.0);
        for (std::size_t k = 1; k <= j; ++k) detail::axpy_product(acc, -1.0, px[k], py[j - k]);
        y.push_back(detail::from_padded_samples(acc, n) * inv0);
        py.push_back(detail::padded_samples(y.back()));
    }
    return FourierTaylor(std::move(y));
}

inline FourierTaylor pow(const FourierTaylor& x, double a) { return ft_pow(x, a); }
inline FourierTaylor sqrt(const FourierTaylor& x) { return ft_pow(x, 0.5); }
inline FourierTaylor exp(const FourierTaylor& x) { return ft_exp(x); }

using FTVec2 = std::array<FourierTaylor, 2>;
using FTMat2 = std::array<std::array<FourierTaylor, 2>, 2>;

inline constexpr double default_det_floor = 1e-10;

/// Solves A x = b order by order, A_0(theta) x_k = b_k - sum_{j>=1} A_j x_{k-j},
/// with A_0 inverted in closed form at every grid point.
inline FTVec2 ft_linear_solve(const FTMat2& A, const FTVec2& b, double det_floor = default_det_floor)
{
    const std::size_t n = b[0].n_theta();
    const std::size_t d = std::max(b[0].degree(), b[1].degree());
    for (const auto& row : A)
        for (const auto& e : row) e.check_same_grid(b[0]);
    b[1].check_same_grid(b[0]);

    auto at = [](const FourierTaylor& f, std::size_t j, std::size_t i) {
        return j <= f.degree() ? f[j].samples()[i] : 0.0;
    };

    std::vector<double> det(n);
    double min_det = std::numeric_limits<double>::infinity();
    std::size_t where = 0;
    for (std::size_t i = 0; i < n; ++i) {
        det[i] = at(A[0][0], 0, i) * at(A[1][1], 0, i) - at(A[0][1], 0, i) * at(A[1][0], 0, i);
        if (std::abs(det[i]) < min_det) {
            min_det = std::abs(det[i]);
            where = i;
        }
    }
    if (min_det < det_floor) {
        const double theta = static_cast<double>(where) / static_cast<double>(n);
        throw singular_matrix_error("ft_linear_solve: |det A_0| = " + std::to_string(min_det) +
                                        " below floor at theta = " + std::to_string(theta),
                                    min_det, theta);
    }

    std::vector<std::vector<double>> x1(d + 1, std::vector<double>(n)), x2 = x1;
    for (std::size_t k = 0; k <= d; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            double r1 = at(b[0], k, i), r2 = at(b[1], k, i);
            for (std::size_t j = 1; j <= k; ++j) {
                r1 -= at(A[0][0], j, i) * x1[k - j][i] + at(A[0][1], j, i) * x2[k - j][i];
                r2 -= at(A[1][0], j, i) * x1[k - j][i] + at(A[1][1], j, i) * x2[k - j][i];
            }
            x1[k][i] = (at(A[1][1], 0, i) * r1 - at(A[0][1], 0, i) * r2) / det[i];
            x2[k][i] = (at(A[0][0], 0, i) * r2 - at(A[1][0], 0, i) * r1) / det[i];
        }
    }
    std::vector<PeriodicFunction> c1, c2;
    for (std::size_t k = 0; k <= d; ++k) {
        c1.push_back(PeriodicFunction::from_samples(std::move(x1[k])));
        c2.push_back(PeriodicFunction::from_samples(std::move(x2[k])));
    }
    return {FourierTaylor(std::move(c1)), FourierTaylor(std::move(c2))};
}

inline FourierTaylor d_theta(const FourierTaylor& x)
{
    std::vector<PeriodicFunction> c;
    for (const auto& f : x.coeffs()) c.push_back(differentiate(f));
    return FourierTaylor(std::move(c));
}

/// d/ds, keeping the degree (the top coefficient becomes zero).
inline FourierTaylor d_s(const FourierTaylor& x)
{
    std::vector<PeriodicFunction> c;
    for (std::size_t j = 0; j < x.degree(); ++j) c.push_back(x[j + 1] * static_cast<double>(j + 1));
    c.push_back(PeriodicFunction::zero(x.n_theta()));
    return FourierTaylor(std::move(c));
}

/// s d/ds: coefficient j is multiplied by j.
inline FourierTaylor s_d_s(const FourierTaylor& x)
{
    std::vector<PeriodicFunction> c;
    for (std::size_t j = 0; j <= x.degree(); ++j) c.push_back(x[j] * static_cast<double>(j));
    return FourierTaylor(std::move(c));
}

inline double ft_eval(const FourierTaylor& x, double theta, double s) { return x(theta, s); }

/// Coefficient j multiplied by (b_new / b_old)^j.
inline FourierTaylor rescale(const FourierTaylor& x, double b_old, double b_new)
{
    if (!(b_old > 0) || !(b_new > 0)) throw contract_error("rescale needs positive scale factors");
    const double r = b_new / b_old;
    std::vector<PeriodicFunction> c;
    double f = 1;
    for (std::size_t j = 0; j <= x.degree(); ++j) {
        c.push_back(x[j] * f);
        f *= r;
    }
    return FourierTaylor(std::move(c));
}

/// A map (theta, s) -> (winding_1 theta + p_1, winding_2 theta + p_2) with
/// periodic Fourier-Taylor parts p_i.
class TorusMapFT {
public:
    TorusMapFT() = default;
    TorusMapFT(std::array<int, 2> winding, FTVec2 parts)
        : winding_(winding), parts_(std::move(parts))
    {
        parts_[0].check_same_grid(parts_[1]);
    }

    /// (theta, s) -> (theta, s).
    static TorusMapFT identity(std::size_t n_theta, std::size_t degree)
    {
        return {{1, 0}, {FourierTaylor::zero(n_theta, degree), FourierTaylor::variable(n_theta, degree)}};
    }

    std::array<int, 2> winding() const { return winding_; }
    const FourierTaylor& part(std::size_t i) const { return parts_.at(i); }
    FourierTaylor& part(std::size_t i) { return parts_.at(i); }
    const FTVec2& parts() const { return parts_; }
    std::size_t degree() const { return std::max(parts_[0].degree(), parts_[1].degree()); }
    std::size_t n_theta() const { return parts_[0].n_theta(); }

    std::array<double, 2> operator()(double theta, double s) const
    {
        return {winding_[0] * theta + parts_[0](theta, s), winding_[1] * theta + parts_[1](theta, s)};
    }

    /// Order-0 coefficient of component i including the winding term, sampled on the grid.
    std::vector<double> order0_samples(std::size_t i) const
    {
        auto s = parts_.at(i)[0].samples();
        std::vector<double> v(s.begin(), s.end());
        const double n = static_cast<double>(v.size());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] += winding_[i] * static_cast<double>(k) / n;
        return v;
    }

    TorusMapFT truncated(std::size_t degree) const
    {
        return {winding_, {parts_[0].truncated(degree), parts_[1].truncated(degree)}};
    }

    TorusMapFT rescaled(double b_old, double b_new) const
    {
        return {winding_, {rescale(parts_[0], b_old, b_new), rescale(parts_[1], b_old, b_new)}};
    }

private:
    std::array<int, 2> winding_{0, 0};
    FTVec2 parts_;
};

inline std::array<double, 2> ft_eval(const TorusMapFT& x, double theta, double s) { return x(theta, s); }

/// A torus map with its frequency omega, rate lambda and scale b. The stored
/// coefficients are the unscaled ones; evaluation uses the scaled variable,
/// (theta, s) -> sum_j W^j(theta) (b s)^j.
struct Parameterization {
    TorusMapFT map;
    double omega = 0;
    double lambda = 0;
    double scale_b = 1;

    void validate() const
    {
        if (!(omega > 0)) throw contract_error("parameterization needs omega > 0");
        if (!(lambda < 0)) throw contract_error("parameterization needs lambda < 0");
        if (!(scale_b > 0)) throw contract_error("parameterization needs scale_b > 0");
    }

    /// Coefficients W^j b^j, i.e. the map in the scaled variable.
    TorusMapFT scaled_map() const { return map.rescaled(1.0, scale_b); }

    std::array<double, 2> operator()(double theta, double s) const { return map(theta, scale_b * s); }
};

// Text formats:
//   FT v1 degree=<d> n_theta=<n>   followed by d+1 PF blocks
//   TM v1 winding=<w1>,<w2>        followed by two FT blocks
//   PARAM v1 omega=<w> lambda=<l> b=<b>  followed by a TM block
inline void write_ft(std::ostream& os, const FourierTaylor& x)
{
    os << "FT v1 degree=" << x.degree() << " n_theta=" << x.n_theta() << '\n';
    for (const auto& f : x.coeffs()) write_pf(os, f);
}

inline FourierTaylor read_ft(std::istream& is)
{
    auto header = detail::next_content_line(is);
    if (header.rfind("FT v1", 0) != 0) throw parse_error("expected 'FT v1' header, got: " + header);
    const std::size_t d = detail::parse_key_size(header, "degree");
    const std::size_t n = detail::parse_key_size(header, "n_theta");
    std::vector<PeriodicFunction> c;
    for (std::size_t j = 0; j <= d; ++j) {
        c.push_back(read_pf(is));
        if (c.back().size() != n) throw parse_error("coefficient grid does not match FT header");
    }
    return FourierTaylor(std::move(c));
}

inline void write_tm(std::ostream& os, const TorusMapFT& m)
{
    os << "TM v1 winding=" << m.winding()[0] << ',' << m.winding()[1] << '\n';
    write_ft(os, m.part(0));
    write_ft(os, m.part(1));
}

inline TorusMapFT read_tm(std::istream& is)
{
    auto header = detail::next_content_line(is);
    if (header.rfind("TM v1", 0) != 0) throw parse_error("expected 'TM v1' header, got: " + header);
    auto pos = header.find("winding=");
    if (pos == std::string::npos) throw parse_error("missing winding in: " + header);
    int w1 = 0, w2 = 0;
    char comma = 0;
    std::istringstream ws(header.substr(pos + 8));
    if (!(ws >> w1 >> comma >> w2) || comma != ',') throw parse_error("bad winding in: " + header);
    auto p1 = read_ft(is);
    auto p2 = read_ft(is);
    return {{w1, w2}, {std::move(p1), std::move(p2)}};
}

inline void write_parameterization(std::ostream& os, const Parameterization& p)
{
    os << std::setprecision(17) << "PARAM v1 omega=" << p.omega << " lambda=" << p.lambda << " b=" << p.scale_b
       << '\n';
    write_tm(os, p.map);
}

inline Parameterization read_parameterization(std::istream& is)
{
    auto header = detail::next_content_line(is);
    if (header.rfind("PARAM v1", 0) != 0) throw parse_error("expected 'PARAM v1' header, got: " + header);
    auto value = [&](const std::string& key) {
        auto pos = header.find(" " + key + "=");
        if (pos == std::string::npos) throw parse_error("missing '" + key + "' in: " + header);
        auto rest = header.substr(pos + key.size() + 2);
        return detail::parse_double(rest.substr(0, rest.find(' ')));
    };
    Parameterization p;
    p.omega = value("omega");
    p.lambda = value("lambda");
    p.scale_b = value("b");
    p.map = read_tm(is);
    return p;
}

} // namespace isochron

#endif
