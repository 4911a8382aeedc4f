#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "oracles.hpp"

using namespace isochron;
using Catch::Approx;

namespace {

double series_diff(const FourierTaylor& x, const FourierTaylor& y) { return oracle::max_coeff_diff(x, y); }

const std::vector<std::pair<double, double>> probe{{0.0, 0.0}, {0.13, 0.4}, {0.5, -0.7}, {0.91, 0.25}};

} // namespace

TEST_CASE("add, sub and scale")
{
    std::mt19937_64 rng(1);
    auto x = oracle::random_series(rng, 32, 4, 5);
    auto y = oracle::random_series(rng, 32, 4, 5);
    CHECK(series_diff(x + FourierTaylor::zero(32, 4), x) == 0.0);
    CHECK((x - x).max_sup_norm() == 0.0);
    auto z = x + y;
    for (auto [t, s] : probe) CHECK(z(t, s) == Approx(x(t, s) + y(t, s)).margin(1e-13));
    auto w = ft_scale(x, -2.5);
    for (auto [t, s] : probe) CHECK(w(t, s) == Approx(-2.5 * x(t, s)).margin(1e-13));
    CHECK_THROWS_AS(x + FourierTaylor::zero(16, 4), contract_error);
}

TEST_CASE("ft_mul")
{
    std::mt19937_64 rng(2);
    auto x = oracle::random_series(rng, 64, 4, 6);
    CHECK(series_diff(x * FourierTaylor::constant(64, 0, 1.0), x) < 1e-15);

    auto s = FourierTaylor::variable(8, 1);
    auto ss = ft_mul(s, s, 1);
    CHECK(ss.degree() == 1);
    CHECK(ss.max_sup_norm() == 0.0);

    auto y = oracle::random_series(rng, 64, 4, 6);
    auto p = ft_mul(x, y, 8);
    for (auto [t, sv] : probe) CHECK(p(t, sv) == Approx(x(t, sv) * y(t, sv)).margin(1e-12));

    auto zz = oracle::random_series(rng, 64, 4, 6);
    CHECK(series_diff(x * y, y * x) < 1e-12);
    CHECK(series_diff((x * y) * zz, x * (y * zz)) < 1e-12);
}

TEST_CASE("ft_exp")
{
    auto e0 = ft_exp(FourierTaylor::zero(16, 3));
    CHECK(series_diff(e0, FourierTaylor::constant(16, 3, 1.0)) < 1e-15);

    auto es = ft_exp(FourierTaylor::variable(16, 3));
    const double expect[] = {1, 1, 0.5, 1.0 / 6};
    for (std::size_t j = 0; j < 4; ++j) CHECK(es[j].mean() == Approx(expect[j]).margin(1e-15));

    std::mt19937_64 rng(3);
    auto p = oracle::random_series(rng, 128, 5, 4, 0.3);
    auto e = ft_exp(p);
    // pointwise oracle: the Taylor coefficients of exp(p(theta_k, s)) at a grid point
    // are compared through the truncated series at small s
    for (std::size_t k = 0; k < 128; k += 9) {
        const double t = k / 128.0;
        const double s = 1e-3;
        CHECK(e(t, s) == Approx(std::exp(p(t, s))).epsilon(0).margin(1e-12 + 2 * std::pow(s, 6)));
    }
    // order-0 coefficient is the pointwise exponential
    for (std::size_t k = 0; k < 128; ++k) CHECK(e[0].samples()[k] == Approx(std::exp(p[0].samples()[k])).epsilon(1e-15));

    auto q = oracle::random_series(rng, 128, 4, 4, 0.3);
    auto p4 = p.truncated(4);
    CHECK(series_diff(ft_exp(p4 + q), ft_exp(p4) * ft_exp(q)) < 1e-11);
}

TEST_CASE("ft_sin_cos")
{
    auto [s0, c0] = ft_sin_cos(FourierTaylor::zero(16, 3));
    CHECK(s0.max_sup_norm() == 0.0);
    CHECK(series_diff(c0, FourierTaylor::constant(16, 3, 1.0)) < 1e-15);

    auto [ss, cs] = ft_sin_cos(FourierTaylor::variable(16, 3));
    const double es[] = {0, 1, 0, -1.0 / 6};
    const double ec[] = {1, 0, -0.5, 0};
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(ss[j].mean() == Approx(es[j]).margin(1e-15));
        CHECK(cs[j].mean() == Approx(ec[j]).margin(1e-15));
    }

    std::mt19937_64 rng(4);
    auto q = oracle::random_series(rng, 64, 5, 3, 0.3);
    auto [sq, cq] = ft_sin_cos(q);
    auto one = sq * sq + cq * cq;
    CHECK(series_diff(one, FourierTaylor::constant(64, 5, 1.0)) < 1e-12);
    for (std::size_t k = 0; k < 64; k += 7) {
        const double t = k / 64.0;
        const double s = 1e-3;
        CHECK(sq(t, s) == Approx(std::sin(q(t, s))).epsilon(0).margin(1e-12));
        CHECK(cq(t, s) == Approx(std::cos(q(t, s))).epsilon(0).margin(1e-12));
    }
}

TEST_CASE("ft_pow and ft_reciprocal")
{
    std::mt19937_64 rng(5);
    auto x = oracle::random_series(rng, 64, 5, 3, 0.2) + 2.0;
    auto r = ft_reciprocal(x);
    CHECK(series_diff(r * x, FourierTaylor::constant(64, 5, 1.0)) < 1e-12);
    auto h = ft_pow(x, 0.5);
    CHECK(series_diff(h * h, x) < 1e-12);
    auto m = ft_pow(x, -1.0);
    CHECK(series_diff(m, r) < 1e-12);
}

TEST_CASE("ft_linear_solve")
{
    const std::size_t n = 32;
    auto one = FourierTaylor::constant(n, 4, 1.0);
    auto zero = FourierTaylor::zero(n, 4);
    std::mt19937_64 rng(6);
    auto b1 = oracle::random_series(rng, n, 4, 4);
    auto b2 = oracle::random_series(rng, n, 4, 4);
    auto x = ft_linear_solve({{{one, zero}, {zero, one}}}, {b1, b2});
    CHECK(series_diff(x[0], b1) < 1e-15);
    CHECK(series_diff(x[1], b2) < 1e-15);

    auto ones = one + FourierTaylor::variable(n, 4);
    auto g = ft_linear_solve({{{ones, zero}, {zero, ones}}}, {one, zero});
    for (std::size_t j = 0; j <= 4; ++j) CHECK(g[0][j].mean() == Approx(j % 2 ? -1.0 : 1.0).margin(1e-15));
    CHECK(g[1].max_sup_norm() == 0.0);

    // random well-conditioned system on a grid that resolves the solution
    const std::size_t m = 128;
    FTMat2 A{{{oracle::random_series(rng, m, 4, 2, 0.2) + 2.0, oracle::random_series(rng, m, 4, 2, 0.2)},
              {oracle::random_series(rng, m, 4, 2, 0.2), oracle::random_series(rng, m, 4, 2, 0.2) + 2.0}}};
    FTVec2 b{oracle::random_series(rng, m, 4, 2), oracle::random_series(rng, m, 4, 2)};
    auto y = ft_linear_solve(A, b);
    auto r1 = ft_mul(A[0][0], y[0]) + ft_mul(A[0][1], y[1]) - b[0];
    auto r2 = ft_mul(A[1][0], y[0]) + ft_mul(A[1][1], y[1]) - b[1];
    CHECK(r1.max_sup_norm() < 1e-11);
    CHECK(r2.max_sup_norm() < 1e-11);

    auto sing = ft_linear_solve;
    FTMat2 S{{{one, one}, {one, one}}};
    try {
        sing(S, {one, one}, default_det_floor);
        FAIL("expected singular_matrix_error");
    } catch (const singular_matrix_error& e) {
        CHECK(e.min_det() < 1e-10);
        CHECK(e.theta() >= 0.0);
    }
}

TEST_CASE("derivatives in theta and s")
{
    std::mt19937_64 rng(7);
    auto x = oracle::random_series(rng, 32, 3, 4);
    auto ds = d_s(x);
    for (std::size_t j = 0; j < 3; ++j) CHECK(oracle::max_coeff_diff(ds[j], x[j + 1] * (j + 1.0)) == 0.0);
    CHECK(ds[3].sup_norm() == 0.0);
    auto sds = s_d_s(x);
    for (std::size_t j = 0; j <= 3; ++j) CHECK(oracle::max_coeff_diff(sds[j], x[j] * static_cast<double>(j)) == 0.0);
    auto dt = d_theta(x);
    for (std::size_t j = 0; j <= 3; ++j) CHECK(oracle::max_coeff_diff(dt[j], differentiate(x[j])) == 0.0);
}

TEST_CASE("ft_eval and the lift law")
{
    auto id = TorusMapFT::identity(16, 3);
    auto v = ft_eval(id, 0.3, 0.0);
    CHECK(v[0] == Approx(0.3).margin(1e-15));
    CHECK(v[1] == Approx(0.0).margin(1e-15));

    std::mt19937_64 rng(8);
    TorusMapFT m({1, 0}, {oracle::random_series(rng, 16, 3, 4), oracle::random_series(rng, 16, 3, 4)});
    for (auto [t, s] : probe) {
        auto a = m(t, s);
        auto b = m(t + 1, s);
        CHECK(std::abs((b[0] - a[0]) - 1.0) < 1e-13);
        CHECK(std::abs(b[1] - a[1]) < 1e-13);
        CHECK(std::abs(m.part(0)(t, s) - oracle::naive_eval(m.part(0), t, s)) < 1e-12);
    }
}

TEST_CASE("rescale")
{
    std::mt19937_64 rng(9);
    auto x = oracle::random_series(rng, 16, 2, 3);
    CHECK(series_diff(rescale(x, 1.3, 1.3), x) == 0.0);
    auto y = rescale(x, 1.0, 2.0);
    for (std::size_t j = 0; j <= 2; ++j) CHECK(oracle::max_coeff_diff(y[j], x[j] * std::pow(2.0, j)) == 0.0);
    // rescaled series at s equals the original at (b_new / b_old) s
    auto z = rescale(x, 0.7, 1.9);
    for (auto [t, s] : probe) CHECK(z(t, s) == Approx(x(t, s * 1.9 / 0.7)).margin(1e-13));
    CHECK(series_diff(rescale(rescale(x, 1.0, 0.37), 0.37, 1.0), x) < 1e-13);
    CHECK_THROWS_AS(rescale(x, 0.0, 1.0), contract_error);
}

TEST_CASE("serialization roundtrip")
{
    std::mt19937_64 rng(10);
    Parameterization p{TorusMapFT({1, 0}, {oracle::random_series(rng, 16, 3, 4), oracle::random_series(rng, 16, 3, 4)}),
                       0.1409170454968141, -1.683794649043334, 0.93};
    std::stringstream ss;
    ss << "# comment line\n";
    write_parameterization(ss, p);
    auto q = read_parameterization(ss);
    CHECK(q.omega == p.omega);
    CHECK(q.lambda == p.lambda);
    CHECK(q.scale_b == p.scale_b);
    CHECK(q.map.winding() == p.map.winding());
    CHECK(series_diff(q.map.part(0), p.map.part(0)) == 0.0);
    CHECK(series_diff(q.map.part(1), p.map.part(1)) == 0.0);
}
