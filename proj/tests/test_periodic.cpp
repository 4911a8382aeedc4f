#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "oracles.hpp"

using namespace isochron;
using Catch::Approx;

TEST_CASE("dft_forward of constant samples")
{
    std::vector<double> s(8, 3.5);
    auto c = dft_forward(s);
    CHECK(c[0] == Approx(7.0).margin(1e-15));
    for (std::size_t i = 1; i < c.size(); ++i) CHECK(std::abs(c[i]) < 1e-15);
}

TEST_CASE("dft_forward of a pure cosine mode")
{
    auto f = PeriodicFunction::sample(8, [](double t) { return std::cos(oracle::tau * t); });
    auto c = f.coeffs();
    CHECK(c[2] == Approx(1.0).margin(1e-15)); // a_1 with n even
    for (std::size_t i = 0; i < c.size(); ++i)
        if (i != 2) CHECK(std::abs(c[i]) < 1e-15);
}

TEST_CASE("dft_forward matches the naive DFT")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    for (std::size_t n : {8u, 9u, 2u, 3u, 64u}) {
        std::vector<double> x(n);
        for (auto& v : x) v = u(rng);
        auto ref = oracle::naive_dft(x);
        auto f = PeriodicFunction::from_samples(x);
        for (std::size_t k = 0; k <= n / 2; ++k) {
            CHECK(std::abs(f.mode(k) - ref[k]) < 1e-13);
            // Hermitian symmetry of the full spectrum
            CHECK(std::abs(ref[k] - std::conj(ref[(n - k) % n])) < 1e-13);
        }
        CHECK(std::abs(f.mode(0).imag()) == 0.0);
        if (n % 2 == 0) CHECK(std::abs(f.mode(n / 2).imag()) == 0.0);
    }
}

TEST_CASE("dft size errors")
{
    CHECK_THROWS_AS(dft_forward(std::vector<double>{}), contract_error);
    CHECK_THROWS_AS(dft_forward(std::vector<double>{1.0}), contract_error);
    CHECK_THROWS_AS(dft_inverse(std::vector<double>{1.0}), contract_error);
}

TEST_CASE("dft_inverse basics and roundtrip")
{
    auto z = dft_inverse(std::vector<double>(16, 0.0));
    for (double v : z) CHECK(v == 0.0);
    std::vector<double> c(16, 0.0);
    c[0] = 2;
    for (double v : dft_inverse(c)) CHECK(v == Approx(1.0).margin(1e-15));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (std::size_t n : {16u, 17u, 1024u}) {
        std::vector<double> x(n);
        for (auto& v : x) v = u(rng);
        auto back = dft_inverse(dft_forward(x));
        CHECK(oracle::max_abs_diff(x, back) < 1e-12);
    }
}

TEST_CASE("transform linearity and mean")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> x(32), y(32), z(32);
    for (auto& v : x) v = u(rng);
    for (auto& v : y) v = u(rng);
    const double c = 1.7;
    for (std::size_t i = 0; i < 32; ++i) z[i] = c * x[i] + y[i];
    auto fx = dft_forward(x), fy = dft_forward(y), fz = dft_forward(z);
    for (std::size_t i = 0; i < 32; ++i) CHECK(std::abs(fz[i] - (c * fx[i] + fy[i])) < 1e-12);
    double mean = 0;
    for (double v : x) mean += v / 32.0;
    CHECK(std::abs(fx[0] / 2 - mean) < 1e-14);
}

TEST_CASE("differentiate")
{
    auto d0 = differentiate(PeriodicFunction::constant(16, 2.5));
    CHECK(d0.sup_norm() < 1e-15);

    auto f = PeriodicFunction::sample(16, [](double t) { return std::sin(oracle::tau * t); });
    auto df = differentiate(f);
    for (std::size_t k = 0; k < 16; ++k)
        CHECK(df.samples()[k] == Approx(oracle::tau * std::cos(oracle::tau * k / 16.0)).margin(1e-13));
}

TEST_CASE("differentiate finite-difference oracle at tight tolerance")
{
    std::mt19937_64 rng(8);
    auto p = oracle::random_trig(rng, 2, 0.1);
    auto g = oracle::sample(p, 32);
    auto dg = differentiate(g);
    // sixth-order centered differences on a 10x finer grid
    const double h = 1.0 / 320;
    for (std::size_t k = 0; k < 32; ++k) {
        const double t = k / 32.0;
        const double fd = (g(t + 3 * h) - 9 * g(t + 2 * h) + 45 * g(t + h) - 45 * g(t - h) + 9 * g(t - 2 * h) -
                           g(t - 3 * h)) /
                          (60 * h);
        CHECK(std::abs(dg.samples()[k] - fd) < 1e-8);
    }
}

TEST_CASE("derivative of the antiderivative")
{
    std::mt19937_64 rng(9);
    auto p = oracle::random_trig(rng, 10);
    p.a0 = 0;
    auto f = oracle::sample(p, 64);
    auto back = differentiate(antiderivative(f));
    CHECK(oracle::max_abs_diff({f.samples().begin(), f.samples().end()},
                               {back.samples().begin(), back.samples().end()}) < 1e-11);
}

TEST_CASE("eval_nonuniform")
{
    auto f = PeriodicFunction::sample(16, [](double t) { return std::cos(oracle::tau * t); });
    std::vector<double> pts{0.25};
    CHECK(std::abs(eval_nonuniform(f, pts)[0]) < 1e-14);

    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1, 1);
    for (std::size_t n : {32u, 33u}) {
        std::vector<double> x(n);
        for (auto& v : x) v = u(rng);
        auto g = PeriodicFunction::from_samples(x);
        std::vector<double> grid(n);
        for (std::size_t k = 0; k < n; ++k) grid[k] = static_cast<double>(k) / n;
        CHECK(oracle::max_abs_diff(eval_nonuniform(g, grid), x) < 1e-12);
        // periodicity
        for (double t : {0.1, 0.77, -0.3}) CHECK(g(t) == Approx(g(t + 1)).margin(1e-12));
        // naive summation oracle
        FourierTaylor series({g});
        for (double t : {0.013, 0.5, 0.911}) CHECK(std::abs(g(t) - oracle::naive_eval(series, t, 0)) < 1e-12);
    }

    auto z = PeriodicFunction::zero(8);
    std::vector<double> any{0.1, 0.4, 3.7};
    for (double v : eval_nonuniform(z, any)) CHECK(v == 0.0);
}

TEST_CASE("weighted_norm")
{
    CHECK(weighted_norm(PeriodicFunction::zero(8), 3) == 0.0);
    auto f = PeriodicFunction::sample(8, [](double t) { return std::cos(oracle::tau * t); });
    CHECK(weighted_norm(f, 0) == Approx(1.0).margin(1e-14));
    CHECK(weighted_norm(PeriodicFunction::constant(8, 4.0), 2) == 0.0);

    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        auto g = oracle::sample(oracle::random_trig(rng, 3), 8);
        CHECK(weighted_norm(g, 2) >= weighted_norm(g, 1));
        CHECK(weighted_norm(g, 1) >= 0);
    }
}

TEST_CASE("holder_estimate")
{
    std::vector<double> t_wide;
    for (int i = 0; i < 10; ++i) t_wide.push_back(0.01 * std::pow(10.0, i / 9.0));
    auto c = PeriodicFunction::sample(64, [](double t) { return std::cos(oracle::tau * t); });
    CHECK(holder_estimate(c, 3, t_wide) > 2.0);

    // |S^_k| = k^{-(alpha+1)} with alpha = 1.5
    const std::size_t n = 4096;
    std::vector<double> coeffs(n, 0.0);
    for (std::size_t k = 1; k < n / 2; ++k) coeffs[2 * k] = 2 * std::pow(static_cast<double>(k), -2.5);
    auto f = PeriodicFunction::from_coeffs(coeffs);
    std::vector<double> t;
    for (int i = 0; i < 10; ++i) t.push_back(0.002 * std::pow(10.0, i / 9.0));
    CHECK(std::abs(holder_estimate(f, 3, t) - 1.5) < 0.3);
    const double e0 = holder_estimate(f, 0, t);
    const double e1 = holder_estimate(f, 1, t);
    CHECK(std::abs(std::abs(e1 - e0) - 1.0) < 0.3);

    CHECK_THROWS_AS(holder_estimate(PeriodicFunction::constant(16, 1.0), 1, t), regularity_error);
}

TEST_CASE("dealiased product")
{
    std::mt19937_64 rng(19);
    auto p = oracle::random_trig(rng, 7);
    auto q = oracle::random_trig(rng, 7);
    // the exact product has modes up to 14 < 32/2, so it is represented exactly
    auto fg = oracle::sample(p, 32) * oracle::sample(q, 32);
    for (double t : {0.0, 0.123, 0.5, 0.77}) CHECK(fg(t) == Approx(p(t) * q(t)).margin(1e-12));

    // with aliasing: high modes beyond n/2 are discarded, not folded back
    auto a = PeriodicFunction::sample(8, [](double t) { return std::cos(oracle::tau * 3 * t); });
    auto aa = a * a; // cos^2(6 pi t) = 1/2 + cos(12 pi t)/2, mode 6 > 4 dropped
    CHECK(aa.mean() == Approx(0.5).margin(1e-15));
    for (std::size_t k = 1; k <= 4; ++k) CHECK(std::abs(aa.mode(k)) < 1e-15);
}

TEST_CASE("shift and power spectrum")
{
    auto s = PeriodicFunction::sample(32, [](double t) { return std::sin(oracle::tau * t); });
    auto c = shift(s, 0.25);
    for (std::size_t k = 0; k < 32; ++k) CHECK(c.samples()[k] == Approx(std::cos(oracle::tau * k / 32.0)).margin(1e-14));
    auto cosf = PeriodicFunction::sample(16, [](double t) { return std::cos(oracle::tau * t); });
    auto p = power_spectrum(cosf);
    CHECK(p[1] == Approx(0.25).margin(1e-15));
    for (std::size_t k = 0; k < p.size(); ++k)
        if (k != 1) CHECK(p[k] < 1e-30);
}

TEST_CASE("PF text roundtrip is lossless")
{
    std::mt19937_64 rng(23);
    auto f = oracle::sample(oracle::random_trig(rng, 5), 17);
    std::stringstream ss;
    write_pf(ss, f);
    CHECK(ss.str().rfind("PF v1 n_theta=17\n", 0) == 0);
    auto g = read_pf(ss);
    for (std::size_t i = 0; i < 17; ++i) CHECK(g.coeffs()[i] == f.coeffs()[i]);
    std::stringstream bad("PF v2 n_theta=3\n1\n2\n3\n");
    CHECK_THROWS_AS(read_pf(bad), parse_error);
}
