#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

#include <isochron/cohomology.hpp>

using namespace isochron;
using Catch::Approx;

namespace {

FourierTaylor remove_pinned(FourierTaylor E, std::size_t order)
{
    E[order] += -E[order].mean();
    return E;
}

} // namespace

TEST_CASE("zero right-hand side")
{
    auto u = solve_cohomology(FourierTaylor::zero(16, 3), CohomologySpec::family_one(1.0, -1.0));
    CHECK(u.max_sup_norm() == 0.0);
}

TEST_CASE("single mode reference value")
{
    // E = e^{2 pi i theta} + conj, i.e. a_1 = 2 in the real layout; per complex mode E_{0,1} = 1
    std::vector<double> c(16, 0.0);
    c[2] = 2.0;
    auto E = FourierTaylor({PeriodicFunction::from_coeffs(c)});
    auto u = solve_cohomology(E, CohomologySpec::family_one(1.0, -1.0));
    auto m = u[0].mode(1);
    CHECK(std::abs(m - 1.0 / cplx(0, two_pi)) < 1e-15);
    CHECK(u[0].coeffs()[2] == Approx(0.0).margin(1e-15));
    // u = sin(2 pi theta) / pi solves d/dtheta u = 2 cos(2 pi theta)
    CHECK(u[0].coeffs()[3] == Approx(1.0 / std::numbers::pi).margin(1e-15));
    for (double t : {0.1, 0.3}) CHECK(u[0](t) == Approx(std::sin(oracle::tau * t) / std::numbers::pi).margin(1e-15));
}

TEST_CASE("operator residual on random data, both families")
{
    std::mt19937_64 rng(31);
    for (int fam = 0; fam < 2; ++fam) {
        const double omega = 0.1409170454968141, lambda = -1.683794649043334;
        auto spec = fam == 0 ? CohomologySpec::family_one(omega, lambda) : CohomologySpec::family_two(omega, lambda);
        const std::size_t pinned_order = fam == 0 ? 0 : 1;
        auto E = remove_pinned(oracle::random_series(rng, 64, 6, 30), pinned_order);
        auto u = solve_cohomology(E, spec);
        auto back = apply_cohomology_operator(u, spec);
        CHECK(oracle::max_coeff_diff(back, E) < 1e-11);
        CHECK(u[pinned_order].mean() == 0.0);
    }
}

TEST_CASE("obstruction and resonance errors")
{
    auto E = FourierTaylor::constant(16, 2, 1e-3);
    try {
        solve_cohomology(E, CohomologySpec::family_one(1.0, -1.0));
        FAIL("expected obstruction_error");
    } catch (const obstruction_error& e) {
        CHECK(e.magnitude() == Approx(1e-3));
    }
    CohomologySpec reso{1.0, -1.0, -2.0, std::nullopt};
    CHECK_THROWS_AS(solve_cohomology(FourierTaylor::constant(16, 2, 1.0), reso), resonance_error);
    // with the obstruction removed the family-two solve succeeds
    auto E2 = FourierTaylor::variable(16, 2) * 0.0;
    CHECK_NOTHROW(solve_cohomology(E2, CohomologySpec::family_two(1.0, -1.0)));
}

TEST_CASE("solver linearity")
{
    std::mt19937_64 rng(37);
    auto spec = CohomologySpec::family_two(0.15, -1.06);
    auto E = remove_pinned(oracle::random_series(rng, 32, 4, 10), 1);
    auto F = remove_pinned(oracle::random_series(rng, 32, 4, 10), 1);
    const double a = -0.37;
    auto lhs = solve_cohomology(E * a + F, spec);
    auto rhs = solve_cohomology(E, spec) * a + solve_cohomology(F, spec);
    CHECK(oracle::max_coeff_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("single-order solver with a pinned nonzero mean")
{
    std::mt19937_64 rng(41);
    auto e = oracle::sample(oracle::random_trig(rng, 8), 32);
    const double c = 0.05;
    const double pin = e.mean() / c;
    auto u = solve_cohomology_order(e, 0.2, c, pin);
    auto back = differentiate(u) * 0.2 + u * c;
    CHECK(oracle::max_coeff_diff(back, e) < 1e-12);
    CHECK(u.mean() == pin);
    CHECK_THROWS_AS(solve_cohomology_order(e, 0.2, c, pin + 1.0), obstruction_error);
}

TEST_CASE("average_theta")
{
    auto E = FourierTaylor::constant(16, 2, 2.75);
    CHECK(average_theta(E, 0) == 2.75);
    auto osc = FourierTaylor({PeriodicFunction::sample(16, [](double t) { return std::sin(oracle::tau * 3 * t); })});
    CHECK(std::abs(average_theta(osc, 0)) < 1e-16);
    std::mt19937_64 rng(43);
    auto R = oracle::random_series(rng, 16, 2, 7);
    double trap = 0;
    for (double v : R[1].samples()) trap += v / 16.0;
    CHECK(average_theta(R, 1) == Approx(trap).margin(1e-13));
    CHECK_THROWS_AS(average_theta(R, 3), contract_error);
}
