#include <doctest.h>

#include <numbers>
#include <random>

#include "fermikinetics/errors.hpp"
#include "fermikinetics/lattice.hpp"
#include "oracles.hpp"

using namespace fk;

TEST_CASE("grid validation")
{
    CHECK_THROWS_AS(build_grid(2, 7), ConfigError);
    CHECK_THROWS_AS(build_grid(2, 2), ConfigError);
    CHECK_THROWS_AS(build_grid(2, 2048), ConfigError);
    CHECK_THROWS_AS(build_grid(3, 8), ConfigError);
    CHECK(build_grid(2, 16).size() == 256);
    CHECK_THROWS_AS(require_same_grid(build_grid(1, 8), build_grid(1, 16), "t"), ContractViolation);
}

TEST_CASE("momentum arithmetic is exact modulo 2 pi")
{
    for (int n : {4, 6, 16}) {
        auto g = build_grid(2, n);
        auto z = g.zero();
        auto m0 = g.momentum(z);
        CHECK(m0[0] == 0.0);
        CHECK(m0[1] == 0.0);
        for (Index a = 0; a < g.size(); ++a) {
            CHECK(g.add(a, g.neg(a)) == z);
            CHECK(g.neg(g.neg(a)) == a);
            for (Index b = 0; b < g.size(); b += 3) {
                auto c = g.add(a, b);
                CHECK(g.sub(c, b) == a);
                auto pa = g.momentum(a), pb = g.momentum(b), pc = g.momentum(c);
                for (int ax = 0; ax < 2; ++ax) {
                    double diff = std::remainder(pa[ax] + pb[ax] - pc[ax], 2 * std::numbers::pi);
                    CHECK(std::abs(diff) < 1e-12);
                }
            }
        }
    }
}

TEST_CASE("negation on odd rings (Fock grids)")
{
    MomentumGrid g(1, 7);
    for (Index a = 0; a < g.size(); ++a) {
        CHECK(g.add(a, g.neg(a)) == g.zero());
        CHECK(std::abs(g.momentum(a)[0] + g.momentum(g.neg(a))[0]) < 1e-12);
    }
}

TEST_CASE("band and potential are even")
{
    auto g = build_grid(2, 16);
    auto band = nearest_neighbor_band(g, 1.3);
    auto v = cosine_potential(g, {0.2, 1.0, -0.4});
    for (Index a = 0; a < g.size(); ++a) {
        CHECK(band.eps[a] == band.eps[g.neg(a)]);
        CHECK(v.v[a] == v.v[g.neg(a)]);
        auto p = g.momentum(a);
        CHECK(band.eps[a] == doctest::Approx(-1.3 * (std::cos(p[0]) + std::cos(p[1]))).epsilon(1e-14));
    }
    std::vector<double> bad(g.size(), 0.0);
    bad[1] = 1.0;
    CHECK_THROWS_AS(potential_from_values(g, bad), ContractViolation);
}

TEST_CASE("Fermi function and equilibrium states")
{
    CHECK(fermi_function(800.0) == 0.0);
    CHECK(fermi_function(-800.0) == 1.0);
    CHECK(fermi_function(0.0) == 0.5);
    auto g = build_grid(2, 8);
    auto band = nearest_neighbor_band(g);
    auto zero_t = fermi_dirac(band, 0.0, 0.0);
    for (double w : zero_t.w) CHECK(w == 0.5);
    auto sea = fermi_sea(band, 0.0);
    for (Index i = 0; i < g.size(); ++i) {
        if (std::abs(band.eps[i]) <= 1e-12) CHECK(sea.w[i] == 0.5);
        else CHECK(sea.w[i] == (band.eps[i] < 0 ? 1.0 : 0.0));
    }
    CHECK_THROWS_AS(constant_occupation(g, 1.5), ConfigError);
}

TEST_CASE("position profile: transform pair against a direct sum")
{
    auto g = build_grid(2, 8);
    auto occ = random_occupation(g, 0.0, 1.0, 3);
    auto pos = to_position(g, occ);
    auto ref = oracle::position_profile(g, occ.w);
    for (Index x = 0; x < g.size(); ++x) CHECK(std::abs(pos[x] - ref[x]) < 1e-13);
    auto back = from_position(g, pos);
    for (Index i = 0; i < g.size(); ++i) CHECK(back.w[i] == doctest::Approx(occ.w[i]).epsilon(1e-13));
    // w(0) is the density
    CHECK(pos[0].real() == doctest::Approx(density_energy(occ, nearest_neighbor_band(g)).rho));
}

TEST_CASE("entropy density")
{
    auto g = build_grid(1, 8);
    CHECK(entropy_density(constant_occupation(g, 0.0)) == 0.0);
    CHECK(entropy_density(constant_occupation(g, 1.0)) == 0.0);
    CHECK(entropy_density(constant_occupation(g, 0.5)) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("match_equilibrium recovers (beta, mu) [property]")
{
    auto g = build_grid(2, 16);
    auto band = nearest_neighbor_band(g);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> beta_d(-3.0, 3.0), mu_d(-1.5, 1.5);
    for (int trial = 0; trial < 25; ++trial) {
        double beta = beta_d(rng), mu = mu_d(rng);
        auto fd = fermi_dirac(band, beta, mu);
        auto de = density_energy(fd, band);
        auto eq = match_equilibrium(de.rho, de.e, band);
        auto back = density_energy(fermi_dirac(band, eq), band);
        CHECK(std::abs(back.rho - de.rho) <= 1e-10);
        CHECK(std::abs(back.e - de.e) <= 1e-10);
        CHECK(eq.beta == doctest::Approx(beta).epsilon(1e-6));
        CHECK(eq.mu == doctest::Approx(mu).epsilon(1e-6));
    }
}

TEST_CASE("match_equilibrium degenerate and infeasible inputs")
{
    auto g = build_grid(2, 16);
    auto band = nearest_neighbor_band(g);
    // infinite temperature: e equals rho times the band average
    auto flat = constant_occupation(g, 0.3);
    auto de = density_energy(flat, band);
    auto eq = match_equilibrium(de.rho, de.e, band);
    CHECK(eq.degenerate);
    CHECK(eq.beta == 0.0);
    auto fd = fermi_dirac(band, eq);
    CHECK(fd.w[5] == doctest::Approx(0.3).epsilon(1e-10));
    CHECK_THROWS_AS(match_equilibrium(1.2, 0.0, band), DomainError);
    CHECK_THROWS_AS(match_equilibrium(0.5, -5.0, band), DomainError);
}
