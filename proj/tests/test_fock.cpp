#include <doctest.h>

#include <random>

#include "fermikinetics/errors.hpp"
#include "fermikinetics/fock.hpp"

using namespace fk;

namespace {
double max_abs(const DenseOp& a) { return a.cwiseAbs().maxCoeff(); }
}  // namespace

TEST_CASE("CAR representation")
{
    CHECK_THROWS_AS(car_ops(1), ConfigError);
    CHECK_THROWS_AS(car_ops(13), ConfigError);
    auto rep2 = car_ops(2);
    DenseOp a0 = DenseOp(rep2.a_site[0]), a1 = DenseOp(rep2.a_site[1]);
    CHECK(max_abs(a0 * a0) == 0.0);
    CHECK(max_abs(a0 * a1.adjoint() + a1.adjoint() * a0) <= 1e-15);
    for (int L : {5, 8, 10}) CHECK(car_ops(L).car_deviation <= 1e-13);
    // exhaustive check for L = 8, site and momentum operators
    auto rep = car_ops(8, false);
    DenseOp id = DenseOp::Identity(rep.dim(), rep.dim());
    double dev = 0;
    for (const auto* ops : {&rep.a_site, &rep.a_mom})
        for (int x = 0; x < 8; ++x)
            for (int y = 0; y < 8; ++y) {
                DenseOp ax = DenseOp((*ops)[x]), ay = DenseOp((*ops)[y]);
                dev = std::max(dev, max_abs(ax * ay.adjoint() + ay.adjoint() * ax - (x == y ? id : 0 * id)));
                dev = std::max(dev, max_abs(ax * ay + ay * ax));
            }
    CHECK(dev <= 1e-13);
}

TEST_CASE("Gaussian states")
{
    auto rep = car_ops(6);
    auto N = DenseOp::Zero(rep.dim(), rep.dim()).eval();
    for (const auto& a : rep.a_mom) N += DenseOp(a.adjoint() * a);
    auto vac = gaussian_state(rep, std::vector<double>(6, 0.0));
    CHECK(std::abs(exact_expect(vac, N)) == 0.0);
    CHECK(vac.diag.sum() == doctest::Approx(1.0));
    auto full = gaussian_state(rep, std::vector<double>(6, 1.0));
    CHECK(exact_expect(full, N).real() == doctest::Approx(6.0));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u;
    std::vector<double> w(6);
    for (auto& x : w) x = u(rng);
    auto rho = gaussian_state(rep, w);
    CHECK(rho.diag.sum() == doctest::Approx(1.0).epsilon(1e-14));
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            cplx v = exact_expect(rho, SparseOp(rep.a_mom[i].adjoint() * rep.a_mom[j]));
            CHECK(std::abs(v - (i == j ? w[i] : 0.0)) <= 1e-12);
        }
    CHECK_THROWS_AS(gaussian_state(rep, std::vector<double>(5, 0.5)), ContractViolation);
    CHECK_THROWS_AS(exact_expect(rho, DenseOp::Identity(4, 4).eval()), ContractViolation);
}

TEST_CASE("Hamiltonian structure")
{
    auto rep = car_ops(6);
    const auto& g = rep.grid;
    auto band = nearest_neighbor_band(g);
    auto v = cosine_potential(g, {0.3, 1.0});
    DenseOp N = DenseOp::Zero(rep.dim(), rep.dim());
    for (const auto& a : rep.a_mom) N += DenseOp(a.adjoint() * a);
    DenseOp H = build_hamiltonian(rep, band, v, 0.8, 3.0);
    CHECK(max_abs(H - H.adjoint()) <= 1e-13);
    CHECK(max_abs(H * N - N * H) <= 1e-12);
    DenseOp H0 = build_hamiltonian(rep, band, v, 0.0, 3.0);
    CHECK(max_abs(H0 - DenseOp(H0.diagonal().asDiagonal())) == 0.0);
    CHECK(max_abs(interaction_operator(rep, cosine_potential(g, {2.0}))) <= 1e-14);
}

TEST_CASE("exact evolution")
{
    auto rep = car_ops(6);
    const auto& g = rep.grid;
    auto band = nearest_neighbor_band(g);
    auto v = cosine_potential(g, {0.0, 1.0});
    std::vector<double> w{0.9, 0.2, 0.6, 0.4, 0.75, 0.1};
    auto rho = gaussian_state(rep, w);
    DenseOp N = DenseOp::Zero(rep.dim(), rep.dim());
    for (const auto& a : rep.a_mom) N += DenseOp(a.adjoint() * a);
    DenseOp H = build_hamiltonian(rep, band, v, 0.7, 2.0);
    CHECK(std::abs(exact_evolve_expect(rho, H, N, 3.0) - exact_expect(rho, N)) <= 1e-10);
    DenseOp H0 = build_hamiltonian(rep, band, v, 0.0, 2.0);
    DenseOp n2 = DenseOp(rep.a_mom[2].adjoint() * rep.a_mom[2]);
    CHECK(std::abs(exact_evolve_expect(rho, H0, n2, 5.0) - w[2]) <= 1e-12);
}

TEST_CASE("finite-size van Hove probe (regression)")
{
    // L = 8, lambda = 0.5, N = 4, T = N t with t = 0.5: occupation changes are O(lambda^2 t).
    auto rep = car_ops(8);
    const auto& g = rep.grid;
    auto band = nearest_neighbor_band(g);
    auto v = cosine_potential(g, {0.0, 1.0});
    std::vector<double> w(8);
    for (int j = 0; j < 8; ++j) w[j] = 0.15 + 0.1 * j;
    auto rho = gaussian_state(rep, w);
    const double lambda = 0.5, N = 4.0, t = 0.5;
    DenseOp H = build_hamiltonian(rep, band, v, lambda, N);
    double worst = 0;
    for (int j = 0; j < 8; ++j) {
        DenseOp nj = DenseOp(rep.a_mom[j].adjoint() * rep.a_mom[j]);
        worst = std::max(worst, std::abs(exact_evolve_expect(rho, H, nj, N * t).real() - w[j]));
    }
    double C = worst / (lambda * lambda * t);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", C);
    MESSAGE("max |dn| / (lambda^2 t) = " << buf);
    CHECK(C == doctest::Approx(2.54159972168).epsilon(1e-8));
    CHECK(C < 5.0);
}
