#include <doctest.h>
#include <omp.h>

#include <random>

#include "fermikinetics/errors.hpp"
#include "fermikinetics/fluctuations.hpp"
#include "fermikinetics/fock.hpp"
#include "oracles.hpp"

using namespace fk;

TEST_CASE("block variance of a product state is 4 rho (1 - rho) for every K")
{
    for (int dim : {1, 2}) {
        auto g = build_grid(dim, dim == 1 ? 64 : 16);
        auto s = make_state(g, constant_occupation(g, 0.3));
        auto A = site_number(g, {2, 1});
        for (int K = 1; 2 * K <= g.n(); ++K) CHECK(block_variance(s, A, K) == doctest::Approx(0.84).epsilon(1e-13));
        CHECK_THROWS_AS(block_variance(s, A, g.n() / 2 + 1), ConfigError);
    }
}

TEST_CASE("block variance is the Fejer-weighted correlation sum")
{
    auto g = build_grid(2, 12);
    auto band = nearest_neighbor_band(g);
    auto s = make_state(g, fermi_dirac(band, 0.8, 0.3));
    auto A = random_observable(g, 3, true, 4);
    for (int K : {1, 2, 3, 6}) {
        double ref = 0;
        for (int a = -(K - 1); a <= K - 1; ++a)
            for (int b = -(K - 1); b <= K - 1; ++b)
                ref += (1.0 - std::abs(a) / double(K)) * (1.0 - std::abs(b) / double(K)) *
                       truncated_corr(s, A, A, {a, b}).real();
        CHECK(block_variance(s, A, K) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("variance limits: smooth state converges, sharp Fermi sea does not")
{
    auto g = build_grid(1, 256);
    auto band = nearest_neighbor_band(g);
    auto A = site_number(g, {0, 0});
    std::vector<int> Ks{4, 8, 16, 32, 64, 128};
    auto fd = make_state(g, fermi_dirac(band, 1.0, 0.0));
    auto lim = variance_limit(fd, A, Ks);
    CHECK(lim.classification == VarianceClass::convergent);
    CHECK(lim.estimate == doctest::Approx(covariance(fd, A, A)).epsilon(1e-10));
    CHECK(weyl_char(fd, A) == doctest::Approx(std::exp(-0.5 * covariance(fd, A, A))).epsilon(1e-12));
    auto sea = make_state(g, fermi_sea(band, 0.3));
    auto lim2 = variance_limit(sea, A, Ks);
    CHECK(lim2.classification != VarianceClass::convergent);
    CHECK(lim2.power_exponent == doctest::Approx(1.0).epsilon(0.3));
    CHECK_THROWS_AS(weyl_char(sea, A), DomainError);
    CHECK_THROWS_AS(variance_limit(fd, A, {4, 8, 16}), ConfigError);
    CHECK_THROWS_AS(variance_limit(fd, A, {4, 8, 16, 256}), ConfigError);
}

TEST_CASE("CCR phases have unit modulus")
{
    auto g = build_grid(1, 64);
    auto band = nearest_neighbor_band(g);
    auto s = make_state(g, fermi_dirac(band, 2.0, -0.3));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto A = random_observable(g, 4, true, seed), B = random_observable(g, 4, true, seed + 99);
        CHECK(std::abs(std::abs(ccr_phase(s, A, B)) - 1.0) <= 1e-12);
        CHECK(std::abs(std::abs(ccr_phase(s, A, B, 8)) - 1.0) <= 1e-12);
    }
}

TEST_CASE("oscillatory time integral against quadrature")
{
    for (double omega : {0.0, 1e-9, 1e-4, 0.3, -2.7, 40.0})
        for (double t : {0.5, 3.0, 17.0}) {
            cplx got = time_integral(omega, t);
            CHECK(std::abs(got - oracle::time_integral(omega, t)) <= 1e-9 * std::max(1.0, t));
        }
    CHECK(time_integral(0.0, 5.0) == cplx(5.0, 0.0));
}

namespace {
// lambda * omega([int_0^t V(t') dt', O]) with everything built on Fock space
cplx fock_drift(const FockRep& rep, const GaussianState& rho, const Dispersion& band, const PairPotential& v,
                double lambda, const PairObservable& O, double t)
{
    DenseOp Vint = interaction_picture_integral(rep, band, interaction_operator(rep, v), t);
    DenseOp X = quadratic_operator(rep, O.X), Y = quadratic_operator(rep, O.Y);
    DenseOp Oop = 0.5 * (X * Y + Y * X);
    return lambda * exact_expect(rho, DenseOp(Vint * Oop - Oop * Vint));
}
}  // namespace

TEST_CASE("Weyl drift against the exact Fock commutator integral")
{
    auto rep = car_ops(8);
    const auto& g = rep.grid;
    auto band = nearest_neighbor_band(g);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 6; ++trial) {
        auto v = cosine_potential(g, {0.2, 1.0, 0.4 * trial});
        auto s = make_state(g, random_occupation(g, 0.05, 0.95, 40 + trial));
        auto rho = gaussian_state(rep, s.w());
        auto A = random_observable(g, 2, trial % 2 == 1, trial);
        auto B = random_observable(g, 2, true, trial + 10);
        auto O = make_pair(A, B, {trial % 3, 0});
        double t = 0.4 + 0.5 * trial;
        cplx got = weyl_drift(s, band, v, 0.6, O, t);
        cplx ref = fock_drift(rep, rho, band, v, 0.6, O, t);
        CHECK(std::abs(ref) > 1e-6);
        CHECK(std::abs(got - ref) <= 1e-6 * std::abs(ref));
        // total number and constant potentials give exact zeros
        CHECK(weyl_drift(s, band, v, 0.6, total_number_pair(g), t) == cplx(0.0));
        CHECK(weyl_drift(s, band, cosine_potential(g, {1.5}), 0.6, O, t) == cplx(0.0));
        CHECK(std::abs(fock_drift(rep, rho, band, v, 0.6, total_number_pair(g), t)) <= 1e-12);
        // quadratic observables: the single commutator vanishes in a translation-invariant state
        CHECK(std::abs(weyl_drift(s, band, v, 0.6, A, t)) <= 1e-12);
    }
}

TEST_CASE("first-order probe: stationary weight cancels")
{
    auto g = build_grid(1, 32);
    auto band = nearest_neighbor_band(g);
    auto v = cosine_potential(g, {0.0, 1.0});
    auto s = make_state(g, fermi_dirac(band, 1.0, 0.0));
    auto A = site_number(g, {0, 0});
    auto O = make_pair(A, A, {1, 0});
    for (double N : {16.0, 256.0}) {
        auto r = first_order_probe(s, band, v, 1.0, O, N);
        CHECK(std::abs(r.stationary) <= 1e-12 * std::max(1.0, r.stationary_abs));
    }
}

TEST_CASE("second-order profile against the explicit double sum")
{
    auto g = build_grid(1, 12);
    auto band = nearest_neighbor_band(g);
    auto v = cosine_potential(g, {0.1, 1.0, 0.3});
    auto s = make_state(g, random_occupation(g, 0.0, 1.0, 6));
    auto A = random_observable(g, 2, true, 8);
    const double lambda = 0.7, N = 5.0;
    auto psi = A.symbol();
    auto P = correction_profile(s, band, v, lambda, A, N);
    const double S = 12.0;
    for (Index d = 0; d < g.size(); ++d) {
        double acc = 0;
        for (Index l = 0; l < g.size(); ++l)
            for (Index m = 0; m < g.size(); ++m) {
                cplx Psi = 0;
                for (Index k = 0; k < g.size(); ++k) {
                    Index p = g.sub(g.add(k, l), m);
                    double M = matrix_element(v, k, l, m, p);
                    Psi += M * psi[k] * std::polar(1.0, oracle::phase(g, k, d)) *
                           oracle::time_integral(band.eps[l] - band.eps[m] + band.eps[k], N, 4000);
                }
                acc += s.w()[l] * (1 - s.w()[m]) * std::norm(Psi / S);
            }
        CHECK(P[d] == doctest::Approx(lambda * lambda / N * acc / (S * S)).epsilon(1e-8));
    }
}

TEST_CASE("second-order variance correction: positive, growing in K, thread independent")
{
    auto g = build_grid(1, 64);
    auto band = nearest_neighbor_band(g);
    auto v = cosine_potential(g, {0.0, 1.0});
    auto s = make_state(g, fermi_dirac(band, 1.0, 0.0));
    auto A = site_number(g, {0, 0});
    double prev = 0;
    for (int K : {1, 2, 4, 8, 16, 32}) {
        double dv = scaling_correction(s, band, v, 0.5, A, K, 8.0);
        CHECK(dv >= prev);
        prev = dv;
    }
    int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    auto a = correction_profile(s, band, v, 0.5, A, 8.0);
    omp_set_num_threads(4);
    auto b = correction_profile(s, band, v, 0.5, A, 8.0);
    omp_set_num_threads(saved);
    CHECK(a == b);
}

TEST_CASE("regime labelling")
{
    RegimeReport r;
    r.theta_r = 0.1;
    r.theta_d = 1.0;
    r.cells = {{8, 16, 0.05, {}}, {16, 16, 0.5, {}}, {32, 16, 2.0, {}}, {64, 16, 1.5, {}}};
    assign_labels(r);
    CHECK(r.cells[0].label == Regime::regular);
    CHECK(r.cells[1].label == Regime::finite_shifted);
    CHECK(r.cells[2].label == Regime::divergent);
    CHECK(r.cells[3].label == Regime::finite_shifted);  // above theta_d but not increasing

    auto g = build_grid(1, 32);
    auto band = nearest_neighbor_band(g);
    auto v = cosine_potential(g, {0.0, 1.0});
    auto s = make_state(g, fermi_dirac(band, 1.0, 0.0));
    auto A = site_number(g, {0, 0});
    CHECK_THROWS_AS(regime_scan(s, band, v, 0.5, A, {4}, {4, 8}, Moment::variance), ConfigError);
    auto mean_scan = regime_scan(s, band, v, 0.5, A, {2, 4, 8}, {4, 16}, Moment::mean);
    CHECK(mean_scan.max_abs_mean <= 1e-12);
}
