#include <doctest.h>

#include <random>

#include "fermikinetics/errors.hpp"
#include "fermikinetics/fluctuations.hpp"
#include "fermikinetics/fock.hpp"
#include "fermikinetics/quasifree.hpp"
#include "oracles.hpp"

using namespace fk;

namespace {
std::vector<cplx> random_sites(const MomentumGrid& g, std::mt19937_64& rng)
{
    std::normal_distribution<double> d;
    std::vector<cplx> f(g.size());
    for (auto& x : f) x = {d(rng), d(rng)};
    return f;
}

double op_norm_diff(const DenseOp& a, const DenseOp& b) { return (a - b).cwiseAbs().maxCoeff(); }
}  // namespace

TEST_CASE("two-point function against the position-space sum")
{
    for (int dim : {1, 2}) {
        auto g = build_grid(dim, dim == 1 ? 12 : 6);
        std::mt19937_64 rng(dim);
        auto s = make_state(g, random_occupation(g, 0.0, 1.0, 17));
        for (int trial = 0; trial < 5; ++trial) {
            auto f = random_sites(g, rng), h = random_sites(g, rng);
            cplx got = two_point(s, make_profile(g, f), make_profile(g, h));
            CHECK(std::abs(got - oracle::two_point(g, s.w(), f, h)) <= 1e-12);
        }
    }
}

TEST_CASE("sparse and transform profiles agree")
{
    auto g = build_grid(2, 16);
    auto small = delta_profile(g, {3, 5}, cplx(0.5, -2.0));
    std::vector<cplx> sites(g.size(), 0.0);
    for (Index i = 0; i < g.size(); ++i) sites[i] = cplx(std::sin(i), std::cos(0.3 * i));
    auto dense = make_profile(g, sites);
    for (Index j = 0; j < g.size(); ++j) {
        cplx ref = 0;
        for (Index x = 0; x < g.size(); ++x) ref += sites[x] * std::polar(1.0, -oracle::phase(g, j, x));
        CHECK(std::abs(dense.hat[j] - ref) <= 1e-11);
        CHECK(std::abs(small.hat[j] - cplx(0.5, -2.0) * std::polar(1.0, -oracle::phase(g, j, g.flat({3, 5})))) <= 1e-14);
    }
}

TEST_CASE("Wick determinants against exact Fock expectations [property]")
{
    auto rep = car_ops(6);
    const auto& g = rep.grid;
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        auto s = make_state(g, random_occupation(g, 0.0, 1.0, 500 + trial));
        auto rho = gaussian_state(rep, s.w());
        for (int r = 1; r <= 3; ++r) {
            std::vector<Profile> cr, an;
            SparseOp op(rep.dim(), rep.dim());
            op.setIdentity();
            for (int i = 0; i < r; ++i) cr.push_back(make_profile(g, random_sites(g, rng)));
            for (int i = 0; i < r; ++i) an.push_back(make_profile(g, random_sites(g, rng)));
            for (int i = 0; i < r; ++i) op = SparseOp(op * creator(rep, cr[i].sites));
            for (int i = r - 1; i >= 0; --i) op = SparseOp(op * annihilator(rep, an[i].sites));
            CHECK(std::abs(wick_expect(s, cr, an) - exact_expect(rho, op)) <= 1e-10);
        }
        CHECK(wick_expect(s, {make_profile(g, random_sites(g, rng))}, {}) == cplx(0.0));
    }
}

TEST_CASE("observables: kernel, operator and translation against Fock")
{
    auto rep = car_ops(8);
    const auto& g = rep.grid;
    auto band = nearest_neighbor_band(g);
    auto s = make_state(g, random_occupation(g, 0.0, 1.0, 3));
    auto rho = gaussian_state(rep, s.w());
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        auto A = random_observable(g, 3, seed % 2 == 0, seed);
        DenseOp Aop = DenseOp(observable_operator(rep, A));
        CHECK(op_norm_diff(Aop, quadratic_operator(rep, A.kernel())) <= 1e-12);
        CHECK(op_norm_diff(Aop, DenseOp(Aop.adjoint())) <= 1e-12);
        CHECK(std::abs(mean(s, A) - exact_expect(rho, Aop).real()) <= 1e-12);
        // translation by x: sites shift, operator changes accordingly
        auto Ax = translate(A, {3, 0});
        auto sx = A.f().sites;
        std::rotate(sx.rbegin(), sx.rbegin() + 3, sx.rend());
        for (Index i = 0; i < g.size(); ++i) CHECK(std::abs(Ax.f().sites[i] - sx[i]) <= 1e-15);
        CHECK(mean(s, Ax) == doctest::Approx(mean(s, A)).epsilon(1e-12));
        // free evolution equals conjugation by e^{i H0 t}
        double t = 0.7;
        DenseOp H0 = free_hamiltonian(rep, band);
        Eigen::VectorXcd phase(rep.dim());
        for (Eigen::Index a = 0; a < H0.rows(); ++a) phase[a] = std::polar(1.0, H0(a, a).real() * t);
        DenseOp conj = phase.asDiagonal() * Aop * phase.conjugate().asDiagonal();
        CHECK(op_norm_diff(conj, quadratic_operator(rep, free_evolve_obs(A, band, t).kernel())) <= 1e-12);
    }
    auto n0 = site_number(g, {0, 0});
    CHECK(std::abs(mean(s, n0) - 2.0 * oracle::position_profile(g, s.w())[0].real()) <= 1e-13);
}

TEST_CASE("correlations and commutators against Fock")
{
    auto rep = car_ops(8);
    const auto& g = rep.grid;
    auto s = make_state(g, random_occupation(g, 0.0, 1.0, 8));
    auto rho = gaussian_state(rep, s.w());
    auto A = random_observable(g, 2, true, 1);
    auto B = random_observable(g, 3, true, 2);
    auto C = correlation_profile(s, A, B);
    auto K = commutator_profile(s, A, B);
    SparseOp Aop = observable_operator(rep, A);
    cplx mA = exact_expect(rho, Aop);
    for (Index d = 0; d < g.size(); ++d) {
        auto Bd = translate(B, g.coords(d));
        SparseOp Bop = observable_operator(rep, Bd);
        cplx ref = exact_expect(rho, SparseOp(Aop * Bop)) - mA * exact_expect(rho, Bop);
        cplx comm = exact_expect(rho, SparseOp(Aop * Bop - Bop * Aop));
        CHECK(std::abs(truncated_corr(s, A, B, g.coords(d)) - ref) <= 1e-12);
        CHECK(std::abs(C[d] - ref) <= 1e-12);
        CHECK(std::abs(K[d] - comm) <= 1e-12);
    }
}

TEST_CASE("covariance: product state and two independent routes")
{
    auto g = build_grid(1, 64);
    for (double r : {0.1, 0.5, 0.73}) {
        auto s = make_state(g, constant_occupation(g, r));
        auto n0 = site_number(g, {5, 0});
        CHECK(covariance(s, n0, n0) == doctest::Approx(4 * r * (1 - r)).epsilon(1e-13));
    }
    auto g2 = build_grid(2, 16);
    auto band = nearest_neighbor_band(g2);
    auto s = make_state(g2, fermi_dirac(band, 1.0, 0.2));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto A = random_observable(g2, 3, true, seed), B = random_observable(g2, 2, false, seed + 50);
        CHECK(covariance(s, A, B) == doctest::Approx(covariance_by_translation_sum(s, A, B)).epsilon(1e-11));
        CHECK(covariance(s, A, B) == doctest::Approx(covariance(s, B, A)).epsilon(1e-13));
        CHECK(covariance(s, A, A) >= 0.0);
    }
}

TEST_CASE("symplectic forms: full torus vanishes, blocks obey Cauchy-Schwarz against block variances [property]")
{
    auto g = build_grid(1, 64);
    auto band = nearest_neighbor_band(g);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> beta(0.1, 3.0), mu(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        auto s = make_state(g, fermi_dirac(band, beta(rng), mu(rng)));
        auto A = random_observable(g, 4, true, 1000 + trial), B = random_observable(g, 4, true, 5000 + trial);
        CHECK(std::abs(symplectic(s, A, B)) <= 1e-10);
        double sigma = symplectic(s, A, B);
        CHECK(0.25 * sigma * sigma <= covariance(s, A, A) * covariance(s, B, B));
        for (int K : {1, 4, 16, 32}) {
            double sk = block_symplectic(s, A, B, K);
            double bound = block_variance(s, A, K) * block_variance(s, B, K);
            CHECK(0.25 * sk * sk <= bound * (1 + 1e-12) + 1e-14);
        }
    }
    auto s = make_state(g, fermi_dirac(band, 1.0, 0.0));
    CHECK_THROWS_AS(block_symplectic(s, site_number(g, {0, 0}), site_number(g, {0, 0}), 40), ConfigError);
}

TEST_CASE("local observable support")
{
    auto g = build_grid(1, 16);
    std::vector<cplx> f(g.size(), 0.0), h(g.size(), 0.0);
    f[0] = 1.0;
    h[5] = 1.0;
    CHECK_THROWS_AS(QuadraticObservable::from_sites(g, f, h), ConfigError);
    h[5] = 0.0;
    h[4] = 1.0;
    CHECK(support_diameter(g, f, h) == 4);
    CHECK_NOTHROW(QuadraticObservable::from_sites(g, f, h));
    f[0] = 0.0;
    f[15] = 1.0;  // wraps around: {15, 0..} has diameter 1 with h at 0
    h[4] = 0.0;
    h[0] = 1.0;
    CHECK(support_diameter(g, f, h) == 1);
}
