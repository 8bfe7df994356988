#include <doctest.h>

#include <cmath>

#include "fermikinetics/errors.hpp"
#include "fermikinetics/kinetics.hpp"

using namespace fk;

namespace {
// dw/dt = 1/2 - w, exact w(t) = 1/2 + (w0 - 1/2) e^{-t}
const RhsFn relax_half = [](std::span<const double> w, std::span<double> out) {
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = 0.5 - w[i];
};
}  // namespace

TEST_CASE("RK4 step is fourth order on a linear relaxation")
{
    std::vector<double> w0{0.9, 0.1};
    auto err = [&](double dt) {
        std::vector<double> w = w0;
        int steps = static_cast<int>(std::lround(1.0 / dt));
        for (int i = 0; i < steps; ++i) {
            auto r = step_rk4(w, relax_half, dt);
            REQUIRE(r.accepted);
            w = r.w;
        }
        return std::abs(w[0] - (0.5 + 0.4 * std::exp(-1.0)));
    };
    double ratio = err(0.1) / err(0.05);
    CHECK(ratio == doctest::Approx(16.0).epsilon(0.05));
}

TEST_CASE("steps leaving [0,1] are rejected, then the step size collapses")
{
    RhsFn push = [](std::span<const double> w, std::span<double> out) {
        for (std::size_t i = 0; i < w.size(); ++i) out[i] = 1.0;
    };
    auto r = step_rk4(std::vector<double>{0.95}, push, 0.1);
    CHECK_FALSE(r.accepted);

    auto g = build_grid(1, 4);
    auto band = nearest_neighbor_band(g);
    EvolveOptions opt;
    opt.T = 1.0;
    opt.dt = 0.1;
    opt.monitor_every = 1;
    opt.compute_dist_fd = false;
    try {
        evolve(constant_occupation(g, 0.5), push, band, opt);
        FAIL("expected EvolveFailure");
    } catch (const EvolveFailure& e) {
        CHECK(e.last().t == doctest::Approx(0.5));
        CHECK(e.last().w.w[0] == doctest::Approx(1.0));
    }

    RhsFn nan = [](std::span<const double>, std::span<double> out) {
        for (auto& x : out) x = std::nan("");
    };
    CHECK_THROWS_AS(evolve(constant_occupation(g, 0.5), nan, band, opt), NumericalFailure);
    opt.dt = -1;
    CHECK_THROWS_AS(evolve(constant_occupation(g, 0.5), relax_half, band, opt), ConfigError);
}

TEST_CASE("monitor points")
{
    auto g = build_grid(1, 4);
    auto band = nearest_neighbor_band(g);
    EvolveOptions opt;
    opt.T = 1.0;
    opt.dt = 0.1;
    opt.monitor_every = 5;
    auto tr = evolve(random_occupation(g, 0.2, 0.8, 1), relax_half, band, opt);
    REQUIRE(tr.points.size() == 3);
    CHECK(tr.points[1].t == doctest::Approx(0.5));
    CHECK(tr.points[2].t == 1.0);
    CHECK(tr.stats.accepted_steps == 10);
    CHECK(tr.points[2].w.w[0] == doctest::Approx(0.5 + (tr.points[0].w.w[0] - 0.5) * std::exp(-1.0)).epsilon(1e-7));
}

TEST_CASE("constant potential leaves every occupation unchanged")
{
    auto g = build_grid(2, 8);
    auto band = nearest_neighbor_band(g);
    auto v = cosine_potential(g, {0.7});
    auto table = build_table(band, v, ScalingParameters{});
    EvolveOptions opt;
    opt.T = 0.5;
    opt.monitor_every = 10;
    auto w0 = random_occupation(g, 0.1, 0.9, 9);
    auto tr = evolve(w0, table, band, opt);
    for (const auto& p : tr.points) CHECK(p.w.w == w0.w);
}

TEST_CASE("entropy increases and density is conserved along a short run")
{
    auto g = build_grid(2, 8);
    auto band = nearest_neighbor_band(g);
    auto v = cosine_potential(g, {0.0, 1.0});
    auto table = build_table(band, v, ScalingParameters{});
    EvolveOptions opt;
    opt.T = 5.0;
    opt.monitor_every = 100;
    auto tr = evolve(random_occupation(g, 0.05, 0.95, 4), table, band, opt);
    CHECK(tr.stats.min_entropy_increment >= -1e-12);
    CHECK(tr.stats.max_density_drift <= 1e-13);
    CHECK(tr.points.back().s > tr.points.front().s);
    CHECK(tr.points.back().dist_fd < tr.points.front().dist_fd);
}

TEST_CASE("relaxation distance vanishes on Fermi-Dirac states")
{
    auto g = build_grid(2, 16);
    auto band = nearest_neighbor_band(g);
    CHECK(relaxation_distance(fermi_dirac(band, 1.3, -0.4), band) <= 1e-9);
    CHECK(relaxation_distance(random_occupation(g, 0.0, 1.0, 2), band) > 0.1);
}
