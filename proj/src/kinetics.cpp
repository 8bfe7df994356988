#include "fermikinetics/kinetics.hpp"

#include <algorithm>
#include <cmath>

namespace fk {

namespace {
void require_finite(std::span<const double> v)
{
    for (double x : v)
        if (!std::isfinite(x)) throw NumericalFailure("collision right-hand side returned a non-finite value");
}
}  // namespace

Rk4Result step_rk4(std::span<const double> w, const RhsFn& rhs, double dt, double tol)
{
    const std::size_t n = w.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    rhs(w, k1);
    require_finite(k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = w[i] + 0.5 * dt * k1[i];
    rhs(tmp, k2);
    require_finite(k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = w[i] + 0.5 * dt * k2[i];
    rhs(tmp, k3);
    require_finite(k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = w[i] + dt * k3[i];
    rhs(tmp, k4);
    require_finite(k4);

    Rk4Result r;
    r.w.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        r.w[i] = w[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    for (double x : r.w)
        if (x < -tol || x > 1.0 + tol) return r;
    for (double& x : r.w) x = std::clamp(x, 0.0, 1.0);
    r.accepted = true;
    return r;
}

double relaxation_distance(const Occupation& w, const Dispersion& band)
{
    DensityEnergy de = density_energy(w, band);
    EquilibriumParams p = match_equilibrium(de.rho, de.e, band);
    Occupation fd = fermi_dirac(band, p);
    double d = 0.0;
    for (std::size_t i = 0; i < w.w.size(); ++i) d = std::max(d, std::abs(w.w[i] - fd.w[i]));
    return d;
}

Trajectory evolve(const Occupation& w0, const RhsFn& rhs, const Dispersion& band, const EvolveOptions& opt)
{
    if (!(opt.T > 0)) throw ConfigError("evolve: T must be positive");
    if (!(opt.dt > 0)) throw ConfigError("evolve: dt must be positive");
    if (opt.monitor_every < 1) throw ConfigError("evolve: monitor_every must be at least 1");
    if (opt.max_rejections < 1 || opt.max_substeps < 1) throw ConfigError("evolve: rejection and sub-step limits must be positive");
    validate_occupation(band.grid, w0);

    Trajectory tr;
    EvolveStats& st = tr.stats;
    const DensityEnergy de0 = density_energy(w0, band);

    auto make_point = [&](double t, const std::vector<double>& w) {
        TrajectoryPoint pt;
        pt.t = t;
        pt.w = Occupation{w, t};
        DensityEnergy de = density_energy(pt.w, band);
        pt.rho = de.rho;
        pt.e = de.e;
        pt.s = entropy_density(pt.w);
        pt.dist_fd = opt.compute_dist_fd ? relaxation_distance(pt.w, band) : 0.0;
        return pt;
    };

    std::vector<double> w = w0.w;
    double s_prev = entropy_density(w0);
    tr.points.push_back(make_point(0.0, w));
    for (double x : w) {
        st.min_w = std::min(st.min_w, x);
        st.max_w = std::max(st.max_w, x);
    }

    const long nsteps = std::max(1L, std::lround(opt.T / opt.dt));
    double t = 0.0;
    for (long i = 1; i <= nsteps; ++i) {
        const double target = (i == nsteps) ? opt.T : static_cast<double>(i) * opt.dt;
        int rejections = 0;
        int substeps = 0;
        while (t < target) {
            if (++substeps > opt.max_substeps)
                throw EvolveFailure("evolve: step size stalled below dt near the [0,1] boundary", tr.points.back());
            double h = target - t;
            for (;;) {
                Rk4Result r = step_rk4(w, rhs, h);
                if (r.accepted) {
                    w = std::move(r.w);
                    break;
                }
                ++st.rejected_steps;
                if (++rejections > opt.max_rejections)
                    throw EvolveFailure("evolve: step size collapsed after repeated rejections", tr.points.back());
                h *= 0.5;
            }
            rejections = 0;
            t = (h == target - t) ? target : t + h;
            ++st.accepted_steps;
            st.smallest_dt = std::min(st.smallest_dt, h);

            Occupation cur{w, t};
            double s = entropy_density(cur);
            st.min_entropy_increment = std::min(st.min_entropy_increment, s - s_prev);
            s_prev = s;
            DensityEnergy de = density_energy(cur, band);
            st.max_density_drift = std::max(st.max_density_drift, std::abs(de.rho - de0.rho));
            st.max_energy_drift = std::max(st.max_energy_drift, std::abs(de.e - de0.e));
            for (double x : w) {
                st.min_w = std::min(st.min_w, x);
                st.max_w = std::max(st.max_w, x);
            }
        }
        if (i % opt.monitor_every == 0 || i == nsteps) tr.points.push_back(make_point(t, w));
    }
    return tr;
}

Trajectory evolve(const Occupation& w0, const CollisionTable& table, const Dispersion& band,
                  const EvolveOptions& opt)
{
    require_same_grid(table.grid(), band.grid, "evolve");
    RhsFn rhs = [&table](std::span<const double> w, std::span<double> out) { collision_rhs(table, w, out); };
    return evolve(w0, rhs, band, opt);
}

}  // namespace fk
