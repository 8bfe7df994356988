#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "fermikinetics/collision.hpp"
#include "fermikinetics/errors.hpp"
#include "fermikinetics/lattice.hpp"

namespace fk {

struct TrajectoryPoint {
    double t = 0.0;
    Occupation w;
    double rho = 0.0;
    double e = 0.0;
    double s = 0.0;
    double dist_fd = 0.0;
};

using RhsFn = std::function<void(std::span<const double>, std::span<double>)>;

struct Rk4Result {
    std::vector<double> w;
    bool accepted = false;
};

inline constexpr double kBoundTol = 1e-12;

// One classical RK4 step. A step leaving [-tol, 1 + tol] comes back unaccepted
// and the caller retries with dt / 2; accepted states are clamped into [0, 1].
Rk4Result step_rk4(std::span<const double> w, const RhsFn& rhs, double dt, double tol = kBoundTol);

struct EvolveOptions {
    double T = 50.0;
    double dt = 0.01;
    int monitor_every = 100;  // nominal steps between recorded points
    int max_rejections = 40;
    int max_substeps = 1000;  // accepted sub-steps allowed inside one nominal step
    bool compute_dist_fd = true;
};

struct EvolveStats {
    long accepted_steps = 0;
    long rejected_steps = 0;
    double smallest_dt = std::numeric_limits<double>::infinity();
    // min over accepted steps of s(t_{k+1}) - s(t_k)
    double min_entropy_increment = std::numeric_limits<double>::infinity();
    double max_density_drift = 0.0;
    double max_energy_drift = 0.0;
    double min_w = 1.0;
    double max_w = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    EvolveStats stats;
};

// Carries the last valid recorded point.
class EvolveFailure : public ConvergenceError {
public:
    EvolveFailure(const std::string& what, TrajectoryPoint last)
        : ConvergenceError(what), last_(std::move(last)) {}
    const TrajectoryPoint& last() const { return last_; }

private:
    TrajectoryPoint last_;
};

Trajectory evolve(const Occupation& w0, const RhsFn& rhs, const Dispersion& band, const EvolveOptions& opt);
Trajectory evolve(const Occupation& w0, const CollisionTable& table, const Dispersion& band,
                  const EvolveOptions& opt);

// Sup-norm distance to the Fermi-Dirac state with the same density and energy.
double relaxation_distance(const Occupation& w, const Dispersion& band);

}  // namespace fk
