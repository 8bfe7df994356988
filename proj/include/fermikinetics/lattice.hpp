#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace fk {

using cplx = std::complex<double>;
using Index = std::uint32_t;
using Coords = std::array<int, 2>;

// Momentum grid p_j = -pi + 2 pi j / n per axis, flat index j0 * n + j1.
// Axis index j corresponds to the signed integer m = j - n/2, p = 2 pi m / n,
// so index arithmetic is exact: momentum zero sits at n/2 and negation is (n - j) mod n.
// The same (dim, n) layout doubles as the position torus, sites x_a in [0, n).
class MomentumGrid {
public:
    MomentumGrid() = default;
    MomentumGrid(int dim, int n);

    int dim() const { return dim_; }
    int n() const { return n_; }
    std::size_t size() const { return size_; }
    double cell_weight() const { return 1.0 / static_cast<double>(size_); }

    Coords coords(Index i) const
    {
        if (dim_ == 1) return {static_cast<int>(i), 0};
        return {static_cast<int>(i) / n_, static_cast<int>(i) % n_};
    }
    Index flat(Coords c) const
    {
        int a = wrap(c[0]);
        if (dim_ == 1) return static_cast<Index>(a);
        return static_cast<Index>(a * n_ + wrap(c[1]));
    }

    // Momentum index arithmetic on the mod-2pi reduced grid.
    Index add(Index a, Index b) const { return combine(a, b, +1); }
    Index sub(Index a, Index b) const { return combine(a, b, -1); }
    Index neg(Index a) const;
    Index zero() const;

    // Signed integer momentum label m in [-n/2, n/2) along an axis.
    int signed_label(int j) const { return j - n_ / 2; }
    double axis_momentum(int j) const;
    std::array<double, 2> momentum(Index i) const;

    // Site arithmetic on the torus.
    Index site_add(Index x, Index y) const;
    Index site_neg(Index x) const;
    // Minimal-image signed coordinates in [-n/2, n/2).
    Coords min_image(Index x) const;

    // Integer q such that p_j . x = 2 pi q / n (mod 2 pi), q in [0, n).
    int phase_index(Index j, Index x) const;

    bool operator==(const MomentumGrid& o) const { return dim_ == o.dim_ && n_ == o.n_; }
    bool operator!=(const MomentumGrid& o) const { return !(*this == o); }

private:
    int wrap(int a) const { return ((a % n_) + n_) % n_; }
    Index combine(Index a, Index b, int sign) const;

    int dim_ = 1;
    int n_ = 4;
    std::size_t size_ = 4;
};

MomentumGrid build_grid(int dim, int n);
void require_same_grid(const MomentumGrid& a, const MomentumGrid& b, const char* where);

struct Dispersion {
    MomentumGrid grid;
    std::vector<double> eps;
};

// eps(p) = -hopping * sum_a cos p_a
Dispersion nearest_neighbor_band(const MomentumGrid& grid, double hopping = 1.0);

// v is indexed by the momentum-difference grid index.
struct PairPotential {
    MomentumGrid grid;
    std::vector<double> v;
};

// v(q) = c[0] + sum_{r>=1} c[r] sum_a cos(r q_a)
PairPotential cosine_potential(const MomentumGrid& grid, const std::vector<double>& coeffs);
// Arbitrary values; rejects a table that is not even under q -> -q.
PairPotential potential_from_values(const MomentumGrid& grid, std::vector<double> v);

struct Occupation {
    std::vector<double> w;
    double t = 0.0;
};

void validate_occupation(const MomentumGrid& grid, const Occupation& occ, double tol = 0.0);

struct QuasifreeState {
    MomentumGrid grid;
    Occupation occ;
    const std::vector<double>& w() const { return occ.w; }
};

QuasifreeState make_state(const MomentumGrid& grid, Occupation occ);

struct EquilibriumParams {
    double beta = 0.0;
    double mu = 0.0;
    // w = 1 / (1 + exp(beta * eps - c)); c = beta * mu away from beta = 0.
    double c = 0.0;
    bool degenerate = false;
};

double fermi_function(double x);  // 1 / (1 + e^x) without overflow
Occupation fermi_dirac(const Dispersion& band, double beta, double mu);
Occupation fermi_dirac(const Dispersion& band, const EquilibriumParams& p);
// Indicator of eps < mu, 1/2 on |eps - mu| <= 1e-12.
Occupation fermi_sea(const Dispersion& band, double mu);
Occupation constant_occupation(const MomentumGrid& grid, double value);
Occupation random_occupation(const MomentumGrid& grid, double lo, double hi, std::uint64_t seed);

// w(x) = n^{-nu} sum_j w_j e^{i p_j . x}
std::vector<cplx> to_position(const MomentumGrid& grid, const Occupation& occ);
// Inverse of to_position; drops the (rounding-level) imaginary part.
Occupation from_position(const MomentumGrid& grid, const std::vector<cplx>& profile);

double entropy_density(const Occupation& occ);

struct DensityEnergy {
    double rho = 0.0;
    double e = 0.0;
};
DensityEnergy density_energy(const Occupation& occ, const Dispersion& band);

struct MatchOptions {
    double tolerance = 1e-10;  // on |rho - rho*| and |e - e*|
    double degenerate_tol = 1e-12;
    double beta_max = 1e3;
    int max_iterations = 200;
};

EquilibriumParams match_equilibrium(double rho, double e, const Dispersion& band,
                                    const MatchOptions& opt = {});

}  // namespace fk
