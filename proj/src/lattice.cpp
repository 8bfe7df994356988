#include "fermikinetics/lattice.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "fermikinetics/dft.hpp"
#include "fermikinetics/errors.hpp"

namespace fk {

MomentumGrid::MomentumGrid(int dim, int n) : dim_(dim), n_(n)
{
    size_ = dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
}

MomentumGrid build_grid(int dim, int n)
{
    if (dim != 1 && dim != 2)
        throw ConfigError("grid dimension must be 1 or 2, got " + std::to_string(dim));
    if (n % 2 != 0)
        throw ConfigError("points per axis must be even, got " + std::to_string(n));
    if (n < 4 || n > 1024)
        throw ConfigError("points per axis must lie in [4, 1024], got " + std::to_string(n));
    return MomentumGrid(dim, n);
}

void require_same_grid(const MomentumGrid& a, const MomentumGrid& b, const char* where)
{
    if (a != b) {
        std::ostringstream os;
        os << where << ": grid mismatch (" << a.dim() << "D n=" << a.n() << " vs " << b.dim()
           << "D n=" << b.n() << ")";
        throw ContractViolation(os.str());
    }
}

Index MomentumGrid::combine(Index a, Index b, int sign) const
{
    // (j_a - n/2) +- (j_b - n/2) + n/2
    const int h = n_ / 2;
    Coords ca = coords(a), cb = coords(b);
    Coords r{ca[0] + sign * (cb[0] - h), ca[1] + sign * (cb[1] - h)};
    return flat(r);
}

Index MomentumGrid::neg(Index a) const
{
    // -(j - h) + h with h = n/2 rounded down, which also covers the odd sizes the Fock oracle uses.
    const int h2 = 2 * (n_ / 2);
    Coords c = coords(a);
    return flat({h2 - c[0], h2 - c[1]});
}

Index MomentumGrid::zero() const { return flat({n_ / 2, n_ / 2}); }

double MomentumGrid::axis_momentum(int j) const
{
    return 2.0 * std::numbers::pi * signed_label(j) / n_;
}

std::array<double, 2> MomentumGrid::momentum(Index i) const
{
    Coords c = coords(i);
    return {axis_momentum(c[0]), dim_ == 2 ? axis_momentum(c[1]) : 0.0};
}

Index MomentumGrid::site_add(Index x, Index y) const
{
    Coords a = coords(x), b = coords(y);
    return flat({a[0] + b[0], a[1] + b[1]});
}

Index MomentumGrid::site_neg(Index x) const
{
    Coords a = coords(x);
    return flat({-a[0], -a[1]});
}

Coords MomentumGrid::min_image(Index x) const
{
    Coords a = coords(x);
    for (int k = 0; k < dim_; ++k)
        if (a[k] >= n_ / 2) a[k] -= n_;
    return a;
}

int MomentumGrid::phase_index(Index j, Index x) const
{
    Coords cj = coords(j), cx = coords(x);
    long q = 0;
    for (int k = 0; k < dim_; ++k) q += static_cast<long>(signed_label(cj[k])) * cx[k];
    return static_cast<int>(((q % n_) + n_) % n_);
}

namespace {
// cos(2 pi m / n) for signed m: evaluating at the signed label keeps cos even bit-for-bit.
double axis_cos(const MomentumGrid& g, int j, int r)
{
    long m = static_cast<long>(g.signed_label(j)) * r;
    m %= g.n();
    if (m >= g.n() / 2) m -= g.n();
    if (m < -g.n() / 2) m += g.n();
    return std::cos(2.0 * std::numbers::pi * static_cast<double>(m) / g.n());
}
}  // namespace

Dispersion nearest_neighbor_band(const MomentumGrid& grid, double hopping)
{
    Dispersion d{grid, std::vector<double>(grid.size())};
    for (Index i = 0; i < grid.size(); ++i) {
        Coords c = grid.coords(i);
        double s = axis_cos(grid, c[0], 1);
        if (grid.dim() == 2) s += axis_cos(grid, c[1], 1);
        d.eps[i] = -hopping * s;
    }
    return d;
}

PairPotential cosine_potential(const MomentumGrid& grid, const std::vector<double>& coeffs)
{
    PairPotential p{grid, std::vector<double>(grid.size(), 0.0)};
    for (Index i = 0; i < grid.size(); ++i) {
        Coords c = grid.coords(i);
        double v = coeffs.empty() ? 0.0 : coeffs[0];
        for (std::size_t r = 1; r < coeffs.size(); ++r) {
            double s = axis_cos(grid, c[0], static_cast<int>(r));
            if (grid.dim() == 2) s += axis_cos(grid, c[1], static_cast<int>(r));
            v += coeffs[r] * s;
        }
        p.v[i] = v;
    }
    return p;
}

PairPotential potential_from_values(const MomentumGrid& grid, std::vector<double> v)
{
    if (v.size() != grid.size()) throw ContractViolation("potential: size does not match grid");
    for (Index i = 0; i < grid.size(); ++i)
        if (v[i] != v[grid.neg(i)]) throw ContractViolation("potential: v(q) != v(-q)");
    return PairPotential{grid, std::move(v)};
}

void validate_occupation(const MomentumGrid& grid, const Occupation& occ, double tol)
{
    if (occ.w.size() != grid.size()) throw ContractViolation("occupation: size does not match grid");
    for (double x : occ.w)
        if (!(x >= -tol && x <= 1.0 + tol))
            throw ContractViolation("occupation: value outside [0,1]");
}

QuasifreeState make_state(const MomentumGrid& grid, Occupation occ)
{
    validate_occupation(grid, occ);
    return QuasifreeState{grid, std::move(occ)};
}

double fermi_function(double x)
{
    if (x > 0) {
        double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

Occupation fermi_dirac(const Dispersion& band, double beta, double mu)
{
    if (!std::isfinite(beta) || !std::isfinite(mu))
        throw ConfigError("fermi_dirac: beta and mu must be finite");
    Occupation o{std::vector<double>(band.eps.size())};
    for (std::size_t i = 0; i < band.eps.size(); ++i)
        o.w[i] = fermi_function(beta * (band.eps[i] - mu));
    return o;
}

Occupation fermi_dirac(const Dispersion& band, const EquilibriumParams& p)
{
    Occupation o{std::vector<double>(band.eps.size())};
    for (std::size_t i = 0; i < band.eps.size(); ++i)
        o.w[i] = fermi_function(p.beta * band.eps[i] - p.c);
    return o;
}

Occupation fermi_sea(const Dispersion& band, double mu)
{
    Occupation o{std::vector<double>(band.eps.size())};
    for (std::size_t i = 0; i < band.eps.size(); ++i) {
        double d = band.eps[i] - mu;
        o.w[i] = std::abs(d) <= 1e-12 ? 0.5 : (d < 0 ? 1.0 : 0.0);
    }
    return o;
}

Occupation constant_occupation(const MomentumGrid& grid, double value)
{
    if (!(value >= 0.0 && value <= 1.0)) throw ConfigError("constant occupation outside [0,1]");
    return Occupation{std::vector<double>(grid.size(), value)};
}

Occupation random_occupation(const MomentumGrid& grid, double lo, double hi, std::uint64_t seed)
{
    if (!(0.0 <= lo && lo <= hi && hi <= 1.0))
        throw ConfigError("random occupation bounds must satisfy 0 <= lo <= hi <= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Occupation o{std::vector<double>(grid.size())};
    for (double& x : o.w) x = u(rng);
    return o;
}

std::vector<cplx> to_position(const MomentumGrid& grid, const Occupation& occ)
{
    validate_occupation(grid, occ, 1e-12);
    std::vector<cplx> in(occ.w.begin(), occ.w.end()), out(grid.size());
    LatticeDft(grid).to_sites(in.data(), out.data());
    const double cw = grid.cell_weight();
    for (auto& z : out) z *= cw;
    return out;
}

Occupation from_position(const MomentumGrid& grid, const std::vector<cplx>& profile)
{
    if (profile.size() != grid.size()) throw ContractViolation("from_position: size mismatch");
    std::vector<cplx> out(grid.size());
    LatticeDft(grid).to_momenta(profile.data(), out.data());
    Occupation o{std::vector<double>(grid.size())};
    for (std::size_t i = 0; i < out.size(); ++i) o.w[i] = out[i].real();
    return o;
}

double entropy_density(const Occupation& occ)
{
    double s = 0.0;
    for (double w : occ.w) {
        if (w > 0.0) s -= w * std::log(w);
        if (w < 1.0) s -= (1.0 - w) * std::log1p(-w);
    }
    return s / static_cast<double>(occ.w.size());
}

DensityEnergy density_energy(const Occupation& occ, const Dispersion& band)
{
    if (occ.w.size() != band.eps.size())
        throw ContractViolation("density_energy: occupation and band live on different grids");
    double rho = 0.0, e = 0.0;
    for (std::size_t i = 0; i < occ.w.size(); ++i) {
        rho += occ.w[i];
        e += band.eps[i] * occ.w[i];
    }
    const double cw = 1.0 / static_cast<double>(occ.w.size());
    return {rho * cw, e * cw};
}

namespace {

struct FamilyMoments {
    double rho, e;
};

FamilyMoments moments(const std::vector<double>& eps, double beta, double c)
{
    double r = 0.0, e = 0.0;
    for (double x : eps) {
        double w = fermi_function(beta * x - c);
        r += w;
        e += w * x;
    }
    return {r / eps.size(), e / eps.size()};
}

// Root c of rho(beta, c) = rho; rho is increasing in c.
double solve_c(const std::vector<double>& eps, double beta, double rho, double emax, int max_iter)
{
    double span = std::abs(beta) * emax + 50.0;
    auto f = [&](double c) { return moments(eps, beta, c).rho - rho; };
    boost::uintmax_t it = static_cast<boost::uintmax_t>(max_iter);
    auto r = boost::math::tools::toms748_solve(f, -span, span, boost::math::tools::eps_tolerance<double>(50), it);
    if (it >= static_cast<boost::uintmax_t>(max_iter))
        throw ConvergenceError("match_equilibrium: density root did not converge");
    return 0.5 * (r.first + r.second);
}

}  // namespace

EquilibriumParams match_equilibrium(double rho, double e, const Dispersion& band, const MatchOptions& opt)
{
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("match_equilibrium: density must lie in (0,1)");
    const auto& eps = band.eps;
    double ebar = 0.0, emax = 0.0;
    for (double x : eps) {
        ebar += x;
        emax = std::max(emax, std::abs(x));
    }
    ebar /= eps.size();

    if (std::abs(e - rho * ebar) <= opt.degenerate_tol) {
        EquilibriumParams p;
        p.beta = 0.0;
        p.c = std::log(rho / (1.0 - rho));
        p.mu = 0.0;
        p.degenerate = true;
        return p;
    }

    // e(beta) at fixed density decreases in beta.
    auto g = [&](double beta) {
        double c = solve_c(eps, beta, rho, emax, opt.max_iterations);
        return moments(eps, beta, c).e - e;
    };
    double lo, hi;
    if (e < rho * ebar) {
        lo = 0.0;
        hi = 1.0;
        while (g(hi) > 0.0) {
            lo = hi;
            hi *= 2.0;
            if (hi > opt.beta_max)
                throw DomainError("match_equilibrium: energy below the attainable range at this density");
        }
    } else {
        hi = 0.0;
        lo = -1.0;
        while (g(lo) < 0.0) {
            hi = lo;
            lo *= 2.0;
            if (-lo > opt.beta_max)
                throw DomainError("match_equilibrium: energy above the attainable range at this density");
        }
    }
    boost::uintmax_t it = static_cast<boost::uintmax_t>(opt.max_iterations);
    auto r = boost::math::tools::toms748_solve(g, lo, hi, boost::math::tools::eps_tolerance<double>(50), it);
    if (it >= static_cast<boost::uintmax_t>(opt.max_iterations))
        throw ConvergenceError("match_equilibrium: inverse-temperature root did not converge");

    EquilibriumParams p;
    p.beta = 0.5 * (r.first + r.second);
    p.c = solve_c(eps, p.beta, rho, emax, opt.max_iterations);
    p.mu = p.c / p.beta;
    FamilyMoments m = moments(eps, p.beta, p.c);
    if (std::abs(m.rho - rho) > opt.tolerance || std::abs(m.e - e) > opt.tolerance)
        throw ConvergenceError("match_equilibrium: residual above tolerance after root finding");
    return p;
}

}  // namespace fk
