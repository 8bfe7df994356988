#include "fermikinetics/quasifree.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fermikinetics/dft.hpp"
#include "fermikinetics/errors.hpp"

namespace fk {

namespace {

// e^{2 pi i q / n}
std::vector<cplx> unit_roots(int n)
{
    std::vector<cplx> r(n);
    for (int q = 0; q < n; ++q) r[q] = std::polar(1.0, 2.0 * std::numbers::pi * q / n);
    return r;
}

std::vector<cplx> transform_sites(const MomentumGrid& grid, const std::vector<cplx>& sites)
{
    std::vector<Index> support;
    for (Index x = 0; x < sites.size(); ++x)
        if (sites[x] != cplx(0.0)) support.push_back(x);
    std::vector<cplx> hat(grid.size(), 0.0);
    if (support.size() > 64) {
        LatticeDft(grid).to_momenta(sites.data(), hat.data());
        return hat;
    }
    // Sparse sum with exact integer phases.
    const auto roots = unit_roots(grid.n());
    for (Index j = 0; j < grid.size(); ++j) {
        cplx s = 0.0;
        for (Index x : support) s += sites[x] * std::conj(roots[grid.phase_index(j, x)]);
        hat[j] = s;
    }
    return hat;
}

std::vector<cplx> sites_from_hat(const MomentumGrid& grid, const std::vector<cplx>& hat)
{
    std::vector<cplx> out(grid.size());
    LatticeDft(grid).to_sites(hat.data(), out.data());
    for (auto& z : out) z *= grid.cell_weight();
    return out;
}

void require_grid(const QuasifreeState& s, const MomentumGrid& g, const char* where)
{
    require_same_grid(s.grid, g, where);
}

// Fourier sums over d for every torus site: out(d) = n^{-nu} sum_p a(p) e^{sign i p.d}.
std::vector<cplx> sum_over_momenta(const LatticeDft& dft, const std::vector<cplx>& a, int sign)
{
    const MomentumGrid& g = dft.grid();
    std::vector<cplx> plus(g.size());
    dft.to_sites(a.data(), plus.data());
    std::vector<cplx> out(g.size());
    const double cw = g.cell_weight();
    for (Index d = 0; d < g.size(); ++d) out[d] = cw * (sign > 0 ? plus[d] : plus[g.site_neg(d)]);
    return out;
}

}  // namespace

Profile make_profile(const MomentumGrid& grid, std::vector<cplx> sites)
{
    if (sites.size() != grid.size()) throw ContractViolation("profile: size does not match torus");
    Profile p;
    p.hat = transform_sites(grid, sites);
    p.sites = std::move(sites);
    return p;
}

Profile delta_profile(const MomentumGrid& grid, Coords x, cplx value)
{
    std::vector<cplx> s(grid.size(), 0.0);
    s[grid.flat(x)] = value;
    return make_profile(grid, std::move(s));
}

int support_diameter(const MomentumGrid& grid, const std::vector<cplx>& f, const std::vector<cplx>& g)
{
    std::vector<Index> sup;
    for (Index x = 0; x < grid.size(); ++x)
        if (f[x] != cplx(0.0) || g[x] != cplx(0.0)) sup.push_back(x);
    int diam = 0;
    for (Index a : sup)
        for (Index b : sup) {
            Coords d = grid.min_image(grid.site_add(a, grid.site_neg(b)));
            diam = std::max({diam, std::abs(d[0]), std::abs(d[1])});
        }
    return diam;
}

QuadraticObservable QuadraticObservable::from_sites(const MomentumGrid& grid, std::vector<cplx> f, std::vector<cplx> g)
{
    if (f.size() != grid.size() || g.size() != grid.size())
        throw ContractViolation("observable: profile size does not match torus");
    if (4 * support_diameter(grid, f, g) > grid.n())
        throw ConfigError("observable: support diameter exceeds n/4 on this torus");
    QuadraticObservable A;
    A.grid_ = grid;
    A.f_ = make_profile(grid, std::move(f));
    A.g_ = make_profile(grid, std::move(g));
    return A;
}

QuadraticObservable QuadraticObservable::from_momentum(const MomentumGrid& grid, std::vector<cplx> fhat,
                                                       std::vector<cplx> ghat)
{
    if (fhat.size() != grid.size() || ghat.size() != grid.size())
        throw ContractViolation("observable: transform size does not match grid");
    QuadraticObservable A;
    A.grid_ = grid;
    A.f_.sites = sites_from_hat(grid, fhat);
    A.g_.sites = sites_from_hat(grid, ghat);
    A.f_.hat = std::move(fhat);
    A.g_.hat = std::move(ghat);
    return A;
}

std::vector<double> QuadraticObservable::symbol() const
{
    std::vector<double> psi(grid_.size());
    for (Index p = 0; p < grid_.size(); ++p) psi[p] = 2.0 * (std::conj(f_.hat[p]) * g_.hat[p]).real();
    return psi;
}

std::vector<cplx> QuadraticObservable::kernel() const
{
    const std::size_t S = grid_.size();
    std::vector<cplx> X(S * S);
    const double cw = grid_.cell_weight();
    for (std::size_t q = 0; q < S; ++q)
        for (std::size_t r = 0; r < S; ++r)
            X[q * S + r] = cw * (std::conj(f_.hat[q]) * g_.hat[r] + std::conj(g_.hat[q]) * f_.hat[r]);
    return X;
}

QuadraticObservable QuadraticObservable::scaled(double c) const
{
    QuadraticObservable A = *this;
    for (auto& z : A.f_.sites) z *= c;
    for (auto& z : A.f_.hat) z *= c;
    return A;
}

QuadraticObservable site_number(const MomentumGrid& grid, Coords x)
{
    std::vector<cplx> f(grid.size(), 0.0);
    f[grid.flat(x)] = 1.0;
    return QuadraticObservable::from_sites(grid, f, f);
}

QuadraticObservable bond(const MomentumGrid& grid, Coords x, Coords e, cplx amplitude)
{
    std::vector<cplx> f(grid.size(), 0.0), g(grid.size(), 0.0);
    f[grid.flat(x)] = std::conj(amplitude);
    g[grid.flat({x[0] + e[0], x[1] + e[1]})] = 1.0;
    return QuadraticObservable::from_sites(grid, std::move(f), std::move(g));
}

QuadraticObservable random_observable(const MomentumGrid& grid, int width, bool complex_values, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<cplx> f(grid.size(), 0.0), g(grid.size(), 0.0);
    for (int i = 0; i < width; ++i) {
        Index x = grid.flat({i, 0});
        double a = N(rng), b = N(rng), c = N(rng), d = N(rng);
        f[x] = complex_values ? cplx(a, b) : cplx(a);
        g[x] = complex_values ? cplx(c, d) : cplx(c);
    }
    return QuadraticObservable::from_sites(grid, std::move(f), std::move(g));
}

QuadraticObservable translate(const QuadraticObservable& A, Coords x)
{
    const MomentumGrid& grid = A.grid();
    Index sx = grid.flat(x);
    auto shift = [&](const std::vector<cplx>& v) {
        std::vector<cplx> out(grid.size());
        for (Index y = 0; y < grid.size(); ++y) out[grid.site_add(y, sx)] = v[y];
        return out;
    };
    const auto roots = unit_roots(grid.n());
    auto phase = [&](const std::vector<cplx>& h) {
        std::vector<cplx> out(h.size());
        for (Index j = 0; j < h.size(); ++j) out[j] = h[j] * std::conj(roots[grid.phase_index(j, sx)]);
        return out;
    };
    // The sites are moved exactly; the transforms pick up e^{-i p.x}.
    QuadraticObservable B;
    B.grid_ = grid;
    B.f_ = Profile{shift(A.f().sites), phase(A.f().hat)};
    B.g_ = Profile{shift(A.g().sites), phase(A.g().hat)};
    return B;
}

QuadraticObservable free_evolve_obs(const QuadraticObservable& A, const Dispersion& band, double t)
{
    require_same_grid(A.grid(), band.grid, "free_evolve_obs");
    std::vector<cplx> fh = A.f().hat, gh = A.g().hat;
    for (Index p = 0; p < fh.size(); ++p) {
        cplx ph = std::polar(1.0, -band.eps[p] * t);
        fh[p] *= ph;
        gh[p] *= ph;
    }
    return QuadraticObservable::from_momentum(A.grid(), std::move(fh), std::move(gh));
}

cplx two_point(const QuasifreeState& s, const Profile& f, const Profile& g)
{
    if (f.hat.size() != s.grid.size() || g.hat.size() != s.grid.size())
        throw ContractViolation("two_point: profile does not live on the state's torus");
    cplx acc = 0.0;
    const auto& w = s.w();
    for (Index p = 0; p < w.size(); ++p) acc += w[p] * std::conj(f.hat[p]) * g.hat[p];
    return acc * s.grid.cell_weight();
}

cplx wick_expect(const QuasifreeState& s, const std::vector<Profile>& creators,
                 const std::vector<Profile>& annihilators)
{
    if (creators.size() != annihilators.size()) return 0.0;
    const auto r = static_cast<Eigen::Index>(creators.size());
    if (r == 0) return 1.0;
    Eigen::MatrixXcd G(r, r);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < r; ++j) G(i, j) = two_point(s, creators[i], annihilators[j]);
    return G.determinant();
}

double mean(const QuasifreeState& s, const QuadraticObservable& A)
{
    require_grid(s, A.grid(), "mean");
    return 2.0 * two_point(s, A.f(), A.g()).real();
}

namespace {
// The four (X_i, Y_j) pairings of A = X_1 + X_2 and B = Y_1 + Y_2 with X_1 = a*(f)a(g), X_2 = a*(g)a(f).
struct Pairing {
    const Profile* cre;
    const Profile* ann;
};
std::array<Pairing, 2> parts(const QuadraticObservable& A)
{
    return {Pairing{&A.f(), &A.g()}, Pairing{&A.g(), &A.f()}};
}
}  // namespace

cplx truncated_corr(const QuasifreeState& s, const QuadraticObservable& A, const QuadraticObservable& B, Coords d)
{
    require_grid(s, A.grid(), "truncated_corr");
    require_grid(s, B.grid(), "truncated_corr");
    const MomentumGrid& g = s.grid;
    const auto roots = unit_roots(g.n());
    const Index sd = g.flat(d);
    const auto& w = s.w();
    cplx total = 0.0;
    for (const auto& X : parts(A))
        for (const auto& Y : parts(B)) {
            // T(f_X, g_Y translated) U(g_X, f_Y translated)
            cplx T = 0.0, U = 0.0;
            for (Index p = 0; p < g.size(); ++p) {
                cplx e = roots[g.phase_index(p, sd)];  // e^{i p.d}
                T += w[p] * std::conj(X.cre->hat[p]) * Y.ann->hat[p] * std::conj(e);
                U += (1.0 - w[p]) * X.ann->hat[p] * std::conj(Y.cre->hat[p]) * e;
            }
            total += T * U * g.cell_weight() * g.cell_weight();
        }
    return total;
}

std::vector<cplx> correlation_profile(const QuasifreeState& s, const QuadraticObservable& A,
                                      const QuadraticObservable& B)
{
    require_grid(s, A.grid(), "correlation_profile");
    require_grid(s, B.grid(), "correlation_profile");
    const MomentumGrid& g = s.grid;
    LatticeDft dft(g);
    const auto& w = s.w();
    std::vector<cplx> C(g.size(), 0.0), a(g.size()), b(g.size());
    for (const auto& X : parts(A))
        for (const auto& Y : parts(B)) {
            for (Index p = 0; p < g.size(); ++p) {
                a[p] = w[p] * std::conj(X.cre->hat[p]) * Y.ann->hat[p];
                b[p] = (1.0 - w[p]) * X.ann->hat[p] * std::conj(Y.cre->hat[p]);
            }
            auto T = sum_over_momenta(dft, a, -1);
            auto U = sum_over_momenta(dft, b, +1);
            for (Index d = 0; d < g.size(); ++d) C[d] += T[d] * U[d];
        }
    return C;
}

double covariance(const QuasifreeState& s, const QuadraticObservable& A, const QuadraticObservable& B)
{
    require_grid(s, A.grid(), "covariance");
    require_grid(s, B.grid(), "covariance");
    auto pa = A.symbol(), pb = B.symbol();
    const auto& w = s.w();
    double acc = 0.0;
    for (Index p = 0; p < w.size(); ++p) acc += w[p] * (1.0 - w[p]) * pa[p] * pb[p];
    return acc * s.grid.cell_weight();
}

double covariance_by_translation_sum(const QuasifreeState& s, const QuadraticObservable& A,
                                     const QuadraticObservable& B)
{
    auto cab = correlation_profile(s, A, B);
    auto cba = correlation_profile(s, B, A);
    cplx acc = 0.0;
    for (Index x = 0; x < s.grid.size(); ++x) acc += 0.5 * (cab[x] + cba[s.grid.site_neg(x)]);
    return acc.real();
}

std::vector<cplx> commutator_profile(const QuasifreeState& s, const QuadraticObservable& A,
                                     const QuadraticObservable& B)
{
    require_grid(s, A.grid(), "commutator_profile");
    require_grid(s, B.grid(), "commutator_profile");
    const MomentumGrid& g = s.grid;
    LatticeDft dft(g);
    const auto& w = s.w();
    std::vector<cplx> out(g.size(), 0.0), a(g.size()), b(g.size()), c(g.size()), e(g.size());
    // [a*(f)a(g), a*(f')a(g')] = <g,f'> a*(f)a(g') - <g',f> a*(f')a(g), <u,v> = sum_x u(x) conj v(x)
    for (const auto& X : parts(A))
        for (const auto& Y : parts(B)) {
            const Profile &f = *X.cre, &gg = *X.ann, &f2 = *Y.cre, &g2 = *Y.ann;
            for (Index p = 0; p < g.size(); ++p) {
                a[p] = gg.hat[p] * std::conj(f2.hat[p]);            // <g, f'_d>: e^{+ipd}
                b[p] = w[p] * std::conj(f.hat[p]) * g2.hat[p];      // T(f, g'_d): e^{-ipd}
                c[p] = g2.hat[p] * std::conj(f.hat[p]);             // <g'_d, f>: e^{-ipd}
                e[p] = w[p] * std::conj(f2.hat[p]) * gg.hat[p];     // T(f'_d, g): e^{+ipd}
            }
            auto A1 = sum_over_momenta(dft, a, +1);
            auto T1 = sum_over_momenta(dft, b, -1);
            auto A2 = sum_over_momenta(dft, c, -1);
            auto T2 = sum_over_momenta(dft, e, +1);
            for (Index d = 0; d < g.size(); ++d) out[d] += A1[d] * T1[d] - A2[d] * T2[d];
        }
    return out;
}

double symplectic(const QuasifreeState& s, const QuadraticObservable& A, const QuadraticObservable& B)
{
    auto c = commutator_profile(s, A, B);
    cplx acc = 0.0;
    for (const auto& z : c) acc += z;
    return (cplx(0.0, -1.0) * acc).real();
}

double fejer_weight(const MomentumGrid& grid, Index d, int K)
{
    Coords m = grid.min_image(d);
    double w = 1.0;
    for (int a = 0; a < grid.dim(); ++a) {
        int ad = std::abs(m[a]);
        if (ad >= K) return 0.0;
        w *= 1.0 - static_cast<double>(ad) / K;
    }
    return w;
}

double block_symplectic(const QuasifreeState& s, const QuadraticObservable& A, const QuadraticObservable& B, int K)
{
    if (K < 1 || 2 * K > s.grid.n()) throw ConfigError("block_symplectic: need 1 <= K and 2K <= n");
    auto c = commutator_profile(s, A, B);
    cplx acc = 0.0;
    for (Index d = 0; d < s.grid.size(); ++d) acc += fejer_weight(s.grid, d, K) * c[d];
    return (cplx(0.0, -1.0) * acc).real();
}

}  // namespace fk
