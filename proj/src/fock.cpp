#include "fermikinetics/fock.hpp"

#include <Eigen/Eigenvalues>

#include <bit>
#include <cmath>
#include <numbers>

#include "fermikinetics/collision.hpp"
#include "fermikinetics/errors.hpp"
#include "fermikinetics/fluctuations.hpp"

namespace fk {

namespace {

using Basis = std::uint32_t;

// Jordan-Wigner sign for acting with mode j on state s.
inline double jw_sign(Basis s, int j)
{
    return (std::popcount(s & ((Basis{1} << j) - 1)) & 1) ? -1.0 : 1.0;
}

// a_j |s>, returns false if it vanishes.
inline bool apply_a(Basis& s, int j, double& sign)
{
    if (!(s >> j & 1u)) return false;
    sign *= jw_sign(s, j);
    s ^= Basis{1} << j;
    return true;
}

inline bool apply_adag(Basis& s, int j, double& sign)
{
    if (s >> j & 1u) return false;
    sign *= jw_sign(s, j);
    s ^= Basis{1} << j;
    return true;
}

double max_abs(const SparseOp& m)
{
    double r = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseOp::InnerIterator it(m, k); it; ++it) r = std::max(r, std::abs(it.value()));
    return r;
}

}  // namespace

FockRep car_ops(int L, bool verify)
{
    if (L < 2 || L > kMaxFockSites)
        throw ConfigError("car_ops: site count must lie in [2, " + std::to_string(kMaxFockSites) + "]");
    FockRep rep;
    rep.L = L;
    rep.grid = MomentumGrid(1, L);
    const Eigen::Index D = static_cast<Eigen::Index>(rep.dim());
    for (int j = 0; j < L; ++j) {
        std::vector<Eigen::Triplet<cplx>> t;
        for (Basis s = 0; s < static_cast<Basis>(D); ++s) {
            Basis r = s;
            double sign = 1.0;
            if (apply_a(r, j, sign)) t.emplace_back(r, s, sign);
        }
        SparseOp a(D, D);
        a.setFromTriplets(t.begin(), t.end());
        rep.a_mom.push_back(std::move(a));
    }
    const double norm = 1.0 / std::sqrt(static_cast<double>(L));
    for (int x = 0; x < L; ++x) {
        SparseOp ax(D, D);
        for (int j = 0; j < L; ++j) {
            double p = rep.grid.axis_momentum(j);
            ax += (norm * std::polar(1.0, -p * x)) * rep.a_mom[j];
        }
        ax.prune(cplx(0.0), 1e-300);
        rep.a_site.push_back(std::move(ax));
    }
    if (verify) {
        SparseOp id(D, D);
        id.setIdentity();
        double dev = 0.0;
        for (int x = 0; x < L; ++x)
            for (int y = 0; y < L; ++y) {
                const SparseOp& ax = rep.a_site[x];
                const SparseOp& ay = rep.a_site[y];
                SparseOp ayd = ay.adjoint();
                SparseOp anti = ax * ayd + ayd * ax;
                if (x == y) anti -= id;
                dev = std::max(dev, max_abs(anti));
                SparseOp aa = ax * ay + ay * ax;
                dev = std::max(dev, max_abs(aa));
            }
        rep.car_deviation = dev;
        if (dev > 1e-13) throw NumericalFailure("car_ops: anticommutation relations violated");
    }
    return rep;
}

GaussianState gaussian_state(const FockRep& rep, const std::vector<double>& w)
{
    if (static_cast<int>(w.size()) != rep.L) throw ContractViolation("gaussian_state: need one occupation per mode");
    for (double x : w)
        if (!(x >= 0.0 && x <= 1.0)) throw ContractViolation("gaussian_state: occupation outside [0,1]");
    GaussianState g;
    g.diag.resize(static_cast<Eigen::Index>(rep.dim()));
    for (Basis s = 0; s < rep.dim(); ++s) {
        double p = 1.0;
        for (int j = 0; j < rep.L; ++j) p *= (s >> j & 1u) ? w[j] : 1.0 - w[j];
        g.diag[s] = p;
    }
    return g;
}

cplx exact_expect(const GaussianState& rho, const DenseOp& op)
{
    if (op.rows() != rho.diag.size() || op.cols() != rho.diag.size())
        throw ContractViolation("exact_expect: dimension mismatch");
    cplx acc = 0.0;
    for (Eigen::Index s = 0; s < rho.diag.size(); ++s) acc += rho.diag[s] * op(s, s);
    return acc;
}

cplx exact_expect(const GaussianState& rho, const SparseOp& op)
{
    if (op.rows() != rho.diag.size() || op.cols() != rho.diag.size())
        throw ContractViolation("exact_expect: dimension mismatch");
    cplx acc = 0.0;
    for (Eigen::Index s = 0; s < rho.diag.size(); ++s) acc += rho.diag[s] * op.coeff(s, s);
    return acc;
}

SparseOp annihilator(const FockRep& rep, const std::vector<cplx>& g)
{
    if (static_cast<int>(g.size()) != rep.L) throw ContractViolation("annihilator: profile size mismatch");
    const Eigen::Index D = static_cast<Eigen::Index>(rep.dim());
    SparseOp a(D, D);
    for (int x = 0; x < rep.L; ++x)
        if (g[x] != cplx(0.0)) a += g[x] * rep.a_site[x];
    return a;
}

SparseOp creator(const FockRep& rep, const std::vector<cplx>& f) { return annihilator(rep, f).adjoint(); }

DenseOp quadratic_operator(const FockRep& rep, const std::vector<cplx>& X)
{
    const int L = rep.L;
    if (static_cast<int>(X.size()) != L * L) throw ContractViolation("quadratic_operator: kernel size mismatch");
    const Eigen::Index D = static_cast<Eigen::Index>(rep.dim());
    DenseOp op = DenseOp::Zero(D, D);
    for (Basis s = 0; s < static_cast<Basis>(D); ++s)
        for (int r = 0; r < L; ++r) {
            Basis t = s;
            double sr = 1.0;
            if (!apply_a(t, r, sr)) continue;
            for (int q = 0; q < L; ++q) {
                const cplx x = X[q * L + r];
                if (x == cplx(0.0)) continue;
                Basis u = t;
                double sq = sr;
                if (!apply_adag(u, q, sq)) continue;
                op(u, s) += sq * x;
            }
        }
    return op;
}

SparseOp observable_operator(const FockRep& rep, const QuadraticObservable& A)
{
    require_same_grid(rep.grid, A.grid(), "observable_operator");
    SparseOp af = annihilator(rep, A.f().sites), ag = annihilator(rep, A.g().sites);
    SparseOp fd = af.adjoint(), gd = ag.adjoint();
    return fd * ag + gd * af;
}

DenseOp free_hamiltonian(const FockRep& rep, const Dispersion& band)
{
    require_same_grid(rep.grid, band.grid, "free_hamiltonian");
    const Eigen::Index D = static_cast<Eigen::Index>(rep.dim());
    DenseOp H = DenseOp::Zero(D, D);
    for (Basis s = 0; s < static_cast<Basis>(D); ++s) {
        double e = 0.0;
        for (int j = 0; j < rep.L; ++j)
            if (s >> j & 1u) e += band.eps[j];
        H(s, s) = e;
    }
    return H;
}

DenseOp interaction_operator(const FockRep& rep, const PairPotential& v)
{
    require_same_grid(rep.grid, v.grid, "interaction_operator");
    const MomentumGrid& g = rep.grid;
    const int L = rep.L;
    const Eigen::Index D = static_cast<Eigen::Index>(rep.dim());
    DenseOp V = DenseOp::Zero(D, D);
    for (Index k = 0; k < static_cast<Index>(L); ++k)
        for (Index l = 0; l < static_cast<Index>(L); ++l)
            for (Index m = 0; m < static_cast<Index>(L); ++m) {
                const Index p = g.sub(g.add(k, l), m);
                const double M = matrix_element(v, k, l, m, p);
                if (M == 0.0) continue;
                // a*_k a*_l a_m a_p, rightmost first
                for (Basis s = 0; s < static_cast<Basis>(D); ++s) {
                    Basis t = s;
                    double sign = 1.0;
                    if (!apply_a(t, static_cast<int>(p), sign)) continue;
                    if (!apply_a(t, static_cast<int>(m), sign)) continue;
                    if (!apply_adag(t, static_cast<int>(l), sign)) continue;
                    if (!apply_adag(t, static_cast<int>(k), sign)) continue;
                    V(t, s) += sign * M;
                }
            }
    return V;
}

DenseOp build_hamiltonian(const FockRep& rep, const Dispersion& band, const PairPotential& v, double lambda, double N)
{
    if (!(N > 0)) throw ConfigError("build_hamiltonian: N must be positive");
    return free_hamiltonian(rep, band) + (lambda / std::sqrt(N)) * interaction_operator(rep, v);
}

cplx exact_evolve_expect(const GaussianState& rho, const DenseOp& H, const DenseOp& A, double T)
{
    if (H.rows() != rho.diag.size() || A.rows() != H.rows()) throw ContractViolation("exact_evolve_expect: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<DenseOp> es(H);
    if (es.info() != Eigen::Success) throw ConvergenceError("exact_evolve_expect: eigendecomposition failed");
    const DenseOp& U = es.eigenvectors();
    const Eigen::Index D = H.rows();
    double drift = (U.adjoint() * U - DenseOp::Identity(D, D)).cwiseAbs().maxCoeff();
    if (drift > 1e-10) throw ConvergenceError("exact_evolve_expect: eigenbasis unitarity drift above 1e-10");
    // A(T) = U e^{iDT} (U^+ A U) e^{-iDT} U^+
    DenseOp B = U.adjoint() * A * U;
    const auto& ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < D; ++i)
        for (Eigen::Index j = 0; j < D; ++j) B(i, j) *= std::polar(1.0, (ev[i] - ev[j]) * T);
    DenseOp AT = U * B * U.adjoint();
    return exact_expect(rho, AT);
}

DenseOp interaction_picture_integral(const FockRep& rep, const Dispersion& band, const DenseOp& V, double t)
{
    DenseOp H0 = free_hamiltonian(rep, band);
    DenseOp out = V;
    for (Eigen::Index a = 0; a < V.rows(); ++a)
        for (Eigen::Index b = 0; b < V.cols(); ++b)
            if (V(a, b) != cplx(0.0)) out(a, b) = V(a, b) * time_integral(H0(a, a).real() - H0(b, b).real(), t);
    return out;
}

}  // namespace fk
