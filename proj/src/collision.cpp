#include "fermikinetics/collision.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fermikinetics/errors.hpp"

namespace fk {

void validate(const ScalingParameters& p)
{
    if (!(p.N > 0)) throw ConfigError("scaling parameters: N must be positive");
    if (p.K < 1) throw ConfigError("scaling parameters: K must be at least 1");
    if (!(p.eta > 0)) throw ConfigError("scaling parameters: eta must be positive");
    if (!std::isfinite(p.lambda)) throw ConfigError("scaling parameters: lambda must be finite");
}

const char* to_string(ShellMode m) { return m == ShellMode::mollified ? "mollified" : "exact"; }

ShellMode shell_mode_from_string(const std::string& s)
{
    if (s == "mollified") return ShellMode::mollified;
    if (s == "exact" || s == "exact_shell" || s == "exact-shell") return ShellMode::exact_shell;
    throw ConfigError("unknown shell mode '" + s + "' (expected mollified or exact)");
}

double matrix_element(const PairPotential& v, Index k, Index l, Index m, Index p)
{
    const MomentumGrid& g = v.grid;
    if (g.add(k, l) != g.add(m, p)) throw ContractViolation("matrix_element: quadruple is off the momentum shell");
    return v.v[g.sub(k, p)] - v.v[g.sub(k, m)];
}

double mollifier(double eta, double dE)
{
    if (!(eta > 0)) throw ConfigError("mollifier width must be positive");
    double x = dE / eta;
    return std::exp(-x * x) / (eta * std::sqrt(std::numbers::pi));
}

double collision_weight(double lambda, double M, double dE, ShellMode mode, double eta)
{
    const double base = std::numbers::pi * lambda * lambda * M * M;
    if (mode == ShellMode::mollified) return base * mollifier(eta, dE);
    return std::abs(dE) <= kExactShellTol ? base / eta : 0.0;
}

namespace {
bool diagonal_class(Index k, Index l, Index m, Index p) { return k == m && l == p; }

bool canonical(Index k, Index l, Index m, Index p)
{
    return k < l && m < p && (k < m || (k == m && l <= p));
}
}  // namespace

std::size_t CollisionTable::logical_size() const
{
    std::size_t n = 0;
    for (std::size_t c = 0; c < weight_.size(); ++c) n += diagonal_class(k_[c], l_[c], m_[c], p_[c]) ? 4 : 8;
    return n;
}

std::vector<CollisionEntry> CollisionTable::entries() const
{
    std::vector<CollisionEntry> out;
    out.reserve(logical_size());
    for (std::size_t c = 0; c < weight_.size(); ++c) {
        const Index k = k_[c], l = l_[c], m = m_[c], p = p_[c];
        const double W = weight_[c];
        out.push_back({k, l, m, p, W});
        out.push_back({l, k, m, p, W});
        out.push_back({k, l, p, m, W});
        out.push_back({l, k, p, m, W});
        if (!diagonal_class(k, l, m, p)) {
            out.push_back({m, p, k, l, W});
            out.push_back({p, m, k, l, W});
            out.push_back({m, p, l, k, W});
            out.push_back({p, m, l, k, W});
        }
    }
    std::sort(out.begin(), out.end(), [](const CollisionEntry& a, const CollisionEntry& b) {
        if (a.k != b.k) return a.k < b.k;
        if (a.l != b.l) return a.l < b.l;
        if (a.m != b.m) return a.m < b.m;
        return a.p < b.p;
    });
    return out;
}

double CollisionTable::weight_sum() const
{
    double s = 0.0;
    for (std::size_t c = 0; c < weight_.size(); ++c)
        s += (diagonal_class(k_[c], l_[c], m_[c], p_[c]) ? 4.0 : 8.0) * weight_[c];
    return s;
}

CollisionTable CollisionTable::from_entries(const MomentumGrid& grid, ShellMode mode, double eta,
                                            double lambda, double threshold,
                                            const std::vector<CollisionEntry>& entries)
{
    CollisionTable t;
    t.grid_ = grid;
    t.mode_ = mode;
    t.eta_ = eta;
    t.lambda_ = lambda;
    t.threshold_ = threshold;
    std::vector<std::vector<CollisionEntry>> by_p(grid.size());
    for (const auto& e : entries) {
        if (e.k >= grid.size() || e.l >= grid.size() || e.m >= grid.size() || e.p >= grid.size())
            throw ContractViolation("collision table: index outside grid");
        if (grid.add(e.k, e.l) != grid.add(e.m, e.p))
            throw ContractViolation("collision table: entry violates momentum conservation");
        if (canonical(e.k, e.l, e.m, e.p)) by_p[e.p].push_back(e);
        t.max_weight_ = std::max(t.max_weight_, e.weight);
    }
    t.offsets_.assign(grid.size() + 1, 0);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        auto& v = by_p[p];
        std::sort(v.begin(), v.end(), [](const CollisionEntry& a, const CollisionEntry& b) {
            return a.m != b.m ? a.m < b.m : a.k < b.k;
        });
        for (const auto& e : v) {
            t.k_.push_back(e.k);
            t.l_.push_back(e.l);
            t.m_.push_back(e.m);
            t.p_.push_back(e.p);
            t.weight_.push_back(e.weight);
        }
        t.offsets_[p + 1] = t.weight_.size();
    }
    return t;
}

CollisionTable build_table(const Dispersion& band, const PairPotential& v,
                           const ScalingParameters& params, const TableOptions& opt)
{
    const MomentumGrid& g = band.grid;
    require_same_grid(g, v.grid, "build_table");
    if (!(params.eta > 0)) throw ConfigError("build_table: eta must be positive");
    if (opt.threshold < 0) throw ConfigError("build_table: threshold must be non-negative");
    const auto& eps = band.eps;
    const Index S = static_cast<Index>(g.size());
    const long long S_signed = static_cast<long long>(S);

    auto weight_of = [&](Index k, Index l, Index m, Index p) {
        double M = v.v[g.sub(k, p)] - v.v[g.sub(k, m)];
        if (M == 0.0) return 0.0;
        return collision_weight(params.lambda, M, energy_mismatch(eps, k, l, m, p), opt.mode, params.eta);
    };
    // Visits every class representative with this p: m < p, k < l, (k,l) <= (m,p).
    auto for_classes = [&](Index p, auto&& fn) {
        for (Index m = 0; m < p; ++m) {
            Index mp = g.add(m, p);
            for (Index k = 0; k <= m; ++k) {
                Index l = g.sub(mp, k);
                if (k < l && (k < m || l <= p)) fn(k, l, m);
            }
        }
    };

    // Pass 1: largest weight (max is order independent, so the parallel reduction is exact).
    double wmax = 0.0;
#pragma omp parallel for schedule(dynamic) reduction(max : wmax)
    for (long long ps = 0; ps < S_signed; ++ps) {
        Index p = static_cast<Index>(ps);
        for_classes(p, [&](Index k, Index l, Index m) { wmax = std::max(wmax, weight_of(k, l, m, p)); });
    }
    const double cut = opt.relative_threshold ? opt.threshold * wmax : opt.threshold;

    // Pass 2: count per p; pass 3: fill, concatenated in p order.
    std::vector<std::size_t> counts(S, 0);
#pragma omp parallel for schedule(dynamic)
    for (long long ps = 0; ps < S_signed; ++ps) {
        Index p = static_cast<Index>(ps);
        std::size_t c = 0;
        for_classes(p, [&](Index k, Index l, Index m) {
            if (weight_of(k, l, m, p) > cut) ++c;
        });
        counts[p] = c;
    }
    CollisionTable t;
    t.grid_ = g;
    t.mode_ = opt.mode;
    t.eta_ = params.eta;
    t.lambda_ = params.lambda;
    t.threshold_ = cut;
    t.max_weight_ = wmax;
    t.offsets_.assign(S + 1, 0);
    for (Index p = 0; p < S; ++p) t.offsets_[p + 1] = t.offsets_[p] + counts[p];
    const std::size_t total = t.offsets_[S];
    if (8 * total > opt.max_entries) {
        std::ostringstream os;
        os << "collision table needs up to " << 8 * total << " entries, above the cap max_entries = "
           << opt.max_entries;
        throw ResourceError(os.str());
    }
    t.k_.resize(total);
    t.l_.resize(total);
    t.m_.resize(total);
    t.p_.resize(total);
    t.weight_.resize(total);
#pragma omp parallel for schedule(dynamic)
    for (long long ps = 0; ps < S_signed; ++ps) {
        Index p = static_cast<Index>(ps);
        std::size_t e = t.offsets_[p];
        for_classes(p, [&](Index k, Index l, Index m) {
            double W = weight_of(k, l, m, p);
            if (W > cut) {
                t.k_[e] = k;
                t.l_[e] = l;
                t.m_[e] = m;
                t.p_[e] = p;
                t.weight_[e] = W;
                ++e;
            }
        });
    }
    return t;
}

double default_eta(const Dispersion& band)
{
    const MomentumGrid& g = band.grid;
    const Index S = static_cast<Index>(g.size());
    // Subsample output momenta on large grids; the spacing statistic is insensitive to it.
    const Index stride = std::max<Index>(1, static_cast<Index>(std::ceil(std::pow(static_cast<double>(S), 3) / 2e7)));
    std::vector<double> vals;
    for (Index p = 0; p < S; p += stride)
        for (Index k = 0; k < S; ++k)
            for (Index m = 0; m < S; ++m) {
                Index l = g.add(m, g.sub(p, k));
                double d = std::abs(energy_mismatch(band.eps, k, l, m, p));
                if (d > kExactShellTol) vals.push_back(d);
            }
    if (vals.size() < 2) throw DomainError("default_eta: energy shell has fewer than two distinct nonzero mismatches");
    std::sort(vals.begin(), vals.end());
    std::vector<double> distinct{vals.front()};
    for (double d : vals)
        if (d - distinct.back() > 1e-10) distinct.push_back(d);
    if (distinct.size() < 2) throw DomainError("default_eta: energy shell has fewer than two distinct nonzero mismatches");
    std::vector<double> gaps;
    for (std::size_t i = 1; i < distinct.size(); ++i) gaps.push_back(distinct[i] - distinct[i - 1]);
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    return 3.0 * gaps[gaps.size() / 2];
}

std::vector<double> collision_rhs(const CollisionTable& table, std::span<const double> w)
{
    std::vector<double> out(w.size());
    collision_rhs(table, w, out);
    return out;
}

void collision_rhs(const CollisionTable& table, std::span<const double> w, std::span<double> out)
{
    if (w.size() != table.grid().size() || out.size() != w.size())
        throw ContractViolation("collision_rhs: occupation does not live on the table's grid");
    kernels::rhs_parallel(table, w.data(), out.data());
}

std::vector<double> collision_rhs_direct(const Dispersion& band, const PairPotential& v,
                                         const ScalingParameters& params, ShellMode mode,
                                         std::span<const double> w)
{
    const MomentumGrid& g = band.grid;
    require_same_grid(g, v.grid, "collision_rhs_direct");
    if (w.size() != g.size()) throw ContractViolation("collision_rhs_direct: occupation size mismatch");
    const double S = static_cast<double>(g.size());
    if (S * S * S > 1e9) throw ResourceError("collision_rhs_direct: n^{3 nu} exceeds the 1e9 loop budget");
    const auto& eps = band.eps;
    std::vector<double> out(g.size(), 0.0);
    const double scale = 1.0 / (S * S);
    for (Index p = 0; p < g.size(); ++p) {
        double acc = 0.0;
        for (Index k = 0; k < g.size(); ++k)
            for (Index m = 0; m < g.size(); ++m) {
                Index l = g.add(g.sub(m, k), p);
                double M = matrix_element(v, k, l, m, p);
                double W = collision_weight(params.lambda, M, energy_mismatch(eps, k, l, m, p), mode, params.eta);
                double F = w[k] * w[l] * (1 - w[m]) * (1 - w[p]) - w[p] * w[m] * (1 - w[k]) * (1 - w[l]);
                acc += W * F;
            }
        out[p] = scale * acc;
    }
    return out;
}

}  // namespace fk
