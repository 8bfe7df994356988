#include "fermikinetics/fluctuations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "fermikinetics/dft.hpp"
#include "fermikinetics/errors.hpp"

namespace fk {

namespace {

void require_block(const MomentumGrid& g, int K, const char* where)
{
    if (K < 1 || 2 * K > g.n())
        throw ConfigError(std::string(where) + ": block size K=" + std::to_string(K) +
                          " violates 1 <= K and 2K <= n (n=" + std::to_string(g.n()) + ")");
}

double fejer_sum(const MomentumGrid& g, const std::vector<cplx>& C, int K)
{
    double acc = 0.0;
    for (Index d = 0; d < g.size(); ++d) {
        double fw = fejer_weight(g, d, K);
        if (fw != 0.0) acc += fw * C[d].real();
    }
    return acc;
}

double window_sum(const MomentumGrid& g, const std::vector<cplx>& C, int K)
{
    double acc = 0.0;
    for (Index d = 0; d < g.size(); ++d)
        if (fejer_weight(g, d, K) != 0.0) acc += C[d].real();
    return acc;
}

struct LineFit {
    double slope = 0.0, intercept = 0.0, rms = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LineFit f;
    const double den = n * sxx - sx * sx;
    f.slope = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
    f.intercept = (sy - f.slope * sx) / n;
    double r = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double e = y[i] - (f.intercept + f.slope * x[i]);
        r += e * e;
    }
    f.rms = std::sqrt(r / n);
    return f;
}

double F_factor(const std::vector<double>& w, Index k, Index l, Index m, Index p)
{
    return w[k] * w[l] * (1.0 - w[m]) * (1.0 - w[p]) - w[m] * w[p] * (1.0 - w[k]) * (1.0 - w[l]);
}

}  // namespace

double block_variance(const QuasifreeState& s, const QuadraticObservable& A, int K)
{
    require_block(s.grid, K, "block_variance");
    return fejer_sum(s.grid, correlation_profile(s, A, A), K);
}

const char* to_string(VarianceClass c)
{
    switch (c) {
    case VarianceClass::convergent: return "convergent";
    case VarianceClass::marginal: return "marginal";
    case VarianceClass::divergent: return "divergent";
    }
    return "?";
}

std::vector<int> default_block_sizes(const MomentumGrid& grid)
{
    std::vector<int> K;
    for (int k = 1; 2 * k <= grid.n(); k *= 2) K.push_back(k);
    if (K.size() < 4) {
        K.clear();
        for (int k = 1; 2 * k <= grid.n(); ++k) K.push_back(k);
    }
    if (K.size() < 4) throw ConfigError("torus too small for a block-size scan (need n >= 8)");
    return K;
}

VarianceLimit variance_limit(const QuasifreeState& s, const QuadraticObservable& A, const std::vector<int>& K_list)
{
    if (K_list.size() < 4) throw ConfigError("variance_limit: need at least 4 block sizes");
    for (std::size_t i = 0; i < K_list.size(); ++i) {
        require_block(s.grid, K_list[i], "variance_limit");
        if (i > 0 && K_list[i] <= K_list[i - 1]) throw ConfigError("variance_limit: block sizes must increase");
    }
    const auto C = correlation_profile(s, A, A);
    VarianceLimit r;
    r.K = K_list;
    for (int K : K_list) {
        r.V.push_back(fejer_sum(s.grid, C, K));
        r.window.push_back(window_sum(s.grid, C, K));
    }
    const double scale = std::max(1.0, std::abs(r.window.back()));
    if (*std::max_element(r.V.begin(), r.V.end()) <= 1e-300) {
        r.classification = VarianceClass::convergent;
        r.estimate = 0.0;
        return r;
    }
    {
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < r.K.size(); ++i)
            if (r.V[i] > 0) {
                lx.push_back(std::log(static_cast<double>(r.K[i])));
                ly.push_back(std::log(r.V[i]));
            }
        r.loglog_slope = lx.size() >= 2 ? fit_line(lx, ly).slope : 0.0;
    }
    if (r.loglog_slope > 0.1) {
        r.classification = VarianceClass::divergent;
        r.estimate = std::numeric_limits<double>::quiet_NaN();
        return r;
    }

    // Increments of the window sums: geometric (analytic w) versus algebraic (singular w).
    const double floor = 1e-13 * scale;
    std::vector<double> kx, lk, ld;
    for (std::size_t i = 1; i < r.K.size(); ++i) {
        double d = std::abs(r.window[i] - r.window[i - 1]);
        if (d > floor) {
            kx.push_back(static_cast<double>(r.K[i]));
            lk.push_back(std::log(static_cast<double>(r.K[i])));
            ld.push_back(std::log(d));
        }
    }
    const std::size_t m = r.K.size();
    const double last_inc = r.window[m - 1] - r.window[m - 2];
    if (kx.size() >= 2) {
        LineFit geo = fit_line(kx, ld), pw = fit_line(lk, ld);
        r.geometric_ratio = std::exp(geo.slope);
        r.power_exponent = -pw.slope;
        if (std::abs(last_inc) <= floor) {
            r.classification = VarianceClass::convergent;
        } else if (kx.size() >= 3 && r.geometric_ratio < 1.0 && geo.rms < pw.rms) {
            r.classification = VarianceClass::convergent;
        } else {
            r.classification = VarianceClass::marginal;
        }
    } else {
        r.classification = VarianceClass::convergent;
    }
    if (r.classification == VarianceClass::convergent) {
        double tail = 0.0;
        if (std::abs(last_inc) > floor && r.geometric_ratio < 1.0) {
            double q = std::pow(r.geometric_ratio, static_cast<double>(r.K[m - 1] - r.K[m - 2]));
            tail = last_inc * q / (1.0 - q);
        }
        r.estimate = r.window.back() + tail;
    } else {
        r.estimate = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

double weyl_char(const QuasifreeState& s, const QuadraticObservable& A)
{
    VarianceLimit lim = variance_limit(s, A, default_block_sizes(s.grid));
    if (lim.classification != VarianceClass::convergent)
        throw DomainError(std::string("fluctuation algebra does not exist for A (block variances are ") +
                          to_string(lim.classification) + ")");
    return std::exp(-0.5 * covariance(s, A, A));
}

cplx ccr_phase(const QuasifreeState& s, const QuadraticObservable& A, const QuadraticObservable& B)
{
    return std::polar(1.0, symplectic(s, A, B));
}

cplx ccr_phase(const QuasifreeState& s, const QuadraticObservable& A, const QuadraticObservable& B, int K)
{
    return std::polar(1.0, block_symplectic(s, A, B, K));
}

cplx time_integral(double omega, double t)
{
    const double x = omega * t;
    if (x == 0.0) return t;
    const double h = std::sin(0.5 * x);
    return t * cplx(std::sin(x) / x, 2.0 * h * h / x);
}

PairObservable make_pair(const QuadraticObservable& A, const QuadraticObservable& B, Coords d)
{
    require_same_grid(A.grid(), B.grid(), "make_pair");
    return PairObservable{A.grid(), A.kernel(), translate(B, d).kernel()};
}

PairObservable total_number_pair(const MomentumGrid& grid)
{
    const std::size_t S = grid.size();
    std::vector<cplx> X(S * S, 0.0);
    for (std::size_t q = 0; q < S; ++q) X[q * S + q] = 1.0;
    return PairObservable{grid, X, X};
}

DriftTerms pair_commutator_integral(const QuasifreeState& s, const Dispersion& band, const PairPotential& v,
                                    const PairObservable& O, double t)
{
    const MomentumGrid& g = s.grid;
    require_same_grid(g, band.grid, "pair_commutator_integral");
    require_same_grid(g, v.grid, "pair_commutator_integral");
    require_same_grid(g, O.grid, "pair_commutator_integral");
    const std::size_t S = g.size();
    const auto& w = s.w();
    DriftTerms out;
    for (Index k = 0; k < S; ++k)
        for (Index l = 0; l < S; ++l) {
            const Index kl = g.add(k, l);
            for (Index m = 0; m < S; ++m) {
                const Index p = g.sub(kl, m);
                const double M = v.v[g.sub(k, p)] - v.v[g.sub(k, m)];
                if (M == 0.0) continue;
                const double F = F_factor(w, k, l, m, p);
                if (F == 0.0) continue;
                const cplx XY = 0.5 * (O.X[m * S + k] * O.Y[p * S + l] + O.Y[m * S + k] * O.X[p * S + l]);
                const cplx G = -4.0 * M * F * XY;
                const double dE = energy_mismatch(band.eps, k, l, m, p);
                out.value += G * time_integral(dE, t);
                if (std::abs(dE) <= kExactShellTol) {
                    out.stationary += G;
                    out.stationary_abs += std::abs(G);
                }
            }
        }
    return out;
}

cplx quadratic_commutator(const QuasifreeState& s, const PairPotential& v, const std::vector<cplx>& X)
{
    const MomentumGrid& g = s.grid;
    require_same_grid(g, v.grid, "quadratic_commutator");
    const std::size_t S = g.size();
    if (X.size() != S * S) throw ContractViolation("quadratic_commutator: kernel size mismatch");
    const auto& w = s.w();
    auto x = [&](Index q, Index r) { return X[q * S + r]; };
    // [V, a*_q a_r] expanded with <a*_a a*_b a_c a_d> = w_a w_b (d_ad d_bc - d_ac d_bd).
    cplx t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
    for (Index k = 0; k < S; ++k)
        for (Index l = 0; l < S; ++l) {
            const Index kl = g.add(k, l);
            for (Index m = 0; m < S; ++m) {
                const Index p = g.sub(kl, m);
                const double M = v.v[g.sub(k, p)] - v.v[g.sub(k, m)];
                if (M == 0.0) continue;
                const double wkwl = w[k] * w[l];
                if (l == m) t1 += M * x(p, k) * wkwl;
                if (k == m) t1 -= M * x(p, l) * wkwl;
                if (k == p) t2 += M * x(m, l) * wkwl;
                if (l == p) t2 -= M * x(m, k) * wkwl;
                if (k == p) t3 -= M * x(m, l) * w[k] * w[m];
                if (k == m) t3 += M * x(p, l) * w[k] * w[p];
                if (l == m) t4 -= M * x(p, k) * w[p] * w[l];
                if (l == p) t4 += M * x(m, k) * w[m] * w[l];
            }
        }
    return t1 + t2 + t3 + t4;
}

cplx weyl_drift(const QuasifreeState& s, const Dispersion& band, const PairPotential& v, double lambda,
                const PairObservable& O, double t)
{
    return lambda * pair_commutator_integral(s, band, v, O, t).value;
}

cplx weyl_drift(const QuasifreeState& s, const Dispersion& band, const PairPotential& v, double lambda,
                const QuadraticObservable& A, double t)
{
    require_same_grid(s.grid, band.grid, "weyl_drift");
    // Every surviving quadratic contraction sits at dE = 0, so the time integral is t.
    return lambda * t * quadratic_commutator(s, v, A.kernel());
}

FirstOrderProbe first_order_probe(const QuasifreeState& s, const Dispersion& band, const PairPotential& v,
                                  double lambda, const PairObservable& O, double N)
{
    if (!(N > 0)) throw ConfigError("first_order_probe: N must be positive");
    DriftTerms d = pair_commutator_integral(s, band, v, O, N);
    FirstOrderProbe r;
    r.value = lambda / std::sqrt(N) * d.value;
    r.stationary = d.stationary;
    r.stationary_abs = d.stationary_abs;
    return r;
}

std::vector<double> correction_profile(const QuasifreeState& s, const Dispersion& band, const PairPotential& v,
                                       double lambda, const QuadraticObservable& A, double N)
{
    const MomentumGrid& g = s.grid;
    require_same_grid(g, band.grid, "correction_profile");
    require_same_grid(g, v.grid, "correction_profile");
    require_same_grid(g, A.grid(), "correction_profile");
    if (!(N > 0)) throw ConfigError("scaling_correction: N must be positive");
    const std::size_t S = g.size();
    const double Sd = static_cast<double>(S);
    if (Sd * Sd * Sd > 2e10) throw ResourceError("scaling_correction: n^{3 nu} exceeds the 2e10 summation budget");
    std::vector<double> P(S, 0.0);
    if (lambda == 0.0) return P;

    const auto psi = A.symbol();
    const auto& w = s.w();
    const auto& eps = band.eps;
    LatticeDft dft(g);
    // Fixed chunks of l, summed in chunk order: thread-count independent.
    const std::size_t nchunks = std::min<std::size_t>(64, S);
    std::vector<double> buf(nchunks * S, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (long long c = 0; c < static_cast<long long>(nchunks); ++c) {
        double* acc = buf.data() + static_cast<std::size_t>(c) * S;
        std::vector<cplx> a(S), psi_d(S);
        for (std::size_t l = static_cast<std::size_t>(c); l < S; l += nchunks) {
            for (Index m = 0; m < S; ++m) {
                const double rho = w[l] * (1.0 - w[m]);
                if (rho == 0.0) continue;
                const Index lm = g.sub(static_cast<Index>(l), m);
                bool any = false;
                for (Index k = 0; k < S; ++k) {
                    const Index p = g.add(k, lm);
                    const double M = v.v[g.sub(k, p)] - v.v[g.sub(k, m)];
                    const double u = M * psi[k];
                    a[k] = u == 0.0 ? cplx(0.0) : u * time_integral(eps[l] - eps[m] + eps[k], N);
                    any = any || u != 0.0;
                }
                if (!any) continue;
                dft.to_sites(a.data(), psi_d.data());
                for (std::size_t d = 0; d < S; ++d) acc[d] += rho * std::norm(psi_d[d]);
            }
        }
    }
    // |Psi|^2 carries n^{-2 nu}, the (l, m) measure another n^{-2 nu}.
    const double norm = lambda * lambda / N / (Sd * Sd * Sd * Sd);
    for (std::size_t d = 0; d < S; ++d) {
        double t = 0.0;
        for (std::size_t c = 0; c < nchunks; ++c) t += buf[c * S + d];
        P[d] = norm * t;
    }
    return P;
}

double scaling_correction(const QuasifreeState& s, const Dispersion& band, const PairPotential& v,
                          double lambda, const QuadraticObservable& A, int K, double N)
{
    require_block(s.grid, K, "scaling_correction");
    auto P = correction_profile(s, band, v, lambda, A, N);
    double acc = 0.0;
    for (Index d = 0; d < s.grid.size(); ++d) acc += fejer_weight(s.grid, d, K) * P[d];
    return acc;
}

namespace {
std::vector<double> finite_time_rate(const QuasifreeState& s, const Dispersion& band, const PairPotential& v, double N)
{
    const MomentumGrid& g = s.grid;
    const std::size_t S = g.size();
    const auto& w = s.w();
    std::vector<double> R(S, 0.0);
#pragma omp parallel for schedule(static)
    for (long long ps = 0; ps < static_cast<long long>(S); ++ps) {
        const Index p = static_cast<Index>(ps);
        double acc = 0.0;
        for (Index k = 0; k < S; ++k) {
            const Index pk = g.sub(p, k);
            for (Index m = 0; m < S; ++m) {
                const Index l = g.add(m, pk);
                const double M = v.v[g.sub(k, p)] - v.v[g.sub(k, m)];
                if (M == 0.0) continue;
                acc += M * M * std::norm(time_integral(energy_mismatch(band.eps, k, l, m, p), N)) *
                       F_factor(w, k, l, m, p);
            }
        }
        R[p] = acc / (static_cast<double>(S) * static_cast<double>(S));
    }
    return R;
}

double mean_from_rate(const QuasifreeState& s, const PairPotential& v, double lambda, const QuadraticObservable& A,
                      const std::vector<double>& R, double N)
{
    const auto psi = A.symbol();
    double acc = 0.0;
    for (std::size_t p = 0; p < psi.size(); ++p) acc += psi[p] * R[p];
    double second = lambda * lambda / N * acc * s.grid.cell_weight();
    // i lambda N^{-1/2} int_0^N omega([V(t), A]) dt, every term at dE = 0
    cplx first = cplx(0.0, 1.0) * lambda / std::sqrt(N) * N * quadratic_commutator(s, v, A.kernel());
    return second + first.real();
}
}  // namespace

double mean_correction(const QuasifreeState& s, const Dispersion& band, const PairPotential& v,
                       double lambda, const QuadraticObservable& A, double N)
{
    require_same_grid(s.grid, band.grid, "mean_correction");
    require_same_grid(s.grid, v.grid, "mean_correction");
    if (!(N > 0)) throw ConfigError("mean_correction: N must be positive");
    return mean_from_rate(s, v, lambda, A, finite_time_rate(s, band, v, N), N);
}

const char* to_string(Regime r)
{
    switch (r) {
    case Regime::regular: return "regular";
    case Regime::finite_shifted: return "finite-shifted";
    case Regime::divergent: return "divergent";
    }
    return "?";
}

void assign_labels(RegimeReport& r)
{
    if (r.moment == Moment::mean) {
        for (auto& c : r.cells) c.label = Regime::regular;
        return;
    }
    // value of the neighbouring smaller (else larger) K at the same N
    std::map<double, std::map<int, double>> byN;
    for (const auto& c : r.cells) byN[c.N][c.K] = c.value;
    for (auto& c : r.cells) {
        const auto& row = byN[c.N];
        bool increasing = false;
        auto it = row.find(c.K);
        if (it != row.begin()) {
            increasing = c.value > std::prev(it)->second;
        } else if (std::next(it) != row.end()) {
            increasing = std::next(it)->second > c.value;
        }
        if (c.value < r.theta_r)
            c.label = Regime::regular;
        else if (c.value > r.theta_d && increasing)
            c.label = Regime::divergent;
        else
            c.label = Regime::finite_shifted;
    }
}

RegimeReport regime_scan(const QuasifreeState& s, const Dispersion& band, const PairPotential& v, double lambda,
                         const QuadraticObservable& A, const std::vector<int>& K_values,
                         const std::vector<double>& N_values, Moment moment, const RegimeThresholds& th)
{
    if (K_values.empty() || N_values.empty()) throw ConfigError("regime_scan: K and N lists must be nonempty");
    for (int K : K_values) require_block(s.grid, K, "regime_scan");
    RegimeReport r;
    r.moment = moment;
    r.lambda = lambda;
    r.v_inf = covariance(s, A, A);
    r.theta_r = th.regular_fraction * r.v_inf;
    r.theta_d = th.divergent_fraction * r.v_inf;

    if (moment == Moment::mean) {
        for (double N : N_values) {
            if (!(N > 0)) throw ConfigError("regime_scan: N must be positive");
            auto R = finite_time_rate(s, band, v, N);
            const double mu0 = mean_from_rate(s, v, lambda, A, R, N);
            for (int K : K_values) {
                // block sum over x in {0..K-1}^nu of mu_N(alpha_x A)
                double acc = 0.0;
                const double Kn = std::pow(static_cast<double>(K), s.grid.dim());
                for (Index x = 0; x < s.grid.size(); ++x) {
                    Coords c = s.grid.coords(x);
                    if (c[0] < K && (s.grid.dim() == 1 || c[1] < K))
                        acc += mean_from_rate(s, v, lambda, translate(A, c), R, N);
                }
                const double delta = acc / std::sqrt(Kn) - std::sqrt(Kn) * mu0;
                r.cells.push_back({K, N, delta, Regime::regular});
                r.max_abs_mean = std::max(r.max_abs_mean, std::abs(delta));
            }
        }
        return r;
    }

    std::set<double> ratios;
    for (int K : K_values)
        for (double N : N_values) ratios.insert(std::round(1e9 * K / N) / 1e9);
    if (ratios.size() < 3) throw ConfigError("regime_scan: need at least 3 distinct K/N ratios for the fit");

    for (double N : N_values) {
        auto P = correction_profile(s, band, v, lambda, A, N);
        for (int K : K_values) {
            double acc = 0.0;
            for (Index d = 0; d < s.grid.size(); ++d) acc += fejer_weight(s.grid, d, K) * P[d];
            r.cells.push_back({K, N, acc, Regime::regular});
        }
    }
    std::vector<double> lx, ly;
    for (const auto& c : r.cells)
        if (c.value > 0) {
            lx.push_back(std::log(c.K / c.N));
            ly.push_back(std::log(c.value));
        }
    if (lx.size() >= 2) {
        LineFit f = fit_line(lx, ly);
        r.fit_exponent = f.slope;
        r.fit_intercept = f.intercept;
    } else {
        r.fit_exponent = std::numeric_limits<double>::quiet_NaN();
        r.fit_intercept = std::numeric_limits<double>::quiet_NaN();
    }
    assign_labels(r);
    return r;
}

}  // namespace fk
