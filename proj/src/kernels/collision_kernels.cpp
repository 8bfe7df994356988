#include <algorithm>
#include <vector>

#include "fermikinetics/collision.hpp"

namespace fk::kernels {

namespace {
// Scatter the classes [begin, end) into acc (not zeroed here).
inline void scatter(const CollisionTable& t, const double* w, std::size_t begin, std::size_t end, double* acc)
{
    const Index* K = t.k().data();
    const Index* L = t.l().data();
    const Index* M = t.m().data();
    const Index* P = t.p().data();
    const double* W = t.weights().data();
    for (std::size_t c = begin; c < end; ++c) {
        const Index k = K[c], l = L[c], m = M[c], p = P[c];
        const double wk = w[k], wl = w[l], wm = w[m], wp = w[p];
        const double gain = wk * wl * (1.0 - wm) * (1.0 - wp);
        const double loss = (1.0 - wk) * (1.0 - wl) * wm * wp;
        const double G = W[c] * (gain - loss);
        acc[p] += G;
        acc[m] += G;
        acc[k] -= G;
        acc[l] -= G;
    }
}

// Two members of the class end in each of p, m, k, l.
double scale_of(const CollisionTable& t)
{
    const double S = static_cast<double>(t.grid().size());
    return 2.0 / (S * S);
}
}  // namespace

void rhs_serial(const CollisionTable& table, const double* w, double* out)
{
    const std::size_t S = table.grid().size();
    std::fill(out, out + S, 0.0);
    scatter(table, w, 0, table.class_count(), out);
    const double scale = scale_of(table);
    for (std::size_t p = 0; p < S; ++p) out[p] *= scale;
}

void rhs_parallel(const CollisionTable& table, const double* w, double* out)
{
    const std::size_t S = table.grid().size();
    const std::size_t C = table.class_count();
    const std::size_t nblocks = std::max<std::size_t>(1, (C + kClassBlock - 1) / kClassBlock);
    std::vector<double> buf(nblocks * S, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (long long b = 0; b < static_cast<long long>(nblocks); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kClassBlock;
        scatter(table, w, lo, std::min(C, lo + kClassBlock), buf.data() + static_cast<std::size_t>(b) * S);
    }
    const double scale = scale_of(table);
    for (std::size_t p = 0; p < S; ++p) {
        double s = 0.0;
        for (std::size_t b = 0; b < nblocks; ++b) s += buf[b * S + p];
        out[p] = scale * s;
    }
}

}  // namespace fk::kernels
