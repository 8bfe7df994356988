// Collision RHS timing: serial reference vs block-parallel kernel.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "fermikinetics/collision.hpp"

using namespace fk;

template <class F>
double time_per_call(F&& f, int reps)
{
    f();
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

int main(int argc, char** argv)
{
    int n = argc > 1 ? std::atoi(argv[1]) : 16;
    int reps = argc > 2 ? std::atoi(argv[2]) : 50;
    auto grid = build_grid(2, n);
    auto band = nearest_neighbor_band(grid);
    auto v = cosine_potential(grid, {0.0, 1.0});

    auto t0 = std::chrono::steady_clock::now();
    auto table = build_table(band, v, ScalingParameters{});
    double build = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("grid %dx%d: %zu classes (%zu logical entries), build %.3f s\n", n, n, table.class_count(),
                table.logical_size(), build);

    auto w = random_occupation(grid, 0.05, 0.95, 20241017).w;
    std::vector<double> a(grid.size()), b(grid.size()), c(grid.size());
    double ts = time_per_call([&] { kernels::rhs_serial(table, w.data(), a.data()); }, reps);
    std::printf("serial          %8.3f ms\n", 1e3 * ts);

    int maxt = omp_get_max_threads();
    omp_set_num_threads(1);
    double t1 = time_per_call([&] { kernels::rhs_parallel(table, w.data(), b.data()); }, reps);
    std::printf("parallel x1     %8.3f ms\n", 1e3 * t1);
    omp_set_num_threads(maxt);
    double tp = time_per_call([&] { kernels::rhs_parallel(table, w.data(), c.data()); }, reps);
    std::printf("parallel x%-4d  %8.3f ms  (speedup vs serial %.2f)\n", maxt, 1e3 * tp, ts / tp);

    bool identical = std::memcmp(b.data(), c.data(), b.size() * sizeof(double)) == 0;
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - c[i]));
    std::printf("thread-count bit identity: %s; max |serial - parallel| = %.3e\n", identical ? "yes" : "NO", diff);
    return identical ? 0 : 1;
}
