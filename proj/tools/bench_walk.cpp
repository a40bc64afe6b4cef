// Benchmark of the walk kernel: serial scatter reference vs the OpenMP
// gather form, on SL2 quotients of growing size.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "superapprox/spectral.hpp"

using namespace superapprox;

namespace {

double time_apply(const Quotient& g, int reps, bool parallel) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unif(-1, 1);
    std::vector<double> v(g.order()), w(g.order());
    for (double& x : v) x = unif(rng);
    auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) {
        if (parallel)
            apply_walk(g, v, w);
        else
            apply_walk_serial(g, v, w);
        v.swap(w);
    }
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    int reps = argc > 1 ? std::atoi(argv[1]) : 50;
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (no OpenMP)\n");
#endif
    std::printf("%8s %10s %12s %12s %8s\n", "p", "order", "serial_s", "parallel_s", "speedup");
    GeneratorSet gens = sl2_elementary_generators();
    for (const char* mod : {"31", "53", "101"}) {
        Quotient g = enumerate_quotient(gens, Modulus::parse(mod), 4'000'000);
        double ts = time_apply(g, reps, false);
        double tp = time_apply(g, reps, true);
        std::printf("%8s %10u %12.4f %12.4f %8.2f\n", mod, g.order(), ts, tp, ts / tp);
    }
    return 0;
}
