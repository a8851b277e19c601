// Benchmark: serial reference sweep kernel vs the OpenMP-parallel one.
// Also verifies the two kernels agree bit-for-bit.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sdlab/chaos.hpp"

using namespace sdlab;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool rows_identical(const std::vector<chaos::SweepRow>& a, const std::vector<chaos::SweepRow>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].value != b[i].value || a[i].diverged != b[i].diverged ||
            a[i].abs_D != b[i].abs_D)
            return false;
    }
    return true;
}

} // namespace

int main(int argc, char** argv) {
    int n_values = argc > 1 ? std::atoi(argv[1]) : 48;
    double horizon = argc > 2 ? std::atof(argv[2]) : 1500.0;

    dynamics::DuffingParams dp;
    dynamics::SuppressiveParams sp;
    std::vector<double> values;
    for (int i = 0; i < n_values; ++i)
        values.push_back(0.8 * static_cast<double>(i) / (n_values - 1));

    std::printf("sweep: %d amplitude values, horizon %.0f, h=0.01\n", n_values, horizon);
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: not enabled in this build\n");
#endif

    auto t0 = std::chrono::steady_clock::now();
    auto serial = chaos::parameter_sweep_serial(dp, sp, chaos::SweepParameter::A, values, 0.01,
                                                horizon);
    double t_serial = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    auto parallel = chaos::parameter_sweep(dp, sp, chaos::SweepParameter::A, values, 0.01, horizon);
    double t_parallel = seconds_since(t0);

    std::printf("serial:   %8.3f s\n", t_serial);
    std::printf("parallel: %8.3f s  (speedup %.2fx)\n", t_parallel, t_serial / t_parallel);

    if (!rows_identical(serial, parallel)) {
        std::printf("MISMATCH: serial and parallel kernels disagree\n");
        return 1;
    }
    std::printf("kernels agree bit-for-bit\n");
    return 0;
}
