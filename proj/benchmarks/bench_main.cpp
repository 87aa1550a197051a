#include <benchmark/benchmark.h>

// Local main instead of benchmark::benchmark_main: the distro's static
// benchmark_main archive carries LTO bytecode from an older compiler and
// fails to link, while the shared libbenchmark works fine.
BENCHMARK_MAIN();
