// The packaged benchmark_main archive carries LTO bytecode from another
// compiler release, so the entry point is built here instead.
#include <benchmark/benchmark.h>

BENCHMARK_MAIN();
