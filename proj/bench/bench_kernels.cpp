#include "ddcl/kernels.hpp"
#include "ddcl/rng.hpp"

#include <benchmark/benchmark.h>

#include <cstdlib>

using namespace ddcl;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix A(r, c);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = rng.normal();
  return A;
}

struct Inputs {
  Matrix Z, P, W, D;
  explicit Inputs(const benchmark::State& state)
      : Z(random_matrix(state.range(0), state.range(2), 1)),
        P(random_matrix(state.range(1), state.range(2), 2)),
        W(random_matrix(state.range(0), state.range(1), 3)) {
    kernels::serial::sq_dists(Z, P, D);
  }
};

void set_counters(benchmark::State& state) {
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
  state.counters["threads"] = kernels::max_threads();
}

template <bool Parallel>
void BM_sq_dists(benchmark::State& state) {
  Inputs in(state);
  Matrix out;
  for (auto _ : state) {
    if constexpr (Parallel) kernels::parallel::sq_dists(in.Z, in.P, out);
    else kernels::serial::sq_dists(in.Z, in.P, out);
    benchmark::DoNotOptimize(out.data());
  }
  set_counters(state);
}

template <bool Parallel>
void BM_boltzmann(benchmark::State& state) {
  Inputs in(state);
  Matrix out;
  for (auto _ : state) {
    if constexpr (Parallel) kernels::parallel::boltzmann_rows(in.D, 0.7, out);
    else kernels::serial::boltzmann_rows(in.D, 0.7, out);
    benchmark::DoNotOptimize(out.data());
  }
  set_counters(state);
}

template <bool Parallel>
void BM_mix(benchmark::State& state) {
  Inputs in(state);
  Matrix Q, out;
  kernels::serial::boltzmann_rows(in.D, 0.7, Q);
  for (auto _ : state) {
    if constexpr (Parallel) kernels::parallel::mix_rows(Q, in.P, out);
    else kernels::serial::mix_rows(Q, in.P, out);
    benchmark::DoNotOptimize(out.data());
  }
  set_counters(state);
}

template <bool Parallel>
void BM_prototype_grad(benchmark::State& state) {
  Inputs in(state);
  Matrix out;
  for (auto _ : state) {
    if constexpr (Parallel) kernels::parallel::prototype_grad(in.Z, in.P, in.W, out);
    else kernels::serial::prototype_grad(in.Z, in.P, in.W, out);
    benchmark::DoNotOptimize(out.data());
  }
  set_counters(state);
}

template <bool Parallel>
void BM_embedding_grad(benchmark::State& state) {
  Inputs in(state);
  Matrix out;
  for (auto _ : state) {
    if constexpr (Parallel) kernels::parallel::embedding_grad(in.Z, in.P, in.W, out);
    else kernels::serial::embedding_grad(in.Z, in.P, in.W, out);
    benchmark::DoNotOptimize(out.data());
  }
  set_counters(state);
}

// {N, K, m}: debris-sized, ablation-sized, a VQ epoch and a hierarchy level-1 pass.
void shapes(benchmark::internal::Benchmark* b) {
  b->Args({1600, 4, 5})->Args({1000, 10, 32})->Args({4096, 64, 32})->Args({32000, 32, 128});
  b->Unit(benchmark::kMicrosecond);
}

}  // namespace

BENCHMARK(BM_sq_dists<false>)->Name("sq_dists/serial")->Apply(shapes);
BENCHMARK(BM_sq_dists<true>)->Name("sq_dists/parallel")->Apply(shapes);
BENCHMARK(BM_boltzmann<false>)->Name("boltzmann_rows/serial")->Apply(shapes);
BENCHMARK(BM_boltzmann<true>)->Name("boltzmann_rows/parallel")->Apply(shapes);
BENCHMARK(BM_mix<false>)->Name("mix_rows/serial")->Apply(shapes);
BENCHMARK(BM_mix<true>)->Name("mix_rows/parallel")->Apply(shapes);
BENCHMARK(BM_prototype_grad<false>)->Name("prototype_grad/serial")->Apply(shapes);
BENCHMARK(BM_prototype_grad<true>)->Name("prototype_grad/parallel")->Apply(shapes);
BENCHMARK(BM_embedding_grad<false>)->Name("embedding_grad/serial")->Apply(shapes);
BENCHMARK(BM_embedding_grad<true>)->Name("embedding_grad/parallel")->Apply(shapes);

int main(int argc, char** argv) {
  if (const char* t = std::getenv("DDCL_THREADS")) kernels::set_threads(std::atoi(t));
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
