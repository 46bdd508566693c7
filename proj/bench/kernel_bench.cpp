#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "advlin/kernels.hpp"
#include "advlin/rng.hpp"

// Serial reference vs OpenMP variants of the solver inner-loop kernels.
// Run manually: build/bench/kernel_bench [--benchmark_filter=...]

namespace {

Eigen::MatrixXd make_matrix(Eigen::Index n, Eigen::Index p) {
  advlin::rng r(7, "bench.matrix", 0);
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = r.normal();
  return X;
}

Eigen::VectorXd make_vector(Eigen::Index m) {
  advlin::rng r(7, "bench.vector", 0);
  Eigen::VectorXd v(m);
  for (Eigen::Index i = 0; i < m; ++i) v(i) = r.normal();
  return v;
}

void bm_matvec_serial(benchmark::State& state) {
  const Eigen::Index n = state.range(0), p = state.range(1);
  const Eigen::MatrixXd X = make_matrix(n, p);
  const Eigen::VectorXd v = make_vector(p);
  Eigen::VectorXd out(n);
  for (auto _ : state) {
    advlin::kernels::matvec_serial(X, v, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n * p);
}

void bm_matvec_parallel(benchmark::State& state) {
  const Eigen::Index n = state.range(0), p = state.range(1);
  const Eigen::MatrixXd X = make_matrix(n, p);
  const Eigen::VectorXd v = make_vector(p);
  Eigen::VectorXd out(n);
  for (auto _ : state) {
    advlin::kernels::matvec_parallel(X, v, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n * p);
}

void bm_matvec_t_serial(benchmark::State& state) {
  const Eigen::Index n = state.range(0), p = state.range(1);
  const Eigen::MatrixXd X = make_matrix(n, p);
  const Eigen::VectorXd u = make_vector(n);
  Eigen::VectorXd out(p);
  for (auto _ : state) {
    advlin::kernels::matvec_t_serial(X, u, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n * p);
}

void bm_matvec_t_parallel(benchmark::State& state) {
  const Eigen::Index n = state.range(0), p = state.range(1);
  const Eigen::MatrixXd X = make_matrix(n, p);
  const Eigen::VectorXd u = make_vector(n);
  Eigen::VectorXd out(p);
  for (auto _ : state) {
    advlin::kernels::matvec_t_parallel(X, u, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n * p);
}

void bm_max_abs_serial(benchmark::State& state) {
  const Eigen::VectorXd v = make_vector(state.range(0));
  for (auto _ : state) {
    double m = advlin::kernels::max_abs_serial(v);
    benchmark::DoNotOptimize(m);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_max_abs_parallel(benchmark::State& state) {
  const Eigen::VectorXd v = make_vector(state.range(0));
  for (auto _ : state) {
    double m = advlin::kernels::max_abs_parallel(v);
    benchmark::DoNotOptimize(m);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void shapes(benchmark::internal::Benchmark* b) {
  b->Args({60, 200});      // tall-thin regime used by the experiments
  b->Args({256, 256});
  b->Args({1024, 1024});
  b->Args({200, 4096});
}

BENCHMARK(bm_matvec_serial)->Apply(shapes);
BENCHMARK(bm_matvec_parallel)->Apply(shapes);
BENCHMARK(bm_matvec_t_serial)->Apply(shapes);
BENCHMARK(bm_matvec_t_parallel)->Apply(shapes);
BENCHMARK(bm_max_abs_serial)->Arg(1 << 10)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(bm_max_abs_parallel)->Arg(1 << 10)->Arg(1 << 16)->Arg(1 << 20);

}  // namespace

BENCHMARK_MAIN();
