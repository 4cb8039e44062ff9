// Refit and selection cost of the two regressors as the data set grows.

#include <benchmark/benchmark.h>

#include <random>

#include "solsel/boosting.hpp"
#include "solsel/gp.hpp"
#include "solsel/harness.hpp"
#include "solsel/selector.hpp"

namespace {

struct Data {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
};

Data make_data(Eigen::Index n, Eigen::Index dim, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Data d{Eigen::MatrixXd(n, dim), Eigen::VectorXd(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < dim; ++j) {
            d.X(i, j) = normal(rng);
            s += std::sin(d.X(i, j));
        }
        d.y(i) = s + 0.1 * normal(rng);
    }
    return d;
}

void BM_GpFit(benchmark::State& state) {
    const auto d = make_data(state.range(0), 6, 1);
    for (auto _ : state) benchmark::DoNotOptimize(solsel::GPModel::fit(d.X, d.y));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GpFit)->RangeMultiplier(2)->Range(50, 400)->Unit(benchmark::kMillisecond)->Complexity();

void BM_BoostingFit(benchmark::State& state) {
    const auto d = make_data(state.range(0), 6, 1);
    for (auto _ : state) benchmark::DoNotOptimize(solsel::BoostingModel::fit(d.X, d.y));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BoostingFit)->RangeMultiplier(2)->Range(50, 400)->Unit(benchmark::kMillisecond)->Complexity();

void BM_GpPredict(benchmark::State& state) {
    const auto d = make_data(state.range(0), 6, 1);
    const auto model = solsel::GPModel::fit(d.X, d.y);
    std::vector<double> q(6, 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(model.predict(q));
}
BENCHMARK(BM_GpPredict)->RangeMultiplier(2)->Range(50, 400);

void BM_ScenarioAEpisode(benchmark::State& state) {
    const auto spec = solsel::ScenarioSpec::convex_default();
    solsel::SelectorPolicy policy;
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(solsel::run_episode(spec, policy, seed++));
}
BENCHMARK(BM_ScenarioAEpisode)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
