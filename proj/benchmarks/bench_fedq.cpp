#include <benchmark/benchmark.h>

#include <random>

#include "fedq/einstein.hpp"
#include "fedq/exprlang.hpp"
#include "fedq/fedosov.hpp"

using namespace fedq;

namespace {

const std::vector<double> kBase{0.2, -0.3, 0.4, 0.25};

Jet random_jet(const ChartPtr& ch, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    Jet j = Jet::constant(ch, 0.0);
    for (std::size_t k = 0; k < ch->size(); ++k) j.set_coeff(k, cplx(u(rng), u(rng)));
    return j;
}

void BM_JetProduct(benchmark::State& state) {
    auto ch = Chart::make(2, kBase, int(state.range(0)));
    std::mt19937 rng(1);
    Jet a = random_jet(ch, rng), b = random_jet(ch, rng);
    for (auto _ : state) benchmark::DoNotOptimize(a * b);
}
BENCHMARK(BM_JetProduct)->DenseRange(4, 10, 2);

void BM_ParseEval(benchmark::State& state) {
    auto ch = Chart::make(2, kBase, 6);
    for (auto _ : state) benchmark::DoNotOptimize(eval_jet(parse("exp(x1*x2/3)*sqrt(1 + y1^2 + y2^2)"), ch));
}
BENCHMARK(BM_ParseEval);

void BM_WickProduct(benchmark::State& state) {
    auto ch = Chart::make(1, {0.2, 0.4}, 2);
    WeylCaps caps{3, 12, 1 << 20};
    Kernel K(ch, {{cplx(0, -1), 1.0}, {-1.0, cplx(0, -1)}});
    WeylForm a(ch, caps);
    for (int i = 0; i <= state.range(0); ++i)
        for (int j = 0; i + j <= state.range(0); ++j) {
            Mono m{};
            m[0] = std::uint8_t(i);
            m[1] = std::uint8_t(j);
            a.add(0, m, 0, Jet::constant(ch, 1.0 / (1 + i + j)));
        }
    for (auto _ : state) benchmark::DoNotOptimize(wick_product(a, a, K));
}
BENCHMARK(BM_WickProduct)->DenseRange(2, 6, 2);

void BM_Geometry(benchmark::State& state) {
    auto ch = Chart::make(2, kBase, 6);
    Jet L = eval_jet(parse("exp(2*x1)*(y1^2 + y2^2)/2"), ch);
    for (auto _ : state) {
        GeometryData geo = lagrange_geometry(L);
        benchmark::DoNotOptimize(full_dconnection(geo));
    }
}
BENCHMARK(BM_Geometry)->Unit(benchmark::kMillisecond);

void BM_FedosovLine(benchmark::State& state) {
    auto ch = Chart::make(1, {0.2, 0.4}, 10);
    auto geo = std::make_shared<const GeometryData>(lagrange_geometry(eval_jet(parse("exp(x1/2)*y1^2/2 + y1^4/12"), ch)));
    auto conn = std::make_shared<const DConnectionData>(full_dconnection(*geo));
    FedosovOptions opt;
    opt.K_max = int(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fedosov_recursion(geo, conn, opt));
}
BENCHMARK(BM_FedosovLine)->DenseRange(4, 6, 1)->Unit(benchmark::kMillisecond);

void BM_EinsteinResidual(benchmark::State& state) {
    auto ch = einstein_chart({0.1, -0.2, 0.3, 0.5}, 5);
    GeneratorInput in;
    in.phi = eval_jet(parse("t + x1*t/2 + x2^2"), ch);
    in.lambda_v = Jet::constant(ch, -1.0);
    in.lambda_h = Jet::constant(ch, 0.5);
    AnsatzData d = generate_solution(in);
    for (auto _ : state) benchmark::DoNotOptimize(residual_full(d));
}
BENCHMARK(BM_EinsteinResidual)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
