#pragma once

#include <random>

#include "fedq/exprlang.hpp"
#include "fedq/jets.hpp"

namespace fedq::testing {

inline Jet random_jet(const ChartPtr& chart, std::mt19937& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Jet j = Jet::constant(chart, 0.0);
    for (std::size_t k = 0; k < chart->size(); ++k) j.set_coeff(k, cplx(u(rng), u(rng)));
    return j;
}

inline Jet jet_of(const std::string& text, const ChartPtr& chart) { return eval_jet(parse(text), chart); }

inline std::size_t idx(const ChartPtr& chart, std::initializer_list<int> m) {
    Mono mono{};
    int a = 0;
    for (int v : m) mono[a++] = static_cast<std::uint8_t>(v);
    return chart->index(mono);
}

}  // namespace fedq::testing
