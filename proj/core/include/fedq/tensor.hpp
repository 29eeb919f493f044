#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <vector>

#include "fedq/jets.hpp"

namespace fedq {

// Dense array of jets with up to four indices.
class JetTensor {
public:
    JetTensor() = default;
    JetTensor(const ChartPtr& chart, std::vector<int> dims) : dims_(std::move(dims)) {
        std::size_t n = 1;
        for (int d : dims_) n *= static_cast<std::size_t>(d);
        data_.assign(n, Jet(chart));
    }

    const std::vector<int>& dims() const { return dims_; }
    int rank() const { return static_cast<int>(dims_.size()); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    Jet& operator()(int i) { return data_[i]; }
    Jet& operator()(int i, int j) { return data_[std::size_t(i) * dims_[1] + j]; }
    Jet& operator()(int i, int j, int k) { return data_[(std::size_t(i) * dims_[1] + j) * dims_[2] + k]; }
    Jet& operator()(int i, int j, int k, int l) {
        return data_[((std::size_t(i) * dims_[1] + j) * dims_[2] + k) * dims_[3] + l];
    }
    const Jet& operator()(int i) const { return data_[i]; }
    const Jet& operator()(int i, int j) const { return data_[std::size_t(i) * dims_[1] + j]; }
    const Jet& operator()(int i, int j, int k) const {
        return data_[(std::size_t(i) * dims_[1] + j) * dims_[2] + k];
    }
    const Jet& operator()(int i, int j, int k, int l) const {
        return data_[((std::size_t(i) * dims_[1] + j) * dims_[2] + k) * dims_[3] + l];
    }

    std::vector<Jet>& flat() { return data_; }
    const std::vector<Jet>& flat() const { return data_; }

    // max abs over reliable coefficients of all entries
    double norm() const {
        double m = 0;
        for (auto& j : data_) m = std::max(m, j.norm());
        return m;
    }
    double norm_at_base() const {
        double m = 0;
        for (auto& j : data_) m = std::max(m, std::abs(j.value()));
        return m;
    }

private:
    std::vector<int> dims_;
    std::vector<Jet> data_;
};

// max |a - b| over reliable coefficients
inline double jet_distance(const Jet& a, const Jet& b) {
    int r = std::min(a.reliable(), b.reliable());
    std::size_t lim = a.chart()->size_upto(r);
    double m = 0;
    for (std::size_t k = 0; k < lim; ++k) m = std::max(m, std::abs(a.coeff(k) - b.coeff(k)));
    return m;
}

inline double tensor_distance(const JetTensor& a, const JetTensor& b) {
    double m = 0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, jet_distance(a.flat()[k], b.flat()[k]));
    return m;
}

// inverse of a square matrix of jets by Gauss-Jordan with pivoting on base values
JetTensor invert_matrix(const JetTensor& m);
Jet determinant(const JetTensor& m);

}  // namespace fedq
