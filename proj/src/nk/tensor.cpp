#include "uigen/nk/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "uigen/core/error.hpp"

namespace uigen::nk {

namespace {

std::size_t volume(const std::vector<int>& shape) {
    if (shape.empty() || shape.size() > 3) throw ShapeError("tensor rank must be 1..3");
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ShapeError("tensor dimensions must be positive");
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape, double fill) : shape_(std::move(shape)) {
    data_.assign(volume(shape_), fill);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (volume(shape_) != data_.size()) throw ShapeError("data length does not match shape " + shape_str());
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const int r = static_cast<int>(rows.size());
    const int c = r == 0 ? 0 : static_cast<int>(rows.begin()->size());
    std::vector<double> d;
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != c) throw ShapeError("ragged matrix literal");
        d.insert(d.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(d));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
    return Tensor({static_cast<int>(values.size())}, std::vector<double>(values));
}

bool Tensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) noexcept { std::fill(data_.begin(), data_.end(), v); }

std::string Tensor::shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape_[i]);
    }
    return s + "]";
}

}  // namespace uigen::nk
