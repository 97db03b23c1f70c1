#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace uigen::nk {

/// Dense row-major float64 tensor of rank 1..3. A value type; copying copies the data.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape, double fill = 0.0);
    Tensor(std::vector<int> shape, std::vector<double> data);

    /// 2-D tensor from nested rows, e.g. `Tensor::matrix({{1, 2}, {3, 4}})`.
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
    static Tensor vector(std::initializer_list<double> values);

    const std::vector<int>& shape() const noexcept { return shape_; }
    int rank() const noexcept { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_.at(static_cast<std::size_t>(i)); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    /// Last dimension; rows() folds every leading dimension.
    int cols() const noexcept { return shape_.empty() ? 0 : shape_.back(); }
    int rows() const noexcept { return cols() == 0 ? 0 : static_cast<int>(data_.size()) / cols(); }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    std::vector<double>& storage() noexcept { return data_; }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }
    double& at(int r, int c) noexcept { return data_[static_cast<std::size_t>(r) * cols() + c]; }
    double at(int r, int c) const noexcept { return data_[static_cast<std::size_t>(r) * cols() + c]; }

    bool same_shape(const Tensor& o) const noexcept { return shape_ == o.shape_; }
    bool all_finite() const noexcept;
    void fill(double v) noexcept;

    std::string shape_str() const;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

}  // namespace uigen::nk
