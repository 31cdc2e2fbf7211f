#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace skelsign {

// Dense row-major double tensor with a gradient buffer of the same shape.
// Backward passes accumulate into `grad`; call zero_grad() before a fresh
// backward pass.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> values;
    std::vector<double> grad;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape_in);
    Tensor(std::vector<std::size_t> shape_in, std::vector<double> values_in);

    static Tensor zeros(std::vector<std::size_t> shape_in) { return Tensor(std::move(shape_in)); }

    std::size_t numel() const { return values.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const;

    // 2-d access (row, col)
    double& at(std::size_t i, std::size_t j);
    double at(std::size_t i, std::size_t j) const;
    // 3-d access (channel, row, col)
    double& at(std::size_t c, std::size_t i, std::size_t j);
    double at(std::size_t c, std::size_t i, std::size_t j) const;

    void zero_grad();
    bool all_finite() const;  // values and grads
};

std::size_t shape_numel(const std::vector<std::size_t>& shape);
std::string shape_str(const std::vector<std::size_t>& shape);

// Throws std::invalid_argument when `cond` is false.
void require(bool cond, const std::string& message);

}  // namespace skelsign
