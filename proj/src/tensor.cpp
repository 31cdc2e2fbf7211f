#include "skelsign/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace skelsign {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ')';
    return os.str();
}

void require(bool cond, const std::string& message) {
    if (!cond) throw std::invalid_argument(message);
}

Tensor::Tensor(std::vector<std::size_t> shape_in)
    : shape(std::move(shape_in)),
      values(shape_numel(shape), 0.0),
      grad(shape_numel(shape), 0.0) {
    for (std::size_t d : shape) {
        require(d > 0, "tensor dimensions must be positive, got " + shape_str(shape));
    }
}

Tensor::Tensor(std::vector<std::size_t> shape_in, std::vector<double> values_in)
    : Tensor(std::move(shape_in)) {
    require(values_in.size() == values.size(),
            "value count " + std::to_string(values_in.size()) + " does not match shape " +
                shape_str(shape));
    values = std::move(values_in);
}

std::size_t Tensor::dim(std::size_t i) const {
    require(i < shape.size(), "dim index out of range");
    return shape[i];
}

double& Tensor::at(std::size_t i, std::size_t j) {
    return values[i * shape[1] + j];
}

double Tensor::at(std::size_t i, std::size_t j) const {
    return values[i * shape[1] + j];
}

double& Tensor::at(std::size_t c, std::size_t i, std::size_t j) {
    return values[(c * shape[1] + i) * shape[2] + j];
}

double Tensor::at(std::size_t c, std::size_t i, std::size_t j) const {
    return values[(c * shape[1] + i) * shape[2] + j];
}

void Tensor::zero_grad() {
    std::fill(grad.begin(), grad.end(), 0.0);
}

bool Tensor::all_finite() const {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    for (double g : grad) {
        if (!std::isfinite(g)) return false;
    }
    return true;
}

}  // namespace skelsign
