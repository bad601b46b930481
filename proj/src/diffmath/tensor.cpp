#include "dgp/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dgp {

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        std::ostringstream os;
        os << "tensor data length " << data_.size() << " does not match shape [" << rows_ << ", "
           << cols_ << "]";
        throw ShapeError(os.str());
    }
}

Tensor Tensor::row(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor(1, n, std::move(v));
}

Tensor Tensor::column(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor(n, 1, std::move(v));
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t(n, n);
    for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
}

double Tensor::item() const {
    if (data_.size() != 1) throw ShapeError("item() on non-scalar tensor " + shape_str(*this));
    return data_[0];
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string shape_str(const Tensor& t) {
    std::ostringstream os;
    os << "[" << t.rows() << ", " << t.cols() << "]";
    return os.str();
}

}  // namespace dgp
