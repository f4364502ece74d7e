#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace kunn {

using cplx = std::complex<double>;

/// Dense row-major tensor of complex doubles.
class CTensor {
public:
    CTensor() = default;

    explicit CTensor(std::vector<std::size_t> shape, cplx fill = {0.0, 0.0})
        : shape_(std::move(shape)), data_(count(shape_), fill) {}

    CTensor(std::vector<std::size_t> shape, std::vector<cplx> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != count(shape_))
            throw std::invalid_argument("CTensor: data length " + std::to_string(data_.size()) +
                                        " does not match shape product " + std::to_string(count(shape_)));
    }

    static std::size_t count(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) {
            if (d == 0) throw std::invalid_argument("CTensor: zero dimension");
            n *= d;
        }
        return n;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t ndim() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }

    cplx* data() { return data_.data(); }
    const cplx* data() const { return data_.data(); }

    cplx& operator[](std::size_t i) { return data_[i]; }
    const cplx& operator[](std::size_t i) const { return data_[i]; }

    cplx& at2(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    const cplx& at2(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

    cplx& at3(std::size_t c, std::size_t i, std::size_t j) {
        return data_[(c * shape_[1] + i) * shape_[2] + j];
    }
    const cplx& at3(std::size_t c, std::size_t i, std::size_t j) const {
        return data_[(c * shape_[1] + i) * shape_[2] + j];
    }

    bool same_shape(const CTensor& o) const { return shape_ == o.shape_; }

    double norm_sq() const {
        double s = 0.0;
        for (const cplx& z : data_) s += std::norm(z);
        return s;
    }

    double max_abs() const {
        double m = 0.0;
        for (const cplx& z : data_) m = std::max(m, std::abs(z));
        return m;
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<cplx> data_;
};

} // namespace kunn
