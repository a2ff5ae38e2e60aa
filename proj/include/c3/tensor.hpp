#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <memory>
#include <numeric>
#include <sstream>
#include <vector>

#include "c3/common.hpp"

namespace c3 {

using Shape = std::vector<i64>;

inline i64 numel_of(const Shape& s) {
    i64 n = 1;
    for (i64 d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << "]";
    return os.str();
}

// Dense row-major tensor. Storage is shared on copy; use clone() for a deep
// copy. Shape is dynamic, element type is the template parameter (training
// runs in float, numerical tests instantiate double).
template <class T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape) : shape_(std::move(shape)) {
        data_ = std::make_shared<std::vector<T>>(numel_of(shape_), T(0));
    }

    Tensor(Shape shape, T fill) : shape_(std::move(shape)) {
        data_ = std::make_shared<std::vector<T>>(numel_of(shape_), fill);
    }

    static Tensor from(Shape shape, std::vector<T> values) {
        require(numel_of(shape) == (i64)values.size(), "tensor init size mismatch");
        Tensor t;
        t.shape_ = std::move(shape);
        t.data_ = std::make_shared<std::vector<T>>(std::move(values));
        return t;
    }

    bool defined() const { return data_ != nullptr; }
    const Shape& shape() const { return shape_; }
    i64 dim(size_t i) const { return shape_.at(i); }
    size_t ndim() const { return shape_.size(); }
    i64 numel() const { return data_ ? (i64)data_->size() : 0; }

    T* data() { return data_->data(); }
    const T* data() const { return data_->data(); }

    T& operator[](i64 i) { return (*data_)[i]; }
    const T& operator[](i64 i) const { return (*data_)[i]; }

    // 4-d accessor for [N,C,H,W] layouts.
    T& at(i64 n, i64 c, i64 h, i64 w) {
        return (*data_)[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
    }
    const T& at(i64 n, i64 c, i64 h, i64 w) const {
        return (*data_)[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
    }
    T& at(i64 r, i64 c) { return (*data_)[r * shape_[1] + c]; }
    const T& at(i64 r, i64 c) const { return (*data_)[r * shape_[1] + c]; }

    Tensor clone() const {
        Tensor t;
        t.shape_ = shape_;
        t.data_ = std::make_shared<std::vector<T>>(*data_);
        return t;
    }

    Tensor reshaped(Shape s) const {
        require(numel_of(s) == numel(), "reshape element count mismatch " + shape_str(shape_) + " -> " + shape_str(s));
        Tensor t = *this;
        t.shape_ = std::move(s);
        return t;
    }

    void fill(T v) { std::fill(data_->begin(), data_->end(), v); }
    void zero() { fill(T(0)); }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    template <class U>
    Tensor<U> cast() const {
        Tensor<U> t{shape_};
        const T* src = data();
        U* dst = t.data();
        for (i64 i = 0; i < numel(); ++i) dst[i] = static_cast<U>(src[i]);
        return t;
    }

    bool all_finite() const {
        for (i64 i = 0; i < numel(); ++i)
            if (!std::isfinite((*data_)[i])) return false;
        return true;
    }

private:
    Shape shape_;
    std::shared_ptr<std::vector<T>> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace c3
