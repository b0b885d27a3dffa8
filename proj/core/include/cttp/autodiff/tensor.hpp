#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cttp::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

template <class T>
struct TensorStorage {
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad; // empty until a gradient is written
    bool requires_grad = false;
};

/// Dense row-major n-d array with shared storage. Copies alias the same
/// buffer, which is what the tape and the parameter lists rely on; use
/// clone() for an independent copy.
template <class T>
class Tensor {
public:
    using value_type = T;

    Tensor();
    explicit Tensor(Shape shape, T fill = T(0));
    Tensor(Shape shape, std::vector<T> values);

    static Tensor scalar(T v) { return Tensor(Shape{1}, std::vector<T>{v}); }

    const Shape& shape() const { return impl_->shape; }
    std::size_t rank() const { return impl_->shape.size(); }
    std::size_t dim(std::size_t axis) const { return impl_->shape.at(axis); }
    std::size_t numel() const { return impl_->value.size(); }

    std::span<T> data() { return impl_->value; }
    std::span<const T> data() const { return impl_->value; }
    T* raw() { return impl_->value.data(); }
    const T* raw() const { return impl_->value.data(); }

    T& operator[](std::size_t i) { return impl_->value[i]; }
    const T& operator[](std::size_t i) const { return impl_->value[i]; }
    T item() const;

    bool requires_grad() const { return impl_->requires_grad; }
    Tensor& set_requires_grad(bool on);

    bool has_grad() const { return !impl_->grad.empty(); }
    std::span<const T> grad() const { return impl_->grad; }
    std::span<T> mutable_grad();
    void zero_grad();

    bool all_finite() const;
    Tensor clone() const;
    Tensor detach() const; // shares nothing, requires_grad = false

    // Identity of the underlying storage (tape bookkeeping and tests).
    const TensorStorage<T>* id() const { return impl_.get(); }
    const std::shared_ptr<TensorStorage<T>>& storage() const { return impl_; }

private:
    std::shared_ptr<TensorStorage<T>> impl_;
};

template <class T>
struct NamedParam {
    std::string name;
    Tensor<T> tensor;
};

template <class T>
using ParamList = std::vector<NamedParam<T>>;

extern template class Tensor<float>;
extern template class Tensor<double>;

/// Element-wise cast, used to run float models at double precision for
/// finite-difference checks.
template <class To, class From>
Tensor<To> tensor_cast(const Tensor<From>& src) {
    std::vector<To> values(src.data().begin(), src.data().end());
    return Tensor<To>(src.shape(), std::move(values));
}

} // namespace cttp::ad
