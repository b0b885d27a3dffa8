#include "cttp/autodiff/tensor.hpp"

#include <cmath>
#include <sstream>

#include "cttp/error.hpp"

namespace cttp::ad {

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ", ";
        os << shape[i];
    }
    os << ']';
    return os.str();
}

namespace {
void validate_shape(const Shape& shape) {
    if (shape.empty()) throw ShapeError("tensor: shape must have at least one dimension");
    for (auto d : shape) {
        if (d == 0) throw ShapeError("tensor: zero-sized dimension in " + shape_str(shape));
    }
}
} // namespace

template <class T>
Tensor<T>::Tensor() : Tensor(Shape{1}) {}

template <class T>
Tensor<T>::Tensor(Shape shape, T fill) : impl_(std::make_shared<TensorStorage<T>>()) {
    validate_shape(shape);
    impl_->value.assign(shape_numel(shape), fill);
    impl_->shape = std::move(shape);
}

template <class T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : impl_(std::make_shared<TensorStorage<T>>()) {
    validate_shape(shape);
    if (shape_numel(shape) != values.size()) {
        throw ShapeError("tensor: shape " + shape_str(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
    }
    impl_->shape = std::move(shape);
    impl_->value = std::move(values);
}

template <class T>
T Tensor<T>::item() const {
    if (numel() != 1) throw ShapeError("item: tensor of shape " + shape_str(shape()) + " is not a scalar");
    return impl_->value[0];
}

template <class T>
Tensor<T>& Tensor<T>::set_requires_grad(bool on) {
    impl_->requires_grad = on;
    return *this;
}

template <class T>
std::span<T> Tensor<T>::mutable_grad() {
    if (impl_->grad.empty()) impl_->grad.assign(numel(), T(0));
    return impl_->grad;
}

template <class T>
void Tensor<T>::zero_grad() {
    impl_->grad.clear();
}

template <class T>
bool Tensor<T>::all_finite() const {
    for (T v : impl_->value) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

template <class T>
Tensor<T> Tensor<T>::clone() const {
    Tensor out(impl_->shape, impl_->value);
    out.impl_->requires_grad = impl_->requires_grad;
    return out;
}

template <class T>
Tensor<T> Tensor<T>::detach() const {
    return Tensor(impl_->shape, impl_->value);
}

template class Tensor<float>;
template class Tensor<double>;

} // namespace cttp::ad
