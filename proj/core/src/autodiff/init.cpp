#include "cttp/autodiff/init.hpp"

#include <cmath>

#include "cttp/error.hpp"

namespace cttp::ad {

template <class T>
Tensor<T> seeded_init(const Shape& shape, InitScheme scheme, std::size_t fan_in, Rng& rng) {
    Tensor<T> out(shape);
    if (scheme == InitScheme::zeros) return out;
    if (fan_in == 0) throw ShapeError("seeded_init: fan_in must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : out.data()) v = static_cast<T>(rng.uniform(-bound, bound));
    return out;
}

template Tensor<float> seeded_init<float>(const Shape&, InitScheme, std::size_t, Rng&);
template Tensor<double> seeded_init<double>(const Shape&, InitScheme, std::size_t, Rng&);

} // namespace cttp::ad
